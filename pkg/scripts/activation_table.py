"""Copies needed before the max-overlap test certifies ``sqrt p|00> + sqrt(1-p)|11>``."""

import argparse

import numpy as np

from fnl import bounds


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[3, 5, 10])
    ap.add_argument("--p", type=float, nargs="+", default=list(np.round(np.arange(0.5, 1.0, 0.05), 2)))
    args = ap.parse_args()

    print("p     " + "".join(f"n={n:<5d}" for n in args.n))
    for p in args.p:
        ks = [bounds.activation_copies(bounds.qubit_spectrum(p), n).k for n in args.n]
        print(f"{p:<6.2f}" + "".join(f"{k:<7d}" for k in ks))


if __name__ == "__main__":
    main()
