"""Locate the two-copy qubit window edge by bisection and certify points on either side."""

import numpy as np

from fnl import bounds
from fnl.certify import certify_full_nonlocality
from fnl.mub import mubs
from fnl.quantum import BipartitePureState, tensor_copies


def passes(p):
    return bounds.theorem3_condition(bounds.copies_spectrum([p, 1 - p], 2), 5).max_overlap


def main():
    lo, hi = 0.5, 0.6
    for _ in range(60):
        mid = (lo + hi) / 2
        lo, hi = (mid, hi) if passes(mid) else (lo, mid)
    print(f"bisection edge   {lo:.10f}")
    print(f"closed-form edge {bounds.two_copy_window_edge():.10f}")
    for p in np.arange(0.50, 0.62, 0.01):
        two = tensor_copies(BipartitePureState.from_schmidt([p, 1 - p]), 2)
        cert = certify_full_nonlocality(two, mubs(4), "frobenius")
        print(f"p={p:.2f}  bound {'pass' if passes(p) else 'fail'}  direct {cert.verdict.value}")


if __name__ == "__main__":
    main()
