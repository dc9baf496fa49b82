"""``fnl`` command line: one JSON document per invocation on standard output.

Exit codes: 0 verdict computed (negative verdicts included), 2 invalid input,
3 resource cap hit, 4 solver undecided.
"""

from __future__ import annotations

import argparse
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, antidist, bounds, io, mub, nonlocality
from .certify import Verdict, certify_full_nonlocality
from .config import Config, from_env
from .errors import FnlError, ResourceError, SolverError, UnsupportedError, ValidationError
from .numkit import fraction_str

EXIT_OK, EXIT_INVALID, EXIT_RESOURCE, EXIT_UNDECIDED = 0, 2, 3, 4


class _Undecided(Exception):
    """Carries a finished document whose verdict is undecided."""

    def __init__(self, doc):
        super().__init__("undecided")
        self.doc = doc


def _num(v):
    return fraction_str(v) if isinstance(v, Fraction) else float(v)


def _strategy(s: nonlocality.DeterministicStrategy) -> dict:
    return {"alpha": list(s.alpha), "beta": list(s.beta)}


def _config(args) -> Config:
    cfg = from_env()
    if getattr(args, "tol", None) is not None:
        cfg = cfg.replace(sdp_tol=args.tol)
    return cfg


# commands ----------------------------------------------------------------

def cmd_antidist(args, cfg):
    states = io.states_from_json(io.load_json(args.states))
    doc = {"n": len(states), "d": int(states[0].size), "gram": None, "sdp": None}
    verdict = None
    if args.method in ("frobenius", "both"):
        fv = antidist.frobenius_criterion(antidist.gram(states, cfg), cfg)
        doc["gram"] = {
            "frobenius_norm": fv.norm, "threshold": fv.threshold, "label": fv.label,
            "max_overlap": fv.max_overlap, "pairwise_threshold": fv.pairwise_threshold,
        }
        verdict = "antidistinguishable" if fv.sufficient else "inconclusive"
    if args.method in ("sdp", "both"):
        r = antidist.solve_exclusion_sdp(states, cfg=cfg, seed=args.seed)
        doc["sdp"] = {
            "status": r.status.value, "primal_value": r.primal_value, "dual_value": r.dual_value,
            "gap": r.gap, "iterations": r.iterations, "per_state": list(r.per_state),
            "measurement": [io.encode_matrix(e) for e in r.measurement.elements],
            "measurement_verified": antidist.is_antidistinguishing(r.measurement, states, cfg.sdp_tol, cfg),
            "dual_witness": io.encode_matrix(r.dual_witness),
            "witness_verified": antidist.verify_dual_witness(r.dual_witness, states, cfg),
        }
        if verdict != "antidistinguishable" or r.status is not antidist.Status.UNDECIDED:
            verdict = r.status.value
    doc["verdict"] = verdict
    if verdict == "undecided":
        raise _Undecided(doc)
    return doc


def _alice_family(args, state):
    if args.bases:
        doc = io.load_json(args.bases)
        return io.basis_family_from_json(doc.get("family", doc) if isinstance(doc, dict) else doc)
    if args.qutrit_five:
        return mub.qutrit_five_set()
    fam = mub.mubs(state.dim_a)
    return fam.take(args.mubs) if args.mubs else fam


def cmd_certify(args, cfg):
    state = io.state_from_json(io.load_json(args.state))
    fam = _alice_family(args, state)
    cert = certify_full_nonlocality(state, fam, method=args.method, tol=args.tol,
                                    measurements=args.measurements, jobs=args.jobs, seed=args.seed, cfg=cfg)
    evidence = []
    for e in cert.evidence:
        item = {
            "alpha": list(e.alpha), "method": e.method, "passed": e.passed, "gram_norm": e.gram_norm,
            "bob_setting": e.bob_setting, "zero_cells": [list(c) for c in e.zero_cells], "sdp": None,
        }
        if e.sdp is not None:
            item["sdp"] = {"status": e.sdp.status.value, "primal_value": e.sdp.primal_value,
                           "dual_value": e.sdp.dual_value}
        evidence.append(item)
    doc = {
        "verdict": cert.verdict.value, "d": cert.d, "spectrum": list(cert.spectrum), "n": cert.n,
        "m_a": cert.m_a, "method": cert.method, "bases": fam.name, "alpha_sets": len(cert.evidence),
        "frobenius_threshold": cert.frobenius_threshold,
        "failures": [{"alpha": list(a), "reason": r} for a, r in cert.failures],
        "excluded_outcomes": [list(o) for o in cert.excluded_outcomes],
        "bob_settings": cert.bob_setting_count,
        "bob_measurements": [[io.encode_matrix(m) for m in p.elements] for p in cert.bob_measurements],
        "evidence": evidence,
    }
    if cert.verdict is Verdict.UNDECIDED:
        raise _Undecided(doc)
    return doc


def _behavior(args):
    return io.behavior_from_json(io.load_json(args.behavior))


def cmd_local_content(args, cfg):
    b = _behavior(args)
    r = nonlocality.local_content_lp(b, exact=True if args.exact else None, cfg=cfg)
    return {
        "lc": _num(r.lc), "exact": r.exact, "certified": r.certified, "gap": _num(r.gap),
        "pivots": r.pivots, "fully_nonlocal": bool(r.lc == 0),
        "weights": [dict(_strategy(s), weight=_num(w)) for s, w in sorted(r.weights.items())],
        "residual": io.behavior_to_json(r.residual_behavior) if r.residual_behavior is not None else None,
    }


def _zero_doc(z: nonlocality.ZeroPatternReport, full: bool = True) -> dict:
    doc = {
        "fully_nonlocal": z.fully_nonlocal, "strategies": len(z.witnesses),
        "excluded": z.excluded_count, "zeros": sorted(list(c) for c in z.zeros),
    }
    if full:
        doc["witnesses"] = [dict(_strategy(s), cell=list(c) if c else None) for s, c in sorted(z.witnesses.items())]
    return doc


def cmd_zero_pattern(args, cfg):
    return _zero_doc(nonlocality.zero_pattern_check(_behavior(args), args.zero_tol, cfg))


def cmd_bell_functional(args, cfg):
    b = _behavior(args)
    f = nonlocality.bell_functional_from_zeros(b, args.zero_tol, cfg)
    return {
        "coeffs": f.coeffs.tolist(), "w_local": f.w_local, "w_ns": f.w_ns,
        "best_strategy": _strategy(f.best_strategy), "value_on_input": f.value(b.as_float()),
    }


def cmd_mub(args, cfg):
    if args.mub_command == "gen":
        fam = mub.qutrit_five_set() if args.qutrit_five else mub.mubs(args.dim, cfg)
        if args.count:
            fam = fam.take(args.count)
    else:
        doc = io.load_json(args.file)
        # accept the output of ``mub gen`` as well as a bare family
        fam = io.basis_family_from_json(doc.get("family", doc) if isinstance(doc, dict) else doc)
    rep = mub.verify_mub(fam, cfg.mub_tol)
    return {
        "action": args.mub_command, "family": io.basis_family_to_json(fam),
        "report": {"max_overlap_deviation": rep.max_overlap_deviation, "max_abs_deviation": rep.max_abs_deviation,
                   "max_unitarity_residual": rep.max_unitarity_residual, "is_mub": rep.is_mub},
    }


def _spectrum(args):
    if getattr(args, "p", None) is not None:
        return bounds.qubit_spectrum(args.p)
    if not args.spectrum:
        raise ValidationError("give --spectrum (or --p)")
    return bounds.spectrum(bounds.parse_spectrum(args.spectrum))


def cmd_bounds(args, cfg):
    lam = _spectrum(args)
    doc = bounds.theorem3_condition(lam, args.n, cfg=cfg).as_dict()
    for k in ("rhs", "lhs"):
        for c in doc["conditions"].values():
            if c[k] is not None and not np.isfinite(c[k]):
                c[k] = None
    doc["qutrit_condition"] = bounds.qutrit_condition(lam, cfg) if lam.size == 3 else None
    return doc


def cmd_activate(args, cfg):
    lam = _spectrum(args)
    a = bounds.activation_copies(lam, args.n, cfg)
    return {"spectrum": [float(v) for v in lam], "n": args.n, "c": a.c, "k": a.k, "threshold": a.threshold}


def cmd_lc_bound(args, cfg):
    lam = _spectrum(args)
    val = bounds.lc_lower_bound(lam, args.mode, d=args.dim, m_a=args.ma, m_b=args.mb)
    return {"spectrum": [float(v) for v in lam], "mode": args.mode, "bound": val, "nonzero": val > 0}


def cmd_demo(args, cfg):
    if args.which == "pr":
        b = nonlocality.pr_box()
        extra = {}
    else:
        b, *_ = nonlocality.peres_mermin_behavior(cfg=cfg)
        win, per_pair = nonlocality.magic_square_win_probability(b)
        extra = {
            "win_probability": fraction_str(win),
            "labels": {"a": list(nonlocality.MAGIC_A_LABELS), "b": list(nonlocality.MAGIC_B_LABELS)},
        }
    r = nonlocality.local_content_lp(b, cfg=cfg)
    z = nonlocality.zero_pattern_check(b, cfg=cfg)
    f = nonlocality.bell_functional_from_zeros(b, cfg=cfg)
    return {
        "demo": args.which, "behavior": io.behavior_to_json(b), "lc": _num(r.lc), "certified": r.certified,
        "fully_nonlocal": z.fully_nonlocal, "strategies": len(z.witnesses), "excluded": z.excluded_count,
        "w_local": f.w_local, "w_ns": f.w_ns, **extra,
    }


# parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for per-alpha work")
    common.add_argument("--tol", type=float, default=None, help="SDP decision tolerance")

    p = argparse.ArgumentParser(prog="fnl", description="Full-nonlocality certification and local-content tools.")
    p.add_argument("--version", action="version", version=f"fnl {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("antidist", parents=[common], help="antidistinguishability of a set of states")
    s.add_argument("--states", required=True)
    s.add_argument("--method", choices=("frobenius", "sdp", "both"), default="both")
    s.set_defaults(func=cmd_antidist)

    s = sub.add_parser("certify", parents=[common], help="certify full nonlocality of a pure state")
    s.add_argument("--state", required=True)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--bases", help="basis-family JSON for Alice")
    g.add_argument("--mubs", type=int, help="use the first N built-in MUBs")
    g.add_argument("--qutrit-five", action="store_true", help="use the five-basis qutrit family")
    s.add_argument("--method", choices=("frobenius", "sdp", "auto"), default="auto")
    s.add_argument("--measurements", action="store_true", help="extract Bob's exclusion measurements")
    s.set_defaults(func=cmd_certify)

    for name, func, hlp in (("local-content", cmd_local_content, "local content by linear programming"),
                            ("zero-pattern", cmd_zero_pattern, "does every deterministic strategy hit a zero?"),
                            ("bell-functional", cmd_bell_functional, "Bell functional from the zero pattern")):
        s = sub.add_parser(name, parents=[common], help=hlp)
        s.add_argument("--behavior", required=True)
        if name == "local-content":
            s.add_argument("--exact", action="store_true", help="snap to rationals and solve exactly")
        else:
            s.add_argument("--zero-tol", type=float, default=Config().zero_tol)
        s.set_defaults(func=func)

    s = sub.add_parser("mub", help="generate or verify mutually unbiased bases")
    msub = s.add_subparsers(dest="mub_command", required=True)
    gen = msub.add_parser("gen", parents=[common])
    gen.add_argument("--dim", type=int, default=None)
    gen.add_argument("--count", type=int, default=None)
    gen.add_argument("--qutrit-five", action="store_true")
    ver = msub.add_parser("verify", parents=[common])
    ver.add_argument("--file", required=True)
    s.set_defaults(func=cmd_mub)

    s = sub.add_parser("bounds", parents=[common], help="closed-form spectral conditions")
    s.add_argument("--spectrum", required=True, help='e.g. "0.51,0.07x7"')
    s.add_argument("--n", type=int, required=True, help="number of MUBs")
    s.set_defaults(func=cmd_bounds)

    s = sub.add_parser("activate", parents=[common], help="copies needed for full nonlocality")
    g = s.add_mutually_exclusive_group(required=True)
    g.add_argument("--p", type=float, help="qubit state sqrt(p)|00> + sqrt(1-p)|11>")
    g.add_argument("--spectrum")
    s.add_argument("--n", type=int, default=3)
    s.set_defaults(func=cmd_activate)

    s = sub.add_parser("lc-bound", parents=[common], help="analytic local-content lower bound")
    s.add_argument("--spectrum", required=True)
    s.add_argument("--mode", choices=("rank1", "projective", "povm"), default="projective")
    s.add_argument("--dim", type=int, default=None)
    s.add_argument("--ma", type=int, default=None)
    s.add_argument("--mb", type=int, default=None)
    s.set_defaults(func=cmd_lc_bound)

    s = sub.add_parser("demo", parents=[common], help="reference behaviors")
    s.add_argument("which", choices=("pr", "peres-mermin"))
    s.set_defaults(func=cmd_demo)
    return p


SCHEMA_OF = {
    "antidist": "antidist", "certify": "certify", "local-content": "local_content",
    "zero-pattern": "zero_pattern", "bell-functional": "bell_functional", "mub": "mub",
    "bounds": "bounds", "activate": "activate", "lc-bound": "lc_bound",
}


def schema_for(command: str, argv_doc: dict) -> str:
    if command == "demo":
        return "demo_pr" if argv_doc.get("demo") == "pr" else "demo_peres_mermin"
    return SCHEMA_OF[command]


def _manifest(argv, args, cfg, t0) -> dict:
    return {
        "argv": list(argv), "seed": getattr(args, "seed", 0), "version": __version__,
        "config": cfg.as_dict(), "wall_time_s": time.perf_counter() - t0,
    }


def main(argv=None, out=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    out = sys.stdout if out is None else out
    t0 = time.perf_counter()
    args = build_parser().parse_args(argv)
    if args.command == "mub" and args.mub_command == "gen" and args.dim is None and not args.qutrit_five:
        print("fnl mub gen: give --dim or --qutrit-five", file=sys.stderr)
        return EXIT_INVALID
    cfg = Config()
    code = EXIT_OK
    try:
        cfg = _config(args)
        doc = args.func(args, cfg)
    except _Undecided as u:
        doc, code = u.doc, EXIT_UNDECIDED
    except (ValidationError, UnsupportedError, ResourceError, SolverError, FnlError) as exc:
        code = {ResourceError: EXIT_RESOURCE, SolverError: EXIT_UNDECIDED}.get(type(exc), EXIT_INVALID)
        print(f"fnl {args.command}: {exc}", file=sys.stderr)
        doc = {"command": args.command, "error": {"type": type(exc).__name__, "message": str(exc)},
               "manifest": _manifest(argv, args, cfg, t0)}
        out.write(io.dumps(doc) + "\n")
        return code
    doc = {"command": args.command, **doc, "manifest": _manifest(argv, args, cfg, t0)}
    out.write(io.dumps(doc) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
