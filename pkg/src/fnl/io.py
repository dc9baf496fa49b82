"""JSON encoding of states, bases, behaviors and results; schema validation.

Complex numbers are ``[re, im]`` pairs, matrices are lists of rows, and rationals
are ``"p/q"`` strings so exact tables round-trip bit for bit.
"""

from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from importlib import resources

import numpy as np

from .errors import ValidationError
from .mub import BasisFamily
from .numkit import fraction_str
from .quantum import BehaviorTable, BipartitePureState

SCHEMA_NAMES = (
    "manifest", "behavior", "state", "basis_family", "states",
    "antidist", "certify", "local_content", "zero_pattern", "bell_functional",
    "mub", "bounds", "activate", "lc_bound", "demo_pr", "demo_peres_mermin", "error",
)


def encode_complex(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def decode_complex(v) -> complex:
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, (list, tuple)) and len(v) == 2:
        return complex(float(v[0]), float(v[1]))
    raise ValidationError(f"complex entries must be [re, im] pairs, got {v!r}")


def encode_vector(v) -> list:
    return [encode_complex(z) for z in np.asarray(v).ravel()]


def decode_vector(rows) -> np.ndarray:
    return np.array([decode_complex(z) for z in rows], dtype=complex)


def encode_matrix(m) -> list:
    return [[encode_complex(z) for z in row] for row in np.asarray(m)]


def decode_matrix(rows) -> np.ndarray:
    try:
        return np.array([[decode_complex(z) for z in row] for row in rows], dtype=complex)
    except TypeError as exc:
        raise ValidationError(f"malformed matrix: {exc}") from None


def encode_number(v):
    if isinstance(v, Fraction):
        return fraction_str(v)
    return float(v)


def decode_rational(v) -> Fraction:
    if isinstance(v, str):
        try:
            return Fraction(v)
        except (ValueError, ZeroDivisionError):
            raise ValidationError(f"not a rational: {v!r}") from None
    if isinstance(v, int):
        return Fraction(v)
    raise ValidationError(f"exact tables need 'p/q' strings or integers, got {v!r}")


# behaviors ---------------------------------------------------------------

def behavior_to_json(b: BehaviorTable) -> dict:
    n, n_b, m_a, m_b = b.dims
    enc = fraction_str if b.exact else float
    probs = [[[[enc(b.probs[x, y, a, c]) for c in range(m_b)] for a in range(m_a)]
              for y in range(n_b)] for x in range(n)]
    return {"dims": {"n": n, "np": n_b, "ma": m_a, "mb": m_b}, "probs": probs, "exact": b.exact}


def behavior_from_json(doc: dict) -> BehaviorTable:
    validate(doc, "behavior")
    dims = doc["dims"]
    shape = (dims["n"], dims["np"], dims["ma"], dims["mb"])
    exact = bool(doc.get("exact", False))
    raw = doc["probs"]
    flat = list(_flatten(raw, 4))
    if len(flat) != int(np.prod(shape)):
        raise ValidationError(f"probs has {len(flat)} entries, dims require {int(np.prod(shape))}")
    try:
        if np.array(raw, dtype=object).shape != shape:
            raise ValidationError(f"probs nesting does not match dims {shape}")
    except ValueError:
        raise ValidationError("probs is ragged") from None
    if exact:
        arr = np.empty(len(flat), dtype=object)
        arr[:] = [decode_rational(v) for v in flat]
        return BehaviorTable(arr.reshape(shape), exact=True)
    return BehaviorTable(np.array([float(Fraction(v)) if isinstance(v, str) else float(v) for v in flat]).reshape(shape))


def _flatten(x, depth):
    if depth == 0:
        yield x
        return
    if not isinstance(x, list):
        raise ValidationError("probs must be nested four levels deep")
    for item in x:
        yield from _flatten(item, depth - 1)


# states and bases --------------------------------------------------------

def state_to_json(s: BipartitePureState) -> dict:
    return {
        "schmidt": [float(c) for c in s.coeffs],
        "basis_a": encode_matrix(s.basis_a),
        "basis_b": encode_matrix(s.basis_b),
    }


def state_from_json(doc: dict) -> BipartitePureState:
    """Accepts ``{"schmidt": [...], "basis_a"?, "basis_b"?}`` or ``{"vector": [...], "dim_a", "dim_b"}``."""
    validate(doc, "state")
    if "schmidt" in doc:
        ua = decode_matrix(doc["basis_a"]) if "basis_a" in doc else None
        ub = decode_matrix(doc["basis_b"]) if "basis_b" in doc else None
        return BipartitePureState.from_schmidt(doc["schmidt"], ua, ub)
    return BipartitePureState.from_vector(decode_vector(doc["vector"]), doc.get("dim_a"), doc.get("dim_b"))


def basis_family_to_json(f: BasisFamily) -> dict:
    return {"name": f.name, "dim": f.dim, "bases": [encode_matrix(u) for u in f.bases]}


def basis_family_from_json(doc: dict) -> BasisFamily:
    validate(doc, "basis_family")
    bases = tuple(decode_matrix(u) for u in doc["bases"])
    fam = BasisFamily(bases, doc.get("name", ""))
    if "dim" in doc and doc["dim"] != fam.dim:
        raise ValidationError(f"declared dim {doc['dim']} but bases are {fam.dim}-dimensional")
    return fam


def states_to_json(states) -> dict:
    return {"states": [encode_vector(v) for v in states]}


def states_from_json(doc: dict) -> list:
    validate(doc, "states")
    return [decode_vector(v) for v in doc["states"]]


def load_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from None
    except OSError as exc:
        raise ValidationError(f"{path}: {exc.strerror}") from None


def dumps(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True, allow_nan=False)


# schemas -----------------------------------------------------------------

@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    text = resources.files("fnl.schemas").joinpath(f"{name}.schema.json").read_text()
    return json.loads(text)


@lru_cache(maxsize=None)
def _registry():
    from referencing import Registry, Resource

    return Registry().with_resources(
        (load_schema(n)["$id"], Resource.from_contents(load_schema(n))) for n in SCHEMA_NAMES
    )


def validate(doc, name: str) -> None:
    """Raise :class:`ValidationError` when ``doc`` does not match schema ``name``."""
    import jsonschema

    validator = jsonschema.Draft202012Validator(load_schema(name), registry=_registry())
    err = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if err is not None:
        where = "/".join(str(p) for p in err.absolute_path) or "<root>"
        raise ValidationError(f"{name} document invalid at {where}: {err.message}")
