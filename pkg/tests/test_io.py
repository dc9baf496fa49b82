import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from fnl import io
from fnl.errors import ValidationError
from fnl.mub import mubs, qutrit_five_set
from fnl.nonlocality import peres_mermin_behavior, pr_box
from fnl.quantum import BehaviorTable, BipartitePureState

from conftest import random_unitary


@pytest.mark.parametrize("b", [pr_box(), peres_mermin_behavior()[0]], ids=["pr", "peres-mermin"])
def test_exact_behavior_round_trip_is_bit_exact(b):
    doc = json.loads(io.dumps(io.behavior_to_json(b)))
    back = io.behavior_from_json(doc)
    assert back.exact and back.dims == b.dims
    assert all(type(v) is Fraction for v in back.probs.ravel())
    assert (back.probs == b.probs).all()


def test_float_behavior_round_trip():
    b = BehaviorTable(pr_box().as_float())
    back = io.behavior_from_json(json.loads(io.dumps(io.behavior_to_json(b))))
    assert not back.exact
    np.testing.assert_array_equal(back.probs, b.probs)


@given(p=st.floats(0.01, 0.99), seed=st.integers(0, 10**6))
def test_state_round_trip(p, seed):
    rng = np.random.default_rng(seed)
    s = BipartitePureState.from_schmidt([p, 1 - p], random_unitary(rng, 2), random_unitary(rng, 2))
    back = io.state_from_json(json.loads(io.dumps(io.state_to_json(s))))
    np.testing.assert_allclose(back.vector(), s.vector(), atol=1e-14)


def test_state_from_vector():
    v = np.zeros(4, dtype=complex)
    v[0] = v[3] = 2**-0.5
    s = io.state_from_json({"vector": io.encode_vector(v), "dim_a": 2, "dim_b": 2})
    np.testing.assert_allclose(s.coeffs, [0.5, 0.5], atol=1e-12)


@pytest.mark.parametrize("fam", [mubs(3), mubs(4), qutrit_five_set()], ids=["d3", "d4", "five"])
def test_basis_family_round_trip(fam):
    back = io.basis_family_from_json(json.loads(io.dumps(io.basis_family_to_json(fam))))
    assert back.name == fam.name
    for u, v in zip(fam.bases, back.bases):
        np.testing.assert_array_equal(u, v)


def test_states_round_trip():
    vs = [np.array([1, 0j]), np.array([0.6, 0.8j])]
    back = io.states_from_json(io.states_to_json(vs))
    for u, v in zip(vs, back):
        np.testing.assert_array_equal(u, v)


@pytest.mark.parametrize("doc, match", [
    ({"dims": {"n": 2, "np": 2, "ma": 2, "mb": 2}}, "probs"),
    ({"dims": {"n": 1, "np": 1, "ma": 2, "mb": 1}, "probs": [[[[0.5], [0.25]]]]}, None),
    ({"dims": {"n": 1, "np": 1, "ma": 2, "mb": 2}, "probs": [[[[0.5, 0.5]]]]}, "entries"),
    ({"dims": {"n": 1, "np": 1, "ma": 1, "mb": 1}, "probs": [[[["x"]]]]}, None),
])
def test_behavior_rejects_malformed(doc, match):
    with pytest.raises(ValidationError, match=match):
        b = io.behavior_from_json(doc)
        b.validate()


@pytest.mark.parametrize("doc", [
    {"schmidt": "half"},
    {"vector": [[1, 0], [0]]},
    {},
])
def test_state_schema_errors(doc):
    with pytest.raises(ValidationError):
        io.state_from_json(doc)


def test_complex_decoding():
    assert io.decode_complex([1, -2]) == 1 - 2j
    assert io.decode_complex(3) == 3
    with pytest.raises(ValidationError):
        io.decode_complex([1, 2, 3])


def test_rational_decoding():
    assert io.decode_rational("3/8") == Fraction(3, 8)
    with pytest.raises(ValidationError):
        io.decode_rational(0.5)
    with pytest.raises(ValidationError):
        io.decode_rational("1/0")


def test_load_json_errors(tmp_path):
    with pytest.raises(ValidationError, match="missing.json"):
        io.load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValidationError, match="invalid JSON"):
        io.load_json(bad)


def test_every_schema_loads_and_is_valid():
    import jsonschema

    for name in io.SCHEMA_NAMES:
        schema = io.load_schema(name)
        jsonschema.Draft202012Validator.check_schema(schema)
        assert schema["$id"] == f"urn:fnl:{name}"


def test_dumps_rejects_nan():
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})
