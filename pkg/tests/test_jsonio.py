"""Tests for the canonical JSON encoding of reports."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from channel_lab.models.reports import PropertyCheck
from channel_lab.utils.jsonio import canonical_json, to_jsonable


def test_keys_are_sorted_and_floats_carry_seventeen_digits() -> None:
    """0.1 is written with its full double expansion next to a sorted key."""

    assert canonical_json({"b": 0.1, "a": 1}) == '{\n  "a": 1,\n  "b": 0.10000000000000001\n}'


def test_integral_floats_stay_floats() -> None:
    """Whole-number floats keep a decimal point, large ones use an exponent."""

    assert canonical_json([2.0, -0.0, 1e22]) == "[\n  2.0,\n  -0.0,\n  1e+22\n]"
    assert json.loads(canonical_json({"x": 2.0}))["x"] == 2.0


def test_empty_containers_and_plain_values() -> None:
    """Empty containers, null, booleans and unicode strings use plain JSON spellings."""

    assert canonical_json({"a": {}, "b": [], "c": None, "d": True, "e": "ψ"}) == (
        '{\n  "a": {},\n  "b": [],\n  "c": null,\n  "d": true,\n  "e": "ψ"\n}'
    )


@pytest.mark.parametrize("value", [float("nan"), float("inf"), -math.inf, np.float64("nan")])
def test_non_finite_numbers_are_rejected(value: float) -> None:
    """NaN and infinities have no JSON spelling."""

    with pytest.raises(ValueError, match="non-finite"):
        canonical_json({"value": value})


def test_non_finite_array_entries_are_rejected() -> None:
    """Array and complex entries are checked too."""

    with pytest.raises(ValueError, match="non-finite"):
        canonical_json(np.array([1.0, np.inf]))
    with pytest.raises(ValueError, match="non-finite"):
        canonical_json(complex(0.0, math.nan))


def test_arrays_and_models_flatten() -> None:
    """Complex arrays split into real and imaginary parts; models dump to dicts."""

    record = to_jsonable(np.array([[1.0, 1j]]))
    assert record == {"shape": [1, 2], "real": [1.0, 0.0], "imag": [0.0, 1.0]}
    check = PropertyCheck(name="p", passed=True, worst=0.0, allowed=1e-10, samples=3)
    assert to_jsonable(check)["samples"] == 3


@settings(max_examples=200, deadline=None)
@given(st.floats(allow_nan=False, allow_infinity=False))
def test_finite_floats_read_back_exactly(value: float) -> None:
    """Seventeen digits read back to the same double."""

    assert json.loads(canonical_json([value]))[0] == value
