"""Dual-confidence vector, conflict differential, decontamination."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mesa.confidence import (
    ConfidenceVector,
    DecontaminationConfig,
    conflict_differential,
    decontaminate,
)

_unit = st.floats(min_value=0.0, max_value=1.0)


# ---------------------------------------------------------------------------
# ConfidenceVector and conflict differential


def test_vector_validates_ranges():
    with pytest.raises(ValueError):
        ConfidenceVector(p_self=1.2, source_confidences={})
    with pytest.raises(ValueError):
        ConfidenceVector(p_self=0.5, source_confidences={"a": -0.1})


def test_conflict_differential_empty_map():
    cv = ConfidenceVector(p_self=0.9, source_confidences={})
    assert conflict_differential(cv) == 0.9


def test_conflict_differential_symmetry_zero():
    cv = ConfidenceVector(p_self=0.5, source_confidences={"a": 0.5})
    assert conflict_differential(cv) == 0.0


def test_conflict_differential_max_over_sources():
    cv = ConfidenceVector(p_self=0.3, source_confidences={"a": 0.2, "b": 0.8})
    assert conflict_differential(cv) == pytest.approx(-0.5)


@given(_unit, st.dictionaries(st.text(min_size=1, max_size=4), _unit, max_size=5))
def test_conflict_differential_arithmetic_oracle(p_self, sources):
    cv = ConfidenceVector(p_self=p_self, source_confidences=sources)
    expected = p_self - (max(sources.values()) if sources else 0.0)
    assert conflict_differential(cv) == pytest.approx(expected)


@given(_unit, _unit, _unit)
def test_conflict_differential_monotone_in_p_self(low, high, src):
    lo, hi = sorted((low, high))
    d_lo = conflict_differential(ConfidenceVector(lo, {"a": src}))
    d_hi = conflict_differential(ConfidenceVector(hi, {"a": src}))
    assert d_lo <= d_hi


@given(_unit, _unit, _unit)
def test_conflict_differential_antitone_in_sources(p_self, low, high):
    lo, hi = sorted((low, high))
    d_lo = conflict_differential(ConfidenceVector(p_self, {"a": lo}))
    d_hi = conflict_differential(ConfidenceVector(p_self, {"a": hi}))
    assert d_hi <= d_lo


# ---------------------------------------------------------------------------
# Decontamination


def test_decontaminate_clamps_inflation():
    assert decontaminate(0.4, 0.9, 0.5, False) == 0.4


def test_decontaminate_trust_override():
    assert decontaminate(0.4, 0.9, 0.95, False) == 0.9


def test_decontaminate_verified_accepts_post():
    assert decontaminate(0.4, 0.9, 0.0, True) == 0.9


def test_decontaminate_decrease_always_accepted():
    assert decontaminate(0.4, 0.2, 0.5, False) == 0.2
    assert decontaminate(0.4, 0.2, 0.99, False) == 0.2
    assert decontaminate(0.4, 0.2, 0.0, True) == 0.2


def test_threshold_boundary_is_inclusive():
    cfg = DecontaminationConfig(trust_override_threshold=0.9)
    assert decontaminate(0.1, 0.8, 0.9, False, cfg) == 0.8
    assert decontaminate(0.1, 0.8, 0.8999, False, cfg) == 0.1


def test_config_validates():
    with pytest.raises(ValueError):
        DecontaminationConfig(trust_override_threshold=1.5)


@settings(max_examples=500)
@given(pre=_unit, post=_unit, trust=_unit, verified=st.booleans())
def test_monotone_safety_and_idempotence(pre, post, trust, verified):
    cfg = DecontaminationConfig()
    once = decontaminate(pre, post, trust, verified, cfg)
    if not verified and trust < cfg.trust_override_threshold:
        assert once <= pre
    assert decontaminate(pre, once, trust, verified, cfg) == once
    assert 0.0 <= once <= 1.0
