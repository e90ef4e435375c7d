import math

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from streamlab import ValidationError
from streamlab.analytic import (ModelInputs, check_interruption, dimension_link,
                                full_download_length_threshold, interrupts_before_complete,
                                mean_aggregate_rate, mean_wasted_rate, unused_bytes,
                                variance_aggregate_rate)
from streamlab.domain import Constant, DiscreteWeighted, Uniform

# hand evaluations of the closed forms
MEAN = 0.5 * 125_000 * 120                 # 7.5e6
VAR = MEAN * 625_000                       # 4.6875e12
LINK_ALPHA2 = MEAN + 2 * math.sqrt(VAR)    # 1.1830127e7


def test_mean_examples():
    assert mean_aggregate_rate(0, 125_000, 120) == 0
    assert mean_aggregate_rate(0.5, 125_000, 120) == 7_500_000


def test_variance_examples():
    assert variance_aggregate_rate(0, 125_000, 120, 625_000) == 0
    assert variance_aggregate_rate(0.5, 125_000, 120, 625_000) == pytest.approx(4.6875e12)
    assert variance_aggregate_rate(0.5, 250_000, 120, 625_000) == 2 * variance_aggregate_rate(
        0.5, 125_000, 120, 625_000)


def test_dimension_examples():
    assert dimension_link(0, 125_000, 120, 625_000, 3) == 0
    assert dimension_link(0.5, 125_000, 120, 625_000, 2) == pytest.approx(1.1830e7, rel=1e-4)
    assert dimension_link(0.5, 125_000, 120, 625_000, 2) == pytest.approx(LINK_ALPHA2)
    d = dimension_link(0.5, 125_000, 120, 625_000, 2) - dimension_link(0.5, 125_000, 120, 625_000, 1)
    assert d == pytest.approx(math.sqrt(VAR))
    with pytest.raises(ValidationError):
        dimension_link(0.5, 125_000, 120, 625_000, 0.5)


def test_non_finite_inputs_rejected():
    with pytest.raises(ValidationError):
        mean_aggregate_rate(math.inf, 1, 1)
    with pytest.raises(ValidationError):
        variance_aggregate_rate(1, 1, 1, math.nan)


def test_interruption_examples():
    assert not interrupts_before_complete(125_000, 50, 5_000_000, 156_250, 10)
    assert interrupts_before_complete(125_000, 300, 5_000_000, 156_250, 60)
    for tau in (0, 10, 99.9):
        assert not interrupts_before_complete(125_000, 100, 125_000 * 100, 156_250, tau)
    c = check_interruption(125_000, 300, 5_000_000, 156_250, 60)
    assert c.downloaded == 14_375_000 and c.playback_feasible
    bad = check_interruption(125_000, 300, 0, 100_000, 60)
    assert not bad.playback_feasible


def test_threshold_examples():
    assert full_download_length_threshold(40, 1.25, 0.2) == pytest.approx(160 / 3)
    assert round(full_download_length_threshold(40, 1.25, 0.2), 2) == 53.33
    assert full_download_length_threshold(0, 1.3, 0.5) == 0
    assert full_download_length_threshold(40, 1.25, 0.8) == math.inf
    with pytest.raises(ValidationError):
        full_download_length_threshold(40, 1.25, 1.0)


def test_wasted_examples():
    assert mean_wasted_rate(0.5, 125_000, 300, 0.2, 40, 1.25) == pytest.approx(3_437_500)
    # L = 50 < 53.33: clamp branch, waste per session e * (L - beta * L)
    assert mean_wasted_rate(1.0, 125_000, 50, 0.2, 40, 1.25) == pytest.approx(125_000 * 40)
    assert unused_bytes(125_000, 50, 5_000_000, 156_250, 10) == 5_000_000
    for beta in (0.01, 0.3, 0.99):
        assert mean_wasted_rate(0.5, 125_000, 300, beta, 0, 1) == 0


def test_wasted_discrete_enumeration():
    beta = DiscreteWeighted([(0.2, 1), (0.5, 1)])
    expected = 0.5 * 125_000 * 0.5 * ((min(40 + 75, 300) - 60) + (min(40 + 187.5, 300) - 150))
    assert mean_wasted_rate(0.5, Constant(125_000), 300, beta, 40, 1.25) == pytest.approx(expected)


def test_wasted_uniform_quadrature_against_fine_riemann_sum():
    lo, hi = 30.0, 300.0
    n = 200_000
    riemann = sum(min(40 + 1.25 * 0.2 * x, x) - 0.2 * x
                  for x in (lo + (i + 0.5) * (hi - lo) / n for i in range(n))) / n
    q = mean_wasted_rate(1.0, 1.0, Uniform(lo, hi), 0.2, 40, 1.25)
    assert q == pytest.approx(riemann, rel=2e-3)


def test_model_inputs(flash_workload):
    m = ModelInputs.from_workload(flash_workload)
    assert m.mean() == 7_500_000 and m.variance() == pytest.approx(VAR)
    assert m.link_rate(2) == pytest.approx(LINK_ALPHA2)


positive = st.floats(1e-3, 1e6)


@settings(max_examples=200)
@given(lam=positive, e=positive, length=positive, g=positive, c=st.floats(0.1, 10))
def test_homogeneity(lam, e, length, g, c):
    v = variance_aggregate_rate(lam, e, length, g)
    assert variance_aggregate_rate(c * lam, e, length, g) == pytest.approx(c * v)
    assert variance_aggregate_rate(lam, c * e, length, g) == pytest.approx(c * v)
    assert variance_aggregate_rate(lam, e, c * length, g) == pytest.approx(c * v)
    assert variance_aggregate_rate(lam, e, length, c * g) == pytest.approx(c * v)
    assert mean_aggregate_rate(c * lam, e, length) == pytest.approx(c * mean_aggregate_rate(lam, e, length))


@settings(max_examples=300)
@given(e=st.floats(1e3, 1e7), length=st.floats(1, 5000), bp=st.floats(0, 500),
       k=st.floats(1, 3), beta=st.floats(0.01, 0.99))
def test_interruption_consistent_with_threshold(e, length, bp, k, beta):
    threshold = full_download_length_threshold(bp, k, beta)
    if math.isfinite(threshold):
        assume(abs(length - threshold) > 1e-6 * max(1.0, threshold))
    fully = not interrupts_before_complete(e, length, e * bp, k * e, beta * length)
    assert fully == (length <= threshold)


@settings(max_examples=300)
@given(e=st.floats(1e3, 1e7), length=st.floats(1, 5000), bp=st.floats(0, 500),
       k=st.floats(1, 3), beta=st.floats(0.01, 0.99))
def test_waste_non_negative(e, length, bp, k, beta):
    assert mean_wasted_rate(1.0, e, length, beta, bp, k) >= 0
    assert unused_bytes(e, length, e * bp, k * e, beta * length) >= -1e-9 * e * length
