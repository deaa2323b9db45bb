import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagingroe import bounds
from pagingroe.dist import explicit, multicore_power_law, pad_to, power_law, uniform, zeta_partial

LOG_CERT_1 = 2 - math.log(11) / math.log(4)


def test_harmonic():
    assert bounds.harmonic(0) == 0
    assert bounds.harmonic(1) == 1.0
    assert bounds.harmonic(10) == pytest.approx(2.9289682539682538, abs=1e-12)
    assert bounds.harmonic(4) == pytest.approx(zeta_partial(1, 4), abs=1e-15)


def test_formula_min_uniform():
    t1, t2 = bounds.formula_terms(uniform(16), 8)
    assert t1 == pytest.approx(0.5, abs=1e-12)
    assert t2 == pytest.approx(6 / 13, abs=1e-12)
    assert bounds.formula_min(uniform(16), 8) == pytest.approx(6 / 13, abs=1e-12)


def test_formula_min_vacuous_point_mass():
    d = pad_to(explicit([1.0]), 16)
    assert bounds.formula_min(d, 8) == 0
    assert bounds.bound_lru(d, 8) == math.inf
    assert bounds.bound_report(d, 8).formula_vacuous


def test_formula_min_needs_k8():
    with pytest.raises(ValueError, match="k must be >= 8"):
        bounds.formula_min(uniform(16), 7)


def test_formula_min_pads_short_distributions():
    assert bounds.formula_min(uniform(10), 8) == bounds.formula_min(pad_to(uniform(10), 16), 8)


def test_formula_min_rounding_k12():
    # 3k/8 = 4.5, 11k/8 = 16.5: numerators round inward, denominators outward
    d = power_law(0.7, 40)
    t1, t2 = bounds.formula_terms(d, 12)
    assert t1 == pytest.approx((d.prefix(5, 6) + d.prefix(18, 40)) / d.prefix(4, 40), abs=1e-12)
    assert t2 == pytest.approx(d.prefix(17, 40) / d.prefix(6, 40), abs=1e-12)


def test_power_law_formula_vs_certificate():
    d = power_law(1.0, 32)
    assert bounds.formula_min(d, 16) >= LOG_CERT_1
    assert bounds.bound_lru(d, 16) <= 16 / LOG_CERT_1


def test_bound_lru_uniform():
    assert bounds.bound_lru(uniform(16), 8) == pytest.approx(34.666666, abs=1e-5)
    assert bounds.bound_plfu_clean(uniform(16), 8) == pytest.approx(2 * 34.666666, abs=1e-4)


def test_bound_plfu_harmonic():
    assert bounds.bound_plfu_harmonic(uniform(5), 3) == pytest.approx(11 / 3, abs=1e-12)
    assert bounds.bound_plfu_harmonic(pad_to(uniform(3), 5), 3) == 0
    assert bounds.bound_plfu_harmonic(power_law(1, 30), 10) <= 2 * bounds.harmonic(11)
    with pytest.raises(ValueError):
        bounds.bound_plfu_harmonic(uniform(4), 4)


@settings(max_examples=200, deadline=None)
@given(raw=st.lists(st.floats(1e-9, 1.0), min_size=2, max_size=60), data=st.data())
def test_harmonic_bound_cap(raw, data):
    probs = np.sort(np.asarray(raw))[::-1]
    d = explicit(probs / probs.sum())
    k = data.draw(st.integers(1, d.m - 1))
    assert bounds.bound_plfu_harmonic(d, k) <= 2 * bounds.harmonic(k + 1)


def test_costrate_and_lazy():
    assert bounds.bound_plfu_costrate(uniform(16), 8) == pytest.approx(12.0)
    d = power_law(1, 4)
    assert bounds.bound_plfu_costrate(d, 2) == pytest.approx(8 / 0.28 - 4)
    assert bounds.bound_lazy(uniform(16), 8) == pytest.approx(12.0)
    assert bounds.bound_lazy(d, 2) == pytest.approx(43.877551, abs=1e-5)
    # tail = 1: every page past k
    one = pad_to(explicit([1.0]), 2)
    assert bounds.bound_plfu_costrate(explicit([0.5, 0.5]), 1) == pytest.approx(12.0)
    assert bounds.bound_plfu_costrate(one, 1) == math.inf


def test_cost_rates():
    assert bounds.cost_rates(uniform(16), 8) == pytest.approx((1.0, 0.5, 1 / 12))
    assert bounds.cost_rates(pad_to(uniform(8), 16), 8) == (0.0, 0.0, 0.0)
    assert bounds.opt_cost_rate_lb(1.0) == 0.5


def test_occurrence_cap():
    assert bounds.occurrence_cap(uniform(3), 2, 3) == pytest.approx(1.5)
    assert bounds.occurrence_cap(pad_to(uniform(2), 3), 2, 3) == 1.0
    with pytest.raises(ValueError):
        bounds.occurrence_cap(uniform(3), 2, 2)


def test_powerlaw_certificate_values():
    assert bounds.powerlaw_certificate(1.0) == pytest.approx(LOG_CERT_1, abs=1e-15)
    assert bounds.powerlaw_certificate(0.5) == pytest.approx(2 - math.sqrt(3), abs=1e-12)


def test_powerlaw_certificate_near_one():
    # the neighbouring branches meet at 1 - log 3 / log 4, below the alpha = 1 value
    limit = 1 - math.log(3) / math.log(4)
    assert bounds.powerlaw_certificate(0.999) == pytest.approx(limit, abs=1e-3)
    assert bounds.powerlaw_certificate(1.001) == pytest.approx(limit, abs=1e-3)
    assert bounds.powerlaw_certificate(1 - 1e-12) == pytest.approx(limit, abs=1e-9)
    assert bounds.powerlaw_certificate(1.0) > limit


def test_multicore_certificate():
    for kappa in (1, 10, 1e4):
        assert bounds.multicore_certificate(1.0, kappa) == pytest.approx(LOG_CERT_1 / 2)
    with pytest.raises(ValueError):
        bounds.multicore_certificate(1.0, 0.5)


@pytest.mark.parametrize("alpha", [0.1, 0.3, 0.5, 0.8, 0.999, 1.0, 1.001, 1.2, 1.5, 2.0, 3.0])
@pytest.mark.parametrize("k", [8, 16, 24, 32, 64])
def test_certificates_are_sound(alpha, k):
    assert bounds.formula_min(power_law(alpha, 2 * k), k) >= bounds.powerlaw_certificate(alpha) - 1e-6
    for kappa in (1, 10, 1e3, 1e5):
        d = multicore_power_law(alpha, 2 * k, kappa)
        assert bounds.formula_min(d, k) >= bounds.multicore_certificate(alpha, kappa) - 1e-6


def test_sandwich_examples():
    assert bounds.sandwich_inequality_check(0.0, 3.0)
    assert bounds.sandwich_terms(0.5, 2) == pytest.approx((1.0, 0.75, 0.5, 0.5))
    assert bounds.sandwich_inequality_check(0.5, 2)
    with pytest.raises(ValueError):
        bounds.sandwich_inequality_check(0.6, 2)


def test_sandwich_grid():
    for kappa in (1, 2.5, 10, 1e3):
        for x in np.concatenate([[0, 1e-6], np.linspace(0, 1 / kappa, 200)]):
            assert bounds.sandwich_inequality_check(float(min(x, 1 / kappa)), kappa)


def test_bound_report_row():
    rep = bounds.bound_report(uniform(16), 8)
    assert rep.roe_lru_upper == pytest.approx(34.67, abs=0.01)
    assert rep.certificate is None
    assert bounds.BoundReport.header()[0] == "k"
    assert len(rep.csv_row()) == len(bounds.BoundReport.header())
    rep = bounds.bound_report(power_law(1, 16), 8)
    assert rep.certificate == pytest.approx(LOG_CERT_1)
    finite = [v for v in (rep.roe_lru_upper, rep.roe_plfu_clean_upper, rep.roe_plfu_costrate_upper,
                          rep.roe_lazy_upper) if math.isfinite(v)]
    assert all(v >= 1 for v in finite)
