import math

import numpy as np
import pytest

from weakps import (
    AcquisitionConfig,
    CountRecord,
    ProbabilityRecord,
    derive_seeds,
    ideal_probability_record,
    simulate_batch,
    simulate_counts,
    weak_value_curve,
    weak_value_from_counts,
)
from weakps.errors import EmptyChannel, ZeroStrength

D2R = math.pi / 180.0
KAPPA = 0.335


def test_config_validation():
    with pytest.raises(ValueError):
        AcquisitionConfig(seed=1, rate=0.0)
    with pytest.raises(ValueError):
        AcquisitionConfig(seed=1, duration=-1.0)
    with pytest.raises(ValueError):
        AcquisitionConfig(seed=1, kappa_uncertainty=-0.1)
    with pytest.raises(ValueError):
        AcquisitionConfig(seed=-2)


def test_seed_determinism():
    probs = ideal_probability_record(20 * D2R, KAPPA)
    a = simulate_counts(probs, AcquisitionConfig(seed=123))
    b = simulate_counts(probs, AcquisitionConfig(seed=123))
    c = simulate_counts(probs, AcquisitionConfig(seed=124))
    assert a.as_dict() == b.as_dict()
    assert a.as_dict() != c.as_dict()


def test_degenerate_distribution():
    probs = ProbabilityRecord(p_mp=1.0, p_mm=0.0, p_pp=0.0, p_pm=0.0, kappa=KAPPA)
    rec = simulate_counts(probs, AcquisitionConfig(seed=5, rate=200.0, duration=5.0))
    assert rec.n_mm == rec.n_pp == rec.n_pm == 0
    assert abs(rec.n_mp - 1000) < 5 * math.sqrt(1000)


def test_law_of_large_numbers():
    probs = ProbabilityRecord(p_mp=0.25, p_mm=0.25, p_pp=0.25, p_pm=0.25, kappa=KAPPA)
    rec = simulate_counts(probs, AcquisitionConfig(seed=11, rate=4e6, duration=1.0))
    for n in rec.as_dict().values():
        assert abs(n - 1e6) < 5 * 1e3


def test_rejects_unnormalized_probabilities():
    probs = ProbabilityRecord(p_mp=0.3, p_mm=0.3, p_pp=0.3, p_pm=0.3, kappa=KAPPA)
    with pytest.raises(ValueError):
        simulate_counts(probs, AcquisitionConfig(seed=1))


def test_estimator_mean_matches_ideal_value():
    theta = 20 * D2R
    probs = ideal_probability_record(theta, KAPPA)
    sigma_ideal = weak_value_curve(theta, KAPPA, "minus")
    config = AcquisitionConfig(seed=2026, rate=2000.0, duration=5.0)
    values = []
    for rec in simulate_batch(probs, config, 10_000):
        sigma_hat, _ = weak_value_from_counts(rec, KAPPA, "minus")
        values.append(sigma_hat)
    values = np.array(values)
    se = values.std(ddof=1) / math.sqrt(values.size)
    assert abs(values.mean() - sigma_ideal) < 3 * se


def test_symmetric_counts_give_zero_with_poisson_only_variance():
    config = AcquisitionConfig(seed=1, kappa_uncertainty=0.05)
    rec = CountRecord(n_mp=500, n_mm=500, n_pp=0, n_pm=123, config=config)
    sigma_hat, var = weak_value_from_counts(rec, 0.5, "minus")
    assert sigma_hat == 0.0
    # the strength term vanishes with the estimate; Poisson term survives
    assert var == pytest.approx(4 * 500 * 500 / (0.5**2 * 1000**3), abs=1e-18)


def test_empty_partner_channel_pins_the_estimate():
    config = AcquisitionConfig(seed=1)
    rec = CountRecord(n_mp=1000, n_mm=0, n_pp=0, n_pm=0, config=config)
    sigma_hat, var = weak_value_from_counts(rec, 0.5, "minus")
    assert sigma_hat == 2.0
    assert var == 0.0
    # parametric bootstrap around the observed counts agrees: the empty
    # channel resamples to zero, so the estimate never moves
    rng = np.random.default_rng(99)
    resampled = []
    for _ in range(10_000):
        na = rng.poisson(1000)
        nb = rng.poisson(0)
        resampled.append((na - nb) / (0.5 * (na + nb)))
    assert float(np.var(resampled)) == 0.0


def test_strength_uncertainty_term_dominates_near_the_peak():
    config = AcquisitionConfig(seed=1, kappa_uncertainty=0.008)
    # counts tuned so sigma_hat is close to the anomaly peak
    rec = CountRecord(n_mp=560, n_mm=2, n_pp=0, n_pm=0, config=config)
    sigma_hat, var = weak_value_from_counts(rec, KAPPA, "minus")
    assert sigma_hat > 2.9
    var_poisson = 4 * 560 * 2 / (KAPPA**2 * 562**3)
    var_kappa = sigma_hat**2 * (0.008 / KAPPA) ** 2
    assert var == pytest.approx(var_poisson + var_kappa, rel=1e-12)
    assert var_kappa > var_poisson


def test_empty_channel_raises():
    rec = CountRecord(n_mp=0, n_mm=0, n_pp=10, n_pm=3, config=AcquisitionConfig(seed=1))
    with pytest.raises(EmptyChannel):
        weak_value_from_counts(rec, KAPPA, "minus")
    with pytest.raises(ZeroStrength):
        weak_value_from_counts(rec, 0.0, "plus")


def test_derive_seeds_reproducible_and_distinct():
    a = derive_seeds(7, 100)
    b = derive_seeds(7, 100)
    c = derive_seeds(8, 100)
    assert a == b
    assert a != c
    assert len(set(a)) == 100


def test_one_sigma_coverage_window():
    theta = 20 * D2R
    probs = ideal_probability_record(theta, KAPPA)
    sigma_ideal = weak_value_curve(theta, KAPPA, "minus")
    config = AcquisitionConfig(seed=515151, rate=2000.0, duration=5.0)
    covered = 0
    reps = 1000
    for rec in simulate_batch(probs, config, reps):
        sigma_hat, var = weak_value_from_counts(rec, KAPPA, "minus")
        if abs(sigma_hat - sigma_ideal) <= math.sqrt(var):
            covered += 1
    assert 0.62 <= covered / reps <= 0.74


def test_propagated_variance_tracks_empirical():
    theta = 20 * D2R
    probs = ideal_probability_record(theta, KAPPA)
    config = AcquisitionConfig(seed=717171, rate=2000.0, duration=5.0)
    sigma_hats, variances = [], []
    for rec in simulate_batch(probs, config, 1000):
        sigma_hat, var = weak_value_from_counts(rec, KAPPA, "minus")
        sigma_hats.append(sigma_hat)
        variances.append(var)
    empirical = float(np.var(sigma_hats, ddof=1))
    propagated = float(np.mean(variances))
    assert abs(empirical / propagated - 1.0) <= 0.15
