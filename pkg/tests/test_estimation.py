import math

import numpy as np
import pytest

from weakps import (
    AcquisitionConfig,
    ImperfectionParams,
    ModelParams,
    build_calibration,
    conditional_probabilities,
    cramer_rao_variance,
    estimate_theta,
    imperfect_joint_probs,
    load_baseline,
    propagate_variance,
    simulate_batch,
    table1_pipeline,
    weak_value,
    weak_value_curve,
    weak_value_from_counts,
    weak_value_slope,
)
from weakps.errors import AmbiguousBranch, FlatCurve, OutOfRange
from weakps.estimation import RAD2_TO_DEG2, TABLE1_THETAS_DEG
from weakps.weak import fisher_ps_definition, postselect_probability

D2R = math.pi / 180.0
KAPPA = 0.335
R = math.sqrt(1 - KAPPA**2)
MINUS_MODEL = ModelParams(kappa=KAPPA, postselect_sign="minus")


def test_build_calibration_rising_branch():
    curve = build_calibration(MINUS_MODEL, 0.0, 10 * D2R, 0.1 * D2R)
    assert np.all(np.diff(curve.sigma_values) > 0.0)
    assert len(curve.branches()) == 1


def test_build_calibration_projective_branches():
    curve = build_calibration(ModelParams(kappa=1.0, postselect_sign="minus"),
                              0.0, math.pi / 2, 0.25 * D2R)
    runs = curve.branches()
    assert len(runs) == 2  # falling then rising, split at 45 deg
    split = curve.theta_grid[runs[0][1]]
    assert split == pytest.approx(45 * D2R, abs=0.3 * D2R)


def test_imperfect_curve_matches_pipeline():
    params = ImperfectionParams(0.78, 0.98, 0.34)
    model = ModelParams(kappa=KAPPA, postselect_sign="minus", imperfections=params)
    curve = build_calibration(model, 0.0, 45 * D2R, 1.0 * D2R)
    for i, theta in enumerate(curve.theta_grid):
        rec = imperfect_joint_probs(float(theta), model.mu, params)
        pc0, pc1 = conditional_probabilities(*rec.postselected("minus"))
        assert curve.sigma_values[i] == pytest.approx(weak_value(pc0, pc1, KAPPA), abs=1e-12)


def test_estimate_theta_trivial_points():
    curve = build_calibration(MINUS_MODEL, -15 * D2R, 40 * D2R, 0.05 * D2R)
    theta_hat = estimate_theta(curve, 1.0, (-10 * D2R, 10 * D2R))
    assert abs(theta_hat) < 1e-9
    branch = (18 * D2R, 27 * D2R)  # falling branch through 22.5 deg
    theta_hat = estimate_theta(curve, 0.0, branch)
    assert theta_hat == pytest.approx(22.5 * D2R, abs=1e-9)


def test_estimate_theta_near_peak():
    curve = build_calibration(MINUS_MODEL, 0.0, 45 * D2R, 0.05 * D2R)
    theta_peak = math.asin(R) / 4.0
    target = 1.0 / KAPPA - 1e-4
    theta_hat = estimate_theta(curve, target, (0.0, theta_peak - 1e-6))
    assert theta_hat < theta_peak
    assert weak_value_curve(theta_hat, KAPPA, "minus") == pytest.approx(target, abs=1e-9)


def test_estimate_round_trip_grid():
    curve = build_calibration(MINUS_MODEL, 0.0, math.pi / 2, 0.05 * D2R)
    for theta_deg in (2.0, 9.0, 16.0, 20.0, 25.0, 33.0, 52.0, 80.0):
        theta = theta_deg * D2R
        branch = curve.branch_containing(theta)
        sigma = weak_value_curve(theta, KAPPA, "minus")
        assert estimate_theta(curve, sigma, branch) == pytest.approx(theta, abs=1e-9)


def test_estimate_out_of_range():
    curve = build_calibration(MINUS_MODEL, 0.0, 45 * D2R, 0.05 * D2R)
    with pytest.raises(OutOfRange):
        estimate_theta(curve, 5.0, (0.0, 10 * D2R))


def test_estimate_ambiguous_branch():
    curve = build_calibration(MINUS_MODEL, 0.0, 45 * D2R, 0.05 * D2R)
    with pytest.raises(AmbiguousBranch):
        estimate_theta(curve, 1.5, (0.0, 30 * D2R))  # spans the peak at 17.6 deg


def test_branch_containing_shrinks_at_turning_points():
    curve = build_calibration(MINUS_MODEL, 0.0, math.pi / 2, 0.05 * D2R)
    lo, hi = curve.branch_containing(20 * D2R)
    theta_peak = math.asin(R) / 4.0
    theta_valley = (math.pi - math.asin(R)) / 4.0
    assert lo > theta_peak
    assert hi < theta_valley
    with pytest.raises(AmbiguousBranch):
        # within one grid cell of the peak there is no safe branch
        curve.branch_containing(theta_peak)


def test_propagate_variance_examples():
    curve = build_calibration(MINUS_MODEL, 0.0, 45 * D2R, 0.05 * D2R)
    assert propagate_variance(curve, 20 * D2R, 0.0) == 0.0
    # closed-form slope at the zero crossing: -4 / (1 - sqrt(1 - k^2))
    expected = 0.01 * (1 - R) ** 2 / 16.0 * RAD2_TO_DEG2
    assert propagate_variance(curve, 22.5 * D2R, 0.01) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(FlatCurve):
        propagate_variance(curve, math.asin(R) / 4.0, 0.01)


def test_propagated_variance_slope_consistency():
    curve = build_calibration(MINUS_MODEL, 0.0, 45 * D2R, 0.05 * D2R)
    theta = 20 * D2R
    slope = weak_value_slope(theta, KAPPA, "minus")
    got = propagate_variance(curve, theta, 0.02)
    assert got == pytest.approx(0.02 / slope**2 * RAD2_TO_DEG2, rel=1e-12)


def test_cramer_rao_values():
    # information 16 per squared radian -> (1/16) rad^2 = 205.18 deg^2
    got = cramer_rao_variance(30 * D2R, 1.0, "minus", 1)
    assert got == pytest.approx(RAD2_TO_DEG2 / 16.0, rel=1e-12)
    assert got == pytest.approx(205.175, abs=1e-3)
    f = fisher_ps_definition(22.5 * D2R, KAPPA, "minus")
    got = cramer_rao_variance(22.5 * D2R, KAPPA, "minus", 1000)
    assert got == pytest.approx(RAD2_TO_DEG2 / (f * 1000), rel=1e-12)
    # doubling the event count halves the limit
    assert cramer_rao_variance(22.5 * D2R, KAPPA, "minus", 2000) == pytest.approx(
        got / 2.0, rel=1e-12
    )
    with pytest.raises(ValueError):
        cramer_rao_variance(22.5 * D2R, KAPPA, "minus", 0)


def test_monte_carlo_round_trip_consistency():
    theta = 20 * D2R
    model = MINUS_MODEL
    curve = build_calibration(model, 0.0, math.pi / 2, 0.05 * D2R)
    branch = curve.branch_containing(theta)
    probs = model.probability_record(theta)
    config = AcquisitionConfig(seed=424242, rate=2000.0, duration=5.0)
    theta_hats, propagated = [], []
    for rec in simulate_batch(probs, config, 400):
        sigma_hat, var_sigma = weak_value_from_counts(rec, KAPPA, "minus")
        theta_hat = estimate_theta(curve, sigma_hat, branch)
        theta_hats.append(theta_hat)
        propagated.append(propagate_variance(curve, theta_hat, var_sigma))
    theta_hats = np.array(theta_hats)
    se = theta_hats.std(ddof=1) / math.sqrt(theta_hats.size)
    assert abs(theta_hats.mean() - theta) < 3 * se
    empirical_deg2 = float(np.var(np.degrees(theta_hats), ddof=1))
    assert abs(empirical_deg2 / np.mean(propagated) - 1.0) < 0.2
    # sanity of the Cramér-Rao ordering over the same repetitions
    m_ps_mean = postselect_probability(theta, KAPPA, "minus") * config.expected_total
    cr = cramer_rao_variance(theta, KAPPA, "minus", int(m_ps_mean))
    assert empirical_deg2 >= cr * 0.85


def test_table1_pipeline_rows_and_audit():
    model = MINUS_MODEL
    config = AcquisitionConfig(seed=90210, rate=2000.0, duration=5.0)
    rows = table1_pipeline(TABLE1_THETAS_DEG["minus"], model, config, repetitions=20)
    assert [row.theta_deg for row in rows] == [20.0, 22.5, 25.0, 27.5]
    for row in rows:
        assert row.n_ok + len(row.failures) == 20
        for est in row.estimates:
            assert est.variance_theta_deg2 >= 0.0
            assert est.sigma_cr_deg2 > 0.0
            budget = est.f_ps * postselect_probability(
                math.radians(est.theta_hat_deg), KAPPA, "minus"
            )
            assert budget <= 16.0 + 1e-9
    untroubled = {20.0, 22.5, 25.0}
    for row in rows:
        if row.theta_deg in untroubled:
            assert row.n_ok == 20
            assert abs(row.mean_theta_hat_deg - row.theta_deg) < 0.5


def test_table1_plus_postselection():
    model = ModelParams(kappa=KAPPA, postselect_sign="plus")
    config = AcquisitionConfig(seed=31337, rate=2000.0, duration=5.0)
    rows = table1_pipeline(TABLE1_THETAS_DEG["plus"], model, config, repetitions=10)
    assert [row.theta_deg for row in rows] == [67.5, 70.0, 72.5, 75.0]
    good = [row for row in rows if row.theta_deg in (67.5, 70.0)]
    for row in good:
        assert row.n_ok == 10


def test_failures_are_reported_not_dropped():
    # 27.5 deg sits one grid cell from the curve minimum: about half the
    # draws land outside the branch range and must be reported
    model = MINUS_MODEL
    config = AcquisitionConfig(seed=777, rate=2000.0, duration=5.0)
    rows = table1_pipeline([27.5], model, config, repetitions=30)
    row = rows[0]
    assert row.n_ok + len(row.failures) == 30
    assert all("OutOfRange" in f or "Degenerate" in f for f in row.failures)


def test_propagated_variance_saturates_cramer_rao_without_kappa_noise():
    # delta-method algebra: Var(sigma_hat) = (1 - k^2 sigma^2)/(k^2 N), and
    # dividing by the squared slope reproduces 1/(F(theta_hat) N) exactly.
    # The inversion estimator is the conditional-distribution MLE, so its
    # first-order variance sits on the Cramér-Rao limit; the strength
    # uncertainty term is what lifts it above.
    model = MINUS_MODEL
    config = AcquisitionConfig(seed=5150, rate=2000.0, duration=5.0)
    rows = table1_pipeline([20.0, 22.5, 25.0], model, config, repetitions=10)
    for row in rows:
        for est in row.estimates:
            assert est.variance_theta_deg2 == pytest.approx(est.sigma_cr_deg2, rel=1e-9)
    noisy = AcquisitionConfig(seed=5150, rate=2000.0, duration=5.0, kappa_uncertainty=0.008)
    rows = table1_pipeline([20.0], model, noisy, repetitions=10)
    for est in rows[0].estimates:
        assert est.variance_theta_deg2 > est.sigma_cr_deg2


def test_scalar_and_batch_inverters_agree():
    from weakps import kernels

    curve = build_calibration(MINUS_MODEL, 0.0, math.pi / 2, 0.05 * D2R)
    lo, hi = curve.branch_containing(22.0 * D2R)
    targets = np.linspace(
        weak_value_curve(hi, KAPPA, "minus") + 1e-6,
        weak_value_curve(lo, KAPPA, "minus") - 1e-6,
        50,
    )
    batch = kernels.invert_sigma(targets, KAPPA, -1.0, lo, hi)
    for target, theta_batch in zip(targets, batch):
        theta_scalar = estimate_theta(curve, float(target), (lo, hi))
        assert theta_batch == pytest.approx(theta_scalar, abs=1e-9)


def test_load_baseline_packaged():
    base = load_baseline()
    assert base[("minus", 22.5)] == (0.036, 0.33)
    assert base[("plus", 75.0)] == (0.76, 0.3)
    assert len(base) == 8
