"""Directional orthant diagnostics, the two-step check and copula bounds."""

import itertools
import math
import warnings

import numpy as np
import pytest

from rhatinf import multivariate as mv
from rhatinf.chains import ChainSet, generate_mvn
from rhatinf.diagnostics import local_rhat, rhat_infinity


def _random_chains(m, n, d, seed):
    return ChainSet(np.random.default_rng(seed).standard_normal((m, n, d)))


_RHO9 = [[1.0, 0.9], [0.9, 1.0]]


# ---------------------------------------------------------------------------
# directions


def test_direction_validation_and_flip():
    dr = mv.Direction(("le", "ge"))
    assert dr.d == 2
    assert dr.flip(0) == mv.Direction(("ge", "ge"))
    assert dr.flip(1) == mv.Direction(("le", "le"))
    with pytest.raises(ValueError, match="'le', 'ge'"):
        mv.Direction(("le", "up"))
    with pytest.raises(ValueError):
        mv.Direction(())


def test_direction_enumerations():
    canon = mv.canonical_directions(3)
    assert len(canon) == 4
    assert all(dr.signs[0] == "le" for dr in canon)
    assert len(set(canon)) == 4
    assert len(mv.all_directions(3)) == 8
    assert set(canon) <= set(mv.all_directions(3))


# ---------------------------------------------------------------------------
# pointwise statistic


def test_univariate_direction_reduces_to_local_rhat():
    cs = _random_chains(3, 25, 1, seed=0)
    le = mv.Direction(("le",))
    for x in (-0.5, 0.0, 0.7):
        assert mv.mv_local_rhat(cs, [x], le) == local_rhat(cs, x)


def test_mismatched_lengths_rejected():
    cs = _random_chains(2, 10, 2, seed=1)
    with pytest.raises(ValueError, match="length d"):
        mv.mv_local_rhat(cs, [0.0], mv.Direction(("le", "le")))
    with pytest.raises(ValueError, match="length d"):
        mv.mv_local_rhat(cs, [0.0, 0.0], mv.Direction(("le",)))


def test_pointwise_matches_plain_indicator_computation():
    rng = np.random.default_rng(2)
    for d in (2, 3):
        cs = ChainSet(rng.standard_normal((3, 12, d)))
        for direction in mv.all_directions(d):
            x = rng.standard_normal(d) * 0.5
            ind = np.ones((cs.m, cs.n), dtype=bool)
            for p, s in enumerate(direction.signs):
                col = cs.draws[:, :, p]
                ind &= (col <= x[p]) if s == "le" else (col >= x[p])
            freqs = ind.mean(axis=1)
            between = float(np.var(freqs))
            within = float(np.mean(freqs * (1.0 - freqs)))
            if within == 0.0:
                continue
            expected = math.sqrt(1.0 + between / within)
            assert mv.mv_local_rhat(cs, x, direction) == pytest.approx(
                expected, rel=1e-13
            )


def test_separated_clouds_warn():
    a = np.zeros((1, 10, 2))
    b = np.full((1, 10, 2), 5.0)
    cs = ChainSet(np.concatenate([a, b]))
    with pytest.warns(RuntimeWarning, match="disjoint supports"):
        value = mv.mv_local_rhat(cs, [2.5, 2.5], mv.Direction(("le", "le")))
    assert value == math.inf


# ---------------------------------------------------------------------------
# lattice supremum


def test_lattice_supremum_matches_univariate_supremum():
    cs = _random_chains(4, 50, 1, seed=3)
    assert mv.mv_rhat_infinity(cs) == rhat_infinity(cs)[0]


def test_lattice_supremum_equals_pointwise_scan():
    cs = _random_chains(3, 8, 2, seed=4)
    grids = mv._axis_grids(cs, None)
    for direction in (mv.Direction(("le", "le")), mv.Direction(("le", "ge"))):
        best = 1.0
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            for point in itertools.product(*grids):
                best = max(best, mv.mv_local_rhat(cs, np.array(point), direction))
            assert mv.mv_rhat_infinity(cs, direction) == pytest.approx(
                best, rel=1e-14
            )


def test_coordinate_permutation_equivariance():
    cs = _random_chains(3, 20, 3, seed=5)
    perm = (2, 0, 1)
    permuted = ChainSet(cs.draws[:, :, perm])
    direction = mv.Direction(("le", "ge", "le"))
    permuted_dir = mv.Direction(tuple(direction.signs[p] for p in perm))
    assert mv.mv_rhat_infinity(cs, direction) == mv.mv_rhat_infinity(
        permuted, permuted_dir
    )


def test_direction_length_checked():
    cs = _random_chains(2, 10, 2, seed=6)
    with pytest.raises(ValueError, match="length"):
        mv.mv_rhat_infinity(cs, mv.Direction(("le",)))


def test_axis_grids_explicit_and_budget():
    cs = _random_chains(2, 10, 2, seed=7)
    grids = mv._axis_grids(cs, [[0.0, 1.0, 0.5], [2.0]])
    np.testing.assert_array_equal(grids[0], [0.0, 0.5, 1.0])
    np.testing.assert_array_equal(grids[1], [2.0])
    with pytest.raises(ValueError, match="one grid per"):
        mv._axis_grids(cs, [[0.0]])
    with pytest.raises(ValueError, match="budget too small"):
        mv._axis_grids(cs, 3)
    small = mv._axis_grids(cs, 25)  # five points per axis at most
    assert all(g.size <= 5 for g in small)


def test_subsampled_grid_is_negation_symmetric():
    cs = _random_chains(2, 400, 2, seed=8)
    neg = ChainSet(-cs.draws)
    for budget in (100, 2500):
        grids = mv._axis_grids(cs, budget)
        flipped = mv._axis_grids(neg, budget)
        for p in range(2):
            np.testing.assert_array_equal(flipped[p], -grids[p][::-1])


def test_direction_max_equals_manual_direction_scan():
    cs = _random_chains(3, 16, 2, seed=9)
    value, best = mv.rhat_max_infinity(cs)
    manual = max(
        mv.mv_rhat_infinity(cs, dr) for dr in mv.canonical_directions(2)
    )
    assert value == manual
    assert best in mv.canonical_directions(2)
    full_value, _ = mv.rhat_max_infinity(cs, full_directions=True)
    assert full_value >= value


def test_negating_a_coordinate_leaves_the_full_direction_max_unchanged():
    # reflection permutes the full direction set, so that max is exact;
    # the canonical scan pins the first sign, so only reflections of the
    # other coordinates map it onto itself
    for seed, d in ((10, 2), (11, 3)):
        cs = _random_chains(2, 30, d, seed=seed)
        base = mv.rhat_max_infinity(cs)[0]
        base_full = mv.rhat_max_infinity(cs, full_directions=True)[0]
        for p in range(d):
            draws = cs.draws.copy()
            draws[:, :, p] = -draws[:, :, p]
            neg = ChainSet(draws)
            assert mv.rhat_max_infinity(neg, full_directions=True)[0] == base_full
            if p >= 1:
                assert mv.rhat_max_infinity(neg)[0] == base


def test_negating_the_first_coordinate_maps_canonical_onto_flipped_directions():
    cs = _random_chains(2, 30, 2, seed=10)
    draws = cs.draws.copy()
    draws[:, :, 0] = -draws[:, :, 0]
    flipped_max = max(
        mv.mv_rhat_infinity(cs, dr.flip(0)) for dr in mv.canonical_directions(2)
    )
    assert mv.rhat_max_infinity(ChainSet(draws))[0] == flipped_max


def test_dimension_cap_points_at_the_univariate_tools():
    cs = ChainSet(np.random.default_rng(12).random((2, 4, 13)))
    with pytest.raises(ValueError, match="univariate tools"):
        mv.rhat_max_infinity(cs)


# ---------------------------------------------------------------------------
# two-step diagnosis


def test_two_step_requires_d_at_least_two():
    cs = _random_chains(2, 20, 1, seed=13)
    with pytest.raises(ValueError, match="d >= 2"):
        mv.two_step_diagnosis(cs)


def test_two_step_null_converges():
    cs = generate_mvn([np.eye(2), np.eye(2)], 200, seed=14)
    report = mv.two_step_diagnosis(cs)
    assert report.verdict == "converged"
    assert report.stage1_verdict == "converged"
    assert report.stage2_verdict == "converged"
    assert len(report.margin_rhat_inf) == 2


def test_two_step_isolates_a_dependence_failure():
    # identical margins, different correlation: stage 1 passes, stage 2 fails
    cs = generate_mvn([np.eye(2), _RHO9], 200, seed=15)
    report = mv.two_step_diagnosis(cs)
    assert report.stage1_verdict == "converged"
    assert report.stage2_verdict == "not_converged"
    assert report.verdict == "not_converged"
    assert report.best_direction is not None and report.best_direction.d == 2


def test_two_step_flags_a_margin_failure():
    draws = np.random.default_rng(16).standard_normal((2, 200, 2))
    draws[1, :, 0] += 3.0
    report = mv.two_step_diagnosis(ChainSet(draws))
    assert report.stage1_verdict == "not_converged"
    assert report.verdict == "not_converged"


def test_two_step_threshold_override():
    cs = generate_mvn([np.eye(2), np.eye(2)], 100, seed=17)
    report = mv.two_step_diagnosis(cs, thresholds=(1.0, 1.0))
    assert report.verdict == "not_converged"
    relaxed = mv.two_step_diagnosis(cs, thresholds=(10.0, 10.0))
    assert relaxed.verdict == "converged"


def test_mv_report_consistency_enforced():
    with pytest.raises(ValueError, match="both stages"):
        mv.MvReport(
            margin_rhat_inf=[1.0, 1.0], margin_threshold=1.02,
            copula_rhat_max_inf=1.5, copula_threshold=1.03,
            best_direction=None, stage1_verdict="converged",
            stage2_verdict="not_converged", verdict="converged",
        )


def test_mv_report_serializes_plain_types():
    cs = generate_mvn([np.eye(2), np.eye(2)], 100, seed=18)
    payload = mv.two_step_diagnosis(cs, thresholds=(1.5, 1.5)).to_dict()
    assert payload["verdict"] == "converged"
    assert isinstance(payload["margin_rhat_inf"][0], float)
    assert payload["best_direction"] is None or isinstance(
        payload["best_direction"], list
    )


def test_rule_of_thumb_presets():
    assert mv.rule_of_thumb_thresholds(4) == (1.03, 1.03)
    assert mv.rule_of_thumb_thresholds(8) == (1.04, 1.05)
    with pytest.raises(ValueError, match="no preset"):
        mv.rule_of_thumb_thresholds(5)


# ---------------------------------------------------------------------------
# population bounds


def test_frechet_bound_values():
    assert mv.frechet_r_infinity_bound(1) == 1.0
    assert mv.frechet_r_infinity_bound(2) == pytest.approx(math.sqrt(1.5), abs=1e-15)
    assert mv.frechet_r_infinity_bound(5) > mv.frechet_r_infinity_bound(4)
    with pytest.raises(ValueError):
        mv.frechet_r_infinity_bound(0)


def test_pairwise_bound_reduces_to_frechet_for_two_chains():
    for d in range(1, 7):
        assert mv.pairwise_bound(2, d) == pytest.approx(
            mv.frechet_r_infinity_bound(d), abs=1e-15
        )
    assert mv.pairwise_bound(3, 3) == pytest.approx(math.sqrt(3.0), abs=1e-15)
    with pytest.raises(ValueError):
        mv.pairwise_bound(1, 2)


def _diag_scan(d):
    us = np.linspace(1e-7, 1.0 - 1e-7, 400001)
    return float(np.max(np.sqrt(1.0 + 0.5 * mv._diag_gap(d, us))))


def test_plod_bound_closed_value_and_scan():
    closed = math.sqrt(0.5 + 1.0 / math.sqrt(3.0))
    assert mv.plod_bound(2) == pytest.approx(closed, abs=1e-15)
    # the bound is the maximum of the diagonal gap functional
    assert mv.plod_bound(2) == pytest.approx(_diag_scan(2), abs=1e-9)
    assert mv.plod_bound(3) == pytest.approx(_diag_scan(3), abs=1e-9)
    assert 1.0 < mv.plod_bound(6) < mv.frechet_r_infinity_bound(6)
    with pytest.raises(ValueError):
        mv.plod_bound(1)


def test_nlod_bound_values_and_limit():
    assert mv.nlod_bound(2) == pytest.approx(math.sqrt(7.0 / 6.0), abs=1e-15)
    seq = [mv.nlod_bound(d) for d in (2, 3, 5, 10, 100)]
    assert all(b > a for a, b in zip(seq, seq[1:]))
    limit = math.sqrt(1.0 + 1.0 / (2.0 * (math.e - 1.0)))
    assert mv.nlod_bound(10 ** 9) == pytest.approx(limit, abs=1e-8)
    with pytest.raises(ValueError):
        mv.nlod_bound(1)


# ---------------------------------------------------------------------------
# copula evaluators


def test_builtin_copula_values():
    pi3 = mv.independence_copula(3)
    m3 = mv.upper_frechet_copula(3)
    w3 = mv.lower_frechet_bound(3)
    u = np.array([0.9, 0.9, 0.9])
    assert pi3(u) == pytest.approx(0.729, abs=1e-15)
    assert m3(u) == 0.9
    assert w3(u) == pytest.approx(0.7, abs=1e-15)
    assert w3(np.array([0.1, 0.2, 0.3])) == 0.0


def test_frechet_ordering_holds_pointwise():
    rng = np.random.default_rng(19)
    for d in (2, 3, 4):
        pi, up, lo = (
            mv.independence_copula(d),
            mv.upper_frechet_copula(d),
            mv.lower_frechet_bound(d),
        )
        u = rng.random((50, d))
        assert np.all(lo(u) <= pi(u) + 1e-15)
        assert np.all(pi(u) <= up(u) + 1e-15)


def test_copula_equality_ignores_the_callable():
    a = mv.Copula("pi", 2, lambda u: np.prod(u, axis=-1))
    b = mv.Copula("pi", 2, lambda u: np.prod(u, axis=-1))
    assert a == b


def test_gaussian_copula_median_point_identity():
    # C(1/2, 1/2) has the closed value 1/4 + arcsin(rho)/(2 pi)
    for rho in (-0.9, -0.5, 0.3, 0.9):
        c = mv.gaussian_copula(rho)
        expected = 0.25 + math.asin(rho) / (2.0 * math.pi)
        assert c([0.5, 0.5]) == pytest.approx(expected, abs=1e-8)


def test_gaussian_copula_reduces_to_independence_at_zero():
    c = mv.gaussian_copula(0.0)
    u = np.random.default_rng(20).random((40, 2))
    np.testing.assert_array_equal(c(u), np.prod(u, axis=-1))


def test_gaussian_copula_symmetry_and_bounds():
    c = mv.gaussian_copula(0.6)
    u = np.random.default_rng(21).random((30, 2))
    swapped = u[:, ::-1]
    np.testing.assert_allclose(c(u), c(swapped), atol=1e-9)
    lo, up = mv.lower_frechet_bound(2), mv.upper_frechet_copula(2)
    vals = c(u)
    assert np.all(vals >= lo(u) - 1e-9)
    assert np.all(vals <= up(u) + 1e-9)
    with pytest.raises(ValueError, match="rho"):
        mv.gaussian_copula(1.0)


# ---------------------------------------------------------------------------
# population supremum for copula pairs


def test_extreme_pair_reaches_the_frechet_bound():
    value = mv.copula_population_r_infinity(
        mv.lower_frechet_bound(2), mv.upper_frechet_copula(2)
    )
    assert value == pytest.approx(math.sqrt(1.5), abs=1e-6)


def test_independence_vs_upper_frechet_matches_plod():
    value = mv.copula_population_r_infinity(
        mv.independence_copula(2), mv.upper_frechet_copula(2)
    )
    assert value == pytest.approx(mv.plod_bound(2), abs=1e-4)


def test_independence_vs_lower_bound_matches_nlod():
    for d in (2, 3):
        value = mv.copula_population_r_infinity(
            mv.independence_copula(d), mv.lower_frechet_bound(d)
        )
        assert value == pytest.approx(mv.nlod_bound(d), abs=1e-6)


def test_identical_copulas_give_one():
    c = mv.gaussian_copula(0.5)
    assert mv.copula_population_r_infinity(c, c) == 1.0


def test_positively_dependent_gaussian_stays_below_the_plod_bound():
    value = mv.copula_population_r_infinity(
        mv.gaussian_copula(0.9), mv.independence_copula(2)
    )
    assert 1.0 < value <= mv.plod_bound(2) + 1e-6


def test_plain_callables_need_an_explicit_dimension():
    fn = lambda u: np.prod(np.asarray(u), axis=-1)  # noqa: E731
    with pytest.raises(ValueError, match="d is required"):
        mv.copula_population_r_infinity(fn, fn)
    assert mv.copula_population_r_infinity(fn, fn, d=2) == 1.0


def test_copula_dimension_mismatch():
    with pytest.raises(ValueError, match="dimension"):
        mv.copula_population_r_infinity(
            mv.independence_copula(2), mv.independence_copula(3)
        )
