"""Exact laws and estimation: fixed points, pmfs, likelihoods, Monte Carlo.

Frozen reference numbers are derived by hand from the closed forms
(e.g. father_pmf(1, 0) = 75/512 at the standard parameters); identities
between independent routes (pmf vs likelihood, joint vs marginal, fixed
point vs closed form) serve as the main oracles.
"""

import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gwtrees.branching import SurvivalParams, survival_distribution
from gwtrees.errors import ConvergenceError, ModelError
from gwtrees.inference import (
    Estimates,
    extinction_probability,
    father_pmf,
    joint_pmf,
    likelihood,
    likelihood_total_mass,
    log_father_pmf,
    log_joint_pmf,
    log_likelihood,
    mc_compare,
    mgf_fixed_point,
    mle,
)

STANDARD = SurvivalParams(p0=0.5, p1=0.2, p2=0.3, q0=0.5, q1=0.2, q2=0.3)
PURE_SUBCRITICAL = SurvivalParams(p0=0.7, p1=0.0, p2=0.3, q0=0.7, q1=0.0, q2=0.3)
SUPERCRITICAL = SurvivalParams(p0=0.1, p1=0.1, p2=0.8, q0=0.1, q1=0.1, q2=0.8)

supercritical_params = st.builds(
    lambda p0, p1, q0, q1: (p0, p1, q0, q1),
    st.floats(0.01, 0.3),
    st.floats(0.0, 0.2),
    st.floats(0.01, 0.3),
    st.floats(0.0, 0.2),
).map(
    lambda t: SurvivalParams(
        p0=t[0], p1=t[1], p2=1.0 - t[0] - t[1], q0=t[2], q1=t[3], q2=1.0 - t[2] - t[3]
    )
).filter(lambda p: p.p0 * p.q0 < p.p2 * p.q2)


class TestMgfFixedPoint:
    def test_subcritical_limit_is_one(self):
        solution = mgf_fixed_point(survival_distribution(STANDARD), 0.0)
        assert solution.values == pytest.approx((1.0, 1.0), abs=1e-9)
        assert solution.iterations >= 1

    def test_supercritical_limit_is_extinction(self):
        pure = SurvivalParams(p0=0.2, p1=0.0, p2=0.8, q0=0.2, q1=0.0, q2=0.8)
        solution = mgf_fixed_point(survival_distribution(pure), 0.0)
        assert solution.values == pytest.approx(extinction_probability(pure), abs=1e-9)

    def test_solves_the_fixed_point_equations(self):
        dist = survival_distribution(STANDARD)
        for s in (-0.05, -0.2, -1.0):
            f1, f2 = mgf_fixed_point(dist, s).values
            w = math.exp(2.0 * s)
            lhs1 = STANDARD.p0 + STANDARD.p1 * w * f1 + STANDARD.p2 * w * w * f1 * f2
            lhs2 = STANDARD.q0 + STANDARD.q1 * w * f2 + STANDARD.q2 * w * w * f1 * f2
            assert f1 == pytest.approx(lhs1, abs=1e-10)
            assert f2 == pytest.approx(lhs2, abs=1e-10)

    def test_monotone_in_s(self):
        dist = survival_distribution(STANDARD)
        values = [mgf_fixed_point(dist, s).values[0] for s in (-2.0, -0.5, -0.1, -0.01, 0.0)]
        assert values == sorted(values)
        assert 0.0 < values[0] < values[-1] <= 1.0

    def test_rejects_bad_arguments(self):
        dist = survival_distribution(STANDARD)
        with pytest.raises(ValueError):
            mgf_fixed_point(dist, 0.1)
        with pytest.raises(ValueError):
            mgf_fixed_point(dist, math.nan)
        with pytest.raises(ValueError):
            mgf_fixed_point(dist, -0.1, tolerance=0.0)
        with pytest.raises(ValueError):
            mgf_fixed_point(dist, -0.1, max_iterations=0)

    def test_iteration_budget_enforced(self):
        with pytest.raises(ConvergenceError):
            mgf_fixed_point(survival_distribution(STANDARD), 0.0, max_iterations=3)


class TestExtinction:
    def test_finite_regime_is_certain(self):
        assert extinction_probability(STANDARD) == (1.0, 1.0)
        assert extinction_probability(PURE_SUBCRITICAL) == (1.0, 1.0)

    def test_frozen_supercritical_values(self):
        pure = SurvivalParams(p0=0.2, p1=0.0, p2=0.8, q0=0.2, q1=0.0, q2=0.8)
        assert extinction_probability(pure) == pytest.approx((0.25, 0.25), abs=1e-15)
        assert extinction_probability(SUPERCRITICAL) == pytest.approx((0.125, 0.125), abs=1e-15)

    @given(supercritical_params)
    @settings(max_examples=60)
    def test_closed_form_solves_the_offspring_equation(self, params):
        eta1, eta2 = extinction_probability(params)
        assert 0.0 < eta1 < 1.0 and 0.0 < eta2 < 1.0
        assert eta1 == pytest.approx(
            params.p0 + params.p1 * eta1 + params.p2 * eta1 * eta2, abs=1e-12
        )
        assert eta2 == pytest.approx(
            params.q0 + params.q1 * eta2 + params.q2 * eta1 * eta2, abs=1e-12
        )


class TestJointPmf:
    def test_frozen_values(self):
        assert joint_pmf(STANDARD, 1, 0, 0, 0) == pytest.approx(0.075, abs=1e-15)
        # N(3,2)=3 fathers arrangements, no survivals:
        # 3 * p0^2 p2^2 q0^2 q2 = 3 * 0.25 * 0.09 * 0.25 * 0.3
        assert joint_pmf(STANDARD, 2, 1, 0, 0) == pytest.approx(
            3 * 0.25 * 0.09 * 0.25 * 0.3, rel=1e-12
        )

    def test_marginalizing_survivals_gives_father_pmf(self):
        for n, m in [(1, 0), (1, 1), (2, 2), (3, 1)]:
            total = math.fsum(
                joint_pmf(STANDARD, n, m, s1, s2) for s1 in range(120) for s2 in range(120)
            )
            assert total == pytest.approx(father_pmf(STANDARD, n, m), rel=1e-10)

    def test_zero_survival_probability_empties_the_support(self):
        assert joint_pmf(PURE_SUBCRITICAL, 1, 1, 1, 0) == 0.0
        assert log_joint_pmf(PURE_SUBCRITICAL, 1, 1, 0, 2) == -math.inf
        assert joint_pmf(PURE_SUBCRITICAL, 1, 1, 0, 0) > 0.0

    def test_log_route_agrees(self):
        for n, m, s1, s2 in [(1, 0, 0, 0), (2, 1, 3, 2), (4, 4, 1, 0), (3, 5, 0, 7)]:
            assert math.exp(log_joint_pmf(STANDARD, n, m, s1, s2)) == pytest.approx(
                joint_pmf(STANDARD, n, m, s1, s2), rel=1e-12
            )

    def test_rejects_bad_counts_and_regimes(self):
        with pytest.raises(ValueError):
            joint_pmf(STANDARD, 0, 0, 0, 0)
        with pytest.raises(ValueError):
            joint_pmf(STANDARD, 1, -1, 0, 0)
        with pytest.raises(ValueError):
            joint_pmf(STANDARD, 1, 0, -1, 0)
        with pytest.raises(ModelError):
            joint_pmf(SUPERCRITICAL, 1, 0, 0, 0)


class TestFatherPmf:
    def test_frozen_value(self):
        assert father_pmf(STANDARD, 1, 0) == pytest.approx(75 / 512, abs=1e-15)

    def test_agrees_with_death_chance_likelihood(self):
        # Two independent routes to the same law: raw parameter powers
        # versus the (P, Q) Narayana likelihood.
        rng = random.Random(0)
        for _ in range(50):
            p0, p1 = rng.uniform(0.2, 0.6), rng.uniform(0.0, 0.2)
            q0, q1 = rng.uniform(0.2, 0.6), rng.uniform(0.0, 0.2)
            params = SurvivalParams(p0=p0, p1=p1, p2=1 - p0 - p1, q0=q0, q1=q1, q2=1 - q0 - q1)
            if params.p0 * params.q0 < params.p2 * params.q2:
                continue
            n, m = rng.randint(1, 60), rng.randint(0, 60)
            direct = father_pmf(params, n, m)
            via_likelihood = likelihood(params.P, params.Q, n, m)
            assert direct == pytest.approx(via_likelihood, rel=1e-12)

    def test_large_counts_use_a_stable_route(self):
        value = father_pmf(STANDARD, 220, 190)
        assert 0.0 < value < 1e-6
        assert math.exp(log_father_pmf(STANDARD, 220, 190)) == pytest.approx(value, rel=1e-9)
        assert log_father_pmf(STANDARD, 220, 190) == pytest.approx(
            log_likelihood(STANDARD.P, STANDARD.Q, 220, 190), rel=1e-12
        )

    def test_log_route_agrees(self):
        for n, m in [(1, 0), (2, 3), (7, 7), (30, 12)]:
            assert math.exp(log_father_pmf(STANDARD, n, m)) == pytest.approx(
                father_pmf(STANDARD, n, m), rel=1e-12
            )

    def test_rejects_bad_counts_and_regimes(self):
        with pytest.raises(ValueError):
            father_pmf(STANDARD, 0, 0)
        with pytest.raises(ModelError):
            father_pmf(SUPERCRITICAL, 1, 0)


class TestLikelihood:
    def test_frozen_values(self):
        assert likelihood(0.5, 0.2, 1, 0) == pytest.approx(0.05, abs=1e-15)
        assert likelihood(0.625, 0.625, 1, 0) == pytest.approx(75 / 512, abs=1e-15)

    def test_log_route_agrees(self):
        for P, Q, n, m in [(0.3, 0.8, 2, 5), (0.625, 0.625, 10, 10), (0.9, 0.2, 1, 0)]:
            assert math.exp(log_likelihood(P, Q, n, m)) == pytest.approx(
                likelihood(P, Q, n, m), rel=1e-12
            )

    def test_rejects_chances_outside_open_interval(self):
        for P, Q in [(0.0, 0.5), (1.0, 0.5), (0.5, 0.0), (0.5, 1.0), (-0.1, 0.5)]:
            with pytest.raises(ValueError):
                likelihood(P, Q, 1, 0)

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            likelihood(0.5, 0.5, 0, 0)
        with pytest.raises(ValueError):
            likelihood(0.5, 0.5, 1, -2)


class TestTotalMass:
    def test_proper_when_chances_cover_survival(self):
        total, shells = likelihood_total_mass(0.625, 0.625)
        assert total == pytest.approx(1.0, abs=1e-6)
        assert shells > 1

    def test_defective_mass_is_geometric(self):
        # For P + Q < 1 the law is defective with mass P / (1 - Q).
        total, _ = likelihood_total_mass(0.2, 0.2, shell_tolerance=1e-14)
        assert total == pytest.approx(0.25, abs=1e-9)

    def test_shell_budget_enforced(self):
        with pytest.raises(ConvergenceError):
            likelihood_total_mass(0.625, 0.625, max_shells=5)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            likelihood_total_mass(1.2, 0.5)
        with pytest.raises(ValueError):
            likelihood_total_mass(0.5, 0.5, shell_tolerance=0.0)
        with pytest.raises(ValueError):
            likelihood_total_mass(0.5, 0.5, max_shells=0)


class TestMle:
    def test_frozen_estimates(self):
        assert mle(3, 2) == Estimates(0.5, 0.6, 1.0, 2 / 3)
        assert mle(1, 0) == Estimates(0.5, 1.0, 1.0, 0.0)

    def test_estimates_maximize_the_grid(self):
        n, m = 3, 2
        grid = [round(0.01 * k, 2) for k in range(1, 100)]
        best = max(
            ((P, Q) for P in grid for Q in grid),
            key=lambda pq: log_likelihood(pq[0], pq[1], n, m),
        )
        estimates = mle(n, m)
        assert abs(best[0] - estimates.P) <= 0.01 + 1e-9
        assert abs(best[1] - estimates.Q) <= 0.01 + 1e-9

    @given(st.integers(1, 40), st.integers(0, 40))
    @settings(max_examples=40)
    def test_stationarity_of_the_closed_form(self, n, m):
        estimates = mle(n, m)
        h = 1e-6
        if 2 * h < estimates.P < 1 - 2 * h:
            derivative = (
                log_likelihood(estimates.P + h, 0.5, n, m)
                - log_likelihood(estimates.P - h, 0.5, n, m)
            ) / (2 * h)
            assert abs(derivative) < 1e-4
        if 2 * h < estimates.Q < 1 - 2 * h:
            derivative = (
                log_likelihood(0.5, estimates.Q + h, n, m)
                - log_likelihood(0.5, estimates.Q - h, n, m)
            ) / (2 * h)
            assert abs(derivative) < 1e-4

    @given(st.integers(1, 30), st.integers(0, 30), st.floats(0.05, 0.95), st.floats(0.05, 0.95))
    @settings(max_examples=40)
    def test_unimodal_in_each_coordinate(self, n, m, P, Q):
        # log-likelihood increases strictly before the estimate and
        # decreases strictly after it, in each coordinate separately
        estimates = mle(n, m)
        step = 1e-3
        if step < P < 1 - step:
            sign = math.copysign(1.0, estimates.P - P)
            before = log_likelihood(P, 0.5, n, m)
            after = log_likelihood(P + sign * step, 0.5, n, m)
            if abs(P - estimates.P) > step:
                assert after >= before
        if step < Q < 1 - step and estimates.Q < 1.0:
            sign = math.copysign(1.0, estimates.Q - Q)
            before = log_likelihood(0.5, Q, n, m)
            after = log_likelihood(0.5, Q + sign * step, n, m)
            if abs(Q - estimates.Q) > step:
                assert after >= before

    def test_rejects_bad_counts(self):
        with pytest.raises(ValueError):
            mle(0, 5)
        with pytest.raises(ValueError):
            mle(2, -1)


class TestMcCompare:
    def test_report_structure_and_determinism(self):
        report = mc_compare(STANDARD, replicates=4000, seed=99)
        again = mc_compare(STANDARD, replicates=4000, seed=99, threads=4)
        assert report == again
        assert report.replicates == 4000
        assert report.finite_fraction.cell == ()
        assert report.finite_fraction.theoretical == 1.0
        cells = [row.cell for row in report.father_cells]
        assert cells == sorted(cells)
        assert all(row.theoretical > 0.01 for row in report.father_cells)
        assert any(row.cell == (0, 0) for row in report.father_cells)
        assert 0.0 <= report.tv_distance <= 1.0
        assert report.max_abs_z >= max(abs(row.z) for row in report.father_cells)
        assert [row.s for row in report.mgf_rows] == [-0.05, -0.2]

    def test_close_agreement_at_moderate_scale(self):
        report = mc_compare(STANDARD, replicates=20_000, seed=7)
        assert report.truncated_count == 0
        assert report.max_abs_z < 4.5
        assert report.tv_distance < 0.03

    def test_swapped_root_mirrors_the_theory(self):
        # A type-2-rooted tree is the type swap of a type-1-rooted tree
        # under swapped parameters, reported in its own coordinates.
        params = SurvivalParams(p0=0.6, p1=0.1, p2=0.3, q0=0.4, q1=0.2, q2=0.4)
        swapped = SurvivalParams(p0=0.4, p1=0.2, p2=0.4, q0=0.6, q1=0.1, q2=0.3)
        report = mc_compare(params, replicates=100, seed=1, root_type=2)
        atom = next(row for row in report.father_cells if row.cell == (0, 0))
        assert atom.theoretical == pytest.approx(swapped.P, rel=1e-12)
        for row in report.father_cells:
            a, b = row.cell
            if (a, b) != (0, 0):
                assert row.theoretical == pytest.approx(father_pmf(swapped, b, a), rel=1e-12)

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            mc_compare(STANDARD, replicates=1, seed=0)
        with pytest.raises(ValueError):
            mc_compare(STANDARD, replicates=10, seed=0, root_type=3)
        with pytest.raises(ValueError):
            mc_compare(STANDARD, replicates=10, seed=0, mass_threshold=0.0)
        with pytest.raises(ModelError):
            mc_compare(SUPERCRITICAL, replicates=10, seed=0)
