import json

import numpy as np
import pytest

from gnheat import MaterialParams, Profile, Scenario, Source, StateI, StateIII, solve
from gnheat.audit import (
    BY_CONSTRUCTION,
    FAIL,
    PASS,
    AuditCheck,
    AuditReport,
    StateRate,
    audit_constitutive,
    audit_trajectory,
    check_obtuse_angle_type2,
    check_reduced_entropy,
    check_second_law,
    counterexample_state,
    entropy_fd_error,
    potential_flux_fd_error,
    reduced_entropy_terms,
    sample_rate,
    sample_states,
)
from gnheat.constitutive import Theory, eval_type3
from gnheat.errors import UsageError

from conftest import periodic_grid, sine_scenario

P = MaterialParams(lam=1.7, kappa=0.8, kappa_star=2.5, kappa_2star=0.6, theta0=1.3)


def test_report_registers_each_check_once_and_serialises():
    r = AuditReport(seed=7)
    r.add(AuditCheck("a", PASS, 0.0))
    with pytest.raises(ValueError):
        r.add(AuditCheck("a", FAIL, 1.0))
    r.add(AuditCheck("b", FAIL, 2.5, x=0.1, t=3.0))
    doc = json.loads(r.to_json())
    assert doc["seed"] == 7
    assert [set(c) >= {"check", "status", "residual", "x", "t"} for c in doc["checks"]] == [True, True]
    assert not r.passed and [c.check for c in r.failures] == ["b"]
    assert AuditReport.from_dict(doc).checks[1].t == 3.0


def test_sampler_is_seeded_and_in_range():
    a = sample_states("III", P, 1000, seed=3)
    b = sample_states("III", P, 1000, seed=3)
    np.testing.assert_array_equal(a.theta, b.theta)
    assert np.all((a.theta >= 0.1 * P.theta0) & (a.theta <= 10 * P.theta0))
    assert np.max(np.abs(a.grad_alpha)) <= 10.0
    assert sample_states("I", P, 5, dim=3).grad_theta.shape == (5, 3)


@pytest.mark.parametrize("theory", list(Theory))
def test_reduced_entropy_random_state(theory):
    # algebraic identity: the terms cancel to rounding
    states = sample_states(theory, P, 2000, seed=11)
    rate = sample_rate(theory, states, seed=12)
    assert np.max(check_reduced_entropy(theory, P, states, rate)) <= 1e-13


def test_reduced_entropy_scalar_state():
    res = check_reduced_entropy("I", P, StateI(2.0, -3.0), StateRate(0.7))
    assert np.ndim(res) == 0 and res <= 1e-15


def test_reduced_entropy_type2_needs_temperature_gradient():
    states = sample_states("II", P, 4)
    with pytest.raises(UsageError):
        check_reduced_entropy("II", P, states, StateRate(np.zeros(4)))


def test_reduced_entropy_detects_wrong_production():
    s = StateIII(0.0, 1.0, 1.0, -1.0)
    rate = StateRate(0.3, grad_theta_dot=0.1)
    assert check_reduced_entropy("III", P, s, rate) < 1e-15
    # swap in the production of a material without kappa_2star: the identity breaks
    terms = reduced_entropy_terms("III", P, s, rate)
    terms[-1] = s.theta * eval_type3(P.replace(kappa_2star=0.0), s).xi
    assert abs(sum(terms)) > 0.1


def test_second_law_type1_passes():
    rep = check_second_law("I", P, sample_states("I", P, 5000))
    assert rep.passed
    assert rep["second_law.heat_conduction[I]"].status == PASS


def test_second_law_type2_exact_zeros():
    rep = check_second_law("II", P, sample_states("II", P, 5000))
    assert rep["second_law.xi_nonnegative[II]"].residual == 0.0
    assert rep["second_law.dpsi_dalpha[II]"].residual == 0.0
    assert rep.passed


def test_second_law_type3_hand_counterexample():
    p = MaterialParams(lam=1.0, kappa=0.0, kappa_2star=1.0, theta0=1.0)
    sample = StateIII(np.array([0.0]), np.array([1.0]), np.array([1.0]), np.array([-1.0]))
    rep = check_second_law("III", p, sample)
    xi = rep["second_law.xi_nonnegative[III]"]
    assert xi.status == FAIL and xi.residual == 1.0
    assert xi.detail["witness"]["grad_alpha"] == 1.0
    assert rep["second_law.residual_inequality[III]"].residual == 1.0


def test_counterexample_always_found_when_kappa_2star_positive():
    rng = np.random.default_rng(5)
    for _ in range(20):
        p = MaterialParams(*np.exp(rng.uniform(np.log(0.1), np.log(10), 5)))
        assert eval_type3(p, counterexample_state(p)).xi < 0
        # a sample that cannot violate by itself
        quiet = StateIII(np.zeros(3), np.ones(3), np.zeros(3), np.ones(3))
        assert not check_second_law("III", p, quiet).passed
    with pytest.raises(UsageError):
        counterexample_state(MaterialParams())


def test_type3_without_kappa_2star_passes():
    p = P.replace(kappa_2star=0.0)
    assert check_second_law("III", p, sample_states("III", p, 5000)).passed


def test_sign_violating_moduli_are_flagged_by_construction():
    p = MaterialParams.unchecked(kappa=-1.0)
    rep = check_second_law("I", p, sample_states("I", p, 100))
    assert rep["second_law.xi_nonnegative[I]"].status == BY_CONSTRUCTION
    assert rep.passed  # not counted as a failure


def test_fd_restriction_checks():
    for theory in Theory:
        assert np.max(entropy_fd_error(theory, P, sample_states(theory, P, 2000))) < 1e-6
    assert np.max(potential_flux_fd_error(P, sample_states("II", P, 2000))) < 1e-6


def test_audit_constitutive_reports_only_expected_failures():
    rep = audit_constitutive(P, n=2000)
    failed = {c.check for c in rep.failures}
    assert failed == {"second_law.xi_nonnegative[III]", "second_law.residual_inequality[III]"}


# -- trajectories -------------------------------------------------------------


def test_type2_trajectory_has_zero_production():
    tr_sc = sine_scenario("TypeII_Alpha", n=64, t_end=3.0, stride=4, kappa_star=4.0)
    rep = audit_trajectory(solve(tr_sc), tr_sc)
    assert all(v == 0.0 for v in rep["second_law.min_xi"].detail["min_xi_per_snapshot"])
    assert rep.passed


def test_classical_trajectory_has_non_negative_production():
    sc = sine_scenario("Classical", n=64, t_end=0.5, stride=50, kappa=1.0)
    tr = solve(sc)
    assert np.all(tr.min_xi >= 0)
    assert audit_trajectory(tr, sc).passed


def test_type3_counterexample_trajectory_is_located():
    sc = sine_scenario("TypeIII_Full", n=64, t_end=2.0, stride=5, kappa=0.1, kappa_star=1.0, kappa_2star=0.5)
    sc = sc.with_changes(alpha_init=Profile.sine(0.0, -0.5))
    rep = audit_trajectory(solve(sc), sc)
    c = rep["second_law.min_xi"]
    assert c.status == FAIL and c.detail["min_xi"] < 0
    assert c.x is not None and c.t is not None


def test_obtuse_angle_standing_wave():
    sc = sine_scenario("TypeII_Alpha", n=128, t_end=6.0, stride=2, kappa_star=4.0)
    tr = solve(sc)
    c = check_obtuse_angle_type2(tr)
    assert c.status == PASS and c.detail["match_fraction"] >= 0.99 and c.detail["pairs"] > 1000
    # independent evaluation: q grad(theta) = -(kappa_star/2 theta0) theta d/dt |grad alpha|^2
    ga2 = np.gradient(tr.alpha, tr.grid.dx, axis=1) ** 2
    rate = np.gradient(ga2, tr.times, axis=0)
    lhs = tr.q * np.gradient(tr.theta, tr.grid.dx, axis=1)
    rhs = -(4.0 / 2.0) * tr.theta * rate
    inner = (slice(1, -1), slice(1, -1))
    assert np.max(np.abs(lhs[inner] - rhs[inner])) < 2e-3 * np.max(np.abs(lhs))
    growing = rate[inner] > 1e-3 * np.max(np.abs(rate))
    assert np.all(lhs[inner][growing] <= 0)


def test_obtuse_angle_uniform_state():
    sc = Scenario(periodic_grid(32), MaterialParams(kappa_star=1.0), "TypeII_Alpha", Profile.constant(2.0),
                  dt=0.05, t_end=1.0)
    tr = solve(sc)
    assert np.all(tr.q == 0) and np.all(tr.alpha[:, 1:] == tr.alpha[:, :-1])
    c = check_obtuse_angle_type2(tr)
    assert c.status == PASS and c.detail["pairs"] == 0


def test_obtuse_angle_rejects_other_models():
    sc = sine_scenario("Classical", n=32, t_end=0.01, kappa=1.0)
    with pytest.raises(UsageError):
        check_obtuse_angle_type2(solve(sc))


def test_budget_checks_pass_with_boundary_flux_and_source():
    from gnheat import BoundaryCondition, Grid1D
    g = Grid1D.from_length(64, 1.0, bc=BoundaryCondition.dirichlet(1.0, 1.5))
    sc = Scenario(g, MaterialParams(kappa=0.5, theta0=1.0), "TypeI_XiForm", Profile.constant(1.2),
                  dt=1e-4, t_end=0.1, output_stride=50, source=Source("gaussian", supply="s", amplitude=2.0,
                                                                     center=0.5, width=0.1))
    rep = audit_trajectory(solve(sc), sc)
    assert rep["budget.energy"].status == PASS
    assert rep["budget.entropy"].status == PASS
