import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gnheat.constitutive import (
    MaterialParams,
    StateI,
    StateII,
    StateIII,
    Theory,
    eval_classic,
    eval_type1,
    eval_type2,
    eval_type3,
    evaluate,
    free_energy_partials,
    xi_from_restrictions,
)
from gnheat.errors import DomainError, UsageError

moduli = st.floats(0.1, 10.0)
temps = st.floats(0.05, 50.0)
grads = st.floats(-10.0, 10.0)


def test_type1_hand_values():
    p = MaterialParams(lam=1.0, kappa=1.0, theta0=1.0)
    r = eval_type1(p, StateI(2.0, 3.0))
    # psi=-theta^2/2, eta=theta, h=-g, q=theta h, xi=g^2/theta
    assert (r.psi, r.eta, r.eps, r.h, r.q, r.xi) == (-2.0, 2.0, 2.0, -3.0, -6.0, 4.5)


def test_classic_hand_values():
    p = MaterialParams(lam=2.0, kappa=3.0)
    r = eval_classic(p, StateI(math.e, 1.0))
    assert r.psi == pytest.approx(0.0, abs=1e-15)
    assert r.eta == pytest.approx(2.0)
    assert r.q == pytest.approx(-3.0)
    assert r.h == pytest.approx(-3.0 / math.e)
    assert r.xi == pytest.approx(3.0 / math.e**2)


def test_type2_hand_values_and_zero_production():
    p = MaterialParams(lam=1.0, kappa_star=4.0, theta0=2.0)
    r = eval_type2(p, StateII(0.3, 2.0, 1.5))
    assert r.psi == pytest.approx(-1.0 + 0.5 * 2.0 * 2.25)
    assert r.h == pytest.approx(-3.0)
    assert r.q == pytest.approx(-6.0)
    assert r.xi == 0.0


def test_type3_counterexample_hand_value():
    p = MaterialParams(lam=1.0, kappa_2star=1.0, theta0=1.0)
    assert eval_type3(p, StateIII(0.0, 1.0, 1.0, -1.0)).xi == -1.0


def test_type3_reduces_to_type2_without_extra_moduli():
    p = MaterialParams(lam=1.3, kappa_star=2.0, theta0=0.7)
    s3 = StateIII(0.2, 1.1, np.array([0.4, -2.0]), np.array([3.0, 1.0]))
    r3, r2 = eval_type3(p, s3), eval_type2(p, s3.project())
    for name in ("psi", "eta", "eps", "q", "h", "xi"):
        np.testing.assert_array_equal(getattr(r3, name), getattr(r2, name))


def test_vector_states_follow_shape_convention():
    p = MaterialParams(kappa=2.0)
    g = np.array([[1.0, 2.0, 2.0], [0.0, 0.0, 1.0]])
    r = eval_type1(p, StateI(np.array([1.0, 2.0]), g))
    assert r.q.shape == (2, 3)
    np.testing.assert_allclose(r.xi, [2.0 * 9.0 / 1.0, 2.0 * 1.0 / 2.0])


@pytest.mark.parametrize("theta", [0.0, -1.0, np.array([1.0, -0.1])])
def test_non_positive_temperature_rejected(theta):
    with pytest.raises(DomainError):
        StateI(theta, 1.0)
    with pytest.raises(DomainError):
        StateIII(0.0, theta, 0.0, 0.0)


def test_negative_moduli_need_unchecked():
    with pytest.raises(DomainError):
        MaterialParams(kappa=-1.0)
    p = MaterialParams.unchecked(kappa=-1.0)
    assert p.sign_violations == ["kappa"]
    assert p.replace(lam=2.0).is_unchecked
    assert eval_type1(p, StateI(1.0, 1.0)).xi == -1.0


@pytest.mark.parametrize("bad", [dict(lam=0.0), dict(theta0=-1.0), dict(kappa=math.nan)])
def test_invalid_params(bad):
    with pytest.raises(DomainError):
        MaterialParams(**bad)


def test_theory_state_mismatch_is_usage_error():
    p = MaterialParams()
    with pytest.raises(UsageError):
        xi_from_restrictions(Theory.TYPE_II, p, StateI(1.0, 0.0))
    with pytest.raises(UsageError):
        evaluate("III", p, StateII(0.0, 1.0, 0.0))


def test_mixed_vector_layout_rejected():
    with pytest.raises(UsageError):
        eval_type3(MaterialParams(), StateIII(0.0, 1.0, np.array([1.0, 2.0]), 1.0))


@settings(max_examples=200, deadline=None)
@given(lam=moduli, kappa=moduli, ks=moduli, k2=moduli, t0=moduli, theta=temps, ga=grads, gt=grads)
def test_exact_identities_hold_bitwise(lam, kappa, ks, k2, t0, theta, ga, gt):
    p = MaterialParams(lam, kappa, ks, k2, t0)
    states = {
        Theory.CLASSIC: StateI(theta, gt),
        Theory.TYPE_I: StateI(theta, gt),
        Theory.TYPE_II: StateII(0.0, theta, ga),
        Theory.TYPE_III: StateIII(0.0, theta, ga, gt),
    }
    for theory, state in states.items():
        r = evaluate(theory, p, state)
        assert r.eps == r.psi + theta * r.eta
        assert r.q == theta * r.h


@settings(max_examples=200, deadline=None)
@given(lam=moduli, kappa=moduli, t0=moduli, theta=temps, gt=grads)
def test_type1_production_non_negative(lam, kappa, t0, theta, gt):
    p = MaterialParams(lam, kappa, 0.0, 0.0, t0)
    assert eval_type1(p, StateI(theta, gt)).xi >= 0.0
    assert eval_classic(p, StateI(theta, gt)).xi >= 0.0


@settings(max_examples=200, deadline=None)
@given(ks=moduli, t0=moduli, theta=temps, ga=grads, gt=grads)
def test_type2_heat_conduction_sign(ks, t0, theta, ga, gt):
    # q . grad(theta) = -(kappa_star/theta0) theta grad(alpha) . grad(theta)
    q = eval_type2(MaterialParams(kappa_star=ks, theta0=t0), StateII(0.0, theta, ga)).q
    if ga * gt < 0:
        assert q * gt > 0
    else:
        assert q * gt <= 0


def test_partials_match_closed_forms():
    p = MaterialParams(lam=2.0, kappa_star=3.0, theta0=1.5)
    d = free_energy_partials(Theory.TYPE_III, p, StateIII(0.0, 3.0, 0.5, 1.0))
    assert d.d_theta == pytest.approx(-4.0)
    assert d.d_alpha == 0.0
    assert d.d_grad_alpha == pytest.approx(1.0)
    assert free_energy_partials("classic", p, StateI(1.0, 0.0)).d_theta == 0.0
