import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.linalg import expm
from scipy.special import sici

from decohere import DomainError, NoDecayError, NumericError
from decohere.decoherence import (
    FeasibilityInput,
    closed_form_propagator,
    dephasing_curve,
    dephasing_exponents,
    discrete_s,
    estimate_decoherence_time,
    factor_oscillator,
    factor_two_level_exact,
    factor_two_level_thermal,
    factor_weak_coupling,
    feasibility,
    mode_angles,
    oracle_factor_unitary,
    product_factor,
    s_integral,
    scaling_exponent,
    weak_coupling_exponent,
)
from decohere.environment import (
    BathMode,
    DiscreteBath,
    OscillatorCoupling,
    SpectralDensity,
    ThermalState,
    build_uniform_bath,
    sample_bath,
)
from decohere.registers import BasisLabel, RegisterSpec

modes = st.builds(BathMode, st.floats(0.1, 5.0), st.floats(0.0, 3.0))
xis = st.floats(-6.0, 6.0)
times = st.floats(0.0, 20.0)

G = np.array([0, 1])  # |g> in the (e, g) ordering
E = np.array([1, 0])


def oracle_exact(mode, xa, xb, t):
    Ua = oracle_factor_unitary(mode, xa, t)
    Ub = oracle_factor_unitary(mode, xb, t)
    return G @ Ub.conj().T @ Ua @ G


def oracle_thermal(mode, xa, xb, t, beta):
    Ua = oracle_factor_unitary(mode, xa, t)
    Ub = oracle_factor_unitary(mode, xb, t)
    H = np.diag([mode.omega, -mode.omega])
    rho = expm(-beta * H)
    rho /= np.trace(rho)
    return np.trace(rho @ Ub.conj().T @ Ua)


def fock_factor(mode, f_a, f_b, t, dim=40):
    a = np.diag(np.sqrt(np.arange(1, dim)), 1)
    ad = a.T

    def evolve(f):
        H = mode.omega * ad @ a + f * mode.g * (ad + a)
        return expm(-1j * t * H)[:, 0]

    return np.vdot(evolve(f_b), evolve(f_a))


# --- mode angles and propagators -------------------------------------------

def test_mode_angles_examples():
    ang = mode_angles(BathMode(1.0, 0.0), 3.7)
    assert (ang.theta, ang.Omega) == (0.0, 1.0)
    ang = mode_angles(BathMode(1.0, 0.1), 2.0)
    assert ang.theta == pytest.approx(math.atan(0.2), rel=1e-15)
    assert ang.Omega == pytest.approx(math.sqrt(1.04), rel=1e-15)
    ang = mode_angles(BathMode(3.0, 4.0), 1.0)
    assert ang.Omega == pytest.approx(5.0, rel=1e-15)
    assert math.sin(ang.theta) == pytest.approx(0.8, rel=1e-15)


@given(modes, xis)
def test_mode_angles_invariants(mode, xi):
    ang = mode_angles(mode, xi)
    assert -math.pi / 2 < ang.theta < math.pi / 2
    assert ang.Omega >= mode.omega
    assert math.tan(ang.theta) == pytest.approx(xi * mode.g / mode.omega, rel=1e-12, abs=1e-15)


def test_oracle_unitary_examples():
    mode = BathMode(1.3, 0.4)
    assert np.allclose(oracle_factor_unitary(mode, 2.0, 0.0), np.eye(2), atol=1e-15)
    t = 0.77
    free = oracle_factor_unitary(BathMode(1.3, 0.0), 2.0, t)
    assert np.allclose(free, np.diag([np.exp(-1.3j * t), np.exp(1.3j * t)]), atol=1e-14)


@settings(max_examples=200)
@given(modes, xis, times)
def test_closed_form_propagator_matches_oracle(mode, xi, t):
    assert np.max(np.abs(closed_form_propagator(mode, xi, t)
                         - oracle_factor_unitary(mode, xi, t))) <= 1e-12


def test_propagator_broadcasts_over_time():
    mode = BathMode(0.9, 0.3)
    t = np.linspace(0, 5, 7)
    U = closed_form_propagator(mode, 1.5, t)
    assert U.shape == (7, 2, 2)
    assert np.allclose(U[3], closed_form_propagator(mode, 1.5, t[3]))


# --- exact two-level factor --------------------------------------------------

def test_exact_factor_examples():
    mode = BathMode(1.0, 0.1)
    t = np.linspace(0, 10, 11)
    assert np.all(factor_two_level_exact(mode, 1.5, 1.5, t) == 1)
    assert np.allclose(factor_two_level_exact(BathMode(2.0, 0.0), 2.0, -2.0, t), 1, atol=1e-15)
    theta = math.atan(0.2)
    Omega = math.sqrt(1.04)
    expected = 1 - 2 * math.sin(theta) ** 2 * np.sin(Omega * t) ** 2
    got = factor_two_level_exact(mode, 2.0, -2.0, t)
    assert np.allclose(got, expected, atol=1e-15, rtol=0)
    assert np.max(np.abs(got.imag)) <= 1e-16


@settings(max_examples=200)
@given(modes, xis, xis, times)
def test_exact_factor_matches_oracle_and_is_bounded(mode, xa, xb, t):
    F = factor_two_level_exact(mode, xa, xb, t)
    assert abs(F - oracle_exact(mode, xa, xb, t)) <= 1e-12
    assert abs(F) <= 1 + 1e-12
    assert abs(F - np.conj(factor_two_level_exact(mode, xb, xa, t))) <= 1e-14


# --- thermal factor ----------------------------------------------------------

@settings(max_examples=100)
@given(modes, xis, xis, times, st.floats(0.0, 20.0))
def test_thermal_factor_matches_gibbs_trace(mode, xa, xb, t, beta):
    F = factor_two_level_thermal(mode, xa, xb, t, ThermalState(beta))
    assert abs(F - oracle_thermal(mode, xa, xb, t, beta)) <= 1e-12
    assert abs(F) <= 1 + 1e-12
    Fc = factor_two_level_thermal(mode, xb, xa, t, ThermalState(beta))
    assert abs(F - np.conj(Fc)) <= 1e-14


@settings(max_examples=100)
@given(modes, xis, xis, times, st.floats(0.0, 50.0), st.floats(0.0, 50.0))
def test_thermal_real_part_is_temperature_independent(mode, xa, xb, t, b1, b2):
    F1 = factor_two_level_thermal(mode, xa, xb, t, ThermalState(b1))
    F2 = factor_two_level_thermal(mode, xa, xb, t, ThermalState(b2))
    F0 = factor_two_level_exact(mode, xa, xb, t)
    assert abs(F1.real - F2.real) <= 1e-12
    assert abs(F1.real - F0.real) <= 1e-12
    # only the imaginary part carries the polarization tanh(beta omega)
    assert abs(F1.imag - math.tanh(b1 * mode.omega) * F0.imag) <= 1e-12


def test_thermal_limits():
    mode = BathMode(1.2, 0.35)
    t = np.linspace(0, 8, 41)
    vac = factor_two_level_exact(mode, 1.0, -3.0, t)
    cold = factor_two_level_thermal(mode, 1.0, -3.0, t, ThermalState(vacuum=True))
    assert np.max(np.abs(cold - vac)) <= 1e-12
    very_cold = factor_two_level_thermal(mode, 1.0, -3.0, t, ThermalState(1e3))
    assert np.max(np.abs(very_cold - vac)) <= 1e-12
    hot = factor_two_level_thermal(mode, 1.0, -3.0, t, ThermalState(0.0))
    Ua = closed_form_propagator(mode, 1.0, t)
    Ub = closed_form_propagator(mode, -3.0, t)
    X = np.einsum("...ki,...kj->...ij", Ub.conj(), Ua)
    assert np.allclose(hot, 0.5 * (X[:, 0, 0] + X[:, 1, 1]), atol=1e-15)
    assert np.max(np.abs(hot.imag)) <= 1e-15


def test_thermal_symmetric_pair_matches_vacuum():
    mode = BathMode(0.8, 0.2)
    t = np.linspace(0, 10, 51)
    vac = factor_two_level_exact(mode, 2.0, -2.0, t)
    for beta in (0.0, 0.3, 5.0):
        F = factor_two_level_thermal(mode, 2.0, -2.0, t, ThermalState(beta))
        assert np.max(np.abs(F.real - vac.real)) <= 1e-12


# --- weak coupling -------------------------------------------------------------

def test_weak_coupling_diagonal_and_real_cases():
    mode = BathMode(1.0, 0.01)
    t = np.linspace(0, 10, 101)
    assert np.all(factor_weak_coupling(mode, 0.7, 0.7, t) == 1)
    F = factor_weak_coupling(mode, 3.0, -3.0, t, beta=0.4)
    assert np.all(F.imag == 0)


def _weak_vs_exact_errors(ratio):
    worst_re = worst_mod = 0.0
    for omega in (0.5, 1.0, 2.0):
        mode = BathMode(omega, ratio * omega)
        t = np.linspace(0, 10 / omega, 97)
        for xa, xb in [(2, -2), (3, 1), (1, -1), (0.5, -2.5)]:
            exact = factor_two_level_exact(mode, xa, xb, t)
            weak = factor_weak_coupling(mode, xa, xb, t)
            worst_re = max(worst_re, np.max(np.abs(exact.real - weak.real)))
            worst_mod = max(worst_mod, np.max(np.abs(np.abs(exact) - np.abs(weak))))
    return worst_re, worst_mod


def test_weak_coupling_agrees_with_exact_to_fourth_order():
    # on a bounded (w, xi, t) grid the real part and modulus errors scale as
    # (g/w)^4: halving g/w divides them by ~16
    ratios = [1e-2, 5e-3, 2.5e-3]
    errs = np.array([_weak_vs_exact_errors(r) for r in ratios])
    for col in errs.T:
        steps = col[:-1] / col[1:]
        assert np.all((steps > 14) & (steps < 18)), steps
    assert np.all(errs[0] <= 1e3 * ratios[0] ** 4)


@pytest.mark.parametrize("beta", [None, 0.2, 3.0])
def test_weak_coupling_phase_matches_exact_after_secular_term(beta):
    # exact phase = tanh * [secular shift (g^2/2w)(xa^2 - xb^2) t] + weak phase
    ratio = 1e-3
    mode = BathMode(1.0, ratio)
    t = np.linspace(0, 10, 201)
    xa, xb = 3.0, 1.0
    th = ThermalState(np.inf if beta is None else beta)
    exact = factor_two_level_thermal(mode, xa, xb, t, th)
    weak = factor_weak_coupling(mode, xa, xb, t, beta=beta)
    secular = th.polarization(1.0) * 0.5 * ratio ** 2 * (xa ** 2 - xb ** 2) * t
    # residual is O((g/w)^4 wt); a flipped sign would leave O((g/w)^2)
    assert np.max(np.abs(exact.imag - secular - weak.imag)) <= 1e-3 * ratio ** 2
    assert np.max(np.abs(weak.imag)) > 0.5 * th.polarization(1.0) * ratio ** 2


def test_weak_coupling_modulus_temperature_independence():
    t = np.linspace(0, 20, 401)
    for ratio in (1e-2, 1e-3):
        mode = BathMode(1.0, ratio)
        for xa, xb in [(2.0, 0.0), (3.0, -1.0), (4.0, 2.0)]:
            moduli = [np.abs(factor_weak_coupling(mode, xa, xb, t, beta=b))
                      for b in (0.01, 0.1, 1.0, 10.0, None)]
            spread = np.max(np.ptp(np.array(moduli), axis=0))
            # C = (xa^2 - xb^2)^2 / 32 bounds the tanh^2 term in |F|
            assert spread <= (xa ** 2 - xb ** 2) ** 2 / 32 * ratio ** 4 * 1.01


# --- oscillator bath ------------------------------------------------------------

def test_oscillator_diagonal_and_modulus():
    mode = BathMode(1.4, 0.2)
    t = np.linspace(0, 9, 37)
    assert np.all(factor_oscillator(mode, OscillatorCoupling(0.3, 0.3), t) == 1)
    F = factor_oscillator(mode, OscillatorCoupling(2.5, -1.5), t)
    expected = np.exp(-16 * 2 * (0.2 / 1.4) ** 2 * np.sin(1.4 * t / 2) ** 2)
    assert np.allclose(np.abs(F), expected, rtol=1e-14, atol=0)


@pytest.mark.parametrize("omega, g, f_a, f_b, t", [
    (1.0, 0.2, 1.0, -1.0, 0.7),
    (1.3, 0.26, 1.5, -0.7, 2.1),
    (0.7, 0.1, 2.0, 0.5, 5.0),
    (2.0, 0.3, -1.0, 1.0, 11.0),
    (1.0, 0.05, 3.0, 1.0, 17.3),
])
def test_oscillator_matches_truncated_fock(omega, g, f_a, f_b, t):
    mode = BathMode(omega, g)
    F = factor_oscillator(mode, OscillatorCoupling(f_a, f_b), t)
    assert abs(F - fock_factor(mode, f_a, f_b, t)) <= 1e-6


def test_oscillator_phase_sign_is_pinned():
    # the phase is +(f_a^2 - f_b^2)(g^2/w)[t - sin(wt)/w]; the opposite sign
    # convention differs from the Fock-space result by far more than 1e-6
    mode = BathMode(1.0, 0.2)
    t = 2.0
    F = factor_oscillator(mode, OscillatorCoupling(2.0, 0.0), t)
    fock = fock_factor(mode, 2.0, 0.0, t)
    expected_phase = 4 * 0.04 * (t - math.sin(t))
    assert np.angle(F) == pytest.approx(expected_phase, abs=1e-12)
    assert abs(np.angle(fock) - expected_phase) <= 1e-6
    flipped = np.abs(F) * np.exp(-1j * 4 * 0.04 * (t + math.sin(t)))
    assert abs(flipped - fock) > 1e-2


@settings(max_examples=100)
@given(modes, st.floats(-4, 4), st.floats(-4, 4), times)
def test_oscillator_bounded_and_hermitian(mode, fa, fb, t):
    F = factor_oscillator(mode, OscillatorCoupling(fa, fb), t)
    assert abs(F) <= 1 + 1e-12
    Fc = factor_oscillator(mode, OscillatorCoupling(fb, fa), t)
    assert abs(F - np.conj(Fc)) <= 1e-12


# --- products over the bath -------------------------------------------------------

def test_product_uniform_bath_is_power():
    mode = BathMode(1.0, 0.1)
    t = np.linspace(0, 6, 25)
    one = factor_two_level_exact(mode, 2.0, -2.0, t)
    for N in (1, 7, 100):
        F = product_factor(build_uniform_bath(N, 1.0, 0.1), factor_two_level_exact, t,
                           xi_a=2.0, xi_b=-2.0)
        assert np.allclose(np.abs(F), np.abs(one) ** N, rtol=1e-12, atol=0)


def test_product_matches_closed_log_sum():
    bath = DiscreteBath.from_arrays([0.5, 1.0, 1.7, 3.0], [0.05, 0.2, 0.1, 0.4])
    t = np.linspace(0, 12, 61)
    F = product_factor(bath, factor_two_level_exact, t, xi_a=2.0, xi_b=-2.0)
    Om = np.sqrt(4 * bath.gs ** 2 + bath.omegas ** 2)
    expected = np.exp(np.sum(np.log(np.abs(
        1 - 8 * (bath.gs / Om) ** 2 * np.sin(np.multiply.outer(t, Om)) ** 2)), axis=1))
    assert np.allclose(np.abs(F), expected, rtol=1e-12, atol=0)


def test_product_recurrence_weak_form():
    bath = build_uniform_bath(1000, 1.0, 0.01)
    k = np.arange(0, 6)
    F = product_factor(bath, factor_weak_coupling, 2 * np.pi * k, xi_a=2.0, xi_b=-2.0)
    assert np.max(np.abs(np.abs(F) - 1)) <= 1e-9


def test_exact_recurrence_at_dressed_period():
    # for xi = +-2 both dressed frequencies coincide, so |F| = 1 at Omega t = k pi
    bath = build_uniform_bath(100, 1.0, 0.1)
    Omega = mode_angles(bath.modes[0], 2.0).Omega
    k = np.arange(0, 5)
    F = product_factor(bath, factor_two_level_exact, k * np.pi / Omega, xi_a=2.0, xi_b=-2.0)
    assert np.max(np.abs(np.abs(F) - 1)) <= 1e-12
    # but not at omega t = 2 k pi
    F = product_factor(bath, factor_two_level_exact, 2 * np.pi * k[1:], xi_a=2.0, xi_b=-2.0)
    assert np.all(np.abs(F) < 1 - 1e-3)


def test_exact_exponent_ratio_tends_to_l_squared():
    t = np.linspace(0.3, 2.5, 12)
    gaps = []
    for g in (0.04, 0.02, 0.01):
        bath = DiscreteBath.from_arrays([0.7, 1.0, 1.6], [g, g, g])
        one = -np.log(np.abs(product_factor(bath, factor_two_level_exact, t, xi_a=1.0, xi_b=-1.0)))
        four = -np.log(np.abs(product_factor(bath, factor_two_level_exact, t, xi_a=4.0, xi_b=-4.0)))
        gaps.append(np.max(np.abs(four / one - 16)))
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 0.1


def test_product_no_underflow_for_huge_bath():
    bath = DiscreteBath((BathMode(1.0, 0.3),) * 10 + (BathMode(2.0, 0.3),) * 10)
    many = DiscreteBath(bath.modes * 5000)
    F = product_factor(many, factor_two_level_exact, 0.9, xi_a=2.0, xi_b=-2.0)
    assert F == 0 or np.isfinite(F)
    delta = dephasing_exponents(bath, factor_two_level_exact, 0.9, xi_a=2.0, xi_b=-2.0)
    assert np.isfinite(delta.sum())


@settings(max_examples=50)
@given(st.lists(modes, min_size=1, max_size=12), xis, xis, times)
def test_exponents_are_additive(mode_list, xa, xb, t):
    bath = DiscreteBath(tuple(mode_list))
    F = product_factor(bath, factor_two_level_exact, t, xi_a=xa, xi_b=xb)
    deltas = dephasing_exponents(bath, factor_two_level_exact, t, xi_a=xa, xi_b=xb)
    assert np.all(deltas >= -1e-15)
    if np.all(np.isfinite(deltas)):
        assert abs(-np.log(abs(F)) - deltas.sum()) <= 1e-10 * max(1.0, deltas.sum())


def test_dephasing_curve():
    bath = build_uniform_bath(10, 1.0, 0.05)
    t = np.linspace(0, 5, 11)
    curve = dephasing_curve(bath, factor_two_level_exact, t, keep_deltas=True,
                            xi_a=2.0, xi_b=-2.0)
    assert curve.s_values[0] == 0
    assert np.all(curve.s_values >= 0)
    assert np.allclose(curve.s_values, curve.deltas.sum(axis=0), atol=1e-12)
    with pytest.raises(DomainError):
        dephasing_curve(bath, factor_two_level_exact, t[::-1], xi_a=2.0, xi_b=-2.0)


# --- dephasing integral ------------------------------------------------------------

def flat_closed_form(gamma, cutoff, t):
    # int_0^W sin^2(wt)/w^2 dw = t Si(2Wt) - sin^2(Wt)/W
    return 8 * gamma / np.pi * (t * sici(2 * cutoff * t)[0] - np.sin(cutoff * t) ** 2 / cutoff)


def ohmic_closed_form(eta, cutoff, t):
    return 16 * eta / np.pi * (cutoff / 2 - np.sin(2 * cutoff * t) / (4 * t))


def test_s_integral_zero_time():
    assert s_integral(SpectralDensity.flat(0.5, 100.0), 0.0) == 0.0


@pytest.mark.parametrize("t", [0.01, 0.3, 1.0, 4.9])
def test_s_integral_flat_matches_sine_integral(t):
    sd = SpectralDensity.flat(0.5, 1e3)
    assert s_integral(sd, t) == pytest.approx(flat_closed_form(0.5, 1e3, t), rel=1e-9)


@pytest.mark.parametrize("cutoff, t", [(10.0, 1.0), (100.0, 0.37), (1e3, 2.0)])
def test_s_integral_ohmic_closed_form(cutoff, t):
    sd = SpectralDensity.ohmic(0.1, cutoff)
    assert s_integral(sd, t) == pytest.approx(ohmic_closed_form(0.1, cutoff, t), rel=1e-9)


def test_s_integral_flat_is_linear_at_large_cutoff():
    gamma = 0.25
    t = np.array([0.5, 1.0, 2.0, 3.0])
    S = s_integral(SpectralDensity.flat(gamma, 1e3), t)
    assert np.allclose(S / t, 4 * gamma, rtol=2e-3)


def test_s_integral_tabulated_matches_flat():
    cutoff = 50.0
    flat = SpectralDensity.flat(0.3, cutoff)
    tab = SpectralDensity.tabulated([0.0, 10.0, cutoff], [0.3 / np.pi] * 3)
    t = np.array([0.2, 1.0, 3.0])
    assert np.allclose(s_integral(tab, t), s_integral(flat, t), rtol=1e-9)


def test_s_integral_reports_non_convergence():
    sd = SpectralDensity.flat(0.5, 1e6)
    with pytest.raises(NumericError, match="chunks"):
        s_integral(sd, 1e3)


def test_sampled_bath_converges_to_integral():
    sd = SpectralDensity.flat(0.5, 20.0)
    t = 1.3
    exact = s_integral(sd, t)
    errors = [abs(discrete_s(sample_bath(sd, N), t) - exact) for N in (50, 100, 200, 400)]
    for a, b in zip(errors, errors[1:]):
        assert b <= a / 1.9


# --- exponents, scaling and decoherence time ------------------------------------

def test_scaling_exponent_examples():
    two = RegisterSpec([1, 1])
    assert scaling_exponent(two, BasisLabel.from_bits((1, 0)), BasisLabel.from_bits((1, 0))) == 0
    assert scaling_exponent(two, BasisLabel.from_bits((1, 1)), BasisLabel.from_bits((0, 0))) == 8
    for L in (1, 3, 8):
        spec = RegisterSpec.identical(L)
        ones = BasisLabel.from_bits((1,) * L)
        zeros = BasisLabel.from_bits((0,) * L)
        assert scaling_exponent(spec, ones, zeros) == 2 * L ** 2


def test_weak_coupling_exponent_matches_product_modulus():
    bath = DiscreteBath.from_arrays([0.5, 1.0, 2.0], [1e-3, 2e-3, 1e-3])
    t = np.linspace(0, 10, 51)
    S = weak_coupling_exponent(bath, 3.0, -1.0, t)
    F = product_factor(bath, factor_two_level_exact, t, xi_a=3.0, xi_b=-1.0)
    assert np.max(np.abs(-np.log(np.abs(F)) - S)) <= 1e-3 * S.max()
    assert np.allclose(discrete_s(bath, t), weak_coupling_exponent(bath, 2.0, -2.0, t))


def test_estimate_decoherence_time_exact_exponential():
    t = np.linspace(0.1, 10, 40)
    fit = estimate_decoherence_time(t, np.exp(-0.5 * t))
    assert fit.t_d == pytest.approx(2.0, abs=1e-9)
    assert fit.residual <= 1e-12


def test_estimate_decoherence_time_errors():
    t = np.linspace(0.1, 1, 5)
    with pytest.raises(NoDecayError):
        estimate_decoherence_time(t, np.ones(5))
    with pytest.raises(DomainError):
        estimate_decoherence_time(t[:2], [0.9, 0.8])
    with pytest.raises(DomainError):
        estimate_decoherence_time(t, np.zeros(5))


def test_flat_spectrum_decoherence_time():
    gamma = 0.5
    t = np.linspace(0.05, 5, 60)
    S = s_integral(SpectralDensity.flat(gamma, 1e3), t)
    fit = estimate_decoherence_time(t, np.exp(-S))
    assert fit.t_d == pytest.approx(1 / (4 * gamma), rel=1e-2)


# --- feasibility ------------------------------------------------------------------------

def test_feasibility_examples():
    v = feasibility(FeasibilityInput(10, 1e-6, 1000, 1.0))
    assert v.feasible and v.margin == pytest.approx(0.9, rel=1e-12)
    assert v.report() == "FEASIBLE margin=0.9"
    assert not feasibility(FeasibilityInput(10, 1e-6, 1000, 0.05)).feasible
    nuclear = feasibility(FeasibilityInput(10, 1e-6, 1e6, 1e4))
    electron = feasibility(FeasibilityInput(10, 1e-6, 1e6, 1e-12))
    assert nuclear.feasible and not electron.feasible
    with pytest.raises(DomainError):
        FeasibilityInput(10, 0.0, 1, 1)
