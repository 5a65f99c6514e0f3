import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import expected as E
from helpers import ripple_peak_to_peak
from ringdeco import gaussian, probe
from ringdeco.dynamics import PureDecoherence, Thermalization
from ringdeco.model import derive_dimensionless, load_scenario


def test_interaction_fraction_examples():
    assert probe.interaction_fractions(3.0, 3.0)[0] == 0.25
    R, Rbar = probe.interaction_fractions(2 * math.pi * 1e4, 2 * math.pi * 5e7)
    assert R == pytest.approx(E.R_RB, rel=1e-12)
    assert probe.interaction_fractions(0.0, 1.0) == (0.0, 1.0)


def test_interaction_fraction_maximum_at_g_equals_kappa():
    g = np.logspace(-3, 3, 6001)
    R, Rbar = probe.interaction_fractions(g, 1.0)
    assert g[np.argmax(R)] == pytest.approx(1.0, rel=2e-3)
    assert R.max() <= 0.25
    assert np.all(R + Rbar <= 1.0 + 1e-15)
    assert R / (R + Rbar) == pytest.approx(g**2 / (g**2 + 1), rel=1e-12)


def test_envelope_examples():
    assert probe.odd_mode_envelope(0.3, 1.0, 0.0) == 0.0
    assert probe.odd_mode_envelope(0.3, 1.0, 60.0) == pytest.approx(0.3 / 1.09, rel=1e-14)
    assert probe.odd_mode_envelope(2.0, 2.0, 0.5) * 2.0 == pytest.approx(E.ENVELOPE_G_EQ_K, rel=1e-13)


def test_integrated_envelope_rate():
    r = probe.integrated_envelope_rate(0.01, 1.0, 1000.0)
    assert r == pytest.approx(E.RATE_KT1E3_G001, rel=1e-6)
    assert abs(r / E.R_G001 - 1) < 0.01
    short = probe.integrated_envelope_rate(1.0, 1.0, 10.0)
    assert short == pytest.approx(E.RATE_KT10_G1, rel=1e-6)
    assert 0 < short < 0.25
    assert probe.integrated_envelope_rate(1.0, 1.0, 0.0) == 0.0


def test_mean_count_examples(rb):
    R, Rbar = probe.interaction_fractions(rb.g_over_kappa, 1.0)
    n_o, _ = probe.mean_counts(R, Rbar, 1e9, 0.5)
    assert n_o == pytest.approx(20.0, rel=1e-6)
    resp = probe.probe_response(1.0, rb.eps, rb.g_over_kappa, rb.n_in)
    assert resp.n_odd == pytest.approx(E.NO0_RB, rel=1e-12)
    assert resp.var_odd == pytest.approx(E.VAR0_RB, rel=1e-9)
    assert resp.regime == "intermediate"
    assert probe.mean_counts(R, Rbar, 1e9, 0.0) == (0.0, pytest.approx((R + Rbar) * 1e9))


@settings(max_examples=200, deadline=None)
@given(g=st.floats(0, 1e3), X=st.floats(1e-3, 1e4), eps=st.floats(1e-6, 1.0), n=st.floats(1, 1e12))
def test_port_bookkeeping_and_signs(g, X, eps, n):
    r = probe.probe_response(X, eps, g, n)
    assert 0 <= r.R <= 0.25 and r.R + r.Rbar <= 1 + 1e-15
    assert r.n_odd >= 0 and r.n_even >= 0 and r.var_odd >= 0
    assert r.n_odd + r.n_even == pytest.approx((r.R + r.Rbar) * n, rel=1e-12)


def test_variance_limits():
    n = 1e6
    s2, s4 = gaussian.expect_sin2(1.0, 0.01), gaussian.expect_sin4(1.0, 0.01)
    exact = probe.counts_variance(1.0, n, s2, s4)
    ld = probe.lamb_dicke_variance(1.0, n, 0.01, 1.0)
    assert exact / ld == pytest.approx(E.VAR_RATIO_EXACT_OVER_LD, rel=1e-9)
    assert abs(exact / ld - 1) <= 0.15
    R = 4e-8
    assert probe.counts_variance(R, 1e9, 0.5, 0.375) == pytest.approx(probe.anti_lamb_dicke_variance(R, 1e9), rel=1e-12)
    assert probe.counts_variance(R, 0.0, 0.3, 0.2) == 0.0


def test_poisson_variance_model():
    v = probe.counts_variance(0.1, 100.0, 0.25, 0.1, model="poisson")
    assert v == pytest.approx(0.01 * 1e4 * (0.1 - 0.0625) + 0.1 * 100 * 0.25)
    with pytest.raises(ValueError):
        probe.counts_variance(0.1, 100.0, 0.25, 0.1, model="gamma")


def test_negative_variance_is_an_error():
    with pytest.raises(probe.VarianceError):
        probe.counts_variance(1.0, 10.0, 0.5, 0.1)


def test_oscillation_amplitude_examples():
    assert probe.oscillation_amplitude(1e9, 4.0e-8, 0.073, 0.02) == pytest.approx(0.4672, rel=1e-12)
    assert probe.oscillation_amplitude(1e9, 4.0e-8, 0.073, 0.0) == 0.0
    assert probe.oscillation_amplitude(2e9, 4.0e-8, 0.073, 0.02) == 2 * probe.oscillation_amplitude(1e9, 4.0e-8, 0.073, 0.02)


def test_contrast_examples():
    assert probe.contrast(0.02, 1.0, 0.0) == pytest.approx(0.04)
    assert probe.contrast(0.02, 3.0, 3.0 / 0.02) == pytest.approx(probe.contrast(0.02, 3.0, 0.0) / 2)
    assert probe.contrast(0.1, 41.7, 0.0) == pytest.approx(4.8e-3, abs=1e-4)


def test_single_shot_snr():
    s, n = probe.snr_single(0.04, 1e9)
    assert s == pytest.approx(0.0283, abs=1e-4)
    assert n == pytest.approx(1.25e4, rel=1e-6)
    assert probe.snr_single(0.04, math.inf)[0] == pytest.approx(0.04 / math.sqrt(2))
    assert probe.snr_single(0.0, 1e9) == (0.0, math.inf)


def test_spectral_design_table_two(nano):
    d = probe.snr_spectral(nano.gamma, nano.nbar0, nano.omega_tau)
    assert d.max_snr == pytest.approx(E.MAX_SNR_NANO, rel=1e-10)
    assert d.t_opt / nano.omega * 1e6 == pytest.approx(E.T_OPT_NANO_US, rel=1e-10)
    assert d.n_ex_total == pytest.approx(E.N_EX_NANO, rel=1e-10)


def test_spectral_design_table_one(rb):
    d = probe.snr_spectral(rb.gamma, rb.nbar0, rb.omega_tau)
    assert d.max_snr == pytest.approx(E.MAX_SNR_RB, rel=1e-10)
    assert d.n_ex_total == pytest.approx(E.N_EX_RB, rel=1e-10)


@pytest.mark.parametrize("gamma,nbar0,wt", [(0.02, 1.0, 6.283e-3), (0.1, 41.68, 0.1885), (0.005, 3.0, 0.01)])
def test_spectral_maximum(gamma, nbar0, wt):
    # The implemented S/N(T) peaks at 2 T_opt; its peak value is the closed-form max S/N.
    d = probe.snr_spectral(gamma, nbar0, wt)
    T = d.t_opt * np.logspace(-2, 2, 40001)
    snr = probe.spectral_snr(gamma, nbar0, wt, T)
    i = int(np.argmax(snr))
    assert T[i] == pytest.approx(2 * d.t_opt, rel=5e-4)
    assert snr[i] == pytest.approx(d.max_snr, rel=1e-6)


def test_massive_limits_table_two(nano):
    lim = probe.massive_limits(nano.gamma, nano.nbar0, nano.omega_tau)
    assert lim.max_snr == pytest.approx(E.MASSIVE_MAX_SNR_NANO, rel=1e-10)
    assert lim.n_ex == pytest.approx(E.MASSIVE_N_EX_NANO, rel=1e-10)
    assert lim.t_opt / nano.omega * 1e6 == pytest.approx(E.MASSIVE_T_OPT_NANO_US, rel=1e-10)
    exact = probe.snr_spectral(nano.gamma, nano.nbar0, nano.omega_tau)
    assert abs(lim.max_snr / exact.max_snr - 1) < 0.005
    for a, b in ((lim.max_snr, exact.max_snr), (lim.t_opt, exact.t_opt), (lim.n_ex, exact.n_ex_total)):
        assert abs(a / b - 1) <= 2 / nano.nbar0


def test_massive_limits_warn_for_cold_objects():
    with pytest.warns(UserWarning, match="nbar0"):
        lim = probe.massive_limits(0.1, 2.0, 0.1)
    assert lim.max_snr > 0


def test_massive_n_ex_quadratic_in_temperature():
    y = 0.01
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a = probe.massive_limits(0.1, 1 / math.tanh(y), 0.1)
        b = probe.massive_limits(0.1, 1 / math.tanh(y / 2), 0.1)
    assert b.n_ex / a.n_ex == pytest.approx(4.0, rel=1e-12)


def test_max_snr_is_mass_independent():
    cfg = load_scenario("nanoparticle")
    base = probe.design_summary(derive_dimensionless(cfg)).max_snr
    for factor in (1e-3, 1e3, 1e6):
        p = derive_dimensionless(cfg.replace(mass=cfg.mass * factor))
        assert abs(probe.design_summary(p).max_snr / base - 1) <= 1e-12


def test_design_summary_invariants(rb, nano):
    for p in (rb, nano):
        d = probe.design_summary(p)
        assert all(v >= 0 for v in d.to_dict().values())
        assert d.contrast <= 1


def test_analytic_curve_table_one(rb):
    th = np.linspace(0, rb.seconds_to_theta(300e-6), 2000)
    c = probe.analytic_signal_curve(rb, th)
    assert c.mean_no[0] == pytest.approx(E.NO0_RB, rel=1e-12)
    assert c.mean_no.max() <= 20.0 + 1e-6
    assert c.mean_no[-1] > 15
    assert np.all(c.var_no >= 0)
    assert c.t_p[-1] == pytest.approx(300e-6)


def test_analytic_curve_zero_gamma_is_constant(rb):
    c = probe.analytic_signal_curve(rb, np.linspace(0, 20, 50), PureDecoherence(0.0))
    assert np.ptp(c.mean_no) == 0.0


def test_thermal_curve_is_monotone(rb):
    env = Thermalization(0.02 / 99, 100.0)
    c = probe.analytic_signal_curve(rb, np.linspace(0, 100, 4001), env)
    assert np.all(np.diff(c.mean_no) > 0)


def test_ripple_matches_oscillation_amplitude_in_lamb_dicke(rb):
    # deep Lamb-Dicke version of the Rb scenario: the first-order ripple formula applies
    p = rb.replace(eps=1e-3)
    R, _ = probe.interaction_fractions(p.g_over_kappa, 1.0)
    expected = probe.oscillation_amplitude(p.n_in, R, p.eps, p.gamma)
    for theta0 in (0.0, 10 * math.pi):
        pp = ripple_peak_to_peak(theta0, lambda th: probe.analytic_signal_curve(p, th).mean_no)
        assert abs(pp / expected - 1) < 0.05


def test_signal_curve_requires_increasing_times(rb):
    with pytest.raises(ValueError):
        probe.analytic_signal_curve(rb, [0.0, 1.0, 1.0])
