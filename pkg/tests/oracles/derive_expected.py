"""Independent high-precision evaluation of the reference numbers frozen in the tests.

Nothing here imports the package.  Expectations over the Gaussian marginal are
numerical integrals, the relaxation curve is a numerical ODE solution, and the
design numbers are evaluated from their definitions in 40-digit arithmetic.

    python tests/oracles/derive_expected.py
"""

from mpmath import mp, mpf, exp, sin, cos, sqrt, pi, quad, inf, coth, atanh, odefun

mp.dps = 40

HBAR = mpf("1.054571817e-34")
K_B = mpf("1.380649e-23")
U = mpf("1.66053906660e-27")


def gauss_avg(f, var):
    s = sqrt(var)
    return quad(lambda u: f(u) * exp(-u * u / (2 * var)), [-inf, -6 * s, 0, 6 * s, inf]) / sqrt(2 * pi * var)


def sin2(eps, X):
    return gauss_avg(lambda u: sin(2 * u) ** 2, eps * X)


def sin4(eps, X):
    return gauss_avg(lambda u: sin(2 * u) ** 4, eps * X)


def envelope(g, k, t):
    e = exp(-k * t)
    return (g - g * e * cos(g * t) - k * e * sin(g * t)) / (g * g + k * k)


def envelope_rate(g, k, tau):
    return 2 * k * (k / (2 * tau)) * quad(lambda t: envelope(g, k, t) ** 2, [0, tau])


def fractions(g, k):
    d = (g * g + k * k) ** 2
    return g * g * k * k / d, k**4 / d


def main():
    out = {}
    # Rb atom, 50 kHz trap, 795 nm
    m = mpf("86.909") * U
    Om = 2 * pi * mpf(50e3)
    k = 2 * pi / mpf("795e-9")
    eps_rb = HBAR * k * k / (2 * m * Om)
    out["eps_rb"] = eps_rb
    out["sigma0_rb_nm"] = sqrt(HBAR / (2 * m * Om)) * 1e9
    R_rb, Rbar_rb = fractions(mpf(1), mpf(5000))  # g/kappa = 10 kHz / 50 MHz
    out["R_rb"] = R_rb
    out["No0_rb"] = R_rb * 1e9 * sin2(eps_rb, 1)
    out["var0_rb"] = R_rb**2 * (mpf(1e9) * (1e9 + 1) * sin4(eps_rb, 1) - mpf(1e18) * sin2(eps_rb, 1) ** 2)

    out["sin2_073_1"] = sin2(mpf("0.073"), 1)
    out["sin4_001_1"] = sin4(mpf("0.01"), 1)
    out["sin4_02_3"] = sin4(mpf("0.2"), 3)
    out["sin2_gibbs5_005"] = sin2(mpf("0.05"), 5)
    out["dw_073"] = exp(-mpf("0.584"))
    N = mpf(10) ** 6
    exact = N * (N + 1) * sin4(mpf("0.01"), 1) - N * N * sin2(mpf("0.01"), 1) ** 2
    ld = (4 * mpf("0.01")) ** 2 * (2 * N * N + 3 * N)
    out["var_ratio_exact_over_ld"] = exact / ld

    out["envelope_g_eq_k"] = envelope(mpf(1), mpf(1), mpf(1))
    out["rate_kt1e3_g001"] = envelope_rate(mpf("0.01"), mpf(1), mpf(1000))
    out["R_g001"] = fractions(mpf("0.01"), mpf(1))[0]
    out["rate_kt1e3_g1"] = envelope_rate(mpf(1), mpf(1), mpf(1000))
    out["rate_kt10_g1"] = envelope_rate(mpf(1), mpf(1), mpf(10))

    # nanoparticle, 1 MHz trap at 1 mK, tau = 30 ns, Gamma = 0.1 Omega
    Om2 = 2 * pi * mpf(1e6)
    y = HBAR * Om2 / (2 * K_B * mpf("1e-3"))
    n0 = coth(y)
    gam, wt = mpf("0.1"), Om2 * mpf("30e-9")
    max_snr = sqrt(gam / (n0 * wt))
    t_opt = n0 / gam
    out["nbar0_nano"] = n0
    out["max_snr_nano"] = max_snr
    out["t_opt_nano_us"] = t_opt / Om2 * 1e6
    out["n_ex_nano"] = 10 / max_snr**2 * t_opt / wt
    ya = atanh(1 / n0)
    out["massive_max_snr_nano"] = sqrt(gam * ya / wt)
    out["massive_n_ex_nano"] = 10 / (ya * gam) ** 2
    out["massive_t_opt_nano_us"] = 1 / (ya * gam) / Om2 * 1e6

    # Rb design chain, gamma = 0.02, nbar0 = 1, Omega tau = 2 pi 50e3 * 20e-9
    wt_rb = Om * mpf("20e-9")
    ms = sqrt(mpf("0.02") / wt_rb)
    out["max_snr_rb"] = ms
    out["n_ex_rb"] = 10 / ms**2 * (1 / mpf("0.02")) / wt_rb

    # coupling estimates
    out["g_atom"] = 3 / (8 * pi) * mpf(1e9) * mpf("0.1") * mpf("1e-3")
    out["g_nano"] = (2 * pi) ** 2 * 5 * mpf(1e9) * mpf("1e-3")

    # moment ODEs solved numerically (no closed form used)
    def rhs_dec(g):
        return lambda t, y: [2 * y[2], -2 * y[2] + 4 * g, y[1] - y[0]]

    def rhs_th(gth, ne):
        return lambda t, y: [2 * y[2] - 2 * gth * (y[0] - ne), -2 * y[2] - 2 * gth * (y[1] - ne), y[1] - y[0] - 2 * gth * y[2]]

    f = odefun(rhs_dec(mpf("0.02")), 0, [mpf(1), mpf(1), mpf(0)])
    out["X_dec_pi"] = f(pi)[0]
    out["C_dec_pi_over_2"] = f(pi / 2)[2]
    f = odefun(rhs_th(mpf("0.01"), mpf(5)), 0, [mpf(1), mpf(1), mpf(0)])
    out["X_th_20"] = f(20)[0]

    for key, v in out.items():
        print(f"{key:28s} {mp.nstr(v, 15)}")


if __name__ == "__main__":
    main()
