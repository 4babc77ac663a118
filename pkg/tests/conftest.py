"""Shared fixtures and independent oracles for the test suite."""

import math

import numpy as np
import pytest

import mmimo_ee as m


def macro_config(M=128, rho=2, K=8, pc=True, **overrides):
    """Seven-cell macro setup used across the tests: 20 MHz, 1500-use block,
    single-use pilots, 200 mW training power, cell-edge path gain."""
    if M % rho:
        raise ValueError(f"M={M} not divisible by rho={rho}")
    base = dict(M=M, K=K, L=7, L_P=7 if pc else 1, T=1500, T_tr=1,
                P_tr=0.2, N=M // rho)
    base.update(overrides)
    return m.SystemConfig(**base)


def random_valid_config(rng, zf_required=False):
    """Random in-range configuration; noise drawn relative to the channel
    gain so optima stay inside the standard power bracket."""
    rho = int(rng.choice([1, 2, 4]))
    N = int(rng.integers(8, 257))
    M = rho * N
    k_hi = min(16, (N - 1) // 2 if zf_required else N - 1)
    K = int(rng.integers(2, max(3, k_hi + 1)))
    L = int(rng.integers(1, 11))
    L_P = int(rng.choice([1, L]))
    chi = float(rng.uniform(0.02, 1.0))
    alpha = float(10.0 ** rng.uniform(-13.5, -0.5))
    sigma2 = float(alpha * 10.0 ** rng.uniform(-2.0, 2.0))
    T_tr = int(rng.choice([1, 2, 10]))
    return m.SystemConfig(M=M, K=K, L=L, L_P=L_P, T=1500, T_tr=T_tr,
                          P_tr=0.2, sigma2_tr=sigma2, sigma2=sigma2,
                          alpha=alpha, chi=chi, N=N, B=20e6,
                          infinite_training_snr=bool(rng.random() < 0.1))


def random_terms(rng, zf_required=False, precoder=None):
    """Random config plus its rate terms, resampling past validity failures."""
    want_zf = precoder is m.Precoder.ZFBF
    while True:
        cfg = random_valid_config(rng, zf_required=zf_required or want_zf)
        dp = m.derive_params(cfg)
        try:
            if precoder is None:
                return cfg, dp, m.mrt_terms(dp, cfg), m.zf_terms(dp, cfg)
            return cfg, dp, m.terms_for(precoder, dp, cfg)
        except m.NonPositiveTerm:
            continue


def random_equivalent(rng, K, delta):
    eta = float(rng.uniform(1.05, 25.0))
    P_c = float(10.0 ** rng.uniform(-1.3, 1.6))
    P_sp = float(10.0 ** rng.uniform(-4.0, -1.5))
    return m.EquivalentPower.from_components(eta, P_c, P_sp, K, delta)


def count_local_maxima(vals, rel_tol=1e-12):
    """Number of rise-to-fall transitions, tolerating flat plateaus; a
    boundary maximum counts as one."""
    signs = [1]
    for a, b in zip(vals, vals[1:]):
        scale = max(abs(a), abs(b), 1e-300)
        d = b - a
        if abs(d) <= rel_tol * scale:
            continue
        signs.append(1 if d > 0 else -1)
    signs.append(-1)
    compressed = [signs[0]]
    for s in signs[1:]:
        if s != compressed[-1]:
            compressed.append(s)
    return sum(1 for a, b in zip(compressed, compressed[1:]) if a > 0 > b)


def brute_force_max_ee(t, eq, cfg, dp, n_grid=2000):
    """Independent maximizer: dense log grid plus golden-section refinement
    of the bracketing interval. Never looks at the stationarity condition."""
    grid = np.logspace(-6, 6, n_grid)
    ee = np.array([m.ee_of_power(t, eq, cfg, dp, float(P)) for P in grid])
    i = int(np.argmax(ee))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n_grid - 1)]
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c, d = b - invphi * (b - a), a + invphi * (b - a)
    fc = m.ee_of_power(t, eq, cfg, dp, math.exp(c))
    fd = m.ee_of_power(t, eq, cfg, dp, math.exp(d))
    while b - a > 1e-10:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = m.ee_of_power(t, eq, cfg, dp, math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = m.ee_of_power(t, eq, cfg, dp, math.exp(d))
    P = math.exp((a + b) / 2.0)
    return P, m.ee_of_power(t, eq, cfg, dp, P)


@pytest.fixture
def gt2012():
    return m.preset("greentouch2012")


@pytest.fixture
def gt2020():
    return m.preset("greentouch2020")
