"""Deterministic-equivalent per-BS rates for matched-filter (MRT) and
zero-forcing (ZFBF) precoding in the large-antenna regime, plus the
regularized-precoder fixed point whose vanishing-ridge limit reproduces the
zero-forcing expressions.

All signal/interference terms are normalized by v*alpha; the noise enters
through G = K*sigma2/(v*alpha) so the asymptotic SINR at transmit power P is
S / (I_P + I_nP + G/P).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .system import DerivedParams, SystemConfig


class Precoder(enum.Enum):
    MRT = "mrt"
    ZFBF = "zfbf"


class RateError(ValueError):
    pass


class NonPositiveTerm(RateError):
    """The zero-forcing deterministic equivalents left their validity region
    (M too small relative to rho*K); values are not clamped."""


class NonConvergence(RateError):
    """Fixed-point iteration hit its cap; message carries the residual."""


@dataclass(frozen=True)
class RateTerms:
    """Normalized receive powers: desired signal S, coherent inter-cell
    interference I_P (pilot reuse only), MUI plus non-coherent inter-cell
    interference I_nP, and the noise-equivalent term G in watts."""

    S: float
    I_P: float
    I_nP: float
    G: float
    precoder: Precoder

    @property
    def I(self) -> float:
        return self.I_P + self.I_nP


def mrt_terms(dp: DerivedParams, cfg: SystemConfig) -> RateTerms:
    """Signal/interference decomposition for matched-filter precoding."""
    M = cfg.M
    S = M + dp.inv_gamma_alpha + (dp.LbarP - 1.0) * dp.rho
    I_P = cfg.chi * (dp.LbarP - 1.0) * (M - dp.rho)
    I_nP = (cfg.K * dp.Lbar - 1.0) * (dp.rho * dp.LbarP + dp.inv_gamma_alpha)
    return RateTerms(S=S, I_P=I_P, I_nP=I_nP, G=dp.G, precoder=Precoder.MRT)


def zf_terms(dp: DerivedParams, cfg: SystemConfig) -> RateTerms:
    """Signal/interference decomposition for zero-forcing precoding.

    Raises NonPositiveTerm outside the validity region (S <= 0, I_P < 0 or
    I_nP < 0). I_nP == 0 is allowed: it is the exact single-cell
    perfect-training case, where zero forcing removes all interference.
    """
    M = cfg.M
    K = cfg.K
    S = M + dp.inv_gamma_alpha + (dp.LbarP - 1.0 - K) * dp.rho
    I_P = cfg.chi * (dp.LbarP - 1.0) * (M - 2.0 * dp.rho * K)
    I_nP = (K * dp.Lbar - 1.0) * (dp.rho * dp.LbarP + dp.inv_gamma_alpha) - dp.rho * (K - 1.0)
    if S <= 0:
        raise NonPositiveTerm(f"signal term S={S} <= 0 at M={M}, K={K}")
    if I_P < 0:
        raise NonPositiveTerm(f"coherent term I_P={I_P} < 0 at M={M}, K={K}")
    if I_nP < 0:
        raise NonPositiveTerm(f"interference term I_nP={I_nP} < 0 at M={M}, K={K}")
    return RateTerms(S=S, I_P=I_P, I_nP=I_nP, G=dp.G, precoder=Precoder.ZFBF)


def terms_for(precoder: Precoder, dp: DerivedParams, cfg: SystemConfig) -> RateTerms:
    return mrt_terms(dp, cfg) if precoder is Precoder.MRT else zf_terms(dp, cfg)


def sinr(t: RateTerms, P: float) -> float:
    """Asymptotic SINR at transmit power P; P = inf gives the exact
    interference-limited value S/I (inf when I == 0)."""
    if P < 0:
        raise RateError(f"transmit power must be >= 0, got {P}")
    if P == 0:
        return 0.0
    if math.isinf(P):
        return math.inf if t.I == 0 else t.S / t.I
    return t.S / (t.I + t.G / P)


def asymptotic_rate(t: RateTerms, cfg: SystemConfig, P: float) -> float:
    """Per-BS sum rate B*K*log2(1 + SINR(P)) in bits/s; increasing in P."""
    g = sinr(t, P)
    if math.isinf(g):
        return math.inf
    return cfg.B * cfg.K * math.log2(1.0 + g)


def rate_max(t: RateTerms, cfg: SystemConfig) -> float:
    """Interference-limited maximum achievable rate (transmit power -> inf)."""
    return asymptotic_rate(t, cfg, math.inf)


@dataclass(frozen=True)
class RateLimitComparison:
    """Large-M relationship between the two precoders' rates.

    Without pilot reuse the zero-forcing rate exceeds the matched-filter one
    by a gap that tends to a constant; with reuse the coherent interference
    chi*(LbarP-1)*M dominates both and the rates coincide to first order.
    """

    gap_no_pc: float | None          # bits/s, set when L_P == 1
    identical_with_pc: bool | None   # set when L_P > 1
    rel_rate_diff: float | None      # |rate_mrt - rate_zf| / rate_zf when L_P > 1
    pc_leading_interference: float | None  # chi*(LbarP-1)*M when L_P > 1


def rate_limit_terms(t_mrt: RateTerms, t_zf: RateTerms, cfg: SystemConfig,
                     dp: DerivedParams, P: float,
                     rel_tol: float = 5e-3) -> RateLimitComparison:
    """Compare the precoders' asymptotic rates at transmit power P."""
    if t_mrt.precoder is not Precoder.MRT or t_zf.precoder is not Precoder.ZFBF:
        raise RateError("expected (MRT terms, ZFBF terms)")
    if dp.LbarP == 1.0:
        gap = cfg.B * cfg.K * math.log2(
            1.0 + (t_mrt.I_nP - t_zf.I_nP) / (t_zf.I_nP + t_zf.G / P)
        )
        return RateLimitComparison(gap_no_pc=gap, identical_with_pc=None,
                                   rel_rate_diff=None, pc_leading_interference=None)
    r_m = asymptotic_rate(t_mrt, cfg, P)
    r_z = asymptotic_rate(t_zf, cfg, P)
    rel = abs(r_m - r_z) / r_z
    leading = cfg.chi * (dp.LbarP - 1.0) * cfg.M
    return RateLimitComparison(gap_no_pc=None, identical_with_pc=rel <= rel_tol,
                               rel_rate_diff=rel, pc_leading_interference=leading)


@dataclass(frozen=True)
class RzfState:
    """Solution of the scalar resolvent fixed point for the regularized
    precoder at ridge phi, together with its two derived quantities and the
    normalizer lambda_bar = M^2 (1+delta)^2 / delta'."""

    phi: float
    delta: float
    delta_prime: float
    delta_dprime: float
    lambda_bar: float
    iterations: int
    residual: float


def rzf_fixed_point(cfg: SystemConfig, dp: DerivedParams, phi: float,
                    damping: float = 0.5, tol: float = 1e-12,
                    max_iter: int = 100_000) -> RzfState:
    """Solve delta = (1/M) tr(Phi T(phi)) by damped fixed-point iteration.

    The estimate covariance Phi has N equal eigenvalues v*alpha*rho and M-N
    zeros, so every trace reduces to a scalar expression and the map is a
    contraction for phi > 0.
    """
    if phi <= 0:
        raise RateError(f"ridge parameter must be > 0, got {phi}")
    a = dp.v * cfg.alpha * dp.rho            # nonzero eigenvalue of Phi
    load = cfg.K * a / cfg.M

    def step(d: float) -> float:
        return (a / dp.rho) / (load / (1.0 + d) + phi)

    delta = step(0.0)
    iterations = 0
    while iterations < max_iter:
        nxt = (1.0 - damping) * delta + damping * step(delta)
        iterations += 1
        if abs(nxt - delta) <= tol * abs(nxt):
            delta = nxt
            break
        delta = nxt
    residual = abs(step(delta) - delta) / abs(delta)
    if residual > 10.0 * tol:
        raise NonConvergence(
            f"no fixed point after {iterations} iterations, residual {residual:.3e}"
        )
    t_val = 1.0 / (load / (1.0 + delta) + phi)
    shrink = 1.0 - cfg.K * a * a * t_val * t_val / (dp.rho * cfg.M * (1.0 + delta) ** 2)
    if shrink <= 0:
        raise NonConvergence(
            f"derivative series diverges (K >= N?): shrink factor {shrink:.3e}"
        )
    delta_prime = (a * t_val * t_val / dp.rho) / shrink
    delta_dprime = a * delta_prime
    lambda_bar = cfg.M**2 * (1.0 + delta) ** 2 / delta_prime
    return RzfState(phi=phi, delta=delta, delta_prime=delta_prime,
                    delta_dprime=delta_dprime, lambda_bar=lambda_bar,
                    iterations=iterations, residual=residual)


def rzf_sinr(state: RzfState, cfg: SystemConfig, dp: DerivedParams, P: float) -> float:
    """Assembled asymptotic SINR of the regularized precoder at ridge phi.

    As phi -> 0 this converges to the zero-forcing SINR S/(I + G/P); the
    per-term expressions keep their finite-ridge corrections so the
    convergence itself is checkable.
    """
    if P <= 0:
        raise RateError(f"transmit power must be > 0, got {P}")
    d, dp1, dp2 = state.delta, state.delta_prime, state.delta_dprime
    v, chi, M, K = dp.v, cfg.chi, cfg.M, cfg.K
    sig = (M * d * d + (1.0 / v - 1.0) * dp2) / (M * dp1)
    coh = (cfg.L_P - 1) * (M * (chi * d) ** 2 + (1.0 / v - chi) * chi * dp2) / (M * dp1)
    base = dp2 / (M * dp1)
    mui = (K - 1) * base * (1.0 / v - 1.0 + 1.0 / (1.0 + d) ** 2)
    copilot = (cfg.L_P - 1) * (K - 1) * base * (chi / v - chi**2 + chi**2 / (1.0 + d) ** 2)
    other = (cfg.L - cfg.L_P) * K * base * (chi / v)
    noise = K * cfg.sigma2 / (M * P)
    return sig / (coh + mui + copilot + other + noise)
