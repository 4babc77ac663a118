"""Energy-efficiency maximization over transmit power.

EE(P) = (1 - tau) * B*K*log2(1 + S*P/(I*P + G)) / ((1 - tau)*eta*P + M*P_0)
is pseudoconcave in P (concave numerator over convex positive denominator),
so the stationary point of the first-order condition is the global maximum.
The exact optimizer bisects the sign of that condition; closed forms
approximate the optimum and its value in the large-antenna regime, where
they also yield the antenna scaling laws.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from .power import EquivalentPower, HardwarePreset, PowerModel, equivalent_params
from .rates import Precoder, RateTerms, asymptotic_rate, terms_for
from .system import DerivedParams, SystemConfig, derive_params

P_BRACKET = (1e-6, 1e6)   # W, search bracket for the exact optimizer

METHOD_EXACT = "exact"
METHOD_CLOSED_FORM = "closed-form"
METHOD_ZERO_CIRCUIT = "zero-circuit"


class OptimizeError(ValueError):
    pass


class BracketFailure(OptimizeError):
    """The first-order condition has no sign change inside the bracket."""


class InfiniteGap(OptimizeError):
    """I = 0 (single cell, perfect training, zero forcing): the maximum
    achievable rate is unbounded and the rate gap diverges."""


class EmptyFeasibleSet(OptimizeError):
    pass


@dataclass(frozen=True)
class OperatingPoint:
    P_star: float   # W
    EE_star: float  # bit/Joule
    R_star: float   # bits/s per BS
    method: str


def ee_of_power(t: RateTerms, eq: EquivalentPower, cfg: SystemConfig,
                dp: DerivedParams, P: float) -> float:
    """Network energy efficiency at transmit power P, bit/Joule.

    With identical cells the per-cell factors cancel, so the network EE
    equals the single-BS EE computed here.
    """
    if P < 0:
        raise OptimizeError(f"transmit power must be >= 0, got {P}")
    if P == 0:
        return 0.0
    rate = asymptotic_rate(t, cfg, P)
    consumed = (1.0 - dp.tau) * eq.eta * P + cfg.M * eq.P_0
    return (1.0 - dp.tau) * rate / consumed


def kkt_residual(P: float, t: RateTerms, eq: EquivalentPower,
                 cfg: SystemConfig, dp: DerivedParams) -> float:
    """First-order stationarity residual; zero exactly at the EE optimum,
    positive below it and negative above it."""
    if P <= 0:
        raise OptimizeError(f"residual needs P > 0, got {P}")
    S, I, G = t.S, t.I, t.G
    shift = cfg.M * eq.P_0 / ((1.0 - dp.tau) * eq.eta)
    return (P + shift) * S * G / (((S + I) * P + G) * (I * P + G)) \
        - math.log(1.0 + S * P / (I * P + G))


def _golden_max(f, lo: float, hi: float, tol: float = 1e-12) -> float:
    """Golden-section maximizer on log-spaced [lo, hi]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = math.log(lo), math.log(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(math.exp(c)), f(math.exp(d))
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(math.exp(c))
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(math.exp(d))
    return math.exp((a + b) / 2.0)


def optimize_power_exact(t: RateTerms, eq: EquivalentPower, cfg: SystemConfig,
                         dp: DerivedParams, rel_tol: float = 1e-10) -> OperatingPoint:
    """Globally optimal transmit power by bisection on the sign of the
    first-order condition (single sign change under pseudoconcavity).

    Falls back to golden-section search on EE itself if the residual turns
    non-finite inside the bracket.
    """
    if cfg.M * eq.P_0 <= 0:
        raise OptimizeError("exact optimizer needs M*P_0 > 0")
    lo, hi = P_BRACKET
    res = lambda P: kkt_residual(P, t, eq, cfg, dp)
    r_lo, r_hi = res(lo), res(hi)
    if not (r_lo > 0 > r_hi):
        raise BracketFailure(
            f"no sign change in [{lo:g}, {hi:g}] W: residual({lo:g})={r_lo:.3e}, "
            f"residual({hi:g})={r_hi:.3e}"
        )
    a, b = lo, hi
    fell_back = False
    while b / a - 1.0 > rel_tol:
        mid = math.sqrt(a * b)
        r = res(mid)
        if not math.isfinite(r):
            fell_back = True
            break
        if r > 0:
            a = mid
        else:
            b = mid
    if fell_back:
        P_star = _golden_max(lambda P: ee_of_power(t, eq, cfg, dp, P), lo, hi)
    else:
        P_star = math.sqrt(a * b)
    return OperatingPoint(
        P_star=P_star,
        EE_star=ee_of_power(t, eq, cfg, dp, P_star),
        R_star=asymptotic_rate(t, cfg, P_star),
        method=METHOD_EXACT,
    )


def zero_circuit_ee(t: RateTerms, eq: EquivalentPower, cfg: SystemConfig,
                    dp: DerivedParams) -> float:
    """Maximal EE in the idealized zero-circuit-power case, where the optimal
    transmit power collapses to zero and EE(P)/P has a finite limit."""
    return cfg.B * cfg.K * math.log2(math.e) * t.S / ((1.0 - dp.tau) * eq.eta * t.G)


def approx_optimal_power(t: RateTerms, eq: EquivalentPower, cfg: SystemConfig,
                         dp: DerivedParams) -> float:
    """Closed-form approximation of the EE-optimal transmit power, accurate
    in the large-antenna regime. Returns inf when I == 0 (the optimum grows
    without bound as interference vanishes)."""
    S, I, G = t.S, t.I, t.G
    if I == 0:
        return math.inf
    scale = math.sqrt(cfg.M * eq.P_0 * G / ((1.0 - dp.tau) * eq.eta))
    shape = math.sqrt((1.0 / I - 1.0 / (S + I)) / math.log(1.0 + S / I))
    return scale * shape


def approx_max_ee(t: RateTerms, eq: EquivalentPower, cfg: SystemConfig,
                  dp: DerivedParams) -> float:
    """Closed-form approximation of the maximal EE, bit/Joule.

    Written with the dimensionless constant c = sqrt((1-tau)*eta*G/P_0) and
    the antenna-dependent factor f(M) so the large-M behaviour is explicit;
    it equals the EE evaluated at the closed-form optimal power.
    """
    S, I = t.S, t.I
    if I == 0:
        raise InfiniteGap("zero interference: closed-form maximal EE undefined")
    c = math.sqrt((1.0 - dp.tau) * eq.eta * t.G / eq.P_0)
    f = math.sqrt((cfg.M / I - cfg.M / (S + I)) / math.log(1.0 + S / I))
    return (1.0 - dp.tau) * cfg.B * cfg.K / eq.P_0 \
        * math.log2(1.0 + S / (I + c / f)) / (cfg.M + c * f)


def rate_gap(t: RateTerms, eq: EquivalentPower, cfg: SystemConfig,
             dp: DerivedParams) -> float:
    """Gap between the maximum achievable rate and the rate at the optimal
    transmit power, bits/s; vanishes as M grows whenever I > 0."""
    S, I, G = t.S, t.I, t.G
    if I == 0:
        raise InfiniteGap("single cell with perfect training and zero forcing")
    arg = math.sqrt(
        (1.0 - dp.tau) * eq.eta * G * (1.0 / S + 1.0 / I)
        * math.log(1.0 + S / I) / (eq.P_0 * cfg.M)
    )
    return cfg.B * cfg.K * math.log2(1.0 + arg)


def power_scaling_law(with_pc: bool, t: RateTerms, eq: EquivalentPower,
                      cfg: SystemConfig, dp: DerivedParams,
                      M: int | None = None) -> float:
    """Large-M law for the optimal transmit power.

    Without pilot reuse it grows like sqrt(M/ln M); with reuse the coherent
    interference grows with M and the optimum tends to an M-free constant.
    """
    M_eval = cfg.M if M is None else M
    base = eq.P_0 * t.G / ((1.0 - dp.tau) * eq.eta)
    if not with_pc:
        return math.sqrt(base / t.I_nP) * math.sqrt(M_eval / math.log(M_eval))
    x = cfg.chi * (dp.LbarP - 1.0)
    if x <= 0:
        raise OptimizeError("pilot-reuse law needs LbarP > 1")
    shape = (1.0 / x - 1.0 / (1.0 + x)) / math.log(1.0 + 1.0 / x)
    return math.sqrt(base * shape)


def ee_scaling_law(with_pc: bool, eq: EquivalentPower, cfg: SystemConfig,
                   dp: DerivedParams, M: int | None = None) -> float:
    """Large-M law for the maximal EE: log2(M)/M without pilot reuse,
    log2(1 + 1/(chi*(LbarP-1)))/M with it."""
    M_eval = cfg.M if M is None else M
    lead = (1.0 - dp.tau) * cfg.B * cfg.K / eq.P_0
    if not with_pc:
        return lead * math.log2(M_eval) / M_eval
    x = cfg.chi * (dp.LbarP - 1.0)
    if x <= 0:
        raise OptimizeError("pilot-reuse law needs LbarP > 1")
    return lead * math.log2(1.0 + 1.0 / x) / M_eval


def _equivalent_for(hardware, cfg: SystemConfig, precoder: Precoder) -> EquivalentPower:
    delta = 1 if precoder is Precoder.ZFBF else 0
    if isinstance(hardware, HardwarePreset):
        return hardware.equivalent(cfg, delta)
    if isinstance(hardware, PowerModel):
        return equivalent_params(dataclasses.replace(hardware, delta_ZF=delta), cfg)
    if isinstance(hardware, EquivalentPower):
        # P_0 depends on K: rebuild it from the (P_c, P_sp) pair.
        return EquivalentPower.from_components(hardware.eta, hardware.P_c,
                                               hardware.P_sp, cfg.K, delta)
    raise OptimizeError(f"unsupported hardware description: {type(hardware)!r}")


def joint_user_power_search(cfg: SystemConfig, hardware, K_range,
                            precoder: Precoder) -> tuple[int, OperatingPoint]:
    """Grid search over the user count, re-optimizing transmit power (and the
    K-dependent circuit power) at each point. Ties break toward smaller K.

    K values that leave the coherence block no room for data, or that put
    zero forcing outside its validity region, are skipped as infeasible.
    """
    from .rates import NonPositiveTerm

    best: tuple[int, OperatingPoint] | None = None
    for K in sorted(set(int(k) for k in K_range)):
        if K < 1 or K * cfg.T_tr >= cfg.T:
            continue
        cfg_k = cfg.with_users(K)
        dp_k = derive_params(cfg_k)
        try:
            t = terms_for(precoder, dp_k, cfg_k)
        except NonPositiveTerm:
            continue
        eq = _equivalent_for(hardware, cfg_k, precoder)
        op = optimize_power_exact(t, eq, cfg_k, dp_k)
        if best is None or op.EE_star > best[1].EE_star:
            best = (K, op)
    if best is None:
        raise EmptyFeasibleSet(f"no feasible user count in {K_range!r}")
    return best
