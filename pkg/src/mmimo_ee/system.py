"""Physical-layer configuration and the scalar parameters derived from it.

All quantities are SI: powers in W, bandwidth in Hz, gains linear.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass


class ConfigError(ValueError):
    """A system configuration violates one of its invariants."""


class TrainingExceedsBlock(ConfigError):
    """K * T_tr must stay strictly below the coherence block length T."""


class BasisTooLarge(ConfigError):
    """The number of arrival angles N cannot exceed the antenna count M."""


class ChiOutOfRange(ConfigError):
    """Cross-cell gain ratio chi must lie in (0, 1]."""


class PilotGroupOutOfRange(ConfigError):
    """The co-pilot cell count L_P must satisfy 1 <= L_P <= L."""


class NonPositiveParameter(ConfigError):
    """Counts, powers, gains and bandwidth must be strictly positive."""


@dataclass(frozen=True)
class SystemConfig:
    """Downlink multi-cell system: L cells, M-antenna BSs, K single-antenna
    users each, TDD training with per-user pilot length T_tr.

    Defaults reproduce the macro-cell setup used throughout the tests:
    20 MHz band, -174 dBm/Hz noise, 250 m cell edge path gain.
    """

    M: int = 128            # BS antennas
    K: int = 8              # users per cell
    L: int = 7              # number of cells
    L_P: int = 7            # cells sharing one pilot set (1 = no contamination)
    T: int = 1500           # coherence block length, channel uses
    T_tr: int = 1           # pilot length per user, channel uses
    P_tr: float = 0.2       # uplink pilot transmit power, W
    sigma2_tr: float = 7.96214341106997e-14    # BS noise power, W
    sigma2: float = 7.96214341106997e-14       # user noise power, W
    alpha: float = 2.842795160196718e-13       # average channel gain (linear)
    chi: float = 0.1        # cross-cell gain ratio, in (0, 1]
    N: int = 64             # arrival angles; rho = M / N
    B: float = 20e6         # bandwidth, Hz
    infinite_training_snr: bool = False  # exact gamma_tr -> inf switch

    def with_antennas(self, M: int) -> "SystemConfig":
        """Copy with a new M, keeping the correlation ratio rho = M/N fixed."""
        rho = self.M / self.N
        N = M / rho
        if abs(N - round(N)) > 1e-9:
            raise BasisTooLarge(f"M={M} is not divisible by rho={rho}")
        return dataclasses.replace(self, M=M, N=int(round(N)))

    def with_users(self, K: int) -> "SystemConfig":
        return dataclasses.replace(self, K=K)

    def with_pilot_reuse(self, pc: bool) -> "SystemConfig":
        """Copy with full pilot reuse (L_P = L) or none (L_P = 1)."""
        return dataclasses.replace(self, L_P=self.L if pc else 1)


@dataclass(frozen=True)
class DerivedParams:
    """Scalars computed once from a SystemConfig and consumed everywhere else."""

    gamma_tr: float        # uplink training SNR K*T_tr*P_tr/sigma2_tr (may be inf)
    v: float               # channel estimation accuracy, in (0, 1]
    Lbar: float            # 1 + chi*(L - 1)
    LbarP: float           # 1 + chi*(L_P - 1)
    rho: float             # M / N >= 1
    tau: float             # training fraction K*T_tr/T
    G: float               # K*sigma2/(v*alpha), W
    inv_gamma_alpha: float  # 1/(gamma_tr*alpha); exactly 0 for infinite SNR


def validate(cfg: SystemConfig) -> None:
    """Raise a distinct ConfigError per violated invariant."""
    for name in ("M", "K", "L", "L_P", "T", "T_tr", "N"):
        value = getattr(cfg, name)
        if not isinstance(value, int) or isinstance(value, bool) or value < 1:
            raise NonPositiveParameter(f"{name} must be a positive integer, got {value!r}")
    for name in ("P_tr", "sigma2_tr", "sigma2", "alpha", "B"):
        value = getattr(cfg, name)
        if not (value > 0) or not math.isfinite(value):
            raise NonPositiveParameter(f"{name} must be finite and > 0, got {value!r}")
    if cfg.L_P > cfg.L:
        raise PilotGroupOutOfRange(f"L_P={cfg.L_P} exceeds L={cfg.L}")
    if cfg.K * cfg.T_tr >= cfg.T:
        raise TrainingExceedsBlock(
            f"training occupies K*T_tr={cfg.K * cfg.T_tr} of T={cfg.T} channel uses"
        )
    if cfg.N > cfg.M:
        raise BasisTooLarge(f"N={cfg.N} exceeds M={cfg.M}")
    if not (0.0 < cfg.chi <= 1.0):
        raise ChiOutOfRange(f"chi={cfg.chi} outside (0, 1]")


def derive_params(cfg: SystemConfig) -> DerivedParams:
    """Compute the derived scalar parameters for a valid configuration.

    The infinite-training switch makes the 1/gamma_tr terms exactly zero, so
    perfect-estimation limits (v = 1/LbarP) hold without rounding.
    """
    validate(cfg)
    if cfg.infinite_training_snr:
        gamma_tr = math.inf
        inv_gamma = 0.0
    else:
        gamma_tr = cfg.K * cfg.T_tr * cfg.P_tr / cfg.sigma2_tr
        inv_gamma = 1.0 / gamma_tr
    rho = cfg.M / cfg.N
    LbarP = 1.0 + cfg.chi * (cfg.L_P - 1)
    Lbar = 1.0 + cfg.chi * (cfg.L - 1)
    v = cfg.alpha * rho / (cfg.alpha * rho * LbarP + inv_gamma)
    tau = cfg.K * cfg.T_tr / cfg.T
    G = cfg.K * cfg.sigma2 / (v * cfg.alpha)
    return DerivedParams(
        gamma_tr=gamma_tr,
        v=v,
        Lbar=Lbar,
        LbarP=LbarP,
        rho=rho,
        tau=tau,
        G=G,
        inv_gamma_alpha=inv_gamma / cfg.alpha,
    )
