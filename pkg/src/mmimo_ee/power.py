"""BS power-consumption model, its equivalent two-parameter form, and
published hardware presets (GreenTouch 2012/2020, four LTE BS classes).
"""

from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass

from .system import SystemConfig

ZFBF_FLAG = 1
MRT_FLAG = 0


class PowerModelError(ValueError):
    pass


class UnknownPreset(PowerModelError):
    pass


class ChannelEstimationPowerDomain(PowerModelError):
    """log2(K*T_tr) would be negative; the estimation-power term is undefined."""


@dataclass(frozen=True)
class PowerModel:
    """Full component-level model of one BS.

    Loss factors apply multiplicatively to everything drawn downstream of the
    supply chain; delta_ZF switches the beamforming-computation complexity
    between the matched-filter (0) and the pseudo-inverse (1) precoder.
    """

    eta_PA: float          # amplifier efficiency, (0, 1]
    sigma_DC: float        # DC-DC supply loss factor, [0, 1)
    sigma_MS: float        # main supply loss factor, [0, 1)
    sigma_cool: float      # cooling loss factor, [0, 1)
    P_RF: float            # per-antenna RF power, W
    P_BB1d: float          # per-antenna baseband power, downlink phase, W
    P_BB1u: float          # per-antenna baseband power, training phase, W
    R_flops0: float        # per-antenna per-user operation count, flops
    eta_C: float           # computing efficiency, flops/W
    delta_ZF: int = 0      # 0 matched filter, 1 zero forcing

    def __post_init__(self):
        if not (0.0 < self.eta_PA <= 1.0):
            raise PowerModelError(f"eta_PA={self.eta_PA} outside (0, 1]")
        for name in ("sigma_DC", "sigma_MS", "sigma_cool"):
            s = getattr(self, name)
            if not (0.0 <= s < 1.0):
                raise PowerModelError(f"{name}={s} outside [0, 1)")
        if self.delta_ZF not in (0, 1):
            raise PowerModelError(f"delta_ZF must be 0 or 1, got {self.delta_ZF}")

    @property
    def supply_chain(self) -> float:
        """Combined supply/cooling efficiency (1-s_DC)(1-s_MS)(1-s_cool)."""
        return (1 - self.sigma_DC) * (1 - self.sigma_MS) * (1 - self.sigma_cool)


@dataclass(frozen=True)
class EquivalentPower:
    """Two-parameter reduction of the full model: total consumption is
    approximately (1 - tau)*eta*P + M*P_0."""

    eta: float    # equivalent amplifier factor, >= 1/eta_PA
    P_c: float    # per-antenna circuit power excluding beamforming, W
    P_sp: float   # per-antenna per-user beamforming power, W
    P_0: float    # per-antenna equivalent circuit power, W

    @classmethod
    def from_components(cls, eta: float, P_c: float, P_sp: float,
                        K: int, delta_ZF: int) -> "EquivalentPower":
        """Assemble P_0 = P_c + (K + delta_ZF*K^2)*P_sp for a user count."""
        return cls(eta=eta, P_c=P_c, P_sp=P_sp,
                   P_0=P_c + (K + delta_ZF * K * K) * P_sp)


def equivalent_params(pm: PowerModel, cfg: SystemConfig) -> EquivalentPower:
    """Reduce a full PowerModel to its equivalent (eta, P_c, P_sp, P_0)."""
    lam = pm.supply_chain
    eta = 1.0 / (pm.eta_PA * lam)
    P_sp = pm.R_flops0 / (pm.eta_C * lam)
    P_c = (pm.P_RF + pm.P_BB1d) / lam
    P_0 = P_c + (cfg.K + pm.delta_ZF * cfg.K**2) * P_sp
    return EquivalentPower(eta=eta, P_c=P_c, P_sp=P_sp, P_0=P_0)


def bs_power_full(pm: PowerModel, cfg: SystemConfig, P: float) -> float:
    """Exact BS consumption at transmit power P.

    Includes amplifier, both baseband phases, beamforming computation
    weighted by the downlink fraction and channel-estimation computation
    weighted by the training fraction.
    """
    if P < 0:
        raise PowerModelError(f"transmit power must be >= 0, got {P}")
    kt = cfg.K * cfg.T_tr
    if math.log2(kt) < 0:
        raise ChannelEstimationPowerDomain(f"K*T_tr={kt} < 1")
    tau = kt / cfg.T
    flops_per_w = pm.R_flops0 / pm.eta_C
    P_BB2 = cfg.M * (cfg.K + pm.delta_ZF * cfg.K**2) * flops_per_w
    P_CE = cfg.M * math.log2(kt) * flops_per_w
    numer = (
        (1 - tau) * P / pm.eta_PA
        + (1 - tau) * P_BB2
        + tau * P_CE
        + cfg.M * (pm.P_RF + (1 - tau) * pm.P_BB1d + tau * pm.P_BB1u)
    )
    return numer / pm.supply_chain


def bs_power_equivalent(eq: EquivalentPower, cfg: SystemConfig, P: float) -> float:
    """Two-parameter approximation (1 - tau)*eta*P + M*P_0."""
    if P < 0:
        raise PowerModelError(f"transmit power must be >= 0, got {P}")
    tau = cfg.K * cfg.T_tr / cfg.T
    return (1 - tau) * eq.eta * P + cfg.M * eq.P_0


def equivalent_power_gap(pm: PowerModel, cfg: SystemConfig, P: float) -> tuple[float, float, float]:
    """Full-model consumption, equivalent-form consumption and their relative
    gap. The gap is never hidden: it is exactly zero only when the two
    baseband phases draw identical power and the estimation-computation term
    happens to equal the beamforming-computation term."""
    full = bs_power_full(pm, cfg, P)
    approx = bs_power_equivalent(equivalent_params(pm, cfg), cfg, P)
    return full, approx, abs(full - approx) / full


@dataclass(frozen=True)
class HardwarePreset:
    """Published hardware numbers: equivalent power triple plus, for the LTE
    classes, the system parameters they were reported with."""

    name: str
    eta: float
    P_c: float
    P_sp: float
    sigma_feed_db: float = 0.0   # feeder loss, dB (0 for active-antenna arrays)
    M: int | None = None
    K: int | None = None
    P_max: float | None = None       # W
    cell_radius: float | None = None  # m
    pl_intercept: float | None = None  # linear gain at 1 m
    pl_exponent: float | None = None

    @property
    def eta_effective(self) -> float:
        """Amplifier factor with the feeder loss folded in."""
        return self.eta / 10 ** (self.sigma_feed_db / 10)

    def equivalent(self, cfg: SystemConfig, delta_ZF: int) -> EquivalentPower:
        return EquivalentPower.from_components(
            self.eta_effective, self.P_c, self.P_sp, cfg.K, delta_ZF
        )

    def pathloss(self, d: float) -> float:
        """Linear channel gain at distance d meters."""
        if self.pl_intercept is None or self.pl_exponent is None:
            raise PowerModelError(f"preset {self.name!r} has no path loss model")
        return self.pl_intercept / d ** self.pl_exponent

    def system_overrides(self) -> dict:
        """SystemConfig fields this preset pins (empty for the array presets)."""
        out = {}
        if self.M is not None:
            out["M"] = self.M
        if self.K is not None:
            out["K"] = self.K
        return out


_PL_MACRO = (10 ** -3.53, 3.76)
_PL_PICO = (10 ** -3.06, 3.67)

PRESETS: dict[str, HardwarePreset] = {
    "greentouch2012": HardwarePreset(
        name="greentouch2012", eta=2.51, P_c=1.42, P_sp=3.1e-3),
    "greentouch2020": HardwarePreset(
        name="greentouch2020", eta=2.51, P_c=0.2, P_sp=0.4e-3),
    "lte_macro": HardwarePreset(
        name="lte_macro", eta=3.24, P_c=31.7, P_sp=7.8e-3, sigma_feed_db=-3.0,
        M=8, K=8, P_max=40.0, cell_radius=250.0,
        pl_intercept=_PL_MACRO[0], pl_exponent=_PL_MACRO[1]),
    "lte_micro": HardwarePreset(
        name="lte_micro", eta=4.04, P_c=21.4, P_sp=23.5e-3,
        M=4, K=4, P_max=6.3, cell_radius=100.0,
        pl_intercept=_PL_MACRO[0], pl_exponent=_PL_MACRO[1]),
    "lte_pico": HardwarePreset(
        name="lte_pico", eta=13.72, P_c=2.6, P_sp=2.7e-3,
        M=4, K=4, P_max=0.13, cell_radius=50.0,
        pl_intercept=_PL_PICO[0], pl_exponent=_PL_PICO[1]),
    "lte_femto": HardwarePreset(
        name="lte_femto", eta=21.11, P_c=1.9, P_sp=7.2e-3,
        M=2, K=2, P_max=0.05, cell_radius=30.0,
        pl_intercept=_PL_PICO[0], pl_exponent=_PL_PICO[1]),
}


def preset(name: str) -> HardwarePreset:
    """Look up a preset by name (case- and separator-insensitive)."""
    key = name.lower().replace("-", "").replace("_", "")
    for canonical, hp in PRESETS.items():
        if canonical.replace("_", "") == key:
            return hp
    raise UnknownPreset(f"unknown preset {name!r}; have {sorted(PRESETS)}")


def load_preset(path) -> HardwarePreset:
    """Load custom hardware from a JSON file with HardwarePreset field names."""
    with open(path) as fh:
        raw = json.load(fh)
    fields = {f.name for f in dataclasses.fields(HardwarePreset)}
    unknown = set(raw) - fields
    if unknown:
        raise PowerModelError(f"unknown preset fields: {sorted(unknown)}")
    if "name" not in raw:
        raw["name"] = "custom"
    return HardwarePreset(**raw)
