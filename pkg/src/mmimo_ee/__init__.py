"""Energy-efficiency analysis of downlink multi-cell massive MIMO.

Closed-form asymptotic rates for MRT and zero-forcing under pilot
contamination, EE-optimal transmit power (exact and closed-form), antenna
scaling laws, and a Monte Carlo link-level oracle that cross-checks the
closed forms.
"""

from .mc import (ChannelBatch, ChannelEstimates, EmpiricalRate, PrecoderWeights,
                 SingularEstimate, empirical_rate, empirical_rates, gen_basis,
                 mmse_estimate, precode, sample_channels)
from .optimize import (BracketFailure, EmptyFeasibleSet, InfiniteGap,
                       OperatingPoint, approx_max_ee, approx_optimal_power,
                       ee_of_power, ee_scaling_law, joint_user_power_search,
                       kkt_residual, optimize_power_exact, power_scaling_law,
                       rate_gap, zero_circuit_ee)
from .power import (EquivalentPower, HardwarePreset, PowerModel, PRESETS,
                    UnknownPreset, bs_power_equivalent, bs_power_full,
                    equivalent_params, equivalent_power_gap, load_preset,
                    preset)
from .rates import (NonConvergence, NonPositiveTerm, Precoder, RateTerms,
                    RzfState, asymptotic_rate, mrt_terms, rate_limit_terms,
                    rate_max, rzf_fixed_point, rzf_sinr, sinr, terms_for,
                    zf_terms)
from .system import (BasisTooLarge, ChiOutOfRange, ConfigError, DerivedParams,
                     NonPositiveParameter, PilotGroupOutOfRange, SystemConfig,
                     TrainingExceedsBlock, derive_params, validate)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
