"""Link-level Monte Carlo oracle.

Generates correlated channels through a shared orthonormal basis, forms MMSE
channel estimates under optional pilot reuse across cells, builds MRT/ZFBF
precoders from the estimates, and averages the instantaneous per-user SINRs
of the target cell into an empirical rate with a confidence interval. This
path never touches the closed-form rate expressions, so agreement between
the two is a genuine cross-check.

Cell 0 is the evaluated cell; cells 0..L_P-1 share its pilot set. Co-pilot
channels that never appear elsewhere in the evaluation are drawn as a single
lumped Gaussian with the summed covariance, which is distribution-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .rates import Precoder
from .system import DerivedParams, SystemConfig


class MonteCarloError(ValueError):
    pass


class SingularEstimate(MonteCarloError):
    """Zero-forcing hit a rank-deficient estimated channel matrix."""


def _cn(rng: np.random.Generator, shape) -> np.ndarray:
    """Standard complex Gaussian: two real normals with variance 1/2 each."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) * np.sqrt(0.5)


def gen_basis(M: int, N: int, seed: int) -> np.ndarray:
    """Orthonormal (M, N) basis: N columns of a seeded random unitary.

    Phases are fixed from the QR factor so a given seed always yields the
    same matrix.
    """
    if N > M:
        raise MonteCarloError(f"N={N} exceeds M={M}")
    rng = np.random.default_rng(seed)
    q, r = np.linalg.qr(_cn(rng, (M, N)))
    d = np.diagonal(r)
    return q * (d.conj() / np.abs(d))


@dataclass(frozen=True)
class ChannelBatch:
    """One channel realization for the whole network, target cell 0.

    h_to_target[l, :, k]  channel from BS l to user k of cell 0
    h_own[l, :, m]        channel from BS l to its own user m (row 0 is
                          identical to h_to_target[0])
    pilot_interference    summed co-pilot channels observed at each BS during
                          training (None without pilot reuse); for BSs in the
                          target pilot group the component toward cell 0 is
                          the same realization as h_to_target, which is what
                          makes the contamination coherent
    training_noise        raw CN(0, sigma2_tr I) noise (None for the exact
                          infinite-training-SNR switch)
    """

    index: int
    seed: int
    basis: np.ndarray
    h_to_target: np.ndarray
    h_own: np.ndarray
    pilot_interference: np.ndarray | None
    training_noise: np.ndarray | None


@dataclass(frozen=True)
class ChannelEstimates:
    est: np.ndarray   # (L, M, K) MMSE estimates of each BS's own users
    err: np.ndarray   # (L, M, K) estimation errors, h_own - est


@dataclass(frozen=True)
class PrecoderWeights:
    w: np.ndarray     # (L, M, K) beamforming vectors
    lam: np.ndarray   # (L, K) normalizers 1/||w||^2
    kind: Precoder


@dataclass(frozen=True)
class EmpiricalRate:
    rate: float       # bits/s, mean per-BS sum rate of the target cell
    ci95: float       # bits/s, 95% confidence half-width
    n_used: int
    n_singular: int


def sample_channels(cfg: SystemConfig, dp: DerivedParams, basis: np.ndarray,
                    n: int, seed: int) -> Iterator[ChannelBatch]:
    """Yield n independent channel realizations.

    Each realization derives its own RNG stream from (seed, index), so the
    stream is independent of any chunking a caller might apply.
    """
    M, K, L, L_P = cfg.M, cfg.K, cfg.L, cfg.L_P
    N = cfg.N
    own_scale = math.sqrt(cfg.alpha * dp.rho)
    cross_scale = math.sqrt(cfg.alpha * cfg.chi * dp.rho)

    for i in range(n):
        rng = np.random.default_rng((seed, 1 + i))
        h_t = basis @ _cn(rng, (L, N, K))            # (L, M, K) via broadcasting
        h_t[0] *= own_scale
        h_t[1:] *= cross_scale
        h_own = np.empty_like(h_t)
        h_own[0] = h_t[0]
        if L > 1:
            h_own[1:] = own_scale * (basis @ _cn(rng, (L - 1, N, K)))
        pilot = None
        if L_P > 1:
            # Lumped co-pilot channels: one draw with the summed covariance
            # replaces the cells that appear nowhere else.
            lump = np.zeros(L)
            lump[0] = L_P - 1
            lump[1:L_P] = L_P - 2
            lump[L_P:] = L_P - 1
            pilot = cross_scale * np.sqrt(lump)[:, None, None] * (basis @ _cn(rng, (L, N, K)))
            pilot[1:L_P] += h_t[1:L_P]
        noise = None
        if not cfg.infinite_training_snr:
            noise = math.sqrt(cfg.sigma2_tr) * _cn(rng, (L, M, K))
        yield ChannelBatch(index=i, seed=seed, basis=basis, h_to_target=h_t,
                           h_own=h_own, pilot_interference=pilot,
                           training_noise=noise)


def mmse_estimate(batch: ChannelBatch, cfg: SystemConfig,
                  dp: DerivedParams) -> ChannelEstimates:
    """MMSE estimates of each BS's own-user channels from its training
    observation: scale the observation's projection onto the correlation
    basis by the estimation accuracy v."""
    y = batch.h_own
    if batch.pilot_interference is not None:
        y = y + batch.pilot_interference
    if batch.training_noise is not None:
        y = y + batch.training_noise / math.sqrt(cfg.K * cfg.T_tr * cfg.P_tr)
    basis = batch.basis
    L, M, K = y.shape
    flat = y.transpose(1, 0, 2).reshape(M, L * K)
    proj = dp.v * (basis @ (basis.conj().T @ flat))
    est = proj.reshape(M, L, K).transpose(1, 0, 2)
    return ChannelEstimates(est=est, err=batch.h_own - est)


def precode(estimates: ChannelEstimates, kind: Precoder) -> PrecoderWeights:
    """Beamformers from the estimated channels: the estimate itself for MRT,
    its pseudo-inverse columns for ZFBF."""
    est = estimates.est
    if kind is Precoder.MRT:
        w = est
    else:
        L = est.shape[0]
        w = np.empty_like(est)
        for l in range(L):
            h = est[l]
            gram = h.conj().T @ h
            try:
                x = np.linalg.solve(gram, np.eye(h.shape[1], dtype=complex))
            except np.linalg.LinAlgError as exc:
                raise SingularEstimate(f"cell {l}: {exc}") from exc
            w[l] = h @ x
            if not np.all(np.isfinite(w[l])):
                raise SingularEstimate(f"cell {l}: non-finite pseudo-inverse")
    norms = np.sum(np.abs(w) ** 2, axis=1)
    if np.any(norms == 0):
        raise SingularEstimate("zero-norm beamforming vector")
    return PrecoderWeights(w=w, lam=1.0 / norms, kind=kind)


def _sum_rate_sample(batch: ChannelBatch, weights: PrecoderWeights,
                     cfg: SystemConfig, P: float) -> float:
    """Instantaneous sum rate of the target cell, bits/s, for one realization."""
    K, L_P = cfg.K, cfg.L_P
    cross = np.matmul(batch.h_to_target.conj().transpose(0, 2, 1), weights.w)
    p = weights.lam[:, None, :] * np.abs(cross) ** 2   # (L, K, K): [l, k, m]
    num = p[0].diagonal().copy()
    coh = p[1:L_P].diagonal(axis1=1, axis2=2).sum(axis=0) if L_P > 1 else 0.0
    total = p.sum(axis=(0, 2))
    other = total - num - coh
    gamma = num / (coh + other + K * cfg.sigma2 / P)
    return cfg.B * float(np.sum(np.log2(1.0 + gamma)))


def empirical_rates(cfg: SystemConfig, dp: DerivedParams, P: float,
                    kinds: tuple[Precoder, ...], n: int,
                    seed: int) -> dict[Precoder, EmpiricalRate]:
    """Empirical average per-BS rates for several precoders over shared
    channel realizations. Rank-deficient zero-forcing samples are counted
    and excluded rather than regularized."""
    if P <= 0:
        raise MonteCarloError(f"transmit power must be > 0, got {P}")
    if n < 2:
        raise MonteCarloError(f"need at least 2 samples, got {n}")
    basis = gen_basis(cfg.M, cfg.N, seed)
    samples: dict[Precoder, list[float]] = {k: [] for k in kinds}
    singular = {k: 0 for k in kinds}
    for batch in sample_channels(cfg, dp, basis, n, seed):
        estimates = mmse_estimate(batch, cfg, dp)
        for kind in kinds:
            try:
                weights = precode(estimates, kind)
            except SingularEstimate:
                singular[kind] += 1
                continue
            samples[kind].append(_sum_rate_sample(batch, weights, cfg, P))
    out = {}
    for kind in kinds:
        vals = np.asarray(samples[kind])
        if vals.size == 0:
            raise MonteCarloError(f"all {n} realizations singular for {kind}")
        mean = float(vals.mean())
        ci = 1.96 * float(vals.std(ddof=1)) / math.sqrt(vals.size)
        out[kind] = EmpiricalRate(rate=mean, ci95=ci, n_used=int(vals.size),
                                  n_singular=singular[kind])
    return out


def empirical_rate(cfg: SystemConfig, dp: DerivedParams, P: float,
                   kind: Precoder, n: int, seed: int) -> EmpiricalRate:
    """Empirical average per-BS rate with a 95% confidence interval.

    A few hundred samples give a stable mean; below ~100 the interval is
    wide and downstream comparisons should treat it as such.
    """
    return empirical_rates(cfg, dp, P, (kind,), n, seed)[kind]
