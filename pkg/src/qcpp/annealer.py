"""Metropolis annealing over the magnetization-1 spin sector.

The chain proposes pair exchanges (flip one +1 site and one -1 site), so
the sector constraint is never violated.  Temperature follows the
telescoping schedule T0/(n+1); each epoch spends a fixed move budget and
then checks the reconstructed state against two stopping criteria: low
von Neumann entropy and near-positive spectrum.  The inner loop is
compiled with numba and keeps the reconstruction up to date
incrementally, with periodic refresh to bound float drift.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numba
import numpy as np

from .errors import ConstraintError, ValidationError
from .ising import (
    SpinConfiguration,
    _require_odd,
    _stack,
    energy as spin_energy,
    sample_spin_configuration,
)
from .quantum_core import DensityMatrix

REFRESH_INTERVAL = 10_000

_MOVE_STRATEGIES = ("pair_exchange", "uniform_pair")


@dataclass(frozen=True)
class AnnealConfig:
    """Chain parameters.  Defaults: unit initial temperature, 12000
    proposed flips per epoch, stop when entropy <= 0.05 and the spectrum
    is nonnegative within psd_tolerance."""

    initial_temperature: float = 1.0
    flips_per_epoch: int = 12000
    max_epochs: int = 500
    entropy_threshold: float = 0.05
    psd_tolerance: float = 1e-6
    seed: int = 0
    restarts: int = 1
    move_strategy: str = "pair_exchange"
    track_best: bool = True

    def __post_init__(self):
        if self.initial_temperature <= 0:
            raise ValidationError("initial_temperature must be positive")
        if self.entropy_threshold <= 0 or self.psd_tolerance <= 0:
            raise ValidationError("thresholds must be positive")
        if self.flips_per_epoch < 1:
            raise ValidationError("flips_per_epoch must be at least 1")
        if self.max_epochs < 1:
            raise ValidationError("max_epochs must be at least 1")
        if self.restarts < 1:
            raise ValidationError("restarts must be at least 1")
        if self.move_strategy not in _MOVE_STRATEGIES:
            raise ValidationError(
                f"move_strategy must be one of {_MOVE_STRATEGIES}"
            )


@dataclass(frozen=True)
class EpochTrace:
    """One diagnostics row per epoch."""

    epoch: int
    temperature: float
    energy: float
    entropy: float
    min_eigenvalue: float
    acceptance_rate: float


@dataclass(frozen=True)
class AnnealReport:
    spins_final: SpinConfiguration
    energy_final: float
    rho_f: DensityMatrix
    entropy_final: float
    min_eigenvalue: float
    epochs_run: int
    stopped_by: Literal["criteria_met", "max_epochs"]
    trace: tuple[EpochTrace, ...] = field(repr=False, default=())


def temperature_at_epoch(n: int, initial_temperature: float = 1.0) -> float:
    """Temperature after the n-th reduction.

    Each epoch subtracts initial_temperature/(n(n+1)); the sum telescopes,
    so the closed form is initial_temperature/(n+1).  Strictly decreasing
    and positive for every finite n.
    """
    if n < 1:
        raise ValidationError(f"epoch number must be >= 1 (got {n})")
    return initial_temperature / (n + 1)


def propose_move(
    spins: SpinConfiguration, rng: np.random.Generator
) -> SpinConfiguration:
    """Pair exchange: flip one uniformly chosen +1 site and one uniformly
    chosen -1 site.  Magnetization is preserved by construction."""
    if spins.m < 3:
        raise ConstraintError("pair exchange needs at least 3 spins")
    arr = spins.spins
    plus = np.flatnonzero(arr == 1)
    minus = np.flatnonzero(arr == -1)
    a = int(plus[rng.integers(plus.size)])
    b = int(minus[rng.integers(minus.size)])
    flipped = arr.copy()
    flipped[a] = -1
    flipped[b] = 1
    return SpinConfiguration(flipped)


def metropolis_accept(
    e_old: float, e_new: float, temperature: float, rng: np.random.Generator
) -> bool:
    """Accept downhill moves always, uphill with probability
    exp(-(e_new - e_old)/T)."""
    if temperature <= 0:
        raise ValidationError("temperature must be positive")
    if e_new < e_old:
        return True
    return rng.random() < math.exp(-(e_new - e_old) / temperature)


def reconstruct_density(
    spins: SpinConfiguration, detectors: Sequence[DensityMatrix]
) -> DensityMatrix:
    """Signed detector sum rho_f = sum_j sigma_j rho_j.

    Hermitian with unit trace by construction; the spectrum may dip below
    zero, so the result is built without the positivity check.
    """
    stack = _stack(detectors)
    if spins.m != stack.shape[0]:
        raise ValidationError(f"{spins.m} spins but {stack.shape[0]} detectors")
    entries = np.tensordot(spins.spins.astype(np.float64), stack, axes=1)
    return DensityMatrix(entries, physical=False)


@numba.njit(cache=True, nogil=True, inline="always")
def _rho_energy(rho, rho2):
    d = rho.shape[0]
    for a in range(d):
        for b in range(d):
            acc = 0.0 + 0.0j
            for c in range(d):
                acc += rho[a, c] * rho[c, b]
            rho2[a, b] = acc
    t2 = 0.0
    t3 = 0.0
    t4 = 0.0
    for a in range(d):
        for b in range(d):
            x = rho[a, b]
            y = rho2[a, b]
            t2 += x.real * x.real + x.imag * x.imag
            t4 += y.real * y.real + y.imag * y.imag
            z = y * rho[b, a]
            t3 += z.real
    return t4 - 2.0 * t3 + t2


@numba.njit(cache=True, nogil=True)
def _epoch_kernel(
    spins,
    rho,
    cand,
    scratch,
    best_spins,
    stack,
    uniforms,
    temperature,
    energy_now,
    best_energy,
    refresh_count,
    refresh_interval,
    pair_mode,
):
    m = spins.shape[0]
    d = rho.shape[0]
    k = 0
    for s in range(m):
        if spins[s] == 1:
            k += 1
    neg = m - k
    accepted = 0
    for t in range(uniforms.shape[0]):
        u1 = uniforms[t, 0]
        u2 = uniforms[t, 1]
        u3 = uniforms[t, 2]
        a = -1
        b = -1
        if pair_mode:
            ip = int(u1 * k)
            if ip >= k:
                ip = k - 1
            jn = int(u2 * neg)
            if jn >= neg:
                jn = neg - 1
            cnt = -1
            for s in range(m):
                if spins[s] == 1:
                    cnt += 1
                    if cnt == ip:
                        a = s
                        break
            cnt = -1
            for s in range(m):
                if spins[s] == -1:
                    cnt += 1
                    if cnt == jn:
                        b = s
                        break
        else:
            i = int(u1 * m)
            if i >= m:
                i = m - 1
            j = int(u2 * (m - 1))
            if j >= m - 1:
                j = m - 2
            if j >= i:
                j += 1
            if spins[i] == spins[j]:
                continue
            if spins[i] == 1:
                a = i
                b = j
            else:
                a = j
                b = i
        for p in range(d):
            for q in range(d):
                cand[p, q] = rho[p, q] - 2.0 * stack[a, p, q] + 2.0 * stack[b, p, q]
        e_new = _rho_energy(cand, scratch)
        accept = e_new < energy_now
        if not accept:
            accept = u3 < np.exp(-(e_new - energy_now) / temperature)
        if accept:
            spins[a] = -1
            spins[b] = 1
            for p in range(d):
                for q in range(d):
                    rho[p, q] = cand[p, q]
            energy_now = e_new
            accepted += 1
            refresh_count += 1
            if refresh_count >= refresh_interval:
                for p in range(d):
                    for q in range(d):
                        acc = 0.0 + 0.0j
                        for s in range(m):
                            if spins[s] == 1:
                                acc += stack[s, p, q]
                            else:
                                acc -= stack[s, p, q]
                        rho[p, q] = acc
                energy_now = _rho_energy(rho, scratch)
                refresh_count = 0
            if energy_now < best_energy:
                best_energy = energy_now
                for s in range(m):
                    best_spins[s] = spins[s]
    return energy_now, best_energy, accepted, refresh_count


def _spectrum_stats(entries: np.ndarray) -> tuple[float, float]:
    """(entropy with negative eigenvalues clamped out, smallest eigenvalue)."""
    eigs = np.linalg.eigvalsh(entries)
    probs = eigs[eigs > 0.0]
    entropy = float(-np.sum(probs * np.log(probs))) if probs.size else 0.0
    return max(entropy, 0.0), float(eigs[0])


def anneal(
    detectors: Sequence[DensityMatrix], config: AnnealConfig = AnnealConfig()
) -> AnnealReport:
    """Run one annealing chain and report the selected configuration.

    Starts from a uniformly random sector configuration.  Epoch n runs at
    temperature T0/(n+1).  After each epoch the state is reconstructed
    from scratch and tested against both stopping criteria; the first
    epoch satisfying them ends the run with that configuration.  If the
    budget runs out, the best-energy configuration seen is reported
    (or the final one, with track_best off).  Restart orchestration is
    the caller's job; config.seed drives exactly one chain.
    """
    stack = _stack(detectors)
    m = stack.shape[0]
    _require_odd(m)
    d = stack.shape[1]
    rng = np.random.default_rng(np.random.SeedSequence(config.seed))
    spins = np.array(sample_spin_configuration(m, rng).spins)
    rho = np.tensordot(spins.astype(np.float64), stack, axes=1)
    cand = np.empty_like(rho)
    scratch = np.empty_like(rho)
    energy_now = float(
        _rho_energy(np.ascontiguousarray(rho), scratch)
    )
    best_spins = spins.copy()
    best_energy = energy_now
    refresh_count = 0
    pair_mode = config.move_strategy == "pair_exchange"
    trace: list[EpochTrace] = []
    stopped_by: Literal["criteria_met", "max_epochs"] = "max_epochs"
    epochs_run = 0
    final_spins = spins.copy()
    for n in range(1, config.max_epochs + 1):
        temperature = temperature_at_epoch(n, config.initial_temperature)
        if m >= 3:
            uniforms = rng.random((config.flips_per_epoch, 3))
            energy_now, best_energy, accepted, refresh_count = _epoch_kernel(
                spins,
                rho,
                cand,
                scratch,
                best_spins,
                stack,
                uniforms,
                temperature,
                energy_now,
                best_energy,
                refresh_count,
                REFRESH_INTERVAL,
                pair_mode,
            )
        else:
            accepted = 0
        epochs_run = n
        fresh = np.tensordot(spins.astype(np.float64), stack, axes=1)
        entropy, min_eig = _spectrum_stats(fresh)
        trace.append(
            EpochTrace(
                epoch=n,
                temperature=temperature,
                energy=float(energy_now),
                entropy=entropy,
                min_eigenvalue=min_eig,
                acceptance_rate=accepted / config.flips_per_epoch,
            )
        )
        if entropy <= config.entropy_threshold and min_eig >= -config.psd_tolerance:
            stopped_by = "criteria_met"
            final_spins = spins.copy()
            break
    else:
        final_spins = best_spins.copy() if config.track_best else spins.copy()
    chosen = SpinConfiguration(final_spins)
    rho_f = reconstruct_density(chosen, detectors)
    entropy_final, min_eigenvalue = _spectrum_stats(rho_f.entries)
    return AnnealReport(
        spins_final=chosen,
        energy_final=spin_energy(chosen, detectors),
        rho_f=rho_f,
        entropy_final=entropy_final,
        min_eigenvalue=min_eigenvalue,
        epochs_run=epochs_run,
        stopped_by=stopped_by,
        trace=tuple(trace),
    )
