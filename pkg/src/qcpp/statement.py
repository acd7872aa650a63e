"""Convergence check for +/-1 recombination of mixed signal vectors.

Real-vector analogue of the density-matrix problem: signals are
nonnegative mixtures of a few source vectors, and the question is how
well a +/-1-weighted sum of signals can approximate one chosen source as
the number of signals grows.  Enumeration over all sign vectors makes
the per-instance minimum exact, so the convergence trend is measured,
not sampled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import SizeCapError, ValidationError

SIGN_ENUMERATION_CAP = 25
MIX_CONSISTENCY_TOL = 1e-12
_CHUNK = 1 << 16


@dataclass(frozen=True)
class VectorScenario:
    """Real sources (N x D), mixing matrix (M x N) with entries in [0, 1]
    and no row-sum restriction, and the mixed signals (M x D)."""

    sources: np.ndarray
    mixing: np.ndarray
    signals: np.ndarray
    seed: int = 0

    def __post_init__(self):
        sources = np.asarray(self.sources, dtype=np.float64)
        mixing = np.asarray(self.mixing, dtype=np.float64)
        signals = np.asarray(self.signals, dtype=np.float64)
        if sources.ndim != 2 or sources.size == 0:
            raise ValidationError("sources must form a non-empty 2-D array")
        if mixing.ndim != 2 or mixing.shape[1] != sources.shape[0]:
            raise ValidationError("mixing must be 2-D with one column per source")
        if np.any(mixing < 0.0) or np.any(mixing > 1.0):
            raise ValidationError("mixing entries must lie in [0, 1]")
        if signals.shape != (mixing.shape[0], sources.shape[1]):
            raise ValidationError("signals shape must be (M, D)")
        drift = np.max(np.abs(signals - mixing @ sources), initial=0.0)
        if drift > MIX_CONSISTENCY_TOL:
            raise ValidationError(
                f"signals disagree with mixing @ sources by {drift:.3e}"
            )
        for arr in (sources, mixing, signals):
            arr.setflags(write=False)
        object.__setattr__(self, "sources", sources)
        object.__setattr__(self, "mixing", mixing)
        object.__setattr__(self, "signals", signals)

    @property
    def n_sources(self) -> int:
        return self.sources.shape[0]

    @property
    def m_signals(self) -> int:
        return self.mixing.shape[0]

    @property
    def dim(self) -> int:
        return self.sources.shape[1]


def sample_vector_scenario(
    n_sources: int, dim: int, m_signals: int, rng: np.random.Generator, seed: int = 0
) -> VectorScenario:
    """Draw sources with uniform [-5, 5] components and mixing entries
    uniform in [0, 1)."""
    if n_sources < 1 or dim < 1 or m_signals < 1:
        raise ValidationError("n_sources, dim and m_signals must be positive")
    sources = rng.uniform(-5.0, 5.0, size=(n_sources, dim))
    mixing = rng.random((m_signals, n_sources))
    return VectorScenario(sources, mixing, mixing @ sources, seed=seed)


def min_residual(
    scenario: VectorScenario, target_k: int = 0
) -> tuple[float, np.ndarray]:
    """Exact minimum of ||sum_j w_j x_j - s_k|| over all w in {-1, +1}^M.

    No magnetization constraint applies here.  Ties break to the
    lexicographically smallest sign vector under +1 < -1; scanning sign
    vectors in that order and keeping the first strict improvement
    realizes the tie-break directly.
    """
    m = scenario.m_signals
    if not 0 <= target_k < scenario.n_sources:
        raise ValidationError(f"target index {target_k} out of range")
    if m > SIGN_ENUMERATION_CAP:
        raise SizeCapError(
            f"2^{m} sign vectors exceed the enumeration cap of 2^{SIGN_ENUMERATION_CAP}"
        )
    target = scenario.sources[target_k]
    shifts = np.arange(m - 1, -1, -1, dtype=np.uint64)
    best_sq = np.inf
    best_code = 0
    for start in range(0, 1 << m, _CHUNK):
        codes = np.arange(start, min(start + _CHUNK, 1 << m), dtype=np.uint64)
        # bit 0 -> +1, bit 1 -> -1, most significant bit = first signal
        signs = 1.0 - 2.0 * ((codes[:, None] >> shifts[None, :]) & 1)
        residual = signs @ scenario.signals - target
        sq = np.einsum("bd,bd->b", residual, residual)
        idx = int(np.argmin(sq))
        if sq[idx] < best_sq:
            best_sq = float(sq[idx])
            best_code = int(codes[idx])
    best_signs = (1 - 2 * ((best_code >> shifts) & 1)).astype(np.int8)
    return float(np.sqrt(max(best_sq, 0.0))), best_signs


@dataclass(frozen=True)
class StatementRow:
    trial: int
    m: int
    inverse_m: float
    residual: float


@dataclass(frozen=True)
class StatementSummary:
    m: int
    mean_residual: float
    min_residual: float
    max_residual: float


@dataclass(frozen=True)
class StatementSweepResult:
    rows: tuple[StatementRow, ...]
    summary: tuple[StatementSummary, ...]


def _check_m_list(m_list: Sequence[int], nested: bool) -> list[int]:
    ms = [int(m) for m in m_list]
    if not ms or any(m < 1 for m in ms):
        raise ValidationError("m_list must hold positive signal counts")
    if sorted(ms) != ms or len(set(ms)) != len(ms):
        raise ValidationError("m_list must be strictly increasing")
    if max(ms) > SIGN_ENUMERATION_CAP:
        raise SizeCapError(
            f"largest M {max(ms)} exceeds the enumeration cap of {SIGN_ENUMERATION_CAP}"
        )
    if nested and any((b - a) % 2 for a, b in zip(ms, ms[1:])):
        raise ValidationError(
            "nested sweeps need even gaps between M values (signals are appended in pairs)"
        )
    return ms


def statement_sweep(
    n_sources: int,
    dim: int,
    m_list: Sequence[int],
    trials: int,
    seed: int,
    target_k: int = 0,
    nested: bool = True,
) -> StatementSweepResult:
    """Residual-vs-M sweep over independently seeded trials.

    Nested mode (default) keeps each trial's earlier signals and appends
    fresh ones in duplicated pairs: a pair's signs can cancel (+1, -1),
    so every earlier sign vector stays feasible and the per-trial minimum
    is monotone non-increasing in M by construction.  With nested=False
    each M gets an independent redraw of all mixing rows (sources fixed
    per trial) and no monotonicity is guaranteed.
    """
    ms = _check_m_list(m_list, nested)
    if trials < 1:
        raise ValidationError("trials must be positive")
    children = np.random.SeedSequence(seed).spawn(trials)
    rows: list[StatementRow] = []
    per_m: dict[int, list[float]] = {m: [] for m in ms}
    for trial, child in enumerate(children):
        rng = np.random.default_rng(child)
        sources = rng.uniform(-5.0, 5.0, size=(n_sources, dim))
        mixing_rows: list[np.ndarray] = []
        for m in ms:
            if nested:
                while len(mixing_rows) < min(m, ms[0]):
                    mixing_rows.append(rng.random(n_sources))
                while len(mixing_rows) < m:
                    row = rng.random(n_sources)
                    mixing_rows.append(row)
                    mixing_rows.append(row.copy())
            else:
                mixing_rows = [rng.random(n_sources) for _ in range(m)]
            mixing = np.array(mixing_rows)
            scenario = VectorScenario(sources, mixing, mixing @ sources, seed=seed)
            residual, _ = min_residual(scenario, target_k)
            rows.append(
                StatementRow(trial=trial, m=m, inverse_m=1.0 / m, residual=residual)
            )
            per_m[m].append(residual)
    summary = tuple(
        StatementSummary(
            m=m,
            mean_residual=float(np.mean(per_m[m])),
            min_residual=float(np.min(per_m[m])),
            max_residual=float(np.max(per_m[m])),
        )
        for m in ms
    )
    return StatementSweepResult(rows=tuple(rows), summary=summary)
