"""Seeded generation, validation and persistence of synthetic instances.

An instance is N unknown pure sources in dimension d, an M x N
row-stochastic mixing matrix, and the M mixed detector matrices the
solvers actually see.  Reproducibility contract: the master seed feeds a
``numpy.random.SeedSequence``; child 0 drives source sampling and child 1
drives mixing-matrix sampling (PCG64 streams), so changing the detector
count never perturbs the source draws.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ScenarioFormatError, ValidationError
from .quantum_core import DensityMatrix, PureState, outer_product

SCENARIO_FORMAT_VERSION = 1
NON_ORTHOGONALITY_TOL = 1e-3
ROW_SUM_TOL = 1e-12
MIX_CONSISTENCY_TOL = 1e-12
_MAX_REDRAWS = 1000


@dataclass(frozen=True)
class MixingMatrix:
    """M x N matrix with entries in [0, 1] and unit row sums."""

    entries: np.ndarray

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=np.float64)
        if ent.ndim != 2:
            raise ValidationError("mixing matrix must be 2-D")
        if np.any(ent < 0.0) or np.any(ent > 1.0):
            raise ValidationError("mixing matrix entries must lie in [0, 1]")
        row_err = np.max(np.abs(ent.sum(axis=1) - 1.0))
        if row_err > ROW_SUM_TOL:
            raise ValidationError(
                f"mixing matrix rows must sum to 1 (max deviation {row_err:.3e})"
            )
        ent = ent.copy()
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @property
    def m_detectors(self) -> int:
        return self.entries.shape[0]

    @property
    def n_sources(self) -> int:
        return self.entries.shape[1]


@dataclass(frozen=True)
class Scenario:
    """A complete synthetic instance, validated on construction."""

    sources: tuple[PureState, ...]
    mixing: MixingMatrix
    detectors: tuple[DensityMatrix, ...]
    seed: int
    d: int
    n_sources: int
    m_detectors: int

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))
        object.__setattr__(self, "detectors", tuple(self.detectors))
        if self.d * self.d <= self.n_sources:
            raise ValidationError(
                f"uniqueness requires d^2 > N (got d={self.d}, N={self.n_sources})"
            )
        if self.m_detectors < self.n_sources:
            raise ValidationError(
                f"need at least as many detectors as sources "
                f"(got M={self.m_detectors}, N={self.n_sources})"
            )
        if len(self.sources) != self.n_sources:
            raise ValidationError("source count does not match n_sources")
        if len(self.detectors) != self.m_detectors:
            raise ValidationError("detector count does not match m_detectors")
        if self.mixing.entries.shape != (self.m_detectors, self.n_sources):
            raise ValidationError("mixing matrix shape does not match (M, N)")
        if any(s.dim != self.d for s in self.sources):
            raise ValidationError("all sources must have dimension d")
        for i in range(self.n_sources):
            for j in range(i + 1, self.n_sources):
                overlap = abs(
                    np.vdot(self.sources[i].amplitudes, self.sources[j].amplitudes)
                )
                if overlap <= NON_ORTHOGONALITY_TOL:
                    raise ValidationError(
                        f"sources {i} and {j} are (near-)orthogonal: "
                        f"|overlap| = {overlap:.3e} <= {NON_ORTHOGONALITY_TOL:g}"
                    )
        expected = mix(list(self.sources), self.mixing)
        for j, (det, exp) in enumerate(zip(self.detectors, expected)):
            err = np.max(np.abs(det.entries - exp.entries))
            if err > MIX_CONSISTENCY_TOL:
                raise ValidationError(
                    f"detector {j} does not equal the mixture of the sources "
                    f"(max deviation {err:.3e})"
                )


def sample_pure_state(d: int, rng: np.random.Generator) -> PureState:
    """Draw a pure state with coefficients uniform on [-5, 5], normalized."""
    if d < 2:
        raise ValidationError("pure state dimension must be >= 2")
    for _ in range(_MAX_REDRAWS):
        coeffs = rng.uniform(-5.0, 5.0, size=d)
        norm = np.linalg.norm(coeffs)
        if norm > 0.0:
            return PureState(coeffs.astype(np.complex128) / norm)
    raise ValidationError("could not draw a normalizable coefficient vector")


def sample_mixing_matrix(m: int, n: int, rng: np.random.Generator) -> MixingMatrix:
    """Draw entries uniform on [0, 1], then normalize each row to unit sum."""
    if m < 1 or n < 1:
        raise ValidationError("mixing matrix needs m >= 1 and n >= 1")
    rows = np.empty((m, n))
    for j in range(m):
        for _ in range(_MAX_REDRAWS):
            row = rng.random(n)
            total = row.sum()
            if total > 0.0:
                rows[j] = row / total
                break
        else:
            raise ValidationError(f"row {j} summed to zero on every redraw")
    return MixingMatrix(rows)


def mix(sources: Sequence[PureState], mixing: MixingMatrix) -> list[DensityMatrix]:
    """Detector matrices: row j of the mixing matrix weights the projectors."""
    if mixing.n_sources != len(sources):
        raise ValidationError(
            f"mixing matrix has {mixing.n_sources} columns but "
            f"{len(sources)} sources were given"
        )
    dims = {s.dim for s in sources}
    if len(dims) != 1:
        raise ValidationError("all sources must share the same dimension")
    projectors = np.stack([outer_product(s).entries for s in sources])
    mixed = np.tensordot(mixing.entries, projectors, axes=1)
    return [DensityMatrix(m, physical=True) for m in mixed]


def generate_scenario(
    d: int,
    n_sources: int,
    m_detectors: int,
    seed: int,
    min_overlap: float = NON_ORTHOGONALITY_TOL,
) -> Scenario:
    """Generate a full instance from a master seed.

    Source sets whose pairwise overlaps do not exceed ``min_overlap`` are
    rejected and redrawn from the same stream.
    """
    if d * d <= n_sources:
        raise ValidationError(
            f"uniqueness requires d^2 > N (got d={d}, N={n_sources})"
        )
    if m_detectors < n_sources:
        raise ValidationError(
            f"need at least as many detectors as sources "
            f"(got M={m_detectors}, N={n_sources})"
        )
    source_seq, mixing_seq = np.random.SeedSequence(seed).spawn(2)
    source_rng = np.random.default_rng(source_seq)
    for _ in range(_MAX_REDRAWS):
        sources = [sample_pure_state(d, source_rng) for _ in range(n_sources)]
        overlaps = [
            abs(np.vdot(sources[i].amplitudes, sources[j].amplitudes))
            for i in range(n_sources)
            for j in range(i + 1, n_sources)
        ]
        if all(o > min_overlap for o in overlaps):
            break
    else:
        raise ValidationError(
            "could not draw a non-orthogonal source set; lower min_overlap"
        )
    mixing = sample_mixing_matrix(m_detectors, n_sources, np.random.default_rng(mixing_seq))
    detectors = mix(sources, mixing)
    return Scenario(
        sources=tuple(sources),
        mixing=mixing,
        detectors=tuple(detectors),
        seed=int(seed),
        d=d,
        n_sources=n_sources,
        m_detectors=m_detectors,
    )


def _complex_vector_pairs(vec: np.ndarray) -> list[list[float]]:
    return [[float(z.real), float(z.imag)] for z in vec]


def _complex_matrix_pairs(mat: np.ndarray) -> list[list[list[float]]]:
    return [_complex_vector_pairs(row) for row in mat]


def _pairs_to_complex(pairs, expected_shape: tuple[int, ...]) -> np.ndarray:
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.shape != expected_shape + (2,):
        raise ScenarioFormatError(
            f"expected complex-pair array of shape {expected_shape}, "
            f"got {arr.shape[:-1] if arr.ndim > 0 else arr.shape}"
        )
    return arr[..., 0] + 1j * arr[..., 1]


def scenario_to_dict(s: Scenario) -> dict:
    return {
        "version": SCENARIO_FORMAT_VERSION,
        "seed": s.seed,
        "d": s.d,
        "n_sources": s.n_sources,
        "m_detectors": s.m_detectors,
        "sources": [_complex_vector_pairs(src.amplitudes) for src in s.sources],
        "mixing": [[float(x) for x in row] for row in s.mixing.entries],
        "detectors": [_complex_matrix_pairs(det.entries) for det in s.detectors],
    }


def scenario_from_dict(data: dict) -> Scenario:
    try:
        version = data["version"]
        if version != SCENARIO_FORMAT_VERSION:
            raise ScenarioFormatError(f"unsupported scenario format version {version!r}")
        d = int(data["d"])
        n = int(data["n_sources"])
        m = int(data["m_detectors"])
        sources = tuple(
            PureState(_pairs_to_complex(src, (d,))) for src in data["sources"]
        )
        mixing = MixingMatrix(np.asarray(data["mixing"], dtype=np.float64))
        detectors = tuple(
            DensityMatrix(_pairs_to_complex(det, (d, d)), physical=True)
            for det in data["detectors"]
        )
        seed = int(data["seed"])
    except (KeyError, TypeError, IndexError) as exc:
        raise ScenarioFormatError(f"malformed scenario document: {exc}") from exc
    return Scenario(
        sources=sources,
        mixing=mixing,
        detectors=detectors,
        seed=seed,
        d=d,
        n_sources=n,
        m_detectors=m,
    )


def save_scenario(s: Scenario, path: str | Path) -> None:
    """Write a scenario as JSON; floats round-trip exactly."""
    Path(path).write_text(json.dumps(scenario_to_dict(s), indent=2, sort_keys=True))


def load_scenario(path: str | Path) -> Scenario:
    """Read and fully re-validate a scenario file."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ScenarioFormatError(f"cannot read scenario file {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioFormatError(f"scenario file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioFormatError("scenario document must be a JSON object")
    return scenario_from_dict(data)
