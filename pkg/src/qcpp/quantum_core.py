"""Dense Hermitian linear algebra for small-dimension quantum states.

States live in a d-dimensional Hilbert space (d around 8 in practice).
Everything is eigendecomposition-based and works on complex128 arrays;
pure functions, no internal mutability.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NonPhysicalStateError, ValidationError

HERMITICITY_TOL = 1e-12
TRACE_TOL = 1e-10
PHYSICAL_EIG_TOL = 1e-10
FIDELITY_PSD_TOL = 1e-8
ENTROPY_PSD_TOL = 1e-6


def _readonly(arr: np.ndarray) -> np.ndarray:
    out = np.array(arr)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class PureState:
    """A normalized state vector |psi> of dimension d >= 2."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=np.complex128)
        if amp.ndim != 1:
            raise ValidationError("pure state amplitudes must be a 1-D vector")
        if amp.size < 2:
            raise ValidationError("pure state dimension must be >= 2")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > 1e-12:
            raise ValidationError(
                f"pure state is not normalized: |norm - 1| = {abs(norm - 1.0):.3e}"
            )
        object.__setattr__(self, "amplitudes", _readonly(amp))

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DensityMatrix:
    """A d x d Hermitian matrix with unit trace.

    ``physical=True`` (the default) additionally requires positive
    semidefiniteness up to a small tolerance.  Reconstructed candidates
    built from signed detector combinations are genuinely indefinite
    during a search and carry ``physical=False``.
    """

    entries: np.ndarray
    physical: bool = field(default=True)

    def __post_init__(self):
        ent = np.asarray(self.entries, dtype=np.complex128)
        if ent.ndim != 2 or ent.shape[0] != ent.shape[1]:
            raise ValidationError("density matrix must be square")
        asym = np.max(np.abs(ent - ent.conj().T))
        if asym > HERMITICITY_TOL:
            raise ValidationError(
                f"density matrix is not Hermitian: max asymmetry {asym:.3e}"
            )
        trace = ent.trace()
        if abs(trace - 1.0) > TRACE_TOL:
            raise ValidationError(
                f"density matrix trace {trace:.17g} is not 1 within {TRACE_TOL:g}"
            )
        if self.physical:
            min_eig = float(np.linalg.eigvalsh(ent)[0])
            if min_eig < -PHYSICAL_EIG_TOL:
                raise NonPhysicalStateError(
                    f"physical density matrix has eigenvalue {min_eig:.3e} "
                    f"below -{PHYSICAL_EIG_TOL:g}"
                )
        object.__setattr__(self, "entries", _readonly(ent))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.entries)[0])


def outer_product(psi: PureState) -> DensityMatrix:
    """Rank-1 projector |psi><psi| of a normalized pure state."""
    amp = psi.amplitudes
    return DensityMatrix(np.outer(amp, amp.conj()), physical=True)


def _clamped_spectrum(entries: np.ndarray, psd_tol: float | None):
    """Eigendecomposition with negatives clamped to zero.

    Eigenvalues below ``-psd_tol`` raise; those in ``[-psd_tol, 0)`` are
    treated as numerical noise at the PSD boundary.  ``psd_tol=None``
    clamps unconditionally (used when evaluating indefinite candidates).
    """
    vals, vecs = np.linalg.eigh(entries)
    if psd_tol is not None and vals[0] < -psd_tol:
        raise NonPhysicalStateError(
            f"eigenvalue {vals[0]:.3e} below -{psd_tol:g}; state is not "
            "positive semidefinite within tolerance"
        )
    return np.maximum(vals, 0.0), vecs


def fidelity(
    a: DensityMatrix,
    b: DensityMatrix,
    psd_tol: float | None = FIDELITY_PSD_TOL,
) -> float:
    """Uhlmann fidelity Tr sqrt(sqrt(a) b sqrt(a)), in [0, 1].

    Equals |<phi_a|phi_b>| when both states are pure.  Both inputs must
    be positive semidefinite within ``psd_tol``; pass ``psd_tol=None``
    to project an indefinite candidate onto the PSD cone instead.
    """
    va, ua = _clamped_spectrum(a.entries, psd_tol)
    vb, ub = _clamped_spectrum(b.entries, psd_tol)
    sqrt_a = (ua * np.sqrt(va)) @ ua.conj().T
    sqrt_b = (ub * np.sqrt(vb)) @ ub.conj().T
    # Tr sqrt(sqrt(a) b sqrt(a)) is the nuclear norm of sqrt(b) sqrt(a);
    # singular values avoid taking sqrt of eigenvalue rounding noise.
    singulars = np.linalg.svd(sqrt_b @ sqrt_a, compute_uv=False)
    return float(np.clip(np.sum(singulars), 0.0, 1.0))


def von_neumann_entropy(
    rho: DensityMatrix, psd_tol: float | None = ENTROPY_PSD_TOL
) -> float:
    """Entropy -Tr rho ln rho (natural log), with 0 * ln 0 := 0.

    Zero for pure states, ln d for the maximally mixed state.
    Eigenvalues in ``[-psd_tol, 0)`` are clamped to zero before the log.
    """
    vals, _ = _clamped_spectrum(rho.entries, psd_tol)
    positive = vals[vals > 0.0]
    return max(float(-np.sum(positive * np.log(positive))), 0.0)


def purity(rho: DensityMatrix) -> float:
    """Tr rho^2; equals 1 exactly on pure states, below 1 on mixtures."""
    ent = rho.entries
    return float(np.trace(ent @ ent).real)
