"""Spin-Hamiltonian form of the idempotency loss over +/-1 weights.

Restricting the detector weights to +/-1 with unit total turns the loss
into a classical Hamiltonian with 4-, 3- and 2-body couplings built from
traces of detector products.  Only building the couplings depends on the
Hilbert dimension d; evaluating spin energies does not.  The sum
constraint becomes "M odd, total magnetization one".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import ConstraintError, SizeCapError, ValidationError
from .quantum_core import DensityMatrix

ENUMERATION_CAP = 10**7
_CHUNK = 16384


@dataclass(frozen=True)
class SpinConfiguration:
    """Spins in {-1, +1}, odd count, total magnetization one."""

    spins: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.spins)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("spins must form a non-empty 1-D vector")
        if not np.all(np.abs(arr) == 1):
            raise ValidationError("spins must be -1 or +1")
        arr = arr.astype(np.int8)
        if arr.size % 2 == 0:
            raise ConstraintError(
                f"spin count must be odd to reach magnetization 1 (got {arr.size})"
            )
        magnetization = int(arr.sum())
        if magnetization != 1:
            raise ConstraintError(
                f"total magnetization must be 1 (got {magnetization})"
            )
        arr.setflags(write=False)
        object.__setattr__(self, "spins", arr)

    @property
    def m(self) -> int:
        return self.spins.size


@dataclass(frozen=True)
class IsingCoefficients:
    """Coupling tensors: order-4 trace products, order-3 (doubled, negated),
    order-2 overlaps.  Entries are stored unsymmetrized, exactly as the
    full sums over index tuples use them."""

    order4: np.ndarray
    order3: np.ndarray
    order2: np.ndarray
    m: int


def _stack(detectors: Sequence[DensityMatrix]) -> np.ndarray:
    if not detectors:
        raise ValidationError("need at least one detector")
    dims = {det.dim for det in detectors}
    if len(dims) != 1:
        raise ValidationError("all detectors must share the same dimension")
    return np.stack([det.entries for det in detectors])


def _require_odd(m: int) -> None:
    if m % 2 == 0:
        raise ConstraintError(
            f"detector count must be odd: magnetization 1 is unreachable for M={m}"
        )


def build_coefficients(detectors: Sequence[DensityMatrix]) -> IsingCoefficients:
    """Coupling tensors from trace products of the detector matrices.

    order2[i,j] = Tr(rho_i rho_j); order3[i,j,k] = -2 Tr(rho_i rho_j rho_k)
    (the defining sum has two such terms, equal by trace cyclicity);
    order4[i,j,k,l] = Tr(rho_i rho_j rho_k rho_l).  Imaginary parts cancel
    pairwise in every full contraction, so real parts are stored.
    """
    stack = _stack(detectors)
    _require_odd(stack.shape[0])
    m = stack.shape[0]
    pair = np.einsum("iab,jbc->ijac", stack, stack)
    order2 = np.einsum("ijaa->ij", pair).real
    order3 = -2.0 * np.einsum("ijab,kba->ijk", pair, stack, optimize=True).real
    d = stack.shape[1]
    flat = pair.reshape(m * m, d * d)
    flat_t = pair.transpose(0, 1, 3, 2).reshape(m * m, d * d)
    order4 = (flat @ flat_t.T).real.reshape(m, m, m, m)
    return IsingCoefficients(order4=order4, order3=order3, order2=order2, m=m)


def energy(spins: SpinConfiguration, detectors: Sequence[DensityMatrix]) -> float:
    """Spin energy via matrix powers of the reconstructed state.

    Identical (to rounding) to the full coupling-tensor contraction and to
    the idempotency loss evaluated at w = spins; cost is independent of M
    once the reconstruction is formed.
    """
    stack = _stack(detectors)
    if spins.m != stack.shape[0]:
        raise ValidationError(
            f"{spins.m} spins but {stack.shape[0]} detectors"
        )
    rho = np.tensordot(spins.spins.astype(np.float64), stack, axes=1)
    rho2 = rho @ rho
    t2 = float(np.trace(rho2).real)
    t3 = float(np.trace(rho2 @ rho).real)
    t4 = float(np.trace(rho2 @ rho2).real)
    return t4 - 2.0 * t3 + t2


def energy_from_coefficients(
    spins: SpinConfiguration, coeffs: IsingCoefficients
) -> float:
    """Spin energy by contracting the coupling tensors over all index tuples."""
    if spins.m != coeffs.m:
        raise ValidationError(f"{spins.m} spins but coefficients built for M={coeffs.m}")
    s = spins.spins.astype(np.float64)
    e4 = np.einsum("ijkl,i,j,k,l->", coeffs.order4, s, s, s, s, optimize=True)
    e3 = np.einsum("ijk,i,j,k->", coeffs.order3, s, s, s, optimize=True)
    e2 = np.einsum("ij,i,j->", coeffs.order2, s, s)
    return float(e4 + e3 + e2)


def sample_spin_configuration(m: int, rng: np.random.Generator) -> SpinConfiguration:
    """Uniformly random configuration in the magnetization-1 sector."""
    _require_odd(m)
    spins = np.full(m, -1, dtype=np.int8)
    spins[rng.choice(m, size=(m + 1) // 2, replace=False)] = 1
    return SpinConfiguration(spins)


def _batched_energies(signs: np.ndarray, stack: np.ndarray) -> np.ndarray:
    rho = np.einsum("bm,mij->bij", signs, stack)
    rho2 = rho @ rho
    t2 = np.sum(rho.real**2 + rho.imag**2, axis=(1, 2))
    t3 = np.einsum("bij,bji->b", rho2, rho).real
    t4 = np.sum(rho2.real**2 + rho2.imag**2, axis=(1, 2))
    return t4 - 2.0 * t3 + t2


def brute_force_ground_state(
    detectors: Sequence[DensityMatrix], cap: int = ENUMERATION_CAP
) -> tuple[SpinConfiguration, float]:
    """Exact minimum over the magnetization-1 sector by enumeration.

    The Hamiltonian is diagonal in the spin basis, so enumeration is an
    exact oracle.  Ties go to the lexicographically smallest spin vector
    under the ordering +1 < -1; enumeration order makes the first strict
    minimum encountered exactly that configuration.
    """
    stack = _stack(detectors)
    m = stack.shape[0]
    _require_odd(m)
    k = (m + 1) // 2
    total = math.comb(m, k)
    if total > cap:
        raise SizeCapError(
            f"sector has {total} configurations, above the cap of {cap}"
        )
    best_energy = np.inf
    best_signs = None
    combos = combinations(range(m), k)
    while True:
        batch = list(islice(combos, _CHUNK))
        if not batch:
            break
        signs = np.full((len(batch), m), -1.0)
        signs[np.arange(len(batch))[:, None], np.asarray(batch)] = 1.0
        energies = _batched_energies(signs, stack)
        idx = int(np.argmin(energies))
        if energies[idx] < best_energy:
            best_energy = float(energies[idx])
            best_signs = signs[idx].astype(np.int8)
    config = SpinConfiguration(best_signs)
    # report through the scalar path so comparisons against other solvers
    # are float-for-float consistent
    return config, energy(config, detectors)


def export_coefficients(coeffs: IsingCoefficients, path: str | Path) -> None:
    """Write couplings as plain text, one term per line.

    Format: header comments, then ``A i j k l value`` for order-4 terms,
    ``B i j k value`` for order-3, ``C i j value`` for order-2.  Indices
    are 0-based; values use shortest round-trip decimal form.
    """
    m = coeffs.m
    lines = [
        "# ising coefficients v1",
        f"# m {m}",
        "# A i j k l value / B i j k value / C i j value (0-based indices)",
    ]
    for idx in np.ndindex(m, m, m, m):
        lines.append("A %d %d %d %d %r" % (*idx, float(coeffs.order4[idx])))
    for idx in np.ndindex(m, m, m):
        lines.append("B %d %d %d %r" % (*idx, float(coeffs.order3[idx])))
    for idx in np.ndindex(m, m):
        lines.append("C %d %d %r" % (*idx, float(coeffs.order2[idx])))
    Path(path).write_text("\n".join(lines) + "\n")
