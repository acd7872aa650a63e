"""Idempotency-loss minimization over detector weights by damped Newton.

The weight vector w (sum fixed to 1) parametrizes the candidate state
rho = sum_j w_j rho_j; the loss is the squared Frobenius norm of
rho^2 - rho, a degree-4 polynomial in w.  The sum constraint is
eliminated, not projected: iterations run in the reduced coordinates
v = w[:-1] with the last weight set to 1 - sum(v), mirroring the way
initial weights are drawn.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .quantum_core import DensityMatrix, fidelity

WEIGHT_SUM_TOL = 1e-10


@dataclass(frozen=True)
class WeightVector:
    """Real weights over the M detectors with unit sum."""

    w: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.w, dtype=np.float64)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("weight vector must be a non-empty 1-D vector")
        total = arr.sum()
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError(
                f"weights must sum to 1 (got {total:.17g})"
            )
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "w", arr)

    @property
    def m(self) -> int:
        return self.w.size


@dataclass(frozen=True)
class NewtonConfig:
    loss_tol: float = 1e-12
    loose_loss_tol: float = 1e-8
    step_tol: float = 1e-12
    max_iterations: int = 1000
    damping_floor: float = 1e-8
    damping_growth: float = 10.0
    damping_cap: float = 1e15


@dataclass(frozen=True)
class NewtonReport:
    """Outcome of one Newton run; source matching is filled by the evaluator."""

    w_final: WeightVector
    rho_f: DensityMatrix
    loss_final: float
    iterations: int
    converged: bool
    matched_source: int | None = None
    matched_fidelity: float | None = None


def _stack(detectors: Sequence[DensityMatrix]) -> np.ndarray:
    if not detectors:
        raise ValidationError("need at least one detector")
    dims = {det.dim for det in detectors}
    if len(dims) != 1:
        raise ValidationError("all detectors must share the same dimension")
    return np.stack([det.entries for det in detectors])


def _loss_from_stack(w: np.ndarray, stack: np.ndarray) -> float:
    rho = np.tensordot(w, stack, axes=1)
    residual = rho @ rho - rho
    return float(np.sum(residual.real**2 + residual.imag**2))


def loss(w: WeightVector, detectors: Sequence[DensityMatrix]) -> float:
    """Squared Frobenius norm of rho^2 - rho at rho = sum_j w_j rho_j."""
    stack = _stack(detectors)
    if w.m != stack.shape[0]:
        raise ValidationError(
            f"weight vector has {w.m} entries but there are {stack.shape[0]} detectors"
        )
    return _loss_from_stack(w.w, stack)


def _full_weights(v: np.ndarray) -> np.ndarray:
    return np.concatenate([v, [1.0 - v.sum()]])


def _gradient_hessian_reduced(v: np.ndarray, stack: np.ndarray):
    """Analytic derivatives of the quartic loss in the reduced coordinates."""
    m = stack.shape[0]
    w = _full_weights(v)
    rho = np.tensordot(w, stack, axes=1)
    rho2 = rho @ rho
    rho3 = rho2 @ rho
    # direction matrices d(rho)/dv_a = rho_a - rho_M
    dirs = stack[: m - 1] - stack[m - 1]

    poly = 4.0 * rho3 - 6.0 * rho2 + 2.0 * rho
    grad = np.einsum("ab,kba->k", poly, dirs).real

    w_dirs = np.einsum("ab,kbc->kac", rho, dirs)  # rho G_k
    w2_dirs = np.einsum("ab,kbc->kac", rho2, dirs)  # rho^2 G_k
    tr_r2gg = np.einsum("kab,lba->kl", w2_dirs, dirs)  # Tr(rho^2 G_k G_l)
    tr_rgrg = np.einsum("kab,lba->kl", w_dirs, w_dirs)  # Tr(rho G_k rho G_l)
    tr_rgg = np.einsum("kab,lba->kl", w_dirs, dirs)  # Tr(rho G_k G_l)
    tr_gg = np.einsum("kab,lba->kl", dirs, dirs)  # Tr(G_k G_l)

    hess = (
        4.0 * (tr_r2gg + tr_r2gg.T)
        + 4.0 * tr_rgrg
        - 6.0 * (tr_rgg + tr_rgg.T)
        + 2.0 * tr_gg
    ).real
    return grad, (hess + hess.T) / 2.0


def loss_gradient_hessian(w: WeightVector, detectors: Sequence[DensityMatrix]):
    """Gradient and Hessian of the loss in the reduced coordinates w[:-1]."""
    stack = _stack(detectors)
    if w.m != stack.shape[0]:
        raise ValidationError(
            f"weight vector has {w.m} entries but there are {stack.shape[0]} detectors"
        )
    return _gradient_hessian_reduced(np.asarray(w.w[:-1], dtype=np.float64), stack)


def newton_solve(
    detectors: Sequence[DensityMatrix],
    init: WeightVector,
    config: NewtonConfig = NewtonConfig(),
) -> NewtonReport:
    """Damped Newton iteration from one starting point.

    Levenberg damping: the step solves (H + lam I) s = -g.  lam starts at
    zero, is multiplied by ``damping_growth`` whenever the step fails to
    decrease the loss or the solve is singular, and shrinks tenfold after
    each accepted step.  Quartic losses have indefinite Hessians far from
    their minima, so undamped Newton diverges from generic starts.
    """
    stack = _stack(detectors)
    if init.m != stack.shape[0]:
        raise ValidationError(
            f"init has {init.m} entries but there are {stack.shape[0]} detectors"
        )
    v = np.asarray(init.w[:-1], dtype=np.float64)
    current = _loss_from_stack(_full_weights(v), stack)
    lam = 0.0
    converged = current < config.loss_tol
    iterations = 0

    while not converged and iterations < config.max_iterations:
        iterations += 1
        grad, hess = _gradient_hessian_reduced(v, stack)
        step = None
        while True:
            try:
                candidate_step = np.linalg.solve(
                    hess + lam * np.eye(hess.shape[0]), -grad
                )
            except np.linalg.LinAlgError:
                candidate_step = None
            if candidate_step is not None and np.all(np.isfinite(candidate_step)):
                trial = v + candidate_step
                trial_loss = _loss_from_stack(_full_weights(trial), stack)
                if np.isfinite(trial_loss) and trial_loss < current:
                    step = candidate_step
                    v = trial
                    current = trial_loss
                    lam /= config.damping_growth
                    break
            lam = max(config.damping_floor, config.damping_growth * lam)
            if lam > config.damping_cap:
                break
        if step is None:
            break  # damping escalation exhausted; report non-convergence
        if current < config.loss_tol:
            converged = True
        elif np.linalg.norm(step) < config.step_tol and current < config.loose_loss_tol:
            converged = True

    w_final = WeightVector(_full_weights(v))
    rho_f = DensityMatrix(np.tensordot(w_final.w, stack, axes=1), physical=False)
    return NewtonReport(
        w_final=w_final,
        rho_f=rho_f,
        loss_final=current,
        iterations=iterations,
        converged=converged,
    )


def sample_initial_weights(m: int, rng: np.random.Generator) -> WeightVector:
    """First M-1 weights uniform on [-2, 2]; the last closes the sum to 1."""
    v = rng.uniform(-2.0, 2.0, size=m - 1)
    return WeightVector(_full_weights(v))


def multi_restart(
    detectors: Sequence[DensityMatrix],
    restarts: int,
    seed: int,
    config: NewtonConfig = NewtonConfig(),
    dedup_fidelity: float = 1.0 - 1e-6,
) -> list[NewtonReport]:
    """Newton from independent random starts; distinct converged solutions.

    Restart i draws its start from SeedSequence child i of ``seed``, so
    results do not depend on how many restarts run or in which order.
    Converged runs whose states have pairwise fidelity above
    ``dedup_fidelity`` are considered the same solution; the list returned
    is sorted by final loss.
    """
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    m = len(detectors)
    children = np.random.SeedSequence(seed).spawn(restarts)
    reports = []
    for child in children:
        init = sample_initial_weights(m, np.random.default_rng(child))
        reports.append(newton_solve(detectors, init, config))

    converged = sorted(
        (r for r in reports if r.converged), key=lambda r: r.loss_final
    )
    distinct: list[NewtonReport] = []
    for report in converged:
        if all(
            fidelity(report.rho_f, kept.rho_f, psd_tol=None) <= dedup_fidelity
            for kept in distinct
        ):
            distinct.append(report)
    return distinct


def match_to_sources(
    report: NewtonReport, sources: Sequence[DensityMatrix]
) -> NewtonReport:
    """Fill in the best-matching source index and its fidelity."""
    fids = [fidelity(report.rho_f, src, psd_tol=None) for src in sources]
    best = int(np.argmax(fids))
    return replace(report, matched_source=best, matched_fidelity=fids[best])
