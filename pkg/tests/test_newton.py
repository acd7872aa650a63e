from __future__ import annotations

import numpy as np
import pytest

from qcpp import (
    NewtonConfig,
    PureState,
    ValidationError,
    WeightVector,
    generate_scenario,
    loss,
    loss_gradient_hessian,
    match_to_sources,
    multi_restart,
    newton_solve,
    outer_product,
    sample_initial_weights,
)
from qcpp.newton import _full_weights


def _naive_loss(w, detectors):
    """Loss straight from the definition, no shared code with the library path."""
    rho = sum(wj * det.entries for wj, det in zip(w.w, detectors))
    diff = rho @ rho - rho
    return float(np.sum(np.abs(diff) ** 2))


def _fd_gradient(w, detectors, h=1e-5):
    """Central differences in the reduced coordinates (last weight eliminated)."""
    v = w.w[:-1].copy()
    grad = np.empty(v.size)
    for k in range(v.size):
        vp, vm = v.copy(), v.copy()
        vp[k] += h
        vm[k] -= h
        grad[k] = (
            loss(WeightVector(_full_weights(vp)), detectors)
            - loss(WeightVector(_full_weights(vm)), detectors)
        ) / (2 * h)
    return grad


def _fd_hessian(w, detectors, h=1e-4):
    v = w.w[:-1].copy()
    n = v.size
    hess = np.empty((n, n))
    for a in range(n):
        for b in range(n):
            vals = []
            for sa, sb in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
                vv = v.copy()
                vv[a] += sa * h
                vv[b] += sb * h
                vals.append(loss(WeightVector(_full_weights(vv)), detectors))
            hess[a, b] = (vals[0] - vals[1] - vals[2] + vals[3]) / (4 * h * h)
    return hess


def test_weight_vector_requires_unit_sum():
    with pytest.raises(ValidationError):
        WeightVector(np.array([0.5, 0.4]))
    w = WeightVector(np.array([2.0, -1.5, 0.5]))
    assert w.m == 3
    with pytest.raises(ValueError):
        w.w[0] = 0.0


def test_loss_matches_naive_path():
    rng = np.random.default_rng(8)
    s = generate_scenario(8, 3, 7, seed=5)
    for _ in range(20):
        w = sample_initial_weights(7, rng)
        assert loss(w, s.detectors) == pytest.approx(
            _naive_loss(w, s.detectors), rel=1e-12
        )


def test_loss_at_maximally_mixed_point():
    """Equal weights over a full set of orthogonal projectors give rho = I/d,
    whose loss is d (1/d^2 - 1/d)^2 = 49/512 at d = 8."""
    d = 8
    dets = [
        outer_product(PureState(np.eye(d)[k].astype(complex))) for k in range(d)
    ]
    w = WeightVector(np.full(d, 1.0 / d))
    assert loss(w, dets) == pytest.approx(49.0 / 512.0, rel=1e-13)


def test_gradient_and_hessian_match_finite_differences():
    rng = np.random.default_rng(100)
    for seed in range(5):
        s = generate_scenario(8, 3, 7, seed=seed)
        w = sample_initial_weights(7, rng)
        grad, hess = loss_gradient_hessian(w, s.detectors)
        fd_g = _fd_gradient(w, s.detectors)
        fd_h = _fd_hessian(w, s.detectors)
        assert np.linalg.norm(grad - fd_g) <= 1e-6 * np.linalg.norm(fd_g)
        assert np.linalg.norm(hess - fd_h) <= 1e-4 * np.linalg.norm(fd_h)
        np.testing.assert_allclose(hess, hess.T, atol=1e-10)


def test_newton_converges_to_zero_loss():
    s = generate_scenario(8, 3, 5, seed=42)
    rng = np.random.default_rng(0)
    report = None
    for _ in range(10):
        report = newton_solve(s.detectors, sample_initial_weights(5, rng))
        if report.converged:
            break
    assert report is not None and report.converged
    assert report.loss_final < 1e-10
    assert abs(report.w_final.w.sum() - 1.0) < 1e-10


def test_newton_iteration_budget_is_respected():
    s = generate_scenario(8, 3, 5, seed=42)
    rng = np.random.default_rng(1)
    cfg = NewtonConfig(max_iterations=1, loss_tol=1e-30, loose_loss_tol=1e-30)
    report = newton_solve(s.detectors, sample_initial_weights(5, rng), cfg)
    assert report.iterations <= 1
    assert not report.converged


def test_multi_restart_finds_every_source():
    s = generate_scenario(8, 3, 7, seed=11)
    sources = [outer_product(p) for p in s.sources]
    solutions = multi_restart(s.detectors, restarts=40, seed=2)
    matched = set()
    for rep in solutions:
        rep = match_to_sources(rep, sources)
        if rep.matched_fidelity > 0.999:
            matched.add(rep.matched_source)
    assert matched == {0, 1, 2}
    losses = [r.loss_final for r in solutions]
    assert losses == sorted(losses)


def test_multi_restart_is_deterministic():
    s = generate_scenario(8, 3, 5, seed=3)
    a = multi_restart(s.detectors, restarts=12, seed=9)
    b = multi_restart(s.detectors, restarts=12, seed=9)
    assert len(a) == len(b)
    for ra, rb in zip(a, b):
        np.testing.assert_array_equal(ra.w_final.w, rb.w_final.w)
        assert ra.loss_final == rb.loss_final
