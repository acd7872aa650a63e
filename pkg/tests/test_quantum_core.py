from __future__ import annotations

import numpy as np
import pytest

from qcpp import (
    DensityMatrix,
    NonPhysicalStateError,
    PureState,
    ValidationError,
    fidelity,
    outer_product,
    purity,
    von_neumann_entropy,
)


def _random_state(d, rng):
    vec = rng.uniform(-5.0, 5.0, d) + 1j * rng.uniform(-5.0, 5.0, d)
    return PureState(vec / np.linalg.norm(vec))


def _random_mixed(d, rng, rank=3):
    """Convex mixture of random projectors."""
    weights = rng.random(rank)
    weights /= weights.sum()
    entries = np.zeros((d, d), dtype=complex)
    for w in weights:
        entries += w * outer_product(_random_state(d, rng)).entries
    return DensityMatrix(entries)


class TestPureState:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValidationError):
            PureState(np.array([1.0, 1.0]))

    def test_rejects_scalar_dimension(self):
        with pytest.raises(ValidationError):
            PureState(np.array([1.0]))

    def test_amplitudes_are_read_only(self):
        psi = PureState(np.array([1.0, 0.0, 0.0]))
        with pytest.raises(ValueError):
            psi.amplitudes[0] = 0.5


class TestDensityMatrix:
    def test_rejects_non_hermitian(self):
        bad = np.array([[0.5, 0.1], [0.3, 0.5]], dtype=complex)
        with pytest.raises(ValidationError):
            DensityMatrix(bad)

    def test_rejects_wrong_trace(self):
        with pytest.raises(ValidationError):
            DensityMatrix(np.eye(2, dtype=complex))

    def test_rejects_negative_spectrum_when_physical(self):
        bad = np.diag([1.5, -0.5]).astype(complex)
        with pytest.raises(NonPhysicalStateError):
            DensityMatrix(bad)
        # the same entries are representable as a non-physical candidate
        assert DensityMatrix(bad, physical=False).min_eigenvalue() < 0

    def test_outer_product_is_projector(self):
        rng = np.random.default_rng(7)
        for _ in range(10):
            rho = outer_product(_random_state(6, rng))
            np.testing.assert_allclose(
                rho.entries @ rho.entries, rho.entries, atol=1e-12
            )
            assert abs(np.trace(rho.entries) - 1.0) < 1e-12


class TestFidelity:
    def test_identical_states(self):
        rng = np.random.default_rng(0)
        rho = _random_mixed(5, rng)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal_pure_states(self):
        a = outer_product(PureState(np.array([1.0, 0.0])))
        b = outer_product(PureState(np.array([0.0, 1.0])))
        assert fidelity(a, b) == pytest.approx(0.0, abs=1e-8)

    def test_pure_states_match_overlap(self):
        """For projectors the fidelity reduces to |<a|b>|."""
        rng = np.random.default_rng(21)
        for _ in range(20):
            psi, phi = _random_state(8, rng), _random_state(8, rng)
            expected = abs(np.vdot(psi.amplitudes, phi.amplitudes))
            got = fidelity(outer_product(psi), outer_product(phi))
            assert got == pytest.approx(expected, abs=1e-10)

    def test_maximally_mixed_versus_pure(self):
        d = 8
        mixed = DensityMatrix(np.eye(d, dtype=complex) / d)
        pure = outer_product(PureState(np.eye(d)[0].astype(complex)))
        assert fidelity(mixed, pure) == pytest.approx(1.0 / np.sqrt(d), abs=1e-12)

    def test_mixed_pair_against_spectral_oracle(self):
        """Same quantity from the eigenvalues of rho_a rho_b directly."""
        rng = np.random.default_rng(3)
        for _ in range(10):
            a, b = _random_mixed(6, rng), _random_mixed(6, rng)
            eigs = np.linalg.eigvals(a.entries @ b.entries).real
            # the rank-3 factors force exact zeros whose rounding noise
            # would be sqrt-amplified; drop them before taking the root
            eigs[eigs < 1e-12] = 0.0
            oracle = np.sum(np.sqrt(eigs))
            assert fidelity(a, b) == pytest.approx(oracle, abs=1e-9)
            assert fidelity(a, b) == pytest.approx(fidelity(b, a), abs=1e-10)

    def test_range_and_psd_tolerance(self):
        rng = np.random.default_rng(5)
        a, b = _random_mixed(4, rng), _random_mixed(4, rng)
        assert 0.0 <= fidelity(a, b) <= 1.0
        dented = np.diag([1.0 + 1e-7, -1e-7, 0.0, 0.0]).astype(complex)
        candidate = DensityMatrix(dented, physical=False)
        with pytest.raises(NonPhysicalStateError):
            fidelity(candidate, b, psd_tol=1e-8)
        # clamping path accepts the same candidate
        assert 0.0 <= fidelity(candidate, b, psd_tol=None) <= 1.0


class TestEntropyAndPurity:
    def test_pure_state_entropy_zero(self):
        rng = np.random.default_rng(11)
        rho = outer_product(_random_state(7, rng))
        assert von_neumann_entropy(rho) == pytest.approx(0.0, abs=1e-10)

    def test_maximally_mixed_entropy(self):
        for d in (2, 4, 8):
            rho = DensityMatrix(np.eye(d, dtype=complex) / d)
            assert von_neumann_entropy(rho) == pytest.approx(np.log(d), abs=1e-12)

    def test_equal_mixture_of_orthogonal_pair(self):
        rho = DensityMatrix(np.diag([0.5, 0.5, 0.0, 0.0]).astype(complex))
        assert von_neumann_entropy(rho) == pytest.approx(np.log(2.0), abs=1e-12)

    def test_entropy_spectral_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            rho = _random_mixed(6, rng)
            eigs = np.linalg.eigvalsh(rho.entries)
            eigs = eigs[eigs > 1e-15]
            assert von_neumann_entropy(rho) == pytest.approx(
                float(-np.sum(eigs * np.log(eigs))), abs=1e-9
            )

    def test_purity(self):
        d = 8
        assert purity(DensityMatrix(np.eye(d, dtype=complex) / d)) == pytest.approx(
            1.0 / d, abs=1e-14
        )
        rng = np.random.default_rng(17)
        assert purity(outer_product(_random_state(d, rng))) == pytest.approx(
            1.0, abs=1e-12
        )
