from __future__ import annotations

import json

import numpy as np
import pytest

from qcpp import (
    MixingMatrix,
    Scenario,
    ScenarioFormatError,
    ValidationError,
    fidelity,
    generate_scenario,
    load_scenario,
    mix,
    outer_product,
    sample_mixing_matrix,
    sample_pure_state,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)


def test_sample_pure_state_is_normalized():
    rng = np.random.default_rng(4)
    for _ in range(20):
        psi = sample_pure_state(8, rng)
        assert abs(np.linalg.norm(psi.amplitudes) - 1.0) < 1e-12


def test_sample_mixing_matrix_rows():
    rng = np.random.default_rng(4)
    mat = sample_mixing_matrix(9, 3, rng)
    assert mat.entries.shape == (9, 3)
    assert np.all(mat.entries >= 0.0) and np.all(mat.entries <= 1.0)
    np.testing.assert_allclose(mat.entries.sum(axis=1), 1.0, atol=1e-12)


def test_mixing_matrix_rejects_bad_rows():
    with pytest.raises(ValidationError):
        MixingMatrix(np.array([[0.7, 0.2]]))  # row sums to 0.9
    with pytest.raises(ValidationError):
        MixingMatrix(np.array([[1.2, -0.2]]))  # entries outside [0, 1]


def test_mix_produces_unit_trace_mixtures():
    rng = np.random.default_rng(2)
    sources = [sample_pure_state(8, rng) for _ in range(3)]
    mixing = sample_mixing_matrix(5, 3, rng)
    detectors = mix(sources, mixing)
    assert len(detectors) == 5
    stack = np.stack([outer_product(s).entries for s in sources])
    for j, det in enumerate(detectors):
        expected = np.tensordot(mixing.entries[j], stack, axes=1)
        np.testing.assert_allclose(det.entries, expected, atol=1e-14)


def test_generate_scenario_is_deterministic():
    a = generate_scenario(8, 3, 7, seed=123)
    b = generate_scenario(8, 3, 7, seed=123)
    for pa, pb in zip(a.sources, b.sources):
        np.testing.assert_array_equal(pa.amplitudes, pb.amplitudes)
    np.testing.assert_array_equal(a.mixing.entries, b.mixing.entries)
    c = generate_scenario(8, 3, 7, seed=124)
    assert not np.array_equal(a.mixing.entries, c.mixing.entries)


def test_generated_sources_overlap():
    """Orthogonal source pairs are rejected at generation time."""
    for seed in range(5):
        s = generate_scenario(8, 3, 7, seed=seed)
        mats = [outer_product(p) for p in s.sources]
        for i in range(3):
            for j in range(i + 1, 3):
                assert fidelity(mats[i], mats[j]) > 1e-3


def test_generate_scenario_preconditions():
    with pytest.raises(ValidationError):
        generate_scenario(2, 4, 5, seed=0)  # d^2 must exceed N
    with pytest.raises(ValidationError):
        generate_scenario(8, 3, 2, seed=0)  # fewer detectors than sources


def test_scenario_validates_detector_consistency():
    s = generate_scenario(8, 3, 5, seed=1)
    tampered = list(s.detectors)
    tampered[0] = s.detectors[1]
    with pytest.raises(ValidationError):
        Scenario(
            sources=s.sources,
            mixing=s.mixing,
            detectors=tuple(tampered),
            seed=s.seed,
            d=s.d,
            n_sources=s.n_sources,
            m_detectors=s.m_detectors,
        )


def test_dict_round_trip_is_exact():
    s = generate_scenario(8, 3, 7, seed=99)
    again = scenario_from_dict(scenario_to_dict(s))
    for pa, pb in zip(s.sources, again.sources):
        np.testing.assert_array_equal(pa.amplitudes, pb.amplitudes)
    np.testing.assert_array_equal(s.mixing.entries, again.mixing.entries)
    for da, db in zip(s.detectors, again.detectors):
        np.testing.assert_array_equal(da.entries, db.entries)


def test_file_round_trip_and_byte_identity(tmp_path):
    s = generate_scenario(8, 3, 5, seed=7)
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_scenario(s, p1)
    save_scenario(load_scenario(p1), p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_load_rejects_malformed_files(tmp_path):
    missing = tmp_path / "nope.json"
    with pytest.raises(ScenarioFormatError):
        load_scenario(missing)
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ScenarioFormatError):
        load_scenario(bad)
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"version": 999}))
    with pytest.raises(ScenarioFormatError):
        load_scenario(wrong)
