import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ulamlab.errors import NonNormalMatrixError, SingularMatrixError, SpectralGapError
from ulamlab.linalg import (SVD_CROSSOVER, UnitaryMatrix, load_matrix, matrix_from_json, matrix_to_json, norm,
                            opnorms, polar, polar_unitary, save_matrix, spectral_projection, spectrum_normal)
from ulamlab.reps import near_identity, random_unitary

seeds = st.integers(0, 2 ** 32 - 1)
dims = st.integers(1, 6)


def cgauss(rng, *shape):
    return rng.normal(size=shape) + 1j * rng.normal(size=shape)


def test_norm_examples():
    for d in (1, 3, 5):
        assert norm(np.eye(d)) == pytest.approx(1.0, abs=1e-14)
        assert norm(np.eye(d), "hilbert-schmidt") == pytest.approx(math.sqrt(d), abs=1e-14)
    assert norm(np.diag([3j, -4])) == pytest.approx(4.0, abs=1e-14)


def test_power_iteration_above_crossover():
    rng = np.random.default_rng(5)
    d = SVD_CROSSOVER + 8
    s = np.linspace(1, 2, d)
    s[-1] = 3.0
    U = np.linalg.qr(cgauss(rng, d, d))[0]
    V = np.linalg.qr(cgauss(rng, d, d))[0]
    A = (U * s) @ V.conj().T
    assert norm(A) == pytest.approx(3.0, rel=1e-10)


@given(seeds, dims)
def test_norm_properties(seed, d):
    rng = np.random.default_rng(seed)
    A, B = cgauss(rng, d, d), cgauss(rng, d, d)
    U, V = random_unitary(d, rng), random_unitary(d, rng)
    assert norm(A @ B) <= norm(A) * norm(B) * (1 + 1e-9) + 1e-12
    assert norm(U @ A @ V) == pytest.approx(norm(A), rel=1e-9)
    hs = norm(A, "hs")
    assert norm(A) <= hs * (1 + 1e-12)
    assert hs <= math.sqrt(d) * norm(A) * (1 + 1e-12)
    assert opnorms(A[None])[0] == pytest.approx(norm(A), rel=1e-12)


def test_polar_examples():
    U, H = polar(np.eye(3))
    assert np.allclose(U, np.eye(3), atol=1e-14)
    U = polar_unitary(np.diag([1.05, 0.97])).matrix
    assert np.allclose(U, np.eye(2), atol=1e-14)


@given(seeds, dims)
def test_polar_reconstructs(seed, d):
    rng = np.random.default_rng(seed)
    T = cgauss(rng, d, d) + 3 * np.eye(d)
    U, H = polar(T)
    assert norm(U @ H - T) <= 1e-9
    assert norm(U.conj().T @ U - np.eye(d)) <= 1e-10
    assert np.all(np.linalg.eigvalsh(H) > 0)


@given(seeds, dims)
def test_polar_fixes_unitaries(seed, d):
    U = random_unitary(d, np.random.default_rng(seed))
    assert norm(polar_unitary(U).matrix - U) <= 1e-9


@given(seeds, dims, st.floats(0.0, 0.99))
def test_polar_bound(seed, d, eps):
    rng = np.random.default_rng(seed)
    E = cgauss(rng, d, d)
    T = np.eye(d) + eps * E / norm(E)
    U = polar_unitary(T).matrix
    assert norm(U - np.eye(d)) <= 2 * eps + 1e-9


def test_polar_singular():
    with pytest.raises(SingularMatrixError) as exc:
        polar(np.diag([1.0, 1e-14]))
    assert exc.value.smallest_singular_value == pytest.approx(1e-14)


def test_unitary_matrix_tolerance():
    with pytest.raises(ValueError):
        UnitaryMatrix.from_array(np.diag([1.0, 1.0 + 1e-8]))
    u = UnitaryMatrix.from_array(np.eye(2))
    assert u.unitarity_defect == 0.0 and u.dim == 2


def test_spectrum_examples():
    assert np.allclose(spectrum_normal(np.eye(3)), 1)
    assert set(np.round(spectrum_normal(np.diag([1, -1])).real).astype(int)) == {1, -1}


@given(seeds, st.integers(2, 6))
def test_spectrum_of_rotation_unitaries(seed, d):
    rng = np.random.default_rng(seed)
    angles = rng.uniform(-math.pi, math.pi, d)
    W = random_unitary(d, rng)
    A = (W * np.exp(1j * angles)) @ W.conj().T
    got = spectrum_normal(A)
    want = np.exp(1j * angles)
    want = want[np.argsort(np.angle(want))]
    assert np.allclose(got, want, atol=1e-8)
    assert np.all(np.diff(np.angle(got)) >= -1e-12)


def test_non_normal_rejected():
    with pytest.raises(NonNormalMatrixError) as exc:
        spectrum_normal(np.array([[1.0, 1.0], [0.0, 1.0]]))
    assert exc.value.commutator_norm > 0.5


def test_projection_examples():
    assert np.allclose(spectral_projection(np.eye(3), 0.5), np.eye(3))
    assert np.allclose(spectral_projection(np.zeros((3, 3)), 0.5), 0)
    assert np.allclose(spectral_projection(np.diag([0.02, 0.97]), 0.5), np.diag([0, 1]))
    with pytest.raises(SpectralGapError) as exc:
        spectral_projection(np.diag([0.5 + 1e-8, 1.0]), 0.5)
    assert exc.value.eigenvalue == pytest.approx(0.5, abs=1e-7)


@given(seeds, dims)
def test_projection_properties(seed, d):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, d, d)
    H = (A + A.conj().T) / 2
    w = np.linalg.eigvalsh(H)
    t = 0.5 * (w[0] + w[-1]) if d > 1 else w[0] - 1
    if np.min(np.abs(w - t)) < 1e-5:
        return
    Q = spectral_projection(H, t)
    assert norm(Q @ Q - Q) <= 1e-9 and norm(Q - Q.conj().T) <= 1e-9
    assert norm(Q @ H - H @ Q) <= 1e-8
    assert round(np.trace(Q).real) == int(np.sum(w >= t))


@given(seeds, dims)
def test_matrix_json_roundtrip(seed, d):
    rng = np.random.default_rng(seed)
    A = cgauss(rng, d, d + 1)
    B = matrix_from_json(json.loads(json.dumps(matrix_to_json(A))))
    assert np.array_equal(A, B)


def test_matrix_file(tmp_path):
    A = near_identity(3, 0.1, np.random.default_rng(0))
    save_matrix(A, tmp_path / "m.json")
    assert np.array_equal(load_matrix(tmp_path / "m.json"), A)
    obj = json.loads((tmp_path / "m.json").read_text())
    assert obj["rows"] == 3 and len(obj["data"]) == 9
