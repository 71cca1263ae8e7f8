"""Dense complex matrix kernel: norms, polar decomposition, spectra, projections.

Operator norms come from a full SVD up to ``SVD_CROSSOVER`` rows/columns and from
power iteration on ``A^* A`` above it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NonNormalMatrixError, SingularMatrixError, SpectralGapError, UsageError

SVD_CROSSOVER = 512
UNITARY_TOL = 1e-10
SINGULAR_GUARD = 1e-12
NORMAL_TOL = 1e-9
SELF_ADJOINT_TOL = 1e-9
SPECTRAL_BAND = 1e-6


def as_cmatrix(A) -> np.ndarray:
    M = np.asarray(A, dtype=np.complex128)
    if M.ndim != 2 or 0 in M.shape:
        raise UsageError(f"expected a non-empty 2-d matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise UsageError("matrix has non-finite entries")
    return M


def norm(A, kind: str = "operator") -> float:
    M = as_cmatrix(A)
    if kind in ("hilbert-schmidt", "hs"):
        return float(np.sqrt(np.sum(np.abs(M) ** 2)))
    if kind != "operator":
        raise UsageError(f"unknown norm kind {kind!r}")
    if max(M.shape) <= SVD_CROSSOVER:
        return float(np.linalg.norm(M, 2))
    return _power_opnorm(M)


def _power_opnorm(M, tol=1e-14, max_iter=10_000):
    # deterministic start vector; Rayleigh quotient of A^*A converges monotonically from below
    x = np.ones(M.shape[1], dtype=np.complex128) + 0.5j * np.cos(np.arange(M.shape[1]))
    x /= np.linalg.norm(x)
    est = 0.0
    for _ in range(max_iter):
        y = M.conj().T @ (M @ x)
        new = float(np.real(np.vdot(x, y)))
        ny = np.linalg.norm(y)
        if ny == 0.0:
            return 0.0
        x = y / ny
        if abs(new - est) <= tol * max(new, 1e-300):
            est = new
            break
        est = new
    return float(np.sqrt(max(est, 0.0)))


def opnorms(stack) -> np.ndarray:
    """Operator norms of a stack of matrices along the last two axes."""
    stack = np.asarray(stack)
    if stack.shape[-1] == 1 and stack.shape[-2] == 1:
        return np.abs(stack[..., 0, 0])
    return np.linalg.norm(stack, ord=2, axis=(-2, -1))


def unitarity_defect(U) -> float:
    U = np.asarray(U)
    return float(norm(U.conj().T @ U - np.eye(U.shape[0])))


@dataclass(frozen=True, eq=False)
class UnitaryMatrix:
    matrix: np.ndarray
    unitarity_defect: float

    @classmethod
    def from_array(cls, U, tol: float = UNITARY_TOL) -> "UnitaryMatrix":
        M = as_cmatrix(U)
        if M.shape[0] != M.shape[1]:
            raise UsageError("unitary matrices are square")
        d = unitarity_defect(M)
        if d > tol:
            raise UsageError(f"matrix is not unitary: ||U*U - I|| = {d:.3e}")
        M = M.copy()
        M.flags.writeable = False
        return cls(M, d)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def __array__(self, dtype=None, copy=None):
        return self.matrix if dtype is None else self.matrix.astype(dtype)


def polar(T):
    """Polar decomposition ``T = U |T|`` of an invertible square matrix."""
    M = as_cmatrix(T)
    if M.shape[0] != M.shape[1]:
        raise UsageError("polar decomposition needs a square matrix")
    W, s, Vh = np.linalg.svd(M)
    if s[-1] <= SINGULAR_GUARD:
        raise SingularMatrixError(f"matrix is numerically singular (s_min = {s[-1]:.3e})", float(s[-1]))
    U = W @ Vh
    H = (Vh.conj().T * s) @ Vh
    return U, (H + H.conj().T) / 2


def polar_unitary(T) -> UnitaryMatrix:
    return UnitaryMatrix.from_array(polar(T)[0])


def _angle_key(z):
    ang = float(np.angle(z))
    if ang <= -np.pi + 1e-12:
        ang = np.pi
    return (round(ang, 10), round(abs(z), 10))


def spectral_decomposition(A):
    """Eigenvalues (sorted by angle, then modulus) and a unitary eigenbasis of a normal matrix."""
    M = as_cmatrix(A)
    comm = norm(M.conj().T @ M - M @ M.conj().T)
    if comm > NORMAL_TOL:
        raise NonNormalMatrixError(comm)
    T, Z = scipy.linalg.schur(M, output="complex")
    eigs = np.diag(T).copy()
    order = sorted(range(len(eigs)), key=lambda i: _angle_key(eigs[i]))
    eigs, Z = eigs[order], Z[:, order]
    err = norm((Z * eigs) @ Z.conj().T - M)
    if err > 1e-8:
        raise NonNormalMatrixError(comm)
    return eigs, Z


def spectrum_normal(A) -> np.ndarray:
    return spectral_decomposition(A)[0]


def spectral_projection(H, threshold: float) -> np.ndarray:
    """Orthogonal projection onto the eigenvectors of ``H`` with eigenvalue >= threshold."""
    M = as_cmatrix(H)
    asym = norm(M - M.conj().T)
    if asym > SELF_ADJOINT_TOL:
        raise UsageError(f"matrix is not self-adjoint: ||H - H*|| = {asym:.3e}")
    w, V = np.linalg.eigh((M + M.conj().T) / 2)
    close = np.flatnonzero(np.abs(w - threshold) < SPECTRAL_BAND)
    if close.size:
        lam = float(w[close[0]])
        raise SpectralGapError(f"eigenvalue {lam!r} lies within {SPECTRAL_BAND} of the threshold", lam)
    sel = V[:, w >= threshold]
    Q = sel @ sel.conj().T
    return (Q + Q.conj().T) / 2


# -- JSON matrix files ---------------------------------------------------------

def matrix_to_json(A) -> dict:
    M = as_cmatrix(A)
    return {
        "rows": M.shape[0],
        "cols": M.shape[1],
        "data": [[float(z.real), float(z.imag)] for z in M.ravel()],
    }


def matrix_from_json(obj) -> np.ndarray:
    rows, cols = int(obj["rows"]), int(obj["cols"])
    data = obj["data"]
    if len(data) != rows * cols:
        raise UsageError(f"matrix data has {len(data)} entries, expected {rows * cols}")
    M = np.array([complex(re, im) for re, im in data], dtype=np.complex128).reshape(rows, cols)
    return as_cmatrix(M)


def save_matrix(A, path) -> None:
    with open(path, "w") as fh:
        json.dump(matrix_to_json(A), fh)


def load_matrix(path) -> np.ndarray:
    with open(path) as fh:
        return matrix_from_json(json.load(fh))
