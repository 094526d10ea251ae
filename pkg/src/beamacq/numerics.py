"""Complex-matrix kernels shared by the estimation and analysis modules.

Matrices are plain ``numpy.ndarray`` with dtype ``complex128``, 2-D,
C-ordered (row-major).  All operations here are pure functions; arrays are
never mutated in place.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

HERMITIAN_RTOL = 1e-10
EIG_RESIDUAL_RTOL = 1e-9
SPECTRAL_NORM_RTOL = 1e-6
POWER_ITERATION_CAP = 5000


class NonHermitianInput(ValueError):
    """Input matrix deviates from Hermitian symmetry beyond tolerance."""


class NonConvergence(RuntimeError):
    """Iterative kernel hit its iteration cap before reaching tolerance."""


def as_complex_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce to a finite 2-D complex128 array (the ComplexMatrix contract)."""
    arr = np.ascontiguousarray(np.asarray(a, dtype=np.complex128))
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr.view(np.float64))):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class HermitianEig:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    eigenvalues[i] pairs with eigenvectors[:, i]; the eigenvector columns
    are orthonormal.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def hermitian_eig(a) -> HermitianEig:
    """Eigendecomposition of a Hermitian matrix, sorted descending.

    Raises NonHermitianInput when the relative asymmetry
    ||A - A^H||_F / ||A||_F exceeds 1e-10, and NonConvergence when the
    underlying iteration fails.
    """
    a = as_complex_matrix(a)
    n, m = a.shape
    if n != m:
        raise ValueError(f"expected square matrix, got {a.shape}")
    norm = np.linalg.norm(a)
    if norm > 0:
        asym = np.linalg.norm(a - a.conj().T) / norm
        if asym > HERMITIAN_RTOL:
            raise NonHermitianInput(f"relative asymmetry {asym:.3e} > {HERMITIAN_RTOL:.0e}")
    try:
        w, u = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        raise NonConvergence(str(exc)) from exc
    return HermitianEig(eigenvalues=w[::-1].copy(), eigenvectors=np.ascontiguousarray(u[:, ::-1]))


def kron(a, b) -> np.ndarray:
    """Kronecker product; block (i, j) of the result equals a[i, j] * b."""
    return np.kron(as_complex_matrix(a, "a"), as_complex_matrix(b, "b"))


def soft_threshold_complex(x, t: float):
    """Proximal operator of t * |.| for complex scalars or arrays.

    Returns x * max(|x| - t, 0) / |x|, with 0 where x == 0; nonzero
    outputs keep the phase of the input.
    """
    if t < 0:
        raise ValueError("threshold must be nonnegative")
    x = np.asarray(x, dtype=np.complex128)
    mag = np.abs(x)
    scale = np.maximum(mag - t, 0.0) / np.where(mag > 0, mag, 1.0)
    out = x * scale
    return out if out.ndim else complex(out)


def spectral_norm_sq(a) -> float:
    """Largest eigenvalue of A^H A via power iteration, 1e-6 relative.

    Used as the Lipschitz constant of the smooth part of the sparse
    recovery objective.  Raises NonConvergence past the iteration cap.
    """
    a = as_complex_matrix(a)
    if not np.any(a):
        raise ValueError("spectral_norm_sq of a zero matrix")
    rng = np.random.default_rng(0)
    v = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(POWER_ITERATION_CAP):
        w = a.conj().T @ (a @ v)
        lam_new = float(np.real(np.vdot(v, w)))
        nw = np.linalg.norm(w)
        if nw == 0:  # v landed in the null space; reseed
            v = rng.standard_normal(a.shape[1]) + 1j * rng.standard_normal(a.shape[1])
            v /= np.linalg.norm(v)
            continue
        v = w / nw
        if abs(lam_new - lam) <= SPECTRAL_NORM_RTOL * abs(lam_new):
            return lam_new
        lam = lam_new
    raise NonConvergence(f"power iteration did not stabilize in {POWER_ITERATION_CAP} steps")
