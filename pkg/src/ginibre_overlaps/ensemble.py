"""Ginibre matrix sampling and bi-orthogonal eigenvector overlaps.

Reproducibility contract: matrix ``index`` of a campaign with 64-bit seed
``s`` is generated from a Philox4x64 counter-based stream with 128-bit key
``s | (index+1) << 64``.  Uniform variates are the top 53 bits of each
64-bit word; Gaussians come from the Box-Muller transform applied to
consecutive uniform pairs.  A matrix is therefore a pure function of
(spec, index): the same entries are produced regardless of batch size,
thread count, or call order.

Entry layout: beta = 1 fills the n x n matrix row-major with N(0,1)
variates; beta = 2 draws 2 n^2 variates, the first n^2 forming the real
part and the rest the imaginary part, scaled by 1/sqrt(2) so that
E|G_jk|^2 = 1.

Overlaps are computed by two independent routes: right eigenvectors from
the dense nonsymmetric eigendecomposition with left eigenvectors as rows
of the inverse eigenvector matrix (enforcing bi-orthonormality), and a
partial Schur reduction that isolates one real eigenvalue and solves a
shifted linear system for the coupling vector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSampleError, DomainError

#: reject a matrix when any self-overlap exceeds this (near-degenerate spectrum)
OVERLAP_REJECT_THRESHOLD = 1e12
#: numerical floor for t = O_aa - 1 >= 0 (Cauchy-Schwarz)
T_NEGATIVE_TOLERANCE = 1e-10
#: eigen-equation residual bound, relative to ||G||
RESIDUAL_TOLERANCE = 1e-8

REAL_LINE = "real-line"
COMPLEX_PLANE = "complex"


@dataclass(frozen=True)
class EnsembleSpec:
    """A sampling campaign: matrix size, Dyson index, and RNG seed."""

    n: int
    beta: int
    seed: int = 0

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise DomainError(f"matrix size must be a positive integer, got {self.n}")
        if self.beta not in (1, 2):
            raise DomainError(f"beta must be 1 (real) or 2 (complex), got {self.beta}")
        if not (0 <= int(self.seed) < 2**64):
            raise DomainError("seed must fit in 64 bits")


@dataclass
class OverlapSample:
    """One (eigenvalue, overlap) pair harvested from a sampled matrix."""

    eigenvalue: complex
    t: float
    kind: str
    matrix_index: int
    residual: float


def default_real_tolerance(n: int) -> float:
    """|Im z| threshold for calling an eigenvalue of a real matrix real.

    Scales with the eigensolver noise floor, which grows like ||G|| ~ sqrt(n).
    """
    return 1e-9 * math.sqrt(n)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _stream(spec: EnsembleSpec, index: int) -> np.random.Generator:
    key = (int(spec.seed) & (2**64 - 1)) | ((int(index) + 1) << 64)
    return np.random.Generator(np.random.Philox(key=key))


def _normals(gen: np.random.Generator, count: int) -> np.ndarray:
    pairs = (count + 1) // 2
    u = gen.random(2 * pairs)
    r = np.sqrt(-2.0 * np.log1p(-u[0::2]))   # 1 - u in (0, 1], no log(0)
    theta = (2.0 * np.pi) * u[1::2]
    z = np.empty(2 * pairs)
    z[0::2] = r * np.cos(theta)
    z[1::2] = r * np.sin(theta)
    return z[:count]


def sample_ginibre(spec: EnsembleSpec, index: int) -> np.ndarray:
    """The index-th matrix of the deterministic stream defined by spec."""
    if index < 0:
        raise DomainError(f"matrix index must be >= 0, got {index}")
    n = spec.n
    gen = _stream(spec, index)
    if spec.beta == 1:
        return _normals(gen, n * n).reshape(n, n)
    z = _normals(gen, 2 * n * n)
    return ((z[: n * n] + 1j * z[n * n:]) / math.sqrt(2.0)).reshape(n, n)


def sample_ginibre_batch(spec: EnsembleSpec, start: int, count: int) -> np.ndarray:
    """Matrices start .. start+count-1 stacked; identical to per-index calls."""
    dtype = float if spec.beta == 1 else complex
    out = np.empty((count, spec.n, spec.n), dtype=dtype)
    for i in range(count):
        out[i] = sample_ginibre(spec, start + i)
    return out


# ---------------------------------------------------------------------------
# overlaps: bi-orthogonal route
# ---------------------------------------------------------------------------

def _overlaps_core(mats: np.ndarray):
    """Batched eigendecomposition + overlaps.

    Returns (eigenvalues, t, residuals, ok) where ok flags matrices whose
    spectrum is usable (finite, t >= -tol, overlaps below the degeneracy
    threshold, residuals within bounds).
    """
    w, v = np.linalg.eig(mats)
    left = np.linalg.inv(v)
    o_diag = (np.abs(left) ** 2).sum(axis=2) * (np.abs(v) ** 2).sum(axis=1)
    t = o_diag - 1.0

    norm_g = np.sqrt((np.abs(mats) ** 2).sum(axis=(1, 2)))
    resid = np.abs(np.einsum("bij,bjk->bik", mats.astype(v.dtype), v)
                   - w[:, None, :] * v)
    resid = np.sqrt((resid ** 2).real.sum(axis=1)) / np.maximum(norm_g[:, None], 1e-300)

    finite = np.isfinite(t).all(axis=1) & np.isfinite(w).all(axis=1)
    ok = (finite
          & (t.min(axis=1) >= -T_NEGATIVE_TOLERANCE)
          & (o_diag.max(axis=1) <= OVERLAP_REJECT_THRESHOLD)
          & (resid.max(axis=1) <= RESIDUAL_TOLERANCE))
    np.clip(t, 0.0, None, out=t)
    return w, t, resid, ok


def overlaps_biorthogonal(g: np.ndarray, *, matrix_index: int = 0,
                          tol_real: float | None = None) -> list[OverlapSample]:
    """One OverlapSample per eigenvalue of the square matrix g.

    Raises DegenerateSampleError when the spectrum is numerically too close
    to degenerate for the overlaps to be trustworthy; callers count and
    discard such matrices.
    """
    g = np.asarray(g)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DomainError("overlaps_biorthogonal expects a square matrix")
    n = g.shape[0]
    if tol_real is None:
        tol_real = default_real_tolerance(n)
    is_real_matrix = not np.iscomplexobj(g)
    w, t, resid, ok = _overlaps_core(g[None, ...])
    if not ok[0]:
        raise DegenerateSampleError("spectrum too close to degenerate for reliable overlaps")
    samples = []
    for k in range(n):
        lam = complex(w[0, k])
        kind = (REAL_LINE if is_real_matrix and abs(lam.imag) <= tol_real
                else COMPLEX_PLANE)
        samples.append(OverlapSample(eigenvalue=lam, t=float(t[0, k]), kind=kind,
                                     matrix_index=matrix_index, residual=float(resid[0, k])))
    return samples


def overlap_matrix_full(g: np.ndarray):
    """Eigenvalues and the full overlap matrix O_ab (debug/verification mode).

    O_ab = (x_La* x_Lb)(x_Rb* x_Ra); rows sum to 1 by completeness of the
    bi-orthogonal system, which bounds the inversion error directly.
    """
    g = np.asarray(g)
    w, v = np.linalg.eig(g)
    left = np.linalg.inv(v)
    o = (left @ left.conj().T) * (v.conj().T @ v).T
    return w, o


# ---------------------------------------------------------------------------
# overlaps: partial Schur route (real eigenvalues of real matrices)
# ---------------------------------------------------------------------------

def overlap_schur_real(g: np.ndarray, lam: float) -> float:
    """Self-overlap t for a simple real eigenvalue lam of the real matrix g.

    Builds the reflector sending the right eigenvector to e1, reads off the
    coupling vector w and the trailing block B of the reduced matrix, solves
    (lam I - B)^T b = w, and returns t = b.b.  Independent of the
    eigenvector-matrix inversion used by overlaps_biorthogonal.
    """
    g = np.asarray(g, dtype=float)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise DomainError("overlap_schur_real expects a square real matrix")
    n = g.shape[0]
    if n == 1:
        if abs(g[0, 0] - lam) > RESIDUAL_TOLERANCE * max(1.0, abs(g[0, 0])):
            raise DomainError("lam is not an eigenvalue of the 1x1 matrix")
        return 0.0
    norm_g = np.linalg.norm(g)
    w_all, v_all = np.linalg.eig(g)
    k = int(np.argmin(np.abs(w_all - lam)))
    if abs(w_all[k] - lam) > RESIDUAL_TOLERANCE * max(norm_g, 1.0) or abs(w_all[k].imag) > 1e-6:
        raise DomainError(f"{lam} is not a simple real eigenvalue of g")
    x = v_all[:, k].real.copy()
    x /= np.linalg.norm(x)
    resid = np.linalg.norm(g @ x - lam * x)
    if resid > RESIDUAL_TOLERANCE * max(norm_g, 1.0):
        raise DomainError("eigen-equation residual check failed")

    refl = x.copy()
    refl[0] += math.copysign(1.0, x[0]) if x[0] != 0.0 else 1.0
    refl /= np.linalg.norm(refl)
    p = np.eye(n) - 2.0 * np.outer(refl, refl)
    gt = p @ g @ p
    coupling = gt[0, 1:]
    block = gt[1:, 1:]
    shifted = lam * np.eye(n - 1) - block
    try:
        b = np.linalg.solve(shifted.T, coupling)
    except np.linalg.LinAlgError as exc:
        raise DegenerateSampleError("shifted trailing block is singular") from exc
    return float(b @ b)


# ---------------------------------------------------------------------------
# classification
# ---------------------------------------------------------------------------

@dataclass
class ClassifiedSamples:
    """Samples split by eigenvalue kind, with bookkeeping counts."""

    real_line: list
    complex_plane: list
    n_near_real_flagged: int


def classify_eigenvalues(samples, tol_real: float, beta: int = 1) -> ClassifiedSamples:
    """Assign kinds and partition samples.

    beta = 1: eigenvalues with |Im z| <= tol_real are real-line (their exact
    counterparts are exactly real); the rest are complex and occur in
    conjugate pairs, each member kept as its own sample.
    beta = 2: the real axis has measure zero, so every sample is complex;
    near-real ones are only counted.
    """
    if tol_real <= 0.0:
        raise DomainError("tol_real must be positive")
    real_line, complex_plane, flagged = [], [], 0
    for s in samples:
        near_real = abs(s.eigenvalue.imag) <= tol_real
        if beta == 1 and near_real:
            s.kind = REAL_LINE
            real_line.append(s)
        else:
            if near_real:
                flagged += 1
            s.kind = COMPLEX_PLANE
            complex_plane.append(s)
    return ClassifiedSamples(real_line=real_line, complex_plane=complex_plane,
                             n_near_real_flagged=flagged)
