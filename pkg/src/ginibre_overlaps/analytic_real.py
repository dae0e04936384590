"""Closed-form overlap statistics for real eigenvalues of the real Ginibre ensemble.

The central object is the joint density P(t, lambda) of the self-overlap
t = O_ll - 1 of the bi-orthogonal eigenvector pair belonging to a real
eigenvalue lambda of an N x N matrix with i.i.d. N(0,1) entries.  Two
algebraically equivalent finite-N expressions are provided:

* ``form="sum"``: a manifestly positive k-sum,

      P = e^{-(l^2/2)(1 + tau)} t^{(N-3)/2} (1+t)^{-(N+1)/2} / (2 sqrt(2 pi))
          * sum_{k<N} (l^{2k}/k!) [(N-1-k) + k/(1+t)],   tau = t/(1+t)

* ``form="gamma"``: a two-term bracket of regularized incomplete gammas.

Integrating P over t recovers the classical mean density of real
eigenvalues (Edelman/Kostlan/Shub), implemented as :func:`density_real`.
Bulk (lambda = sqrt(N) x, t = N s) and edge (lambda = sqrt(N) + delta,
t = sqrt(N) sigma) scaling limits are provided in closed form.

The overlap variable is maximally heavy tailed: P ~ t^{-2} for large t, so
every positive integer moment diverges.
"""

from __future__ import annotations

import math

import numpy as np

from . import specfun
from .errors import DomainError
from .quadrature import DEFAULT_SPEC, integrate_finite

_C0 = 1.0 / (2.0 * math.sqrt(2.0 * math.pi))
_LN_C0 = math.log(_C0)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _validate_n(n: int, minimum: int = 2) -> int:
    if int(n) != n or n < minimum:
        raise DomainError(f"matrix size must be an integer >= {minimum}, got {n}")
    return int(n)


def _as_flat(t, lam):
    t = np.asarray(t, dtype=float)
    lam = np.asarray(lam, dtype=float)
    shape = np.broadcast_shapes(t.shape, lam.shape)
    tb = np.broadcast_to(t, shape).astype(float).ravel()
    lb = np.broadcast_to(lam, shape).astype(float).ravel()
    if np.any(tb <= 0.0):
        raise DomainError("overlap variable t must be > 0")
    return tb, lb, shape


def _restore(flat, shape, scalar):
    out = flat.reshape(shape)
    return float(out[()]) if scalar else out


def jpd_real(n: int, t, lam, form: str = "gamma"):
    """Joint density P(t, lambda) for a size-n real Ginibre matrix, n >= 2.

    t > 0 and lambda broadcast elementwise; returns float for scalar input.
    Both forms agree to ~1e-13 relative; "gamma" is the default evaluator,
    "sum" is the manifestly positive cross-check.
    """
    n = _validate_n(n)
    scalar = np.isscalar(t) and np.isscalar(lam)
    tb, lb, shape = _as_flat(t, lam)
    a = lb * lb
    tau = tb / (1.0 + tb)
    log_pref = (_LN_C0 + 0.5 * (n - 3) * np.log(tb)
                - 0.5 * (n + 1) * np.log1p(tb))

    if form == "gamma":
        qn = np.asarray(specfun.reg_gamma_q(n, a))
        qm = np.asarray(specfun.reg_gamma_q(n - 1, a))
        bracket = (n - 1) * qn - a * tau * qm
        with np.errstate(divide="ignore", invalid="ignore"):
            logp = log_pref + a / (2.0 * (1.0 + tb)) + np.log(np.maximum(bracket, 0.0))
        out = np.where(bracket > 0.0, np.exp(logp), 0.0)
    elif form == "sum":
        k = np.arange(n, dtype=float)
        lgk = np.array([specfun.log_gamma(kk + 1.0) for kk in k])
        with np.errstate(divide="ignore", invalid="ignore"):
            log_a = np.where(a > 0.0, np.log(a), -np.inf)
            log_u = k[:, None] * log_a[None, :] - lgk[:, None]   # (n, M)
        log_u[0, :] = 0.0                                        # k = 0 term is 1 even at a = 0
        m = np.max(log_u, axis=0)
        weights = (n - 1.0 - k)[:, None] + k[:, None] / (1.0 + tb)[None, :]
        s = np.sum(np.exp(log_u - m[None, :]) * weights, axis=0)
        logp = log_pref - 0.5 * a * (1.0 + tau) + m + np.log(np.maximum(s, 0.0))
        out = np.where(s > 0.0, np.exp(logp), 0.0)
    else:
        raise DomainError(f"unknown form {form!r}, expected 'sum' or 'gamma'")
    return _restore(out, shape, scalar)


def _log_eks_integral(n: int, lam_abs: float) -> float:
    """log of int_0^|lambda| e^{-u^2/2} u^{n-2} du, scaled internally so the
    integrand never overflows for large n."""
    if lam_abs == 0.0:
        return -math.inf
    nu = n - 2
    u_star = min(lam_abs, math.sqrt(nu)) if nu > 0 else 0.0
    m = (nu * math.log(u_star) if u_star > 0.0 else 0.0) - 0.5 * u_star * u_star

    def integrand(u):
        with np.errstate(divide="ignore"):
            h = np.where(u > 0.0, nu * np.log(np.maximum(u, 1e-300)), 0.0 if nu == 0 else -np.inf)
        return np.exp(h - 0.5 * u * u - m)

    val, _ = integrate_finite(integrand, 0.0, lam_abs, DEFAULT_SPEC)
    return m + math.log(val)


def density_real(n: int, lam):
    """Mean density of real eigenvalues of a size-n real Ginibre matrix.

    Even in lambda; equals 1/sqrt(2 pi) at lambda = 0 for every n >= 2, and
    integrates over the real line to the expected number of real eigenvalues.
    """
    n = _validate_n(n)
    if not np.isscalar(lam):
        arr = np.asarray(lam, dtype=float)
        return np.array([density_real(n, float(v)) for v in arr.ravel()]).reshape(arr.shape)
    lam = abs(float(lam))
    a = lam * lam
    term1 = specfun.reg_gamma_q(n - 1, a) / _SQRT_2PI
    if lam == 0.0:
        return term1
    log_t2 = ((n - 1) * math.log(lam) - 0.5 * a + _log_eks_integral(n, lam)
              - specfun.log_gamma(float(n - 1)) - math.log(_SQRT_2PI))
    return term1 + math.exp(log_t2)


def jpd_real_bulk(s, x):
    """Bulk scaling limit of P: lim N P(N s, sqrt(N) x); zero for |x| >= 1."""
    s = np.asarray(s, dtype=float)
    x = np.asarray(x, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError("bulk overlap s must be > 0")
    c = 1.0 - x * x
    with np.errstate(over="ignore"):
        val = _C0 * c * np.exp(-c / (2.0 * s)) / (s * s)
    out = np.where(np.abs(x) < 1.0, val, 0.0)
    return float(out[()]) if out.ndim == 0 else out


def _edge_real_scalar(sigma: float, delta: float) -> float:
    if sigma <= 0.0:
        raise DomainError("edge overlap sigma must be > 0")
    expo = -0.25 / (sigma * sigma) + delta / sigma
    t1 = math.exp(expo - 2.0 * delta * delta) / _SQRT_2PI
    coef = 0.5 * (1.0 / sigma - 2.0 * delta)
    if delta >= 0.0:
        # erfc = erfcx * e^{-2 delta^2}: keeps the product from underflowing early
        t2 = coef * specfun.erfcx(math.sqrt(2.0) * delta) * math.exp(expo - 2.0 * delta * delta)
    else:
        t2 = coef * specfun.erfc(math.sqrt(2.0) * delta) * math.exp(expo)
    return max(_C0 / (sigma * sigma) * (t1 + t2), 0.0)


def jpd_real_edge(sigma, delta):
    """Edge scaling limit of P: lim sqrt(N) P(sqrt(N) sigma, sqrt(N) + delta)."""
    if np.isscalar(sigma) and np.isscalar(delta):
        return _edge_real_scalar(float(sigma), float(delta))
    sigma = np.asarray(sigma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    shape = np.broadcast_shapes(sigma.shape, delta.shape)
    sb = np.broadcast_to(sigma, shape).ravel()
    db = np.broadcast_to(delta, shape).ravel()
    return np.array([_edge_real_scalar(float(s), float(d)) for s, d in zip(sb, db)]).reshape(shape)


def density_real_edge(delta) -> float:
    """Mean density of real eigenvalues at the spectral edge.

    (1/(2 sqrt(2 pi))) [erfc(delta sqrt(2)) + e^{-delta^2}(1 + erf(delta))/sqrt(2)];
    tends to the bulk value 1/sqrt(2 pi) as delta -> -inf and to 0 as delta -> +inf.
    """
    d = float(delta)
    first = specfun.erfc(math.sqrt(2.0) * d)
    if d >= 0.0:
        second = math.exp(-d * d) * (1.0 + specfun.erf(d)) / math.sqrt(2.0)
    else:
        # 1 + erf(d) = erfc(-d): no cancellation for very negative d
        second = math.exp(-d * d) * specfun.erfc(-d) / math.sqrt(2.0)
    return _C0 * (first + second)
