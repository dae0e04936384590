"""Sampling campaigns, eigenvalue-windowed overlap histograms, and
statistical comparison against the closed-form densities.

A campaign samples matrices index 0..n-1 from the deterministic stream,
keeps eigenvalues inside a window (an interval on the real axis for real
eigenvalues, or an annulus for complex ones), and log-bins the overlap
variable t.  Histograms from disjoint index ranges merge exactly, so a
run sharded over threads reproduces the single-threaded counts bit for bit.

The analytic side of a comparison is the conditional law of t given that
the eigenvalue falls in the window:

    F(t) = int_W dmu(z) int_0^t P(u, z) du  /  int_W dmu(z) rho(z)

computed by nested quadrature (the annulus case reduces to one radial
integral by rotation invariance).
"""

from __future__ import annotations

import concurrent.futures
import math
from dataclasses import dataclass, field

import numpy as np

from . import analytic_complex, analytic_real
from .ensemble import (
    EnsembleSpec,
    _overlaps_core,
    default_real_tolerance,
    sample_ginibre_batch,
)
from .errors import DomainError, EmptyWindowError, InsufficientSamplesError
from .quadrature import QuadSpec, integrate_finite, kronrod_panel, panel_nodes

REAL_INTERVAL = "real-interval"
ANNULUS = "annulus"

#: one-sided Kolmogorov critical constant at alpha = 0.001:
#: c(alpha) = sqrt(-ln(alpha/2)/2) = 1.9495 for the D <= c/sqrt(n) test
KS_ALPHA = 1e-3


def ks_critical(alpha: float = KS_ALPHA) -> float:
    return math.sqrt(-0.5 * math.log(alpha / 2.0))


@dataclass(frozen=True)
class Window:
    """Eigenvalue conditioning region: [lo, hi] on the real line, or
    lo <= |z| <= hi in the complex plane."""

    kind: str
    lo: float
    hi: float

    def __post_init__(self):
        if self.kind not in (REAL_INTERVAL, ANNULUS):
            raise DomainError(f"unknown window kind {self.kind!r}")
        if not self.lo < self.hi:
            raise DomainError("window requires lo < hi")
        if self.kind == ANNULUS and self.lo < 0.0:
            raise DomainError("annulus radii must be >= 0")


def default_bin_edges(n: int, bins: int = 120) -> np.ndarray:
    """Log-spaced t bins spanning [1e-3 n, 1e5 n]: the heavy tail needs
    decades of range while the n-scaling keeps the bulk resolved."""
    return np.geomspace(1e-3 * n, 1e5 * n, bins + 1)


@dataclass
class ConditionedHistogram:
    """Mergeable log-binned histogram of t, conditioned on the window.

    Samples below/above the edge range are tracked separately so that
    underflow + sum(counts) + overflow == n_samples exactly.
    """

    window: Window
    bin_edges: np.ndarray
    counts: np.ndarray
    underflow: int = 0
    overflow: int = 0
    n_matrices: int = 0
    n_rejected: int = 0
    spec: EnsembleSpec | None = None

    @property
    def n_samples(self) -> int:
        return int(self.underflow + self.counts.sum() + self.overflow)

    def merge(self, other: "ConditionedHistogram") -> "ConditionedHistogram":
        if self.window != other.window or not np.array_equal(self.bin_edges, other.bin_edges):
            raise DomainError("histograms with different windows/edges cannot merge")
        return ConditionedHistogram(
            window=self.window,
            bin_edges=self.bin_edges,
            counts=self.counts + other.counts,
            underflow=self.underflow + other.underflow,
            overflow=self.overflow + other.overflow,
            n_matrices=self.n_matrices + other.n_matrices,
            n_rejected=self.n_rejected + other.n_rejected,
            spec=self.spec or other.spec,
        )

    def ecdf_at_edges(self) -> np.ndarray:
        """Empirical CDF evaluated at every bin edge."""
        n = self.n_samples
        if n == 0:
            raise EmptyWindowError("histogram holds no samples")
        cum = self.underflow + np.concatenate([[0], np.cumsum(self.counts)])
        return cum / n

    def survival_at_edges(self) -> np.ndarray:
        return 1.0 - self.ecdf_at_edges()


@dataclass
class ComparisonReport:
    """Outcome of one statistical MC-vs-analytic check."""

    statistic_name: str
    statistic_value: float
    threshold: float
    sample_size: int
    passed: bool
    metadata: dict = field(default_factory=dict)


def _select_t(spec: EnsembleSpec, window: Window, w: np.ndarray, t: np.ndarray) -> np.ndarray:
    tol = default_real_tolerance(spec.n)
    near_real = np.abs(w.imag) <= tol
    if window.kind == REAL_INTERVAL:
        mask = near_real & (w.real >= window.lo) & (w.real <= window.hi)
    else:
        r = np.abs(w)
        mask = (r >= window.lo) & (r <= window.hi)
        if spec.beta == 1:
            mask &= ~near_real
    return t[mask]


def _campaign_range(spec: EnsembleSpec, start: int, stop: int, window: Window,
                    edges: np.ndarray, chunk: int) -> ConditionedHistogram:
    counts = np.zeros(len(edges) - 1, dtype=np.int64)
    under = over = rejected = 0
    for lo in range(start, stop, chunk):
        hi = min(lo + chunk, stop)
        mats = sample_ginibre_batch(spec, lo, hi - lo)
        w, t, _, ok = _overlaps_core(mats)
        rejected += int((~ok).sum())
        ts = _select_t(spec, window, w[ok], t[ok])
        if ts.size:
            counts += np.histogram(ts, bins=edges)[0]
            under += int((ts < edges[0]).sum())
            over += int((ts > edges[-1]).sum())
    return ConditionedHistogram(window=window, bin_edges=edges, counts=counts,
                                underflow=under, overflow=over,
                                n_matrices=stop - start, n_rejected=rejected, spec=spec)


def collect_overlaps(spec: EnsembleSpec, n_matrices: int, window: Window, *,
                     start_index: int = 0, chunk: int = 4096) -> np.ndarray:
    """Raw windowed overlap values (for moment estimates rather than
    histograms).  Same selection rules and determinism as run_campaign."""
    if n_matrices < 1:
        raise DomainError("n_matrices must be >= 1")
    pieces = []
    for lo in range(start_index, start_index + n_matrices, chunk):
        hi = min(lo + chunk, start_index + n_matrices)
        mats = sample_ginibre_batch(spec, lo, hi - lo)
        w, t, _, ok = _overlaps_core(mats)
        ts = _select_t(spec, window, w[ok], t[ok])
        if ts.size:
            pieces.append(ts)
    if not pieces:
        raise EmptyWindowError(f"no eigenvalues inside {window}")
    return np.concatenate(pieces)


def run_campaign(spec: EnsembleSpec, n_matrices: int, window: Window, *,
                 bin_edges: np.ndarray | None = None, threads: int = 1,
                 start_index: int = 0, chunk: int = 4096) -> ConditionedHistogram:
    """Sample n_matrices matrices and histogram the windowed overlaps.

    Deterministic in (spec, start_index, n_matrices, window, bin_edges);
    threads only affect speed.  Raises EmptyWindowError when no eigenvalue
    lands in the window.
    """
    if n_matrices < 1:
        raise DomainError("n_matrices must be >= 1")
    edges = default_bin_edges(spec.n) if bin_edges is None else np.asarray(bin_edges, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0) or edges[0] <= 0:
        raise DomainError("bin edges must be a strictly increasing positive sequence")
    stop = start_index + n_matrices
    if threads <= 1:
        hist = _campaign_range(spec, start_index, stop, window, edges, chunk)
    else:
        bounds = list(range(start_index, stop, chunk)) + [stop]
        with concurrent.futures.ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda ab: _campaign_range(spec, ab[0], ab[1], window, edges, chunk),
                zip(bounds[:-1], bounds[1:])))
        hist = parts[0]
        for part in parts[1:]:
            hist = hist.merge(part)
    if hist.n_samples == 0:
        raise EmptyWindowError(
            f"no eigenvalues inside {window} after {n_matrices} matrices")
    return hist


# ---------------------------------------------------------------------------
# analytic conditional law
# ---------------------------------------------------------------------------

_SEG_SPEC = QuadSpec(abs_tol=1e-14, rel_tol=1e-9, max_subdivisions=400)


def _outer_nodes(window: Window, spec: EnsembleSpec):
    """Quadrature nodes/weights over the window for the eigenvalue integral.

    Panels are refined on the density integrand until its window mass is
    resolved to ~1e-10 relative; the same panels then serve every CDF
    component.  Annulus weights absorb the 2 pi r radial measure.
    """
    if window.kind == REAL_INTERVAL:
        def rho(x):
            return analytic_real.density_real(spec.n, x)
    else:
        def rho(r):
            r = np.asarray(r)
            return np.array([2.0 * math.pi * ri * analytic_complex.density_complex(spec.n, ri * ri)
                             for ri in r.ravel()]).reshape(r.shape)

    pts = np.linspace(window.lo, window.hi, 5)
    panels = [(pts[i], pts[i + 1], *kronrod_panel(rho, pts[i], pts[i + 1])) for i in range(4)]
    while len(panels) < 64:
        total = sum(p[2] for p in panels)
        err = sum(p[3] for p in panels)
        if err <= 1e-10 * abs(total) + 1e-15:
            break
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        a, b, _, _ = panels.pop(worst)
        m = 0.5 * (a + b)
        panels.append((a, m, *kronrod_panel(rho, a, m)))
        panels.append((m, b, *kronrod_panel(rho, m, b)))
    mass = sum(p[2] for p in panels)
    nodes, weights = [], []
    for a, b, _, _ in panels:
        x, wt = panel_nodes(a, b)
        if window.kind == ANNULUS:
            wt = wt * (2.0 * math.pi * x)
        nodes.append(x)
        weights.append(wt)
    return np.concatenate(nodes), np.concatenate(weights), mass


def analytic_conditional_cdf(spec: EnsembleSpec, window: Window, t_grid) -> np.ndarray:
    """Conditional CDF of t for eigenvalues inside the window, on t_grid.

    Nondecreasing with limit 1; the normalizing denominator is the window
    mass of the mean eigenvalue density.
    """
    if spec.n < 2:
        raise DomainError("conditional law needs matrix size >= 2")
    if spec.beta == 1 and window.kind != REAL_INTERVAL:
        raise DomainError("no closed-form law for complex eigenvalues of the real ensemble")
    if spec.beta == 2 and window.kind != ANNULUS:
        raise DomainError("complex-ensemble windows must be annuli")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0.0) or np.any(np.diff(t_grid) <= 0):
        raise DomainError("t_grid must be positive and increasing")

    nodes, weights, mass = _outer_nodes(window, spec)
    cdf = np.zeros(t_grid.size)
    for x, wgt in zip(nodes, weights):
        if spec.beta == 1:
            def pdf(t, _x=x):
                return analytic_real.jpd_real(spec.n, t, _x)
        else:
            a = x * x

            def pdf(t, _a=a):
                return analytic_complex.jpd_complex(spec.n, t, _a)

        # first segment via t = v^2: absorbs the integrable t^{-1/2}
        # endpoint of the real-ensemble density at n <= 3
        v0 = math.sqrt(t_grid[0])
        seg, _ = integrate_finite(lambda v: 2.0 * v * pdf(v * v), 0.0, v0, _SEG_SPEC)
        cum = np.empty(t_grid.size)
        cum[0] = seg
        for i in range(1, t_grid.size):
            seg, _ = integrate_finite(pdf, t_grid[i - 1], t_grid[i], _SEG_SPEC)
            cum[i] = cum[i - 1] + seg
        cdf += wgt * cum
    return cdf / mass


def ks_compare(hist: ConditionedHistogram, cdf, *, alpha: float = KS_ALPHA) -> ComparisonReport:
    """Sup-distance between the empirical CDF at the bin edges and the
    analytic conditional CDF, with threshold c(alpha)/sqrt(n)."""
    cdf = np.asarray(cdf, dtype=float)
    if cdf.shape != hist.bin_edges.shape:
        raise DomainError("cdf must be evaluated on the histogram bin edges")
    n = hist.n_samples
    if n < 100:
        raise InsufficientSamplesError(f"KS comparison needs >= 100 samples, got {n}")
    dist = float(np.max(np.abs(hist.ecdf_at_edges() - cdf)))
    threshold = ks_critical(alpha) / math.sqrt(n)
    meta = {"alpha": alpha, "window": (hist.window.kind, hist.window.lo, hist.window.hi),
            "n_matrices": hist.n_matrices, "n_rejected": hist.n_rejected}
    if hist.spec is not None:
        meta.update(seed=hist.spec.seed, n=hist.spec.n, beta=hist.spec.beta)
    return ComparisonReport(statistic_name="ks", statistic_value=dist,
                            threshold=threshold, sample_size=n,
                            passed=dist <= threshold, metadata=meta)


def tail_exponent(hist: ConditionedHistogram, t_min: float, *, min_tail_count: int = 30):
    """Least-squares slope of log survival vs log t above t_min, with its
    standard error.  Needs >= 5 populated bins above t_min.

    Edges with fewer than min_tail_count samples remaining above them are
    excluded: the log of a survival estimate based on a handful of samples
    is noisy and systematically biased low.
    """
    edges = hist.bin_edges
    surv = hist.survival_at_edges()
    populated = (edges[:-1] > t_min) & (hist.counts > 0)
    if int(populated.sum()) < 5:
        raise InsufficientSamplesError("need >= 5 populated bins above t_min for a tail fit")
    use = (edges > t_min) & (surv * hist.n_samples >= min_tail_count)
    x = np.log(edges[use])
    y = np.log(surv[use])
    m = x.size
    xbar = x.mean()
    sxx = float(((x - xbar) ** 2).sum())
    slope = float(((x - xbar) * (y - y.mean())).sum() / sxx)
    intercept = float(y.mean() - slope * xbar)
    resid = y - (intercept + slope * x)
    s2 = float((resid ** 2).sum() / max(m - 2, 1))
    return slope, math.sqrt(s2 / sxx)
