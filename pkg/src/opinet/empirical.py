"""Empirical measures on the opinion interval: grids, histograms, KDE.

The continuum solvers work with cell averages on a uniform grid over
[-1, 1].  This module builds that grid, turns analytic mixture densities
into cell averages, and lifts a microscopic state (opinions on a graph)
into the one-body density f and the two-body edge density g, the latter by
Gaussian product-kernel density estimation over the edge set.  Bandwidths
come from Silverman's rule or the Sheather-Jones solve-the-equation
plug-in.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import ndtr

from .errors import ConfigError, SimulationError

_SQRT2PI = float(np.sqrt(2.0 * np.pi))


def _phi(x):
    return np.exp(-0.5 * np.square(x)) / _SQRT2PI


@dataclass(eq=False)
class Grid:
    """Uniform cell grid on [-1, 1].

    edges pins the endpoints to exactly -1 and 1 so histogramming never
    leaks mass; mids is built independently from the cell index so the
    midpoint array is exactly antisymmetric about 0.  The two constructions
    may disagree by an ulp, which no consumer resolves finer than.
    """

    n_cells: int
    dx: float = field(init=False)
    edges: np.ndarray = field(init=False, repr=False)
    mids: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.n_cells)
        if n < 2:
            raise ConfigError("grid: need at least two cells")
        self.n_cells = n
        self.dx = 2.0 / n
        edges = -1.0 + np.arange(n + 1) * self.dx
        edges[0] = -1.0
        edges[-1] = 1.0
        self.edges = edges
        self.mids = (np.arange(n) - (n - 1) / 2.0) * self.dx


@dataclass(eq=False)
class ScalarField:
    """Cell-averaged density on a Grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_cells,):
            raise ConfigError("field: values must have one entry per cell")

    def mass(self):
        return float(self.grid.dx * self.values.sum())


@dataclass(eq=False)
class PairField:
    """Cell-averaged density on the product grid (omega, m)."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        n = self.grid.n_cells
        if self.values.shape != (n, n):
            raise ConfigError("pair field: values must be (n_cells, n_cells)")

    def mass(self):
        return float(self.grid.dx ** 2 * self.values.sum())


@dataclass(eq=False)
class LabeledFields:
    """Community-resolved densities: f[p] one-body, g[p, q] two-body.

    Reductions over labels recover the unlabeled fields: sum_p f[p] is the
    one-body density and sum_{p,q} g[p,q] the edge density, with the joint
    g normalization carrying total mass 1.
    """

    grid: Grid
    f: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        self.g = np.asarray(self.g, dtype=float)
        n = self.grid.n_cells
        if self.f.ndim != 2 or self.f.shape[1] != n:
            raise ConfigError("labeled fields: f must be (n_groups, n_cells)")
        k = self.f.shape[0]
        if self.g.shape != (k, k, n, n):
            raise ConfigError("labeled fields: g must be (k, k, n, n)")

    @property
    def n_groups(self):
        return int(self.f.shape[0])

    def f_total(self):
        return self.f.sum(axis=0)

    def g_total(self):
        return self.g.sum(axis=(0, 1))


@dataclass(frozen=True)
class MixtureSpec:
    """Per-community truncated-Gaussian mixtures on [-1, 1].

    communities[c] lists (weight, center, sigma) triples; weights are
    normalized within each community.  Sampling is by rejection against the
    untruncated Gaussian, so mass outside [-1, 1] is simply redrawn.
    """

    communities: tuple

    def __post_init__(self):
        if not self.communities:
            raise ConfigError("mixture: need at least one community")
        for comps in self.communities:
            if not comps:
                raise ConfigError("mixture: empty component list")
            for w, c, s in comps:
                if w <= 0:
                    raise ConfigError("mixture: component weights must be positive")
                if s <= 0:
                    raise ConfigError("mixture: component sigma must be positive")
                if not -1.0 <= c <= 1.0:
                    raise ConfigError("mixture: component centers lie in [-1, 1]")

    @property
    def n_groups(self):
        return len(self.communities)

    @classmethod
    def three_communities(cls):
        return cls((
            ((0.6, -0.5, 0.05), (0.4, 0.25, 0.012)),
            ((1.0, 0.0, 0.012),),
            ((0.4, -0.25, 0.012), (0.6, 0.5, 0.05)),
        ))

    @classmethod
    def crossing(cls):
        # two groups whose bulk opinions swap sides as consensus forms
        return cls((
            ((0.6, -0.5, 0.05), (0.4, 0.25, 0.012)),
            ((0.4, -0.25, 0.012), (0.6, 0.5, 0.05)),
        ))

    def community_pdf(self, c):
        """Density of community c as a callable on arrays in [-1, 1]."""
        comps = self.communities[c]
        weights = np.array([w for w, _, _ in comps], dtype=float)
        weights = weights / weights.sum()
        centers = np.array([m for _, m, _ in comps], dtype=float)
        sigmas = np.array([s for _, _, s in comps], dtype=float)
        # truncation renormalizer per component
        z = ndtr((1.0 - centers) / sigmas) - ndtr((-1.0 - centers) / sigmas)

        def pdf(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            for w, m, s, zz in zip(weights, centers, sigmas, z):
                out = out + w * _phi((x - m) / s) / (s * zz)
            return np.where((x >= -1.0) & (x <= 1.0), out, 0.0)

        return pdf

    def community_cell_averages(self, grid, c):
        """Exact cell averages of community c's density (unit mass).

        Truncated Gaussians integrate in closed form over cells, so narrow
        components keep their mass even when sigma is below the cell width,
        where fixed-order quadrature would not.
        """
        comps = self.communities[c]
        weights = np.array([w for w, _, _ in comps], dtype=float)
        weights = weights / weights.sum()
        out = np.zeros(grid.n_cells)
        for w, m, s in zip(weights, (c[1] for c in comps),
                           (c[2] for c in comps)):
            z = ndtr((grid.edges - m) / s)
            out += w * np.diff(z) / (z[-1] - z[0])
        return ScalarField(grid, out / grid.dx)

    def cell_averages(self, grid, shares):
        """Exact cell averages of the share-blended population density."""
        shares = np.asarray(shares, dtype=float)
        if shares.shape != (self.n_groups,):
            raise ConfigError("mixture: one share per community")
        out = np.zeros(grid.n_cells)
        for c in range(self.n_groups):
            out += shares[c] * self.community_cell_averages(grid, c).values
        return ScalarField(grid, out)

    def blended_pdf(self, shares):
        """Population density: community pdfs weighted by the given shares."""
        shares = np.asarray(shares, dtype=float)
        if shares.shape != (self.n_groups,):
            raise ConfigError("mixture: one share per community")
        pdfs = [self.community_pdf(c) for c in range(self.n_groups)]

        def pdf(x):
            x = np.asarray(x, dtype=float)
            out = np.zeros_like(x)
            for s, p in zip(shares, pdfs):
                out = out + s * p(x)
            return out

        return pdf


def sample_initial_opinions(graph, mixture, rng):
    """Draw one opinion per node from its community's mixture.

    Components are chosen by weight, then the opinion is rejection-sampled
    from the component Gaussian until it lands in [-1, 1].
    """
    if mixture.n_groups != graph.n_groups:
        raise ConfigError("mixture: community count must match the graph")
    omega = np.empty(graph.n_nodes, dtype=float)
    for c in range(mixture.n_groups):
        members = np.flatnonzero(graph.community == c + 1)
        comps = mixture.communities[c]
        weights = np.array([w for w, _, _ in comps], dtype=float)
        weights = weights / weights.sum()
        picks = rng.choice(len(comps), size=members.size, p=weights)
        for node, k in zip(members, picks):
            _, center, sigma = comps[k]
            while True:
                x = rng.normal(center, sigma)
                if -1.0 <= x <= 1.0:
                    omega[node] = x
                    break
    return omega


def cell_average_density(grid, pdf):
    """Cell averages of an analytic density via 5-point Gauss-Legendre."""
    nodes, weights = leggauss(5)
    half = 0.5 * grid.dx
    pts = grid.mids[:, None] + half * nodes[None, :]
    vals = pdf(pts)
    return ScalarField(grid, 0.5 * vals @ weights)


def empirical_f(omega, grid):
    """Histogram density of the opinions: count / (N dx) per cell."""
    omega = np.asarray(omega, dtype=float)
    if omega.size == 0:
        raise ConfigError("empirical: no opinions to bin")
    if omega.min() < -1.0 or omega.max() > 1.0:
        raise ConfigError("empirical: opinions must lie in [-1, 1]")
    counts, _ = np.histogram(omega, bins=grid.edges)
    return ScalarField(grid, counts / (omega.size * grid.dx))


def _kernel_matrix(omega, grid, bandwidth, exact):
    # rows: one normalized 1-D Gaussian kernel per node, as cell values
    if bandwidth <= 0 or not np.isfinite(bandwidth):
        raise ConfigError("kde: bandwidth must be positive and finite")
    omega = np.asarray(omega, dtype=float)[:, None]
    if exact:
        upper = ndtr((grid.edges[None, 1:] - omega) / bandwidth)
        lower = ndtr((grid.edges[None, :-1] - omega) / bandwidth)
        return (upper - lower) / grid.dx
    return _phi((grid.mids[None, :] - omega) / bandwidth) / bandwidth


def empirical_g_kde(graph, omega, grid, bandwidth, exact=False):
    """Edge density by product-Gaussian KDE, renormalized to mass 1.

    Every undirected edge (i, j) contributes kernels at (omega_i, omega_j)
    and at the mirrored point, so the estimate is symmetric bit for bit.
    Cell values use the midpoint rule by default; exact=True integrates the
    kernels over the cells instead.
    """
    if graph.n_edges == 0:
        raise ConfigError("kde: graph has no edges")
    omega = np.asarray(omega, dtype=float)
    kern = _kernel_matrix(omega, grid, bandwidth, exact)
    ka = kern[graph.edges[:, 0], :]
    kb = kern[graph.edges[:, 1], :]
    s = ka.T @ kb
    raw = s + s.T
    total = grid.dx ** 2 * raw.sum()
    if total <= 0:
        raise SimulationError("kde: estimate has no mass on the grid")
    return PairField(grid, raw / total)


def split_by_group(graph, omega, grid, bandwidth, exact=False):
    """Community-resolved f and g from a microscopic state.

    f[p] is the histogram density of community p's opinions against the
    full population count, so the label sum recovers empirical_f.  g[p, q]
    collects the product kernels of the p-q edges; the blocks share one
    normalization, giving the labeled array total mass 1, and cross blocks
    are exact transposes of each other.
    """
    if graph.n_edges == 0:
        raise ConfigError("kde: graph has no edges")
    omega = np.asarray(omega, dtype=float)
    if omega.min() < -1.0 or omega.max() > 1.0:
        raise ConfigError("empirical: opinions must lie in [-1, 1]")
    k = graph.n_groups
    n = grid.n_cells
    f = np.empty((k, n))
    for p in range(k):
        vals = omega[graph.community == p + 1]
        counts, _ = np.histogram(vals, bins=grid.edges)
        f[p] = counts / (omega.size * grid.dx)

    kern = _kernel_matrix(omega, grid, bandwidth, exact)
    comm = graph.community
    g = np.zeros((k, k, n, n))
    ca = comm[graph.edges[:, 0]]
    cb = comm[graph.edges[:, 1]]
    for p in range(1, k + 1):
        for q in range(p, k + 1):
            if p == q:
                mask = (ca == p) & (cb == p)
                if not mask.any():
                    continue
                ka = kern[graph.edges[mask, 0], :]
                kb = kern[graph.edges[mask, 1], :]
                s = ka.T @ kb
                g[p - 1, p - 1] = s + s.T
            else:
                fwd = (ca == p) & (cb == q)
                rev = (ca == q) & (cb == p)
                heads = np.concatenate([graph.edges[fwd, 0], graph.edges[rev, 1]])
                tails = np.concatenate([graph.edges[fwd, 1], graph.edges[rev, 0]])
                if heads.size == 0:
                    continue
                s = kern[heads, :].T @ kern[tails, :]
                g[p - 1, q - 1] = s
                g[q - 1, p - 1] = s.T.copy()
    total = grid.dx ** 2 * g.sum()
    if total <= 0:
        raise SimulationError("kde: estimate has no mass on the grid")
    g /= total
    return LabeledFields(grid, f, g)


def _silverman(data):
    sd = float(np.std(data, ddof=1))
    if sd == 0.0:
        raise ConfigError("bandwidth: sample is degenerate")
    return 1.06 * sd * data.size ** (-0.2)


def _phi4(x):
    x2 = np.square(x)
    return (np.square(x2) - 6.0 * x2 + 3.0) * _phi(x)


def _phi6(x):
    x2 = np.square(x)
    return (x2 * np.square(x2) - 15.0 * np.square(x2) + 45.0 * x2 - 15.0) * _phi(x)


def _sheather_jones(data):
    """Solve-the-equation plug-in bandwidth (Sheather & Jones 1991).

    The pilot functionals use normal-reference bandwidths a and b built
    from the smaller of the standard deviation and the normalized IQR; the
    fixed point of h = (R(K) / (n SD(alpha2(h))))^(1/5) is found by
    bisection.  Pairwise sums include the diagonal terms.
    """
    n = data.size
    sd = float(np.std(data, ddof=1))
    q75, q25 = np.percentile(data, [75.0, 25.0])
    iqr = float(q75 - q25)
    lam = min(sd, iqr / 1.349) if iqr > 0 else sd
    if lam <= 0:
        raise ConfigError("bandwidth: sample is degenerate")
    a = 0.920 * lam * n ** (-1.0 / 7.0)
    b = 0.912 * lam * n ** (-1.0 / 9.0)
    diffs = data[:, None] - data[None, :]

    def sd_func(h):
        return float(np.sum(_phi4(diffs / h))) / (n * (n - 1) * h ** 5)

    def td_func(h):
        return -float(np.sum(_phi6(diffs / h))) / (n * (n - 1) * h ** 7)

    sda = sd_func(a)
    tdb = td_func(b)
    if sda <= 0 or tdb <= 0:
        raise SimulationError("bandwidth: plug-in functionals are nonpositive")
    ratio = (sda / tdb) ** (1.0 / 7.0)
    rk = 1.0 / (2.0 * np.sqrt(np.pi))

    def objective(h):
        alpha2 = 1.357 * ratio * h ** (5.0 / 7.0)
        sdh = sd_func(alpha2)
        if sdh <= 0:
            raise SimulationError("bandwidth: plug-in functionals are nonpositive")
        return (rk / (n * sdh)) ** 0.2 - h

    lo, hi = 1e-4 * lam, 2.0 * lam
    f_lo, f_hi = objective(lo), objective(hi)
    tries = 0
    while f_hi > 0 and tries < 60:
        hi *= 2.0
        f_hi = objective(hi)
        tries += 1
    if f_lo < 0 or f_hi > 0:
        raise SimulationError("bandwidth: no bracket for the plug-in equation")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if objective(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bandwidth_select(data, method="silverman"):
    """Gaussian-KDE bandwidth for a 1-D sample.

    method 'silverman' is the normal-reference rule 1.06 sd n^(-1/5);
    'sheather_jones' is the solve-the-equation plug-in.  Needs at least two
    samples with spread.
    """
    data = np.asarray(data, dtype=float).ravel()
    if data.size < 2:
        raise ConfigError("bandwidth: need at least two samples")
    if method == "silverman":
        return _silverman(data)
    if method == "sheather_jones":
        return _sheather_jones(data)
    raise ConfigError("bandwidth: unknown method %r" % (method,))
