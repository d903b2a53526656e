"""Finite-volume transport for the one- and two-body opinion densities.

State is cell-averaged on a uniform grid over [-1, 1]: f(omega) and the
pair density g(omega, m), optionally resolved by community label.  Each
step freezes the velocity field computed from g, then advances f and g
with a local Lax-Friedrichs flux; boundary fluxes are zero, so mass is
conserved exactly.  Optional additive noise enters as explicit diffusion
with mirrored (zero-flux) boundaries, and optional edge birth-death acts
on g after the transport stage.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .empirical import Grid, ScalarField, PairField, LabeledFields


@dataclass(frozen=True)
class ContinuumParams:
    """Step parameters for the continuum solvers."""

    dt: float
    eta_cutoff: float = 1e-10
    diffusion_sigma: float = 0.0
    birth_rate: float = 0.0
    death_rate: float = 0.0

    def validate(self):
        if self.eta_cutoff <= 0:
            raise ConfigError("continuum: eta_cutoff must be positive")
        if self.diffusion_sigma < 0:
            raise ConfigError("continuum: diffusion_sigma must be >= 0")
        if self.birth_rate < 0 or self.death_rate < 0:
            raise ConfigError("continuum: birth/death rates must be >= 0")
        return self


@dataclass(eq=False)
class VelocityField:
    """Frozen advection speeds per cell (leading axes index labels)."""

    grid: Grid
    values: np.ndarray

    def max_speed(self):
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def _d_matrix(grid, operator):
    return np.asarray(operator.d(grid.mids[:, None] - grid.mids[None, :]),
                      dtype=float)


def eta_discrete(g, dx, cutoff):
    """Row-normalized pair density: g_ij / (dx sum_k g_ik).

    Rows whose integral falls below cutoff are zeroed instead of divided,
    so vacuum regions produce no spurious velocity.
    """
    g = np.asarray(g, dtype=float)
    den = dx * g.sum(axis=-1)
    keep = den >= cutoff
    safe = np.where(keep, den, 1.0)
    return np.where(keep[..., None], g / safe[..., None], 0.0)


def _velocity_values(g4, grid, operator, cutoff):
    # a[p, i] = sum_{q,j} g[p,q,i,j] D(mid_i - mid_j) / sum_{q,j} g[p,q,i,j]
    dmat = _d_matrix(grid, operator)
    den = grid.dx * g4.sum(axis=(1, 3))
    num = grid.dx * np.einsum("pqij,ij->pi", g4, dmat)
    keep = den >= cutoff
    return np.where(keep, num / np.where(keep, den, 1.0), 0.0)


def velocity(g, grid, operator, cutoff=1e-10):
    """Advection speeds induced by an unlabeled pair density (n, n)."""
    g = np.asarray(g, dtype=float)
    n = grid.n_cells
    if g.shape != (n, n):
        raise ConfigError("velocity: g must be (n_cells, n_cells)")
    vals = _velocity_values(g[None, None], grid, operator, cutoff)[0]
    return VelocityField(grid, vals)


def velocity_labeled(g, grid, operator, cutoff=1e-10):
    """Per-label advection speeds from a labeled pair density (k, k, n, n)."""
    g = np.asarray(g, dtype=float)
    n = grid.n_cells
    if g.ndim != 4 or g.shape[2:] != (n, n) or g.shape[0] != g.shape[1]:
        raise ConfigError("velocity: g must be (k, k, n_cells, n_cells)")
    return VelocityField(grid, _velocity_values(g, grid, operator, cutoff))


def _interface_flux(u, a):
    # local Lax-Friedrichs along axis 0, zero flux at the domain boundary
    a_col = a.reshape((a.size,) + (1,) * (u.ndim - 1))
    al, ar = a_col[:-1], a_col[1:]
    ul, ur = u[:-1], u[1:]
    amax = np.maximum(np.abs(al), np.abs(ar))
    inner = 0.5 * (al * ul + ar * ur - (ur - ul) * amax)
    pad = np.zeros((1,) + u.shape[1:])
    return np.concatenate([pad, inner, pad], axis=0)


def llf_flux_f(f, a):
    """Interface fluxes for the one-body transport, shape (n_cells + 1,)."""
    f = np.asarray(f, dtype=float)
    a = np.asarray(a, dtype=float)
    if f.shape != a.shape or f.ndim != 1:
        raise ConfigError("flux: f and a must be matching 1-D arrays")
    return _interface_flux(f, a)


def llf_flux_g(g, a_omega, a_m):
    """Interface fluxes for the pair transport.

    Returns (F_omega, F_m) with shapes (n+1, n) and (n, n+1); the m-axis
    fluxes are built by transposing, so a symmetric g with a_omega == a_m
    yields exactly mirrored flux arrays.
    """
    g = np.asarray(g, dtype=float)
    a_omega = np.asarray(a_omega, dtype=float)
    a_m = np.asarray(a_m, dtype=float)
    n = g.shape[0]
    if g.shape != (n, n) or a_omega.shape != (n,) or a_m.shape != (n,):
        raise ConfigError("flux: g must be (n, n) with matching velocities")
    fw = _interface_flux(g, a_omega)
    fm = _interface_flux(g.T, a_m).T
    return fw, fm


def _mirrored_laplacian(u):
    # zero-flux second difference along axis 0 (units of 1/dx^2 applied later)
    grad = np.diff(u, axis=0)
    pad = np.zeros((1,) + u.shape[1:])
    gflux = np.concatenate([pad, grad, pad], axis=0)
    return gflux[1:] - gflux[:-1]


def cfl_max_dt(grid, operator, params=None):
    """Strict upper bound on dt: advection, diffusion, and death limits."""
    span = np.asarray([-2.0, 2.0])
    d_max = float(np.max(np.abs(operator.d(span))))
    bound = grid.dx / (2.0 * d_max) if d_max > 0 else np.inf
    if params is not None:
        if params.diffusion_sigma > 0:
            bound = min(bound, grid.dx ** 2 / (4.0 * params.diffusion_sigma))
        if params.death_rate > 0:
            bound = min(bound, 1.0 / params.death_rate)
    return bound


def _advance(f, g, grid, operator, params):
    params.validate()
    dt = params.dt
    bound = cfl_max_dt(grid, operator, params)
    if not (dt > 0 and dt < bound):
        raise ConfigError("continuum: dt=%g violates 0 < dt < %g" % (dt, bound))
    k = f.shape[0]
    dx = grid.dx
    a = _velocity_values(g, grid, operator, params.eta_cutoff)
    sigma = params.diffusion_sigma

    f_new = np.empty_like(f)
    for p in range(k):
        flux = _interface_flux(f[p], a[p])
        f_new[p] = f[p] - (dt / dx) * (flux[1:] - flux[:-1])
        if sigma > 0:
            f_new[p] += (dt * sigma / dx ** 2) * _mirrored_laplacian(f[p])

    g_new = np.empty_like(g)
    for p in range(k):
        for q in range(k):
            fw = _interface_flux(g[p, q], a[p])
            fm = _interface_flux(g[p, q].T, a[q])
            div = (fw[1:] - fw[:-1]) + (fm[1:] - fm[:-1]).T
            g_new[p, q] = g[p, q] - (dt / dx) * div
            if sigma > 0:
                lap = _mirrored_laplacian(g[p, q]) \
                    + _mirrored_laplacian(g[p, q].T).T
                g_new[p, q] += (dt * sigma / dx ** 2) * lap

    if params.birth_rate > 0 or params.death_rate > 0:
        # splitting stage on the post-transport state; no renormalization
        for p in range(k):
            for q in range(k):
                source = params.birth_rate * np.outer(f_new[p], f_new[q]) \
                    - params.death_rate * g_new[p, q]
                g_new[p, q] = g_new[p, q] + dt * source
    return f_new, g_new


def step_unlabeled(f, g, operator, params):
    """Advance (f, g) one step; returns new fields on the same grid."""
    if f.grid is not g.grid and f.grid.n_cells != g.grid.n_cells:
        raise ConfigError("continuum: f and g live on different grids")
    f_new, g_new = _advance(f.values[None, :], g.values[None, None, :, :],
                            f.grid, operator, params)
    return ScalarField(f.grid, f_new[0]), PairField(f.grid, g_new[0, 0])


def step_labeled(fields, operator, params):
    """Advance labeled (f, g) one step; label p transports with its own speed."""
    f_new, g_new = _advance(fields.f, fields.g, fields.grid, operator, params)
    return LabeledFields(fields.grid, f_new, g_new)
