"""Agent-based opinion dynamics on a community graph.

Each node carries a scalar opinion omega_i and relaxes toward its graph
neighbors through an odd, nonincreasing interaction rule D applied to
opinion differences and averaged over the neighborhood.  D is minus the
derivative of an even convex potential W, so pairwise potential energy
decays along trajectories and the degree-weighted opinion sum is conserved.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class DebateOperator:
    """Interaction rule D with its potential W and a bound on |D'|.

    d maps arrays of opinion differences to arrays; w is the potential with
    w(0) = 0 and d = -w'.  lipschitz bounds |d'| on the admissible opinion
    range and controls the explicit-Euler step bound.
    """

    d: object
    w: object
    lipschitz: float
    name: str = "custom"

    @classmethod
    def linear(cls):
        return cls(d=lambda z: -np.asarray(z, dtype=float),
                   w=lambda z: 0.5 * np.square(z),
                   lipschitz=1.0, name="linear")

    @classmethod
    def quartic(cls):
        # W(z) = z^4 / 4 on differences in (-2, 2); |W''| <= 12 there
        return cls(d=lambda z: -np.power(np.asarray(z, dtype=float), 3),
                   w=lambda z: 0.25 * np.power(z, 4),
                   lipschitz=12.0, name="quartic")

    @classmethod
    def zero(cls):
        return cls(d=lambda z: np.zeros_like(np.asarray(z, dtype=float)),
                   w=lambda z: np.zeros_like(np.asarray(z, dtype=float)),
                   lipschitz=0.0, name="zero")

    def validate(self, z_max=2.0, n_samples=401):
        """Sample-based sanity checks: D odd nonincreasing, W even, W(0)=0."""
        z = np.linspace(-z_max, z_max, n_samples)
        dz = np.asarray(self.d(z), dtype=float)
        wz = np.asarray(self.w(z), dtype=float)
        tol = 1e-10 * max(1.0, float(np.max(np.abs(dz))))
        if abs(float(self.d(np.asarray(0.0)))) > tol:
            raise ConfigError("operator: D(0) must vanish")
        if np.max(np.abs(dz + dz[::-1])) > tol:
            raise ConfigError("operator: D must be odd")
        if np.any(np.diff(dz) > tol):
            raise ConfigError("operator: D must be nonincreasing")
        wtol = 1e-10 * max(1.0, float(np.max(np.abs(wz))))
        if abs(float(self.w(np.asarray(0.0)))) > wtol:
            raise ConfigError("operator: W(0) must vanish")
        if np.max(np.abs(wz - wz[::-1])) > wtol:
            raise ConfigError("operator: W must be even")
        if self.lipschitz < 0 or not np.isfinite(self.lipschitz):
            raise ConfigError("operator: lipschitz bound must be finite and >= 0")
        return self


def micro_rhs(graph, omega, operator):
    """d omega_i / dt = mean over neighbors j of D(omega_i - omega_j)."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (graph.n_nodes,):
        raise ConfigError("micro: omega must have one entry per node")
    diffs = omega[graph.adj_heads] - omega[graph.adj_indices]
    sums = np.bincount(graph.adj_heads, weights=operator.d(diffs),
                       minlength=graph.n_nodes)
    deg = graph.degrees
    return np.where(deg > 0, sums / np.maximum(deg, 1), 0.0)


def step_size_bound(operator):
    """Largest stable explicit-Euler step, 1 / sup|D'|."""
    if operator.lipschitz == 0.0:
        return np.inf
    return 1.0 / operator.lipschitz


def euler_step(graph, omega, operator, dt):
    """One explicit Euler step; dt may equal the bound but not exceed it."""
    if not (0.0 < dt <= step_size_bound(operator)):
        raise ConfigError(
            "micro: dt=%g violates 0 < dt <= %g" % (dt, step_size_bound(operator)))
    omega = np.asarray(omega, dtype=float)
    return omega + dt * micro_rhs(graph, omega, operator)


def _reflect_unit(x):
    # fold the real line into [-1, 1] by repeated reflection at the endpoints
    y = np.mod(x + 1.0, 4.0)
    y = np.where(y > 2.0, 4.0 - y, y)
    return y - 1.0


def euler_maruyama_step(graph, omega, operator, dt, sigma, rng):
    """Euler-Maruyama step with additive noise, reflected into [-1, 1].

    sigma = 0 reproduces euler_step exactly (no rng draw is made).
    """
    if sigma < 0:
        raise ConfigError("micro: noise sigma must be >= 0")
    if sigma == 0.0:
        return euler_step(graph, omega, operator, dt)
    if not (0.0 < dt <= step_size_bound(operator)):
        raise ConfigError(
            "micro: dt=%g violates 0 < dt <= %g" % (dt, step_size_bound(operator)))
    omega = np.asarray(omega, dtype=float)
    drifted = omega + dt * micro_rhs(graph, omega, operator)
    kicked = drifted + np.sqrt(2.0 * sigma * dt) * rng.standard_normal(omega.size)
    return _reflect_unit(kicked)


def conserved_quantity(graph, omega):
    """Degree-weighted opinion sum, invariant under the deterministic flow."""
    omega = np.asarray(omega, dtype=float)
    return float(np.dot(graph.degrees.astype(float), omega))


def consensus_value(graph, omega):
    """Limit opinion: degree-weighted mean of the current state."""
    total = float(graph.degrees.sum())
    if total == 0:
        raise ConfigError("micro: consensus undefined on an edgeless graph")
    return conserved_quantity(graph, omega) / total


def potential_v(graph, omega, operator):
    """Total pairwise potential, half the sum of W over ordered neighbor pairs."""
    omega = np.asarray(omega, dtype=float)
    diffs = omega[graph.edges[:, 0]] - omega[graph.edges[:, 1]]
    return float(np.sum(operator.w(diffs)))


def e_micro(graph, omega):
    """Root-mean-square distance from the consensus value."""
    omega = np.asarray(omega, dtype=float)
    target = consensus_value(graph, omega)
    return float(np.sqrt(np.mean(np.square(omega - target))))
