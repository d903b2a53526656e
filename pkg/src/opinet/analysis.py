"""Diagnostics: consensus values, energies, Lyapunov proxy, rate fits.

Continuum functionals mirror their microscopic counterparts: the pair
density's first moment plays the role of the degree-weighted opinion mean,
the f-weighted RMS distance from it the role of the consensus error, and
the pairwise potential integral the role of the graph potential energy.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SimulationError
from .empirical import ScalarField

REPORT_COLUMNS = ("t", "E_micro", "E_cont_labeled", "E_cont_unlabeled",
                  "conserved_micro", "g_first_moment", "V_micro",
                  "lyapunov_tilde")


def consensus_value_cont(g):
    """First moment of the pair density: dx^2 sum_ij mid_i g_ij.

    Requires g normalized to mass 1 (tolerance 1e-10); the moment is only
    the consensus predictor for a probability pair density.
    """
    vals = np.asarray(g.values, dtype=float)
    grid = g.grid
    mass = grid.dx ** 2 * vals.sum()
    if abs(mass - 1.0) > 1e-10:
        raise ConfigError("analysis: pair density mass %.3e is not 1" % mass)
    return float(grid.dx ** 2 * np.sum(grid.mids[:, None] * vals))


def e_cont(field, omega_inf):
    """RMS opinion distance from omega_inf under the one-body density.

    Accepts a ScalarField or a LabeledFields; labels are summed.  The total
    one-body mass must be 1 within 1e-8.
    """
    if hasattr(field, "f_total"):
        grid, vals = field.grid, field.f_total()
    else:
        grid, vals = field.grid, np.asarray(field.values, dtype=float)
    mass = grid.dx * vals.sum()
    if abs(mass - 1.0) > 1e-8:
        raise ConfigError("analysis: one-body mass %.3e is not 1" % mass)
    second = grid.dx * np.sum(np.square(grid.mids - omega_inf) * vals)
    return float(np.sqrt(max(second, 0.0)))


def lyapunov_tilde(g, operator):
    """Pairwise potential integral dx^2 sum_ij W(mid_i - mid_j) g_ij.

    Labeled densities are summed over blocks.
    """
    vals = np.asarray(g.values if hasattr(g, "values") else g.g_total(),
                      dtype=float)
    grid = g.grid
    if vals.ndim == 4:
        vals = vals.sum(axis=(0, 1))
    wmat = np.asarray(operator.w(grid.mids[:, None] - grid.mids[None, :]),
                      dtype=float)
    return float(grid.dx ** 2 * np.sum(wmat * vals))


def connectivity_marginal(g):
    """Connectivity-weighted opinion marginal: dx sum_j g_ij per cell.

    This is the m-integral of the pair density; it matches the one-body
    density only when connectivity is uncorrelated with opinion.
    """
    vals = np.asarray(g.values, dtype=float)
    return ScalarField(g.grid, g.grid.dx * vals.sum(axis=1))


def fit_exponential_rate(times, values, t_lo=None, t_hi=None, floor_factor=3.0):
    """Least-squares exponential decay rate over a time window.

    Fits log(values) linearly in time on samples with t_lo <= t <= t_hi and
    returns (rate, fit_error) with rate = -slope and fit_error the mean
    relative residual of the log values.  Samples below floor_factor times
    the windowed minimum are treated as a resolution floor: the fit stops
    at the first such sample, unless that leaves fewer than 10 points, in
    which case the full window is used.  Needs at least 10 positive samples.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if times.shape != values.shape or times.ndim != 1:
        raise ConfigError("fit: times and values must be matching 1-D arrays")
    mask = np.ones(times.size, dtype=bool)
    if t_lo is not None:
        mask &= times >= t_lo
    if t_hi is not None:
        mask &= times <= t_hi
    t = times[mask]
    v = values[mask]
    if t.size < 10:
        raise SimulationError("fit: need at least 10 samples in the window")
    if np.any(~np.isfinite(v)) or np.any(v <= 0):
        raise SimulationError("fit: values must be positive and finite")
    if floor_factor is not None:
        floor = float(v.min())
        below = np.flatnonzero(v < floor_factor * floor)
        if below.size and below[0] >= 10:
            t = t[:below[0]]
            v = v[:below[0]]
    logv = np.log(v)
    slope, intercept = np.polyfit(t, logv, 1)
    fitted = slope * t + intercept
    # samples with log v = 0 carry no relative scale; count them at weight 1
    denom = np.where(np.abs(logv) > 0.0, np.abs(logv), 1.0)
    fit_error = float(np.mean(np.abs(logv - fitted) / denom))
    return float(-slope), fit_error


@dataclass
class RunReport:
    """Time series produced by one experiment run.

    Columns missing from the run (variants not requested) hold NaN.
    """

    t: np.ndarray
    e_micro: np.ndarray
    e_cont_labeled: np.ndarray
    e_cont_unlabeled: np.ndarray
    conserved_micro: np.ndarray
    g_first_moment: np.ndarray
    v_micro: np.ndarray
    lyapunov_tilde: np.ndarray

    def columns(self):
        return (self.t, self.e_micro, self.e_cont_labeled,
                self.e_cont_unlabeled, self.conserved_micro,
                self.g_first_moment, self.v_micro, self.lyapunov_tilde)

    def write_tsv(self, path):
        cols = self.columns()
        with open(path, "w") as fh:
            fh.write("\t".join(REPORT_COLUMNS) + "\n")
            for row in zip(*cols):
                fh.write("\t".join("%.17g" % x for x in row) + "\n")

    @classmethod
    def read_tsv(cls, path):
        with open(path) as fh:
            header = fh.readline().strip().split("\t")
            if tuple(header) != REPORT_COLUMNS:
                raise ConfigError("report: unexpected TSV header %r" % (header,))
            rows = [[float(x) for x in line.split("\t")]
                    for line in fh if line.strip()]
        data = np.asarray(rows, dtype=float).reshape(-1, len(REPORT_COLUMNS))
        return cls(*[data[:, i] for i in range(len(REPORT_COLUMNS))])
