"""Forward and inverse NV magnetometry from the two |0>-connected lines.

Diagonalizing the ground-state Hamiltonian for a field of magnitude B at
angle theta from the NV axis gives the pair of transition frequencies
(nu_minus, nu_plus).  The labels follow adiabatic continuation in field
magnitude from B = 0, so the lower line keeps tracking the |0> <-> |-1>
pair through the level crossing rather than being re-sorted by energy.

The inverse problem maps a measured frequency pair back to (theta, B) via
a coarse grid search followed by least-squares refinement from the best
few basins; measurement linewidths are propagated to parameter
uncertainties through the local Jacobian.  Sensitivity to theta vanishes
quadratically at theta = 0, which shows up as an inflated angle
uncertainty rather than a failure.  Above roughly 0.22 T the pair is no
longer globally unique (a near-aligned and a large-angle configuration
can produce identical lines); the estimator then returns the basin whose
coarse cost is lowest.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.optimize import least_squares

from .constants import HBAR
from .params import SpinParams


@dataclass(frozen=True)
class TransitionPair:
    """Measured or computed |0>-connected resonance pair (Hz).

    ``nu_minus`` tracks the |0> <-> |-1|-like transition (adiabatic label),
    ``nu_plus`` the |0> <-> |+1>-like one.  Optional linewidths (FWHM, Hz)
    feed the uncertainty propagation of the inversion.
    """

    nu_minus: float
    nu_plus: float
    linewidth_minus: float | None = None
    linewidth_plus: float | None = None

    def __post_init__(self):
        if self.nu_minus <= 0.0 or self.nu_plus <= 0.0:
            raise ValueError("transition frequencies must be positive")


class NoSolutionError(RuntimeError):
    """Inversion residual exceeds tolerance everywhere in the search range."""


# real copies of the spin operators: with By = 0 the Hamiltonian is real
# symmetric, which keeps the batched diagonalization cheap
_SX = np.array([[0.0, 1.0, 0.0], [1.0, 0.0, 1.0], [0.0, 1.0, 0.0]]) / np.sqrt(2.0)
_SZ = np.diag([1.0, 0.0, -1.0])
_SZ2 = np.diag([1.0, 0.0, 1.0])


def _tracked_levels(params: SpinParams, theta: float, b: float,
                    n_steps: int = 24) -> np.ndarray:
    """Energies (J) labeled (+1, 0, -1) by continuation from B = 0."""
    if b == 0.0:
        d = params.zero_field_splitting
        return HBAR * np.array([d, 0.0, d])
    st, ct = np.sin(theta), np.cos(theta)
    bs = np.linspace(0.0, b, n_steps + 1)[1:]
    h = (params.zero_field_splitting * _SZ2[None]
         + params.gyromagnetic_ratio * (
             (bs * st)[:, None, None] * _SX + (bs * ct)[:, None, None] * _SZ))
    vals, vecs = np.linalg.eigh(h)
    prev = np.eye(3)
    order = np.arange(3)
    for k in range(bs.size):
        overlap = np.abs(prev.T @ vecs[k]) ** 2
        this_order = np.full(3, -1, dtype=int)
        taken = np.zeros(3, dtype=bool)
        for _ in range(3):
            i, j = np.unravel_index(np.argmax(np.where(taken, -1.0, overlap)), (3, 3))
            overlap[i, :] = -1.0
            this_order[i] = j
            taken[j] = True
        prev = vecs[k][:, this_order]
        order = this_order
    return HBAR * vals[-1][order]


def transition_frequencies(params: SpinParams, theta: float, b: float) -> TransitionPair:
    """Forward model: the |0>-connected line pair for a tilted field.

    Args:
        theta: angle between the NV axis and the field, rad, in [0, pi/2].
        b: field magnitude, tesla, >= 0.
    """
    if not 0.0 <= theta <= 0.5 * np.pi:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta!r}")
    if b < 0.0 or not np.isfinite(b):
        raise ValueError(f"field magnitude must be finite and >= 0, got {b!r}")
    e_p, e_0, e_m = _tracked_levels(params, theta, b)
    nu_minus = abs(e_m - e_0) / HBAR / (2.0 * np.pi)
    nu_plus = abs(e_p - e_0) / HBAR / (2.0 * np.pi)
    return TransitionPair(nu_minus=float(nu_minus), nu_plus=float(nu_plus))


@dataclass(frozen=True)
class AngleFieldEstimate:
    """Inversion result with propagated uncertainties."""

    theta: float
    b: float
    residual: float  # rms frequency mismatch, Hz
    theta_err: float
    b_err: float


def invert_angle_field(params: SpinParams, pair: TransitionPair,
                       theta_range: tuple = (0.0, 0.5 * np.pi),
                       b_range: tuple = (0.0, 0.3),
                       grid_shape: tuple = (31, 31),
                       residual_tol: float | None = None) -> AngleFieldEstimate:
    """Recover (theta, B) from a measured line pair.

    Coarse grid search over the requested ranges picks the basin; bounded
    least squares on the frequency residuals refines it.  Linewidths, when
    present, propagate through the inverse Jacobian into (theta_err,
    b_err); near theta = 0 the angle error inflates instead of failing.

    Raises:
        NoSolutionError: the refined residual exceeds ``residual_tol``
            (default max(1 kHz, linewidth/100)).
    """
    target = np.array([pair.nu_minus, pair.nu_plus])
    widths = np.array([pair.linewidth_minus or 0.0, pair.linewidth_plus or 0.0])
    if residual_tol is None:
        residual_tol = max(1e3, float(widths.max()) / 100.0)

    def residuals(x):
        tp = transition_frequencies(params, x[0], x[1])
        return np.array([tp.nu_minus - target[0], tp.nu_plus - target[1]])

    thetas, bs, grid_nu = _forward_grid(params, theta_range, b_range, grid_shape)
    cost = (grid_nu[..., 0] - target[0]) ** 2 + (grid_nu[..., 1] - target[1]) ** 2
    starts = _candidate_starts(thetas, bs, cost)

    lower = [theta_range[0], b_range[0]]
    upper = [theta_range[1], b_range[1]]
    # the frequency gradient in theta vanishes at theta = 0, so a start
    # pinned to that edge would never move; nudge starts slightly inside
    eps = 2e-3 * (theta_range[1] - theta_range[0])
    best_sol, best_rms = None, np.inf
    for x0 in starts:
        x0 = np.clip(x0, [lower[0] + eps, lower[1]], [upper[0] - eps, upper[1]])
        sol = least_squares(residuals, x0, bounds=(lower, upper),
                            xtol=1e-14, ftol=1e-14, gtol=1e-14,
                            x_scale=[1e-2, 1e-3])
        rms = float(np.sqrt(np.mean(sol.fun**2)))
        if rms < best_rms:
            best_sol, best_rms = sol, rms
        if rms < 1e-6:
            break
    theta_hat, b_hat = float(best_sol.x[0]), float(best_sol.x[1])
    rms = best_rms
    if rms > residual_tol:
        raise NoSolutionError(
            f"no (theta, B) in range reproduces the pair: rms residual {rms:.3e} Hz")

    # uncertainty propagation through the local Jacobian
    jac = _jacobian(params, theta_hat, b_hat)
    sigma_nu = np.where(widths > 0.0, widths / 2.0, 0.0)
    if np.any(sigma_nu > 0.0):
        try:
            jinv = np.linalg.inv(jac)
        except np.linalg.LinAlgError:
            jinv = np.linalg.pinv(jac)
        cov = jinv @ np.diag(sigma_nu**2) @ jinv.T
        theta_err = float(np.sqrt(max(cov[0, 0], 0.0)))
        b_err = float(np.sqrt(max(cov[1, 1], 0.0)))
        # quadratic insensitivity toward theta = 0: when the estimate sits
        # inside the flat valley where the lines move by less than the
        # measurement noise, the angle error spans that valley
        theta_flat = _flat_valley_width(params, b_hat, float(np.max(sigma_nu)))
        if theta_hat < theta_flat:
            theta_err = max(theta_err, theta_flat)
        theta_err = min(theta_err, 0.5 * np.pi)
    else:
        theta_err = 0.0
        b_err = 0.0
    return AngleFieldEstimate(theta=theta_hat, b=b_hat, residual=rms,
                              theta_err=theta_err, b_err=b_err)


def _candidate_starts(thetas, bs, cost, max_starts: int = 5):
    """Refinement starts: local minima of the coarse cost surface plus
    tilt-offset companions (the frequency gradient in theta vanishes
    quadratically toward theta = 0, which can strand a start)."""
    minima = []
    n_t, n_b = cost.shape
    for i in range(n_t):
        for j in range(n_b):
            c = cost[i, j]
            neighbors = [cost[ii, jj]
                         for ii in (i - 1, i, i + 1) if 0 <= ii < n_t
                         for jj in (j - 1, j, j + 1) if 0 <= jj < n_b
                         if (ii, jj) != (i, j)]
            if c <= min(neighbors):
                minima.append((c, i, j))
    minima.sort(key=lambda m: m[0])
    dt = thetas[1] - thetas[0] if thetas.size > 1 else 0.05
    starts = []
    for _, i, j in minima[:max_starts]:
        starts.append(np.array([thetas[i], bs[j]]))
        starts.append(np.array([thetas[i] + dt, bs[j]]))
        if i > 0:
            starts.append(np.array([thetas[i] - dt, bs[j]]))
    return starts


@lru_cache(maxsize=8)
def _forward_grid(params: SpinParams, theta_range: tuple, b_range: tuple,
                  grid_shape: tuple):
    """Coarse forward-model table reused across inversions."""
    thetas = np.linspace(theta_range[0], theta_range[1], grid_shape[0])
    bs = np.linspace(b_range[0], b_range[1], grid_shape[1])
    nu = np.empty((thetas.size, bs.size, 2))
    for i, th in enumerate(thetas):
        for j, b in enumerate(bs):
            tp = transition_frequencies(params, float(th), float(b))
            nu[i, j] = (tp.nu_minus, tp.nu_plus)
    return thetas, bs, nu


def _flat_valley_width(params: SpinParams, b: float, sigma: float) -> float:
    """Tilt below which both lines shift by less than sigma (rad)."""
    if sigma <= 0.0 or b <= 0.0:
        return 0.0
    probe = 0.02
    n0 = transition_frequencies(params, 0.0, b)
    n1 = transition_frequencies(params, probe, b)
    curv = 2.0 * max(abs(n1.nu_minus - n0.nu_minus),
                     abs(n1.nu_plus - n0.nu_plus)) / probe**2
    if curv <= 0.0:
        return 0.5 * np.pi
    return min(float(np.sqrt(2.0 * sigma / curv)), 0.5 * np.pi)


def _jacobian(params: SpinParams, theta: float, b: float) -> np.ndarray:
    """d(nu_minus, nu_plus)/d(theta, B) by central differences."""
    h_th, h_b = 1e-4, 1e-6
    th_lo, th_hi = max(0.0, theta - h_th), min(0.5 * np.pi, theta + h_th)
    b_lo, b_hi = max(0.0, b - h_b), b + h_b

    def nu(th, bb):
        tp = transition_frequencies(params, th, bb)
        return np.array([tp.nu_minus, tp.nu_plus])

    col_th = (nu(th_hi, b) - nu(th_lo, b)) / (th_hi - th_lo)
    col_b = (nu(theta, b_hi) - nu(theta, b_lo)) / (b_hi - b_lo)
    return np.column_stack([col_th, col_b])
