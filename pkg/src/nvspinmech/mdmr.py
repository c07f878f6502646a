"""Mechanically detected magnetic resonance: microwave sweeps moving the
equilibrium orientation, including the bistable nonlinear regime.

The microwave drive is modeled as an incoherent population-transfer rate
between instantaneous spin eigenstates,

    W_ij(nu) = (Omega_R^2 / 2) * w_ij * G / (delta_ij^2 + G^2),

with delta_ij the angular detuning of the drive from the i<->j transition,
G the response linewidth (dephasing rate, optionally power-broadened), and
w_ij = 2|<i|Sx|j>|^2 the normalized drive matrix element (1 on the nominal
single-quantum lines for an axial field, 0 on the forbidden double-quantum
line).  Every transition of every orientation class receives its
Lorentzian tail simultaneously.  Coherences with the drive play no
mechanical role at these frequencies, so a rate treatment suffices.

A scan point is converged by damped fixed-point iteration between the
spin steady state at the current tilt and the mechanical equilibrium
under the resulting (frozen-moment) torque; warm-starting along the sweep
yields direction-dependent jumps (hysteresis) in the nonlinear regime.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .constants import HBAR
from .crystal import NV_AXES, CrystalOrientation, transverse_reference
from .mechanics import ALL_CLASSES, TiltGeometry, tilt_geometry, equilibrium_angle
from .params import FieldVector, MicrowaveDrive, SpinParams, TrapModel
from .spincore import (SX, build_hamiltonian, lindblad_jump_superoperator,
                       spin_expectation, steady_state)

_BARE_ZERO = np.array([0.0, 1.0, 0.0])  # |m_s = 0> in the (+1, 0, -1) basis


def _eigensystem(params: SpinParams, b_nv) -> tuple[np.ndarray, np.ndarray]:
    h = build_hamiltonian(params, b_nv)
    vals, vecs = np.linalg.eigh(h)
    return vals, vecs


def transition_table(params: SpinParams, b_nv) -> list[tuple[float, float, int, int]]:
    """All transitions of one class: (frequency_hz, weight, i, j) with i < j.

    Weights are 2|<i|Sx|j>|^2; eigenstates are indexed by ascending energy.
    """
    vals, vecs = _eigensystem(params, b_nv)
    out = []
    for i in range(3):
        for j in range(i + 1, 3):
            freq = (vals[j] - vals[i]) / HBAR / (2.0 * np.pi)
            weight = 2.0 * abs(vecs[:, i].conj() @ SX @ vecs[:, j]) ** 2
            out.append((float(freq), float(weight), i, j))
    return out


def zero_connected_lines(params: SpinParams, b_nv) -> tuple[float, float]:
    """The two transition frequencies (Hz) from the most |0>-like eigenstate,
    ordered (lower, upper)."""
    vals, vecs = _eigensystem(params, b_nv)
    k0 = int(np.argmax(np.abs(_BARE_ZERO @ vecs) ** 2))
    freqs = sorted(abs(vals[k] - vals[k0]) / HBAR / (2.0 * np.pi)
                   for k in range(3) if k != k0)
    return float(freqs[0]), float(freqs[1])


def _response_linewidth(params: SpinParams, drive: MicrowaveDrive) -> float:
    base = params.gamma2_star + drive.extra_broadening
    if drive.power_broadening:
        gamma_pop = 3.0 * params.gamma1 + params.pump_rate
        return float(np.sqrt(base**2 + drive.rabi_rate**2 * base / gamma_pop))
    return float(base)


def microwave_superoperator(params: SpinParams, b_nv, frequency_hz: float,
                            drive: MicrowaveDrive) -> np.ndarray | None:
    """9x9 population-transfer generator for a drive at ``frequency_hz``.

    Returns None when the drive is off (zero rate), so callers can skip it.
    """
    if drive.rabi_rate == 0.0:
        return None
    g_eff = _response_linewidth(params, drive)
    omega_drive = 2.0 * np.pi * frequency_hz
    vals, vecs = _eigensystem(params, b_nv)
    total = np.zeros((9, 9), dtype=complex)
    for i in range(3):
        for j in range(i + 1, 3):
            weight = 2.0 * abs(vecs[:, i].conj() @ SX @ vecs[:, j]) ** 2
            if weight == 0.0:
                continue
            delta = omega_drive - (vals[j] - vals[i]) / HBAR
            rate = 0.5 * drive.rabi_rate**2 * weight * g_eff / (delta**2 + g_eff**2)
            down = np.outer(vecs[:, i], vecs[:, j].conj())
            up = np.outer(vecs[:, j], vecs[:, i].conj())
            total += lindblad_jump_superoperator(down, rate)
            total += lindblad_jump_superoperator(up, rate)
    return total


def mw_steady_state(params: SpinParams, b_nv, drive: MicrowaveDrive,
                    frequency_hz: float | None = None) -> np.ndarray:
    """Steady state of one class under optical pumping plus microwave drive."""
    freq = drive.frequencies[0] if frequency_hz is None else frequency_hz
    extra = microwave_superoperator(params, b_nv, freq, drive)
    return steady_state(params, b_nv, extra_superoperator=extra)


@dataclass(frozen=True)
class MdmrPoint:
    frequency_hz: float
    theta: float
    delta_theta: float
    converged: bool
    iterations: int
    class_lines_hz: tuple = ()  # per-class |0>-connected pair at this tilt


@dataclass(frozen=True)
class MdmrSpectrum:
    """Result of one frequency sweep.

    ``baseline_theta`` is the microwave-off equilibrium tilt; every record
    stores the self-consistent tilt and its displacement from baseline.
    ``class_lines_hz`` holds the two |0>-connected transition frequencies
    of each orientation class evaluated at the baseline tilt.
    """

    drive: MicrowaveDrive
    baseline_theta: float
    points: tuple
    class_lines_hz: np.ndarray  # shape (n_classes, 2)

    @property
    def frequencies_hz(self) -> np.ndarray:
        return np.array([p.frequency_hz for p in self.points])

    @property
    def delta_theta(self) -> np.ndarray:
        return np.array([p.delta_theta for p in self.points])

    @property
    def theta(self) -> np.ndarray:
        return np.array([p.theta for p in self.points])


def _moments_with_drive(params: SpinParams, geom: TiltGeometry, theta: float,
                        classes, drive: MicrowaveDrive,
                        frequency_hz: float) -> np.ndarray:
    """Crystal-frame moments of each class at one tilt, drive included."""
    b = geom.b_crystal(theta)
    out = np.zeros((len(classes), 3))
    for ic, c in enumerate(classes):
        axis = NV_AXES[c]
        bz = float(b @ axis)
        perp = b - bz * axis
        pnorm = float(np.linalg.norm(perp))
        xhat = perp / pnorm if pnorm > 1e-15 * max(1.0, geom.b_mag) \
            else transverse_reference(axis)
        yhat = np.cross(axis, xhat)
        b_nv = np.array([pnorm, 0.0, bz])
        extra = microwave_superoperator(params, b_nv, frequency_hz, drive)
        rho = steady_state(params, b_nv, extra_superoperator=extra)
        m = -HBAR * params.gyromagnetic_ratio * spin_expectation(rho)
        out[ic] = m[0] * xhat + m[1] * yhat + m[2] * axis
    return out


def _frozen_moment_root(geom: TiltGeometry, trap: TrapModel, moments: np.ndarray,
                        n_per_class: float, theta_guess: float) -> float | None:
    """Tilt where the torque of frozen moments balances the trap.

    With fixed moment vectors the spin torque is A*cos(theta) - C*sin(theta);
    the sign-change root nearest the guess is returned, None if the total
    torque never changes sign in the search window.
    """
    m_tot = n_per_class * moments.sum(axis=0)
    a_coef = geom.b_mag * float(m_tot @ geom.e_phi)
    c_coef = geom.b_mag * float(m_tot @ geom.z0)

    def g(th):
        return a_coef * np.cos(th) - c_coef * np.sin(th) - trap.stiffness * (th - trap.theta0)

    for lo, hi, n in ((theta_guess - 0.35, theta_guess + 0.35, 141),
                      (-0.5 * np.pi, np.pi, 189)):
        grid = np.linspace(lo, hi, n)
        vals = g(grid)
        roots = []
        for i in range(n - 1):
            if vals[i] == 0.0:
                roots.append(float(grid[i]))
            elif vals[i] * vals[i + 1] < 0.0:
                roots.append(float(brentq(g, grid[i], grid[i + 1], xtol=1e-10)))
        if roots:
            return min(roots, key=lambda r: abs(r - theta_guess))
    return None


def _fixed_point_tilt(params: SpinParams, geom: TiltGeometry, trap: TrapModel,
                      drive: MicrowaveDrive, frequency_hz: float, theta_init: float,
                      classes, damping: float = 0.5, max_iter: int = 200,
                      tol: float = 1e-7) -> tuple[float, bool, int]:
    """Damped alternation: spin state at current tilt, then mechanical root.

    The damping starts at the configured value and halves whenever a block
    of iterations fails to contract; this settles onto any locally stable
    branch, while genuine fold jumps (where no stable branch exists nearby)
    exhaust the budget and are flagged.
    """
    theta = theta_init
    d = damping
    last_err = np.inf
    for it in range(1, max_iter + 1):
        moments = _moments_with_drive(params, geom, theta, classes, drive, frequency_hz)
        root = _frozen_moment_root(geom, trap, moments, params.n_spins_per_class, theta)
        if root is None:
            return theta, False, it
        err = abs(root - theta)
        if err < tol:
            return theta, True, it
        if it % 25 == 0:
            if err >= 0.5 * last_err:
                d = max(0.5 * d, 1.0 / 64.0)
            last_err = err
        theta = theta + d * (root - theta)
    return theta, False, max_iter


def mdmr_scan(params: SpinParams, orientation: CrystalOrientation, trap: TrapModel,
              b_lab: FieldVector, drive: MicrowaveDrive,
              classes=ALL_CLASSES, damping: float = 0.5, max_iter: int = 200,
              tol: float = 1e-7) -> MdmrSpectrum:
    """Sweep the drive over its frequencies and record tilt displacements.

    Each point is warm-started from the previous one, which reproduces the
    direction dependence of the response near bistable jumps.  Points that
    do not reach a fixed point within ``max_iter`` are recorded with their
    last iterate and flagged; the scan continues.
    """
    if len(drive.frequencies) == 0:
        raise ValueError("drive sweep is empty")
    geom = tilt_geometry(orientation, b_lab)
    eq = equilibrium_angle(params, orientation, trap, b_lab, classes=classes)
    if not eq.bound:
        raise RuntimeError("no stable microwave-off equilibrium: cannot scan")
    off_drive = MicrowaveDrive(rabi_rate=0.0, frequencies=(0.0,))
    baseline, base_ok, _ = _fixed_point_tilt(
        params, geom, trap, off_drive, 0.0, eq.theta, classes, damping, max_iter, tol)
    if not base_ok:
        raise RuntimeError("microwave-off baseline did not converge")

    def lines_at(tilt):
        b = geom.b_crystal(tilt)
        out = []
        for c in classes:
            axis = NV_AXES[c]
            bz = float(b @ axis)
            perp = float(np.linalg.norm(b - bz * axis))
            out.append(zero_connected_lines(params, (perp, 0.0, bz)))
        return out

    points = []
    theta = baseline
    for freq in drive.frequencies:
        theta, ok, iters = _fixed_point_tilt(
            params, geom, trap, drive, freq, theta, classes, damping, max_iter, tol)
        points.append(MdmrPoint(frequency_hz=float(freq), theta=theta,
                                delta_theta=theta - baseline, converged=ok,
                                iterations=iters,
                                class_lines_hz=tuple(lines_at(theta))))
    return MdmrSpectrum(drive=drive, baseline_theta=baseline, points=tuple(points),
                        class_lines_hz=np.array(lines_at(baseline)))


def hysteresis_pair(params: SpinParams, orientation: CrystalOrientation,
                    trap: TrapModel, b_lab: FieldVector, drive: MicrowaveDrive,
                    classes=ALL_CLASSES, **scan_kwargs) -> tuple[MdmrSpectrum, MdmrSpectrum]:
    """The same sweep traversed in both directions: (up scan, down scan)."""
    up_drive = drive if drive.direction == "up" else drive.reversed()
    down_drive = up_drive.reversed()
    up = mdmr_scan(params, orientation, trap, b_lab, up_drive, classes, **scan_kwargs)
    down = mdmr_scan(params, orientation, trap, b_lab, down_drive, classes, **scan_kwargs)
    return up, down


def sharp_edge_side(up: MdmrSpectrum, down: MdmrSpectrum, line_center_hz: float) -> str:
    """Which side of a line carries the discontinuous jump: "high" or "low".

    Looks for the single largest step of the tilt response across both
    sweep directions and compares its frequency with the weak-drive line
    center.
    """
    best_freq, best_jump = None, -1.0
    for spectrum in (up, down):
        freqs = spectrum.frequencies_hz
        dth = spectrum.delta_theta
        if freqs.size < 2:
            continue
        steps = np.abs(np.diff(dth))
        i = int(np.argmax(steps))
        if steps[i] > best_jump:
            best_jump = float(steps[i])
            best_freq = 0.5 * (freqs[i] + freqs[i + 1])
    if best_freq is None:
        raise ValueError("scans too short to locate a jump")
    return "high" if best_freq > line_center_hz else "low"
