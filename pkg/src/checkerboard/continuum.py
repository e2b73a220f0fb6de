"""Continuum limit of the coupled lattice equations.

The difference ``D_pm = Z_pm - Zbar_mp`` of forward and backward amplitudes
obeys a first-order PDE. Weighting it by ``exp((zeta_+ + zeta_-) t)`` gives
the chiral fields ``A_pm``, which satisfy the transport system

    +-v dA_pm/dz + dA_pm/dt = (zeta_pm - zeta_mp) A_mp

Residuals of both equations are evaluated with second-order central
differences in z and t, and their convergence with ``dt`` is measured by a
log-log slope fit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lattice import MINUS, PLUS, CausalFieldPair, LatticeSpec, TransitionRates

ABSORBING_MARGIN = 2


@dataclass(frozen=True)
class ChiralField:
    values: np.ndarray
    t: float
    rates: TransitionRates

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 2 or vals.shape[1] != 2:
            raise ValueError(f"chiral values must have shape (num_sites, 2), got {vals.shape}")
        vals = np.array(vals, dtype=np.complex128 if np.iscomplexobj(vals) else np.float64)
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def unweighted(self) -> np.ndarray:
        """``Z_pm - Zbar_mp`` recovered by removing the integrating factor."""
        return self.values * math.exp(-self.rates.total * self.t)


def difference_field(pair: CausalFieldPair) -> np.ndarray:
    """``D_pm = Z_pm - Zbar_mp``; note the opposite label on the backward field."""
    z, bar = pair.z_field.values, pair.zbar_field.values
    return np.stack([z[:, PLUS] - bar[:, MINUS], z[:, MINUS] - bar[:, PLUS]], axis=1)


def chiral_field(pair: CausalFieldPair, rates: TransitionRates, t: float) -> ChiralField:
    return ChiralField(math.exp(rates.total * t) * difference_field(pair), t, rates)


def _interior(spec: LatticeSpec) -> slice:
    return slice(None) if spec.periodic else slice(ABSORBING_MARGIN, spec.num_sites - ABSORBING_MARGIN)


def _dz(u: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """Central difference along the site axis (wraps; edges are trimmed later if absorbing)."""
    return (np.roll(u, -1, axis=0) - np.roll(u, 1, axis=0)) / (2 * spec.delta_z)


def _slices(history: Sequence[np.ndarray], spec: LatticeSpec):
    """Yield ``(u, du/dt, du/dz)`` at every slice with both time neighbours."""
    if len(history) < 3:
        raise ValueError(f"need at least 3 consecutive slices, got {len(history)}")
    for prev, cur, nxt in zip(history, history[1:], history[2:]):
        if not (prev.shape == cur.shape == nxt.shape) or cur.shape[0] != spec.num_sites:
            raise ValueError("slice shapes do not match the lattice")
        yield cur, (nxt - prev) / (2 * spec.delta_t), _dz(cur, spec)


def _max_norm(residuals: list[np.ndarray], spec: LatticeSpec) -> float:
    inner = _interior(spec)
    return float(max(np.abs(r[inner]).max(initial=0.0) for r in residuals))


def zzb_pde_residual(history: Sequence[CausalFieldPair], spec: LatticeSpec,
                     rates: TransitionRates) -> tuple[float, float]:
    """Residual of the PDE for ``D_pm = Z_pm - Zbar_mp``; returns ``(dt, max-norm)``."""
    for a, b in zip(history, history[1:]):
        if b.time_index != a.time_index + 1:
            raise ValueError("history slices must be consecutive")
    diffs = [difference_field(p) for p in history]
    sign = np.array([1.0, -1.0])
    coupling = np.array([rates.signed_mass, -rates.signed_mass])
    res = []
    for d, dt_d, dz_d in _slices(diffs, spec):
        res.append(sign * spec.v * dz_d + dt_d + rates.total * d - coupling * d[:, ::-1])
    return spec.delta_t, _max_norm(res, spec)


def _check_times(history: Sequence[ChiralField], spec: LatticeSpec) -> None:
    for a, b in zip(history, history[1:]):
        if not math.isclose(b.t - a.t, spec.delta_t, rel_tol=1e-9, abs_tol=1e-12):
            raise ValueError(f"chiral slices at t={a.t}, {b.t} are not one step apart")


def transport_residual(chiral_history: Sequence[ChiralField], spec: LatticeSpec,
                       rates: TransitionRates) -> tuple[float, float]:
    """Residual of ``+-v dA_pm/dz + dA_pm/dt - (zeta_pm - zeta_mp) A_mp``; returns ``(dt, max-norm)``."""
    _check_times(chiral_history, spec)
    sign = np.array([1.0, -1.0])
    coupling = np.array([rates.signed_mass, -rates.signed_mass])
    res = [sign * spec.v * dz_a + dt_a - coupling * a[:, ::-1]
           for a, dt_a, dz_a in _slices([c.values for c in chiral_history], spec)]
    return spec.delta_t, _max_norm(res, spec)


def advection_residual(chiral_history: Sequence[ChiralField], spec: LatticeSpec) -> tuple[float, float]:
    """Pure advection ``+-v dA_pm/dz + dA_pm/dt`` with the same stencils."""
    _check_times(chiral_history, spec)
    sign = np.array([1.0, -1.0])
    res = [sign * spec.v * dz_a + dt_a for _, dt_a, dz_a in _slices([c.values for c in chiral_history], spec)]
    return spec.delta_t, _max_norm(res, spec)


def convergence_order(entries: Sequence[tuple[float, float]], floor: float = 0.0) -> float:
    """Least-squares slope of ``log(residual)`` against ``log(dt)``.

    Returns ``inf`` when every residual is at or below ``floor`` (default:
    exactly zero), i.e. the data solve the discrete equations exactly and
    only rounding is left to fit.
    """
    if len(entries) < 3:
        raise ValueError(f"need at least 3 (dt, residual) entries, got {len(entries)}")
    dts = np.array([e[0] for e in entries], dtype=float)
    res = np.array([e[1] for e in entries], dtype=float)
    if np.any(dts <= 0):
        raise ValueError("dt values must be positive")
    if np.all(res <= floor):
        return math.inf
    if np.any(res <= 0):
        raise ValueError("residuals must all be positive, or all exactly zero")
    slope, _ = np.polyfit(np.log(dts), np.log(res), 1)
    return float(slope)


@dataclass
class ResidualReport:
    residual_norms: list[tuple[float, float]]
    floor: float = 0.0
    estimated_order: float = field(init=False)

    def __post_init__(self):
        if not self.residual_norms:
            raise ValueError("residual_norms must be nonempty")
        dts = [dt for dt, _ in self.residual_norms]
        if any(b >= a for a, b in zip(dts, dts[1:])):
            raise ValueError("dt values must be strictly decreasing")
        self.estimated_order = convergence_order(self.residual_norms, self.floor)

    @property
    def exact(self) -> bool:
        return math.isinf(self.estimated_order)

    def to_dict(self) -> dict:
        return {
            "entries": [{"dt": dt, "residual": r} for dt, r in self.residual_norms],
            "order": "exact" if self.exact else self.estimated_order,
        }


# --- smooth test data --------------------------------------------------------


def gaussian_packet(z: np.ndarray, center: float, width: float, p0: float) -> np.ndarray:
    """Gaussian-modulated plane wave ``exp(-(z-c)^2 / 2w^2) exp(i p0 z)``."""
    return np.exp(-((z - center) ** 2) / (2 * width**2) + 1j * p0 * z)


def free_streaming_history(spec: LatticeSpec, rates: TransitionRates, t0: float, slices: int = 3,
                           width: float = 2.0, p0: float = 1.0) -> list[ChiralField]:
    """Chiral fields ``A_pm(z, t) = f(z -+ v t)``, exact when ``zeta_+ == zeta_-``."""
    z = spec.positions()
    center = 0.5 * spec.num_sites * spec.delta_z
    out = []
    for k in range(slices):
        t = t0 + k * spec.delta_t
        vals = np.stack([gaussian_packet(z - spec.v * t, center, width, p0),
                         gaussian_packet(z + spec.v * t, center, width, p0)], axis=1)
        out.append(ChiralField(vals, t, rates))
    return out


def mode_vector(p: float, rates: TransitionRates, v: float = 1.0, branch: int = 1) -> tuple[float, np.ndarray]:
    """Energy and ``(a_+, a_-)`` for a plane-wave solution of the transport system.

    A mode ``exp(-i(pz - Et)) (a_+, a_-)`` solves it iff
    ``E a = (v p sigma_z + m sigma_y) a`` with signed ``m = zeta_+ - zeta_-``.
    """
    m = rates.signed_mass
    h = np.array([[v * p, -1j * m], [1j * m, -v * p]])
    w, vecs = np.linalg.eigh(h)
    k = 1 if branch > 0 else 0
    return float(w[k]), vecs[:, k]


def wavepacket_history(spec: LatticeSpec, rates: TransitionRates, t0: float, slices: int = 3,
                       width: float = 2.0, p0: float = 1.0, branch: int = 1) -> list[ChiralField]:
    """Gaussian wave packet built from exact transport modes on the periodic box.

    Mode momenta are ``2 pi k / L`` for the box length ``L``, so the packet is
    the same continuum function for every ``dt`` with the same ``L``.
    """
    length = spec.num_sites * spec.delta_z
    center = 0.5 * length
    kmax = int(math.ceil((abs(p0) + 8.0 / width) * length / (2 * math.pi)))
    ks = np.arange(-kmax, kmax + 1)
    ps = 2 * math.pi * ks / length
    amp = np.exp(-((ps - p0) ** 2) * width**2 / 2 + 1j * ps * center)
    modes = [mode_vector(p, rates, spec.v, branch) for p in ps]
    energies = np.array([e for e, _ in modes])
    vecs = np.array([u for _, u in modes])  # (K, 2)
    z = spec.positions()
    out = []
    for k in range(slices):
        t = t0 + k * spec.delta_t
        phase = np.exp(-1j * (np.outer(z, ps) - energies * t))  # (N, K)
        vals = phase @ (amp[:, None] * vecs)
        out.append(ChiralField(vals, t, rates))
    return out
