"""Minimal coupling to an electromagnetic four-potential.

Metric signature (+,-,-,-), c = hbar = 1. The canonical momentum enters the
exponent of a plane wave ``exp(i(p.x - E t))``; the kinetic momentum
``p - eA`` and energy ``E - eA0`` enter the Dirac Hamiltonian.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .spectral import MomentumPoint, dirac_alpha, dirac_beta, dirac_form, on_shell_spinor


@dataclass(frozen=True)
class FourPotential:
    """``(A0, A_x, A_y, A_z)`` with coupling ``charge``.

    ``constant``: scalars. ``sampled``: arrays of shape ``(num_z, num_t)``
    on the same grid as the spinor field, with spacings ``dz``, ``dt``.
    """

    a0: float | np.ndarray = 0.0
    a_vec: tuple = (0.0, 0.0, 0.0)
    charge: float = 1.0
    representation: Literal["constant", "sampled"] = "constant"
    dz: float | None = None
    dt: float | None = None

    def __post_init__(self):
        if len(self.a_vec) != 3:
            raise ValueError("a_vec must have three components")
        comps = [self.a0, *self.a_vec]
        if self.representation == "constant":
            object.__setattr__(self, "a0", float(self.a0))
            object.__setattr__(self, "a_vec", tuple(float(c) for c in self.a_vec))
        elif self.representation == "sampled":
            if self.dz is None or self.dt is None:
                raise ValueError("sampled potentials need dz and dt metadata")
            arrs = [np.broadcast_to(np.asarray(c, dtype=float), np.shape(self.a0)) for c in comps]
            if np.ndim(self.a0) != 2:
                raise ValueError("sampled potentials are (num_z, num_t) arrays")
            object.__setattr__(self, "a0", arrs[0])
            object.__setattr__(self, "a_vec", tuple(arrs[1:]))
        else:
            raise ValueError(f"unknown representation {self.representation!r}")
        if not all(np.all(np.isfinite(c)) for c in comps):
            raise ValueError("potential samples must be finite")


def minimal_couple(pt: MomentumPoint, pot: FourPotential) -> MomentumPoint:
    """``p -> p - eA``, ``E -> E - eA0``."""
    if pot.representation != "constant":
        raise ValueError("minimal_couple needs a constant potential; use position_space_residual for grids")
    e = pot.charge
    p = tuple(pc - e * ac for pc, ac in zip(pt.p_vec, pot.a_vec))
    return MomentumPoint(p, pt.E - e * pot.a0, pt.m)


def dirac_with_potential(pt: MomentumPoint, pot: FourPotential, m: float | None = None):
    """Return ``(H_A, |det(H_A - (E - eA0) I)|)`` for the coupled momentum-space system."""
    m = pt.m if m is None else m
    kin = minimal_couple(pt, pot)
    h = dirac_form(kin.p_vec, m)
    return h, float(abs(np.linalg.det(h - kin.E * np.eye(4))))


@dataclass(frozen=True)
class SpinorField:
    """Four-component field on a ``(z, t)`` grid, shape ``(num_z, num_t, 4)``.

    ``p_transverse`` holds the fixed ``(p_x, p_y)`` that the field carries
    along the axes that are not sampled.
    """

    values: np.ndarray
    dz: float
    dt: float
    p_transverse: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex)
        if vals.ndim != 3 or vals.shape[2] != 4:
            raise ValueError(f"spinor values must have shape (num_z, num_t, 4), got {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("spinor field contains non-finite entries")
        object.__setattr__(self, "values", vals)


def grid_momenta(num_z: int, dz: float) -> np.ndarray:
    """Momenta representable exactly on a periodic z grid (fft order)."""
    return 2 * np.pi * np.fft.fftfreq(num_z, dz)


def plane_wave_synthesize(amplitudes, p_z, energies, num_z: int, dz: float, num_t: int, dt: float,
                          p_transverse=(0.0, 0.0), t0: float = 0.0) -> SpinorField:
    """``psi(z, t) = sum_k exp(i(p_k z - E_k t)) Psi_k`` on the grid (transverse coordinates at 0)."""
    amplitudes = np.atleast_2d(np.asarray(amplitudes, dtype=complex))
    p_z = np.atleast_1d(np.asarray(p_z, dtype=float))
    energies = np.atleast_1d(np.asarray(energies, dtype=float))
    if amplitudes.shape[1] != 4 or not (len(amplitudes) == len(p_z) == len(energies)):
        raise ValueError("need one 4-spinor, one p_z and one energy per mode")
    z = np.arange(num_z) * dz
    t = t0 + np.arange(num_t) * dt
    phase = np.exp(1j * (p_z[None, None, :] * z[:, None, None] - energies[None, None, :] * t[None, :, None]))
    return SpinorField(np.einsum("ztk,kc->ztc", phase, amplitudes), dz, dt, tuple(p_transverse))


def _spectral_dz(values: np.ndarray, dz: float) -> np.ndarray:
    k = grid_momenta(values.shape[0], dz)
    return np.fft.ifft(1j * k[:, None, None] * np.fft.fft(values, axis=0), axis=0)


def _richardson_dt(values: np.ndarray, dt: float) -> np.ndarray:
    """Central differences at ``dt`` and ``2 dt`` combined to fourth order; interior slices only."""
    d1 = (values[:, 3:-1] - values[:, 1:-3]) / (2 * dt)
    d2 = (values[:, 4:] - values[:, :-4]) / (4 * dt)
    return (4 * d1 - d2) / 3


def _potential_parts(pot: FourPotential, shape: tuple[int, int]):
    if pot.representation == "constant":
        return pot.a0, pot.a_vec
    if np.shape(pot.a0) != shape:
        raise ValueError(f"sampled potential has shape {np.shape(pot.a0)}, field grid is {shape}")
    return pot.a0, pot.a_vec


def position_space_residual(psi: SpinorField, pot: FourPotential, m: float) -> float:
    """Max-norm of ``[alpha.(-i grad - eA) + beta m] psi - (i d/dt - eA0) psi`` over interior times.

    z derivatives are spectral (periodic axis); t derivatives are
    Richardson-extrapolated central differences, so two slices at each end
    are excluded.
    """
    vals = psi.values
    nz, nt = vals.shape[:2]
    if nt < 5:
        raise ValueError("need at least 5 time slices")
    if pot.representation == "sampled" and (not np.isclose(pot.dz, psi.dz) or not np.isclose(pot.dt, psi.dt)):
        raise ValueError("potential grid spacing does not match the field")
    a0, (ax, ay, az) = _potential_parts(pot, (nz, nt))
    e = pot.charge
    ax_, ay_, az_ = dirac_alpha()
    beta = dirac_beta()
    px, py = psi.p_transverse

    def at(c):  # broadcast a coefficient (scalar or (nz, nt) array) over spinor components
        return np.asarray(c)[..., None] if np.ndim(c) else c

    dz_psi = _spectral_dz(vals, psi.dz)
    kx = at(px - e * np.asarray(ax))
    ky = at(py - e * np.asarray(ay))
    # alpha . (-i grad - eA) psi + beta m psi
    lhs = (kx * (vals @ ax_.T) + ky * (vals @ ay_.T)
           + (-1j * dz_psi - at(e * np.asarray(az)) * vals) @ az_.T
           + m * (vals @ beta.T))
    dt_psi = _richardson_dt(vals, psi.dt)
    inner = slice(2, nt - 2)
    a0_in = np.asarray(a0)[:, inner] if np.ndim(a0) else a0
    rhs = 1j * dt_psi - at(e * a0_in) * vals[:, inner]
    return float(np.abs(lhs[:, inner] - rhs).max())


def gauge_shifted_plane_wave(p_canonical, m: float, pot: FourPotential, num_z: int, dz: float,
                             num_t: int, dt: float, branch: int = 1, amplitude: complex = 1.0) -> SpinorField:
    """On-shell plane wave in a constant potential.

    The spinor is an eigenvector of ``dirac_form(p - eA, m)`` with kinetic
    energy ``E - eA0``; the phase uses the canonical ``(p, E)``.
    """
    e = pot.charge
    kin = tuple(pc - e * ac for pc, ac in zip(p_canonical, pot.a_vec))
    e_kin, spinor = on_shell_spinor(kin, m, branch)
    energy = e_kin + e * pot.a0
    return plane_wave_synthesize([amplitude * spinor], [p_canonical[2]], [energy], num_z, dz, num_t, dt,
                                 p_transverse=(p_canonical[0], p_canonical[1]))
