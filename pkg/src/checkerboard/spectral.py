"""Momentum-space passage from the mode equations to the Dirac Hamiltonian.

Units: hbar = c = 1. Two-component blocks act on ``(a_+, a_-)``; the
four-component intermediate form acts on ``(alpha_+, alpha_-, alphabar_+,
alphabar_-)``. Matrices are plain complex numpy arrays.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .lattice import LatticeSpec, TransitionRates

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
I2 = np.eye(2, dtype=complex)
I4 = np.eye(4, dtype=complex)

DEFAULT_PHASE = 3 * math.pi / 2
HERMITIAN_TOL = 1e-12


@dataclass(frozen=True)
class MomentumPoint:
    p_vec: tuple[float, float, float]
    E: float
    m: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "p_vec", tuple(float(c) for c in self.p_vec))
        if len(self.p_vec) != 3:
            raise ValueError("p_vec must have three components")
        if self.m < 0:
            raise ValueError(f"mass must be >= 0, got {self.m}")

    @classmethod
    def on_shell(cls, p_vec, m: float, branch: int = 1) -> "MomentumPoint":
        p = math.sqrt(sum(c * c for c in p_vec))
        return cls(tuple(p_vec), math.copysign(math.hypot(p, m), branch), m)

    @classmethod
    def along_z(cls, p: float, E: float, m: float = 0.0) -> "MomentumPoint":
        return cls((0.0, 0.0, p), E, m)

    @property
    def p_mag(self) -> float:
        return math.sqrt(sum(c * c for c in self.p_vec))

    def is_on_shell(self, tol: float = 1e-12) -> bool:
        return abs(self.E**2 - self.p_mag**2 - self.m**2) <= tol


@dataclass(frozen=True)
class ModeAmplitudes:
    a_plus: complex
    a_minus: complex
    abar_plus: complex = 0j
    abar_minus: complex = 0j

    def forward(self) -> np.ndarray:
        return np.array([self.a_plus, self.a_minus], dtype=complex)

    def backward(self) -> np.ndarray:
        return np.array([self.abar_plus, self.abar_minus], dtype=complex)


# --- Fourier amplitudes ------------------------------------------------------


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients on the conjugate grid, arrays indexed ``[p, E]``.

    ``a`` holds ``(a_+, a_-)`` stacked on the last axis and ``abar`` holds
    ``(abar_+, abar_-)``; ``p`` and ``E`` are the grid values in fft order.
    """

    a: np.ndarray
    abar: np.ndarray
    p: np.ndarray
    E: np.ndarray
    delta_z: float
    delta_t: float


def _window(history) -> np.ndarray:
    if isinstance(history, np.ndarray):
        if history.ndim != 3 or history.shape[2] != 2:
            raise ValueError("window array must have shape (num_sites, num_times, 2)")
        return history
    shapes = {c.values.shape for c in history}
    if len(shapes) != 1:
        raise ValueError("non-rectangular (z, t) window: slices differ in size")
    return np.stack([c.values for c in history], axis=1)


def dft_forward(history, spec: LatticeSpec) -> Spectrum:
    """Coefficients of ``A = sum exp(-i(pz - Et)) a = sum exp(-i(pz + Et)) abar``.

    ``history`` is a sequence of :class:`ChiralField` slices (or an array
    ``(num_sites, num_times, 2)``) treated as periodic in both z and t.
    Normalised by ``1/(N T)`` so a unit plane wave gives a unit spike.
    """
    u = _window(history)
    n, nt = u.shape[0], u.shape[1]
    # a(p, E) = 1/(N T) sum_{z,t} A exp(+i p z) exp(-i E t)
    a = np.fft.ifft(np.fft.fft(u, axis=1), axis=0) / nt
    # abar(p, E) = a(p, -E)
    abar = np.roll(a[:, ::-1, :], 1, axis=1)
    p = 2 * np.pi * np.fft.fftfreq(n, spec.delta_z)
    E = 2 * np.pi * np.fft.fftfreq(nt, spec.delta_t)
    return Spectrum(a, abar, p, E, spec.delta_z, spec.delta_t)


def dft_inverse(spectrum: Spectrum, branch: Literal["a", "abar"] = "a") -> np.ndarray:
    """Synthesis ``sum_{p,E} exp(-i(pz -+ Et)) coeff``; returns ``(num_sites, num_times, 2)``."""
    coeff = spectrum.a if branch == "a" else spectrum.abar
    n, nt = coeff.shape[0], coeff.shape[1]
    if spectrum.p.shape != (n,) or spectrum.E.shape != (nt,):
        raise ValueError("spectrum grid does not match coefficient array")
    if branch == "abar":
        coeff = np.roll(coeff[:, ::-1, :], 1, axis=1)
    return np.fft.ifft(np.fft.fft(coeff, axis=0), axis=1) * nt


def dft_forward_direct(u: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    """Direct double sum for ``a(p, E)``; O(N^2 T^2), for cross-checks on small grids."""
    n, nt = u.shape[0], u.shape[1]
    z = np.arange(n) * spec.delta_z
    t = np.arange(nt) * spec.delta_t
    p = 2 * np.pi * np.fft.fftfreq(n, spec.delta_z)
    E = 2 * np.pi * np.fft.fftfreq(nt, spec.delta_t)
    kz = np.exp(1j * np.outer(p, z))  # (P, N)
    kt = np.exp(-1j * np.outer(E, t))  # (E, T)
    return np.einsum("pz,et,ztc->pec", kz, kt, u) / (n * nt)


# --- mode equations ----------------------------------------------------------


def mode_constraint_residual(modes: ModeAmplitudes, pt: MomentumPoint, rates: TransitionRates) -> float:
    """Max defect of the four mode equations (1D, momentum along z)."""
    if pt.p_vec[0] != 0 or pt.p_vec[1] != 0:
        raise ValueError("mode constraints are one-dimensional: p_vec must be (0, 0, p)")
    p, E = pt.p_vec[2], pt.E
    dz = np.array([rates.signed_mass, -rates.signed_mass])
    sign = np.array([1.0, -1.0])
    a, abar = modes.forward(), modes.backward()
    res_a = -sign * 1j * p * a + 1j * E * a - dz * a[::-1]
    res_abar = -sign * 1j * p * abar - 1j * E * abar - dz * abar[::-1]
    return float(max(np.abs(res_a).max(), np.abs(res_abar).max()))


def build_two_block(pt: MomentumPoint, branch: Literal["forward", "backward"] = "forward") -> np.ndarray:
    """``p sigma_z + m sigma_y`` (forward) or its negative (backward), with ``p = |p|``."""
    h = pt.p_mag * SIGMA_Z + pt.m * SIGMA_Y
    if branch == "forward":
        return h
    if branch == "backward":
        return -h
    raise ValueError(f"branch must be 'forward' or 'backward', got {branch!r}")


def dispersion(pt: MomentumPoint) -> tuple[float, float]:
    e = math.hypot(pt.p_mag, pt.m)
    return e, -e


def two_block_det(pt: MomentumPoint, E: float | None = None, branch="forward") -> complex:
    """``det(build_two_block(pt) - E I)``, closed form for 2x2."""
    h = build_two_block(pt, branch) - (pt.E if E is None else E) * I2
    return h[0, 0] * h[1, 1] - h[0, 1] * h[1, 0]


def phase_matrix(phi: float = DEFAULT_PHASE) -> np.ndarray:
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def phase_matrix_inverse(phi: float = DEFAULT_PHASE) -> np.ndarray:
    return np.diag([np.exp(0.5j * phi), np.exp(-0.5j * phi)])


def phase_transform(modes: ModeAmplitudes, phi: float = DEFAULT_PHASE) -> ModeAmplitudes:
    """Rephase ``a`` by ``diag(e^{-i phi/2}, e^{i phi/2})`` and ``abar`` by its inverse.

    The default ``phi = 3 pi / 2`` gives ``alpha_pm = a_pm e^{-+ 3i pi/4}``
    and ``alphabar_pm = abar_pm e^{+- 3i pi/4}``.
    """
    alpha = phase_matrix(phi) @ modes.forward()
    alphabar = phase_matrix_inverse(phi) @ modes.backward()
    return ModeAmplitudes(alpha[0], alpha[1], alphabar[0], alphabar[1])


def rephased_intermediate(pt: MomentumPoint, phi: float = DEFAULT_PHASE) -> np.ndarray:
    """Block-diagonal operator obtained by conjugating both two-blocks with the phase transform."""
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = phase_matrix(phi) @ build_two_block(pt, "forward") @ phase_matrix_inverse(phi)
    out[2:, 2:] = phase_matrix_inverse(phi) @ build_two_block(pt, "backward") @ phase_matrix(phi)
    return out


def assemble_intermediate(pt: MomentumPoint) -> np.ndarray:
    """The 4x4 operator on ``(alpha_+, alpha_-, alphabar_+, alphabar_-)``, written out entrywise.

    Equal to :func:`rephased_intermediate` at ``phi = pi/2``; the default
    ``phi = 3 pi/2`` flips the sign of every ``m`` entry (a sigma_z similarity).
    """
    p, m = pt.p_mag, pt.m
    return np.array([[p, -m, 0, 0],
                     [-m, -p, 0, 0],
                     [0, 0, -p, -m],
                     [0, 0, -m, p]], dtype=complex)


def sigma_permutation() -> np.ndarray:
    """Permutation swapping the second and third components; its own inverse."""
    return I4[[0, 2, 1, 3]]


def sigma_conjugate(h: np.ndarray) -> np.ndarray:
    s = sigma_permutation()
    return s @ h @ s


# --- rotation chain ----------------------------------------------------------


def u_theta(theta: float) -> np.ndarray:
    """Reflection-type rotation about y; ``U @ U = I`` and ``det U = -1``."""
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, s], [s, -c]], dtype=complex)


def u_phi(phi: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * phi), np.exp(0.5j * phi)])


def rotation_angles(p_vec) -> tuple[float, float]:
    """``(theta, phi)`` with ``theta = atan2(p_perp, p_z)`` and ``phi = atan2(p_y, p_x)``.

    ``atan2(0, 0) = 0`` covers the degenerate directions.
    """
    px, py, pz = (float(c) for c in p_vec)
    return math.atan2(math.hypot(px, py), pz), math.atan2(py, px)


def rotate_momentum_block(p_vec, return_intermediate: bool = False):
    """Rotate ``diag(|p|, -|p|)`` into ``sigma . p``.

    First ``U_theta`` tilts the axis in the primed x-z plane, then ``U_phi``
    turns it about z. With ``return_intermediate=True`` also returns the
    tilted block ``[[p_z', p_x'], [p_x', -p_z']]``.
    """
    p = math.sqrt(sum(float(c) ** 2 for c in p_vec))
    theta, phi = rotation_angles(p_vec)
    p_dd = np.diag([p, -p]).astype(complex)
    ut = u_theta(theta)
    p_prime = ut @ p_dd @ ut
    up = u_phi(phi)
    block = up @ p_prime @ up.conj().T
    if return_intermediate:
        return block, p_prime
    return block


def sigma_dot(p_vec) -> np.ndarray:
    """``sigma . p`` written down directly from the components."""
    px, py, pz = (float(c) for c in p_vec)
    return px * SIGMA_X + py * SIGMA_Y + pz * SIGMA_Z


def block_hadamard() -> np.ndarray:
    """Orthogonal ``(1/sqrt 2) [[I, -I], [I, I]]`` in 2x2 block form."""
    return np.block([[I2, -I2], [I2, I2]]) / math.sqrt(2)


def block_rotation(p_vec) -> np.ndarray:
    """``diag(U, U)`` carrying ``diag(|p|,-|p|)`` blocks to ``sigma . p`` blocks."""
    theta, phi = rotation_angles(p_vec)
    u = u_phi(phi) @ u_theta(theta)
    out = np.zeros((4, 4), dtype=complex)
    out[:2, :2] = u
    out[2:, 2:] = u
    return out


def pre_dirac_form(p_vec, m: float) -> np.ndarray:
    """``[[P, -M], [-M, -P]]`` with ``P = sigma . p`` from the rotation chain and ``M = m I``."""
    p_block = rotate_momentum_block(p_vec)
    return np.block([[p_block, -m * I2], [-m * I2, -p_block]])


def dirac_form(p_vec, m: float) -> np.ndarray:
    """``R H R^T`` = ``[[M, sigma.p], [sigma.p, -M]]``, i.e. ``alpha . p + beta m``."""
    r = block_hadamard()
    return r @ pre_dirac_form(p_vec, m) @ r.T


def dirac_alpha() -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    z = np.zeros((2, 2), dtype=complex)
    return tuple(np.block([[z, s], [s, z]]) for s in (SIGMA_X, SIGMA_Y, SIGMA_Z))


def dirac_beta() -> np.ndarray:
    return np.diag([1, 1, -1, -1]).astype(complex)


def bilinearization_residual(p_vec) -> float:
    """Max-norm of ``(sigma . p)^2 - |p|^2 I``."""
    s = rotate_momentum_block(p_vec)
    p2 = sum(float(c) ** 2 for c in p_vec)
    return float(np.abs(s @ s - p2 * I2).max())


def eig4(h: np.ndarray) -> np.ndarray:
    """Eigenvalues of a Hermitian 4x4 matrix, sorted descending."""
    h = np.asarray(h, dtype=complex)
    if h.shape != (4, 4):
        raise ValueError(f"expected a 4x4 matrix, got shape {h.shape}")
    if np.abs(h - h.conj().T).max() > HERMITIAN_TOL:
        raise ValueError("matrix is not Hermitian")
    return np.linalg.eigvalsh(h)[::-1]


def on_shell_spinor(p_vec, m: float, branch: int = 1) -> tuple[float, np.ndarray]:
    """An eigenvector of ``dirac_form(p_vec, m)`` with energy ``+-sqrt(|p|^2 + m^2)``."""
    w, v = np.linalg.eigh(dirac_form(p_vec, m))
    k = 3 if branch > 0 else 0
    return float(w[k]), v[:, k]
