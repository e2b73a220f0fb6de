"""Checkerboard lattice dynamics.

Two update rules live here. The simple master equation moves an amplitude
one site along its current direction and then either keeps that direction,
with weight ``1 - a*dt``, or reverses it, with weight ``a*dt``. The coupled
forward/backward equations carry a second family of backward-time
amplitudes ``Zbar`` that is tied to the forward family by the causality
constraint ``Z_pm(z, t) = Zbar_mp(z +- dz, t + dt)``.

Fields are ``(num_sites, 2)`` arrays; column 0 is the ``+`` direction
(toward larger z) and column 1 is ``-``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

import numpy as np

from . import backend

PLUS, MINUS = 0, 1
MAX_ENUMERATION_STEPS = 24


class SingularSystemError(ArithmeticError):
    """Raised when a per-site 2x2 solve has a vanishing determinant."""


def _readonly(values: np.ndarray) -> np.ndarray:
    values = np.array(values, copy=True)
    values.flags.writeable = False
    return values


def direction_index(direction) -> int:
    """Map ``+1``/``'+'`` to column 0 and ``-1``/``'-'`` to column 1."""
    if direction in (1, "+"):
        return PLUS
    if direction in (-1, "-"):
        return MINUS
    raise ValueError(f"direction must be +1/-1 or '+'/'-', got {direction!r}")


@dataclass(frozen=True)
class LatticeSpec:
    delta_t: float
    num_sites: int
    v: float = 1.0
    boundary: Literal["periodic", "absorbing"] = "periodic"

    def __post_init__(self):
        if not self.delta_t > 0:
            raise ValueError(f"delta_t must be positive, got {self.delta_t}")
        if self.num_sites < 2:
            raise ValueError(f"num_sites must be >= 2, got {self.num_sites}")
        if not self.v > 0:
            raise ValueError(f"v must be positive, got {self.v}")
        if self.boundary not in ("periodic", "absorbing"):
            raise ValueError(f"boundary must be 'periodic' or 'absorbing', got {self.boundary!r}")

    @property
    def delta_z(self) -> float:
        return self.v * self.delta_t

    @property
    def periodic(self) -> bool:
        return self.boundary == "periodic"

    def positions(self) -> np.ndarray:
        return np.arange(self.num_sites) * self.delta_z


@dataclass(frozen=True)
class TransitionRates:
    """Reversal rates toward larger (``zeta_plus``) and smaller z."""

    zeta_plus: float
    zeta_minus: float

    def __post_init__(self):
        if self.zeta_plus < 0 or self.zeta_minus < 0:
            raise ValueError(f"rates must be non-negative, got {self.zeta_plus}, {self.zeta_minus}")

    @classmethod
    def symmetric(cls, a: float) -> "TransitionRates":
        return cls(a, a)

    @property
    def total(self) -> float:
        return self.zeta_plus + self.zeta_minus

    @property
    def signed_mass(self) -> float:
        # zeta_pm - zeta_mp = +-m; the sign is kept for the mode equations
        return self.zeta_plus - self.zeta_minus

    @property
    def omega(self) -> float:
        return abs(self.signed_mass)

    @property
    def mass(self) -> float:
        return self.omega

    def check(self, spec: LatticeSpec) -> None:
        if self.total * spec.delta_t >= 1:
            raise ValueError(
                f"(zeta_plus + zeta_minus) * delta_t = {self.total * spec.delta_t} must be < 1"
            )


@dataclass(frozen=True)
class Weight:
    """Reversal weight for the simple master equation.

    ``real`` uses ``a*dt`` from the rates; ``imaginary`` replaces it by
    ``1j*eps``. With ``feynman=True`` the keep weight ``1 - a*dt`` is
    replaced by 1.
    """

    mode: Literal["real", "imaginary"] = "real"
    eps: float = 0.0
    feynman: bool = False

    @classmethod
    def imaginary(cls, eps: float, feynman: bool = False) -> "Weight":
        return cls("imaginary", eps, feynman)

    def amplitudes(self, rates: TransitionRates | None, spec: LatticeSpec) -> tuple[complex | float, complex | float]:
        """Return ``(keep, reverse)`` step weights."""
        if self.mode == "real":
            if rates is None:
                raise ValueError("real weight mode needs transition rates")
            if rates.zeta_plus != rates.zeta_minus:
                raise ValueError("the simple master equation needs zeta_plus == zeta_minus")
            rates.check(spec)
            rev = rates.zeta_plus * spec.delta_t
        elif self.mode == "imaginary":
            rev = 1j * self.eps
        else:
            raise ValueError(f"unknown weight mode {self.mode!r}")
        keep = 1.0 if self.feynman else 1.0 - rev
        return keep, rev


REAL = Weight()


@dataclass(frozen=True)
class DirectedAmplitudeField:
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if vals.ndim != 2 or vals.shape[1] != 2:
            raise ValueError(f"field values must have shape (num_sites, 2), got {vals.shape}")
        dtype = np.complex128 if np.iscomplexobj(vals) else np.float64
        vals = vals.astype(dtype)
        if not np.all(np.isfinite(vals)):
            raise ValueError("field contains non-finite entries")
        object.__setattr__(self, "values", _readonly(vals))

    @property
    def scalar_kind(self) -> str:
        return "complex" if np.iscomplexobj(self.values) else "real"

    @property
    def num_sites(self) -> int:
        return self.values.shape[0]

    def total(self):
        return self.values.sum()

    @classmethod
    def zeros(cls, num_sites: int, complex_: bool = False) -> "DirectedAmplitudeField":
        return cls(np.zeros((num_sites, 2), dtype=np.complex128 if complex_ else np.float64))

    @classmethod
    def point_source(cls, num_sites: int, site: int, direction=1, complex_: bool = False) -> "DirectedAmplitudeField":
        vals = np.zeros((num_sites, 2), dtype=np.complex128 if complex_ else np.float64)
        vals[site, direction_index(direction)] = 1.0
        return cls(vals)


def _check_sizes(field_: DirectedAmplitudeField, spec: LatticeSpec) -> None:
    if field_.num_sites != spec.num_sites:
        raise ValueError(f"field has {field_.num_sites} sites, spec has {spec.num_sites}")


def step_simple(field_: DirectedAmplitudeField, rates: TransitionRates | None, spec: LatticeSpec,
                weight: Weight = REAL) -> DirectedAmplitudeField:
    """One step of ``P_pm(x, t+dt) = keep*P_pm(x -+ dz, t) + rev*P_mp(x +- dz, t)``."""
    _check_sizes(field_, spec)
    keep, rev = weight.amplitudes(rates, spec)
    if weight.mode == "imaginary" and field_.scalar_kind == "real":
        raise ValueError("imaginary weights need a complex field")
    vals = np.ascontiguousarray(field_.values)
    if field_.scalar_kind == "complex":
        keep, rev = complex(keep), complex(rev)
    return DirectedAmplitudeField(backend.kernels.step_simple(vals, keep, rev, spec.periodic))


def evolve_simple(field_: DirectedAmplitudeField, rates: TransitionRates | None, spec: LatticeSpec,
                  steps: int, weight: Weight = REAL) -> DirectedAmplitudeField:
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    for _ in range(steps):
        field_ = step_simple(field_, rates, spec, weight)
    return field_


@dataclass(frozen=True)
class PathQuery:
    """Paths of ``n`` steps from ``start_dir`` ending ``displacement`` sites away in ``end_dir``.

    Infeasible queries (wrong parity, too far) are allowed and have zero
    amplitude, so sums over every endpoint need no special casing.
    """

    n: int
    start_dir: int
    end_dir: int
    displacement: int
    reversal_count: int | None = None

    def __post_init__(self):
        if self.n < 0:
            raise ValueError(f"n must be >= 0, got {self.n}")
        direction_index(self.start_dir)
        direction_index(self.end_dir)
        if self.reversal_count is not None and self.reversal_count < 0:
            raise ValueError("reversal_count must be >= 0")

    @property
    def feasible(self) -> bool:
        return abs(self.displacement) <= self.n and (self.displacement - self.n) % 2 == 0


@lru_cache(maxsize=64)
def _cached_histogram(n: int, start_plus: bool) -> np.ndarray:
    return _readonly(backend.reversal_histogram(n, start_plus))


def reversal_histogram(n: int, start_dir=1) -> np.ndarray:
    """Path counts ``N[displacement + n, end_dir, reversals]`` by exhaustive enumeration."""
    if not 0 <= n <= MAX_ENUMERATION_STEPS:
        raise ValueError(f"n must be in [0, {MAX_ENUMERATION_STEPS}], got {n}")
    return _cached_histogram(n, direction_index(start_dir) == PLUS)


def path_sum_amplitude(q: PathQuery, rates: TransitionRates | None, spec: LatticeSpec,
                       weight: Weight = REAL):
    """Sum of ``keep**(n-R) * rev**R`` over every path matching the query."""
    if q.n > MAX_ENUMERATION_STEPS:
        raise ValueError(f"n={q.n} exceeds the enumeration bound {MAX_ENUMERATION_STEPS}")
    keep, rev = weight.amplitudes(rates, spec)
    if not q.feasible:
        return 0.0 * keep
    counts = reversal_histogram(q.n, q.start_dir)[q.displacement + q.n, direction_index(q.end_dir)]
    reversals = range(q.n + 1) if q.reversal_count is None else [q.reversal_count]
    total = 0.0 * keep
    for r in reversals:
        if r <= q.n and counts[r]:
            total += int(counts[r]) * keep ** (q.n - r) * rev ** r
    return total


def path_sum_field(n: int, start_site: int, start_dir, rates: TransitionRates | None, spec: LatticeSpec,
                   weight: Weight = REAL) -> DirectedAmplitudeField:
    """Amplitude at every (site, direction) after ``n`` steps from a point source, by path sums."""
    if not spec.periodic and (start_site - n < 0 or start_site + n >= spec.num_sites):
        raise ValueError("absorbing boundary: the light cone must stay inside the lattice")
    sd = 1 if direction_index(start_dir) == PLUS else -1
    out = np.zeros((spec.num_sites, 2), dtype=np.complex128)
    for disp in range(-n, n + 1):
        site = (start_site + disp) % spec.num_sites
        for end_dir in (1, -1):
            out[site, direction_index(end_dir)] += path_sum_amplitude(
                PathQuery(n, sd, end_dir, disp), rates, spec, weight)
    if weight.mode == "real":
        out = out.real
    return DirectedAmplitudeField(out)


# --- coupled forward/backward equations -------------------------------------


@dataclass(frozen=True)
class CausalFieldPair:
    """Forward amplitudes ``Z`` and backward amplitudes ``Zbar`` at one time slice."""

    z_field: DirectedAmplitudeField
    zbar_field: DirectedAmplitudeField
    time_index: int = 0

    def __post_init__(self):
        if self.z_field.num_sites != self.zbar_field.num_sites:
            raise ValueError("Z and Zbar fields must have the same number of sites")

    @property
    def num_sites(self) -> int:
        return self.z_field.num_sites


def _shift(col: np.ndarray, offset: int, periodic: bool) -> np.ndarray:
    """``out[x] = col[x + offset]``; zero outside the lattice when not periodic."""
    if periodic:
        return np.roll(col, -offset)
    out = np.zeros_like(col)
    n = len(col)
    if offset >= 0:
        out[: n - offset] = col[offset:]
    else:
        out[-offset:] = col[: n + offset]
    return out


def _valid(n: int, offset: int, periodic: bool) -> np.ndarray:
    x = np.arange(n) + offset
    if periodic:
        return np.ones(n, dtype=bool)
    return (x >= 0) & (x < n)


def _bar_from_causality(z: np.ndarray, periodic: bool) -> np.ndarray:
    """``Zbar(t + dt)`` implied by ``Z(t)``: ``Zbar_-(y) = Z_+(y - 1)``, ``Zbar_+(y) = Z_-(y + 1)``."""
    bar = np.empty_like(z)
    bar[:, PLUS] = _shift(z[:, MINUS], 1, periodic)
    bar[:, MINUS] = _shift(z[:, PLUS], -1, periodic)
    return bar


def consistent_pair(z_field: DirectedAmplitudeField, rates: TransitionRates, spec: LatticeSpec) -> CausalFieldPair:
    """Initial pair whose ``Zbar`` satisfies the backward equation at the first slice.

    Combining the backward equation with the causality constraint gives a
    same-time 2x2 system for ``(Zbar_+, Zbar_-)`` at each site.
    """
    _check_sizes(z_field, spec)
    rates.check(spec)
    c = 1.0 - rates.total * spec.delta_t
    up, down = rates.zeta_plus * spec.delta_t, rates.zeta_minus * spec.delta_t
    det = up * down - c * c
    if abs(det) < 1e-14:
        raise SingularSystemError("backward-field initialisation is singular for these rates")
    z = z_field.values
    rhs_p = z[:, PLUS] - down * z[:, MINUS]
    rhs_m = z[:, MINUS] - up * z[:, PLUS]
    # [[up, c], [c, down]] @ (bar_p, bar_m) = (rhs_p, rhs_m)
    bar = np.empty_like(z)
    bar[:, PLUS] = (down * rhs_p - c * rhs_m) / det
    bar[:, MINUS] = (up * rhs_m - c * rhs_p) / det
    return CausalFieldPair(z_field, DirectedAmplitudeField(bar), 0)


def step_causal(pair: CausalFieldPair, rates: TransitionRates, spec: LatticeSpec,
                sweep: Literal["forward", "backward"] = "forward", impl=None) -> CausalFieldPair:
    """Advance the coupled equations by one time step.

    The causality constraint turns the future ``Zbar`` term of the forward
    equation into ``Z`` at the new time, which leaves an independent 2x2
    system per site. ``Zbar`` at the new time is then read off the
    constraint.
    """
    if pair.num_sites != spec.num_sites:
        raise ValueError(f"pair has {pair.num_sites} sites, spec has {spec.num_sites}")
    rates.check(spec)
    up, down = rates.zeta_plus * spec.delta_t, rates.zeta_minus * spec.delta_t
    if abs(1.0 - up * down) < 1e-14:
        raise SingularSystemError("zeta_plus * zeta_minus * dt**2 == 1")
    keep = 1.0 - rates.total * spec.delta_t
    z = np.ascontiguousarray(pair.z_field.values)
    impl = impl or backend.kernels
    z_next = impl.step_causal(z, keep, up, down, spec.periodic, sweep == "backward")
    return CausalFieldPair(DirectedAmplitudeField(z_next),
                           DirectedAmplitudeField(_bar_from_causality(z, spec.periodic)),
                           pair.time_index + 1)


def evolve_causal(pair: CausalFieldPair, rates: TransitionRates, spec: LatticeSpec, steps: int) -> list[CausalFieldPair]:
    """Return the history ``[pair, step(pair), ...]`` of length ``steps + 1``."""
    if steps < 0:
        raise ValueError(f"steps must be >= 0, got {steps}")
    history = [pair]
    for _ in range(steps):
        history.append(step_causal(history[-1], rates, spec))
    return history


def causality_residual(pair_t: CausalFieldPair, pair_next: CausalFieldPair, spec: LatticeSpec) -> float:
    """Max of ``|Z_pm(z, t) - Zbar_mp(z +- dz, t + dt)|``."""
    if pair_next.time_index != pair_t.time_index + 1:
        raise ValueError(f"time indices {pair_t.time_index} and {pair_next.time_index} are not adjacent")
    z = pair_t.z_field.values
    bar = pair_next.zbar_field.values
    n = z.shape[0]
    res_p = np.abs(z[:, PLUS] - _shift(bar[:, MINUS], 1, spec.periodic))[_valid(n, 1, spec.periodic)]
    res_m = np.abs(z[:, MINUS] - _shift(bar[:, PLUS], -1, spec.periodic))[_valid(n, -1, spec.periodic)]
    return float(max(res_p.max(initial=0.0), res_m.max(initial=0.0)))


def master_equation_residuals(history: Sequence[CausalFieldPair], rates: TransitionRates,
                              spec: LatticeSpec) -> dict[str, float]:
    """Max residual of each of the three coupled equations over a consecutive history.

    Evaluated directly from the stored fields. The forward equation at slice
    ``k`` needs slices ``k-1..k+1``; the backward equation and the
    constraint need ``k, k+1``. Equations without enough slices report nan.
    """
    for a, b in zip(history, history[1:]):
        if b.time_index != a.time_index + 1:
            raise ValueError("history slices must be consecutive")
    p = spec.periodic
    n = spec.num_sites
    c = 1.0 - rates.total * spec.delta_t
    zp, zm = rates.zeta_plus * spec.delta_t, rates.zeta_minus * spec.delta_t
    out = {"eq1": float("nan"), "eq2": float("nan"), "eq3": float("nan")}

    eq1 = []
    for prev, cur, nxt in zip(history, history[1:], history[2:]):
        z0, z1, bar2 = prev.z_field.values, cur.z_field.values, nxt.zbar_field.values
        # sign +: Z+(z,t) = c Z+(z-1,t-1) + zm Zbar+(z-1,t+1) + zp Z-(z+1,t-1)
        rp = z1[:, PLUS] - (c * _shift(z0[:, PLUS], -1, p) + zm * _shift(bar2[:, PLUS], -1, p)
                            + zp * _shift(z0[:, MINUS], 1, p))
        # sign -: Z-(z,t) = c Z-(z+1,t-1) + zp Zbar-(z+1,t+1) + zm Z+(z-1,t-1)
        rm = z1[:, MINUS] - (c * _shift(z0[:, MINUS], 1, p) + zp * _shift(bar2[:, MINUS], 1, p)
                             + zm * _shift(z0[:, PLUS], -1, p))
        # absorbing edges: the future Zbar term points outside the lattice
        eq1.append(max(np.abs(rp[_valid(n, -1, p)]).max(initial=0.0),
                       np.abs(rm[_valid(n, 1, p)]).max(initial=0.0)))
    if eq1:
        out["eq1"] = float(max(eq1))

    eq2, eq3 = [], []
    for cur, nxt in zip(history, history[1:]):
        z, bar, bar1 = cur.z_field.values, cur.zbar_field.values, nxt.zbar_field.values
        vp, vm = _valid(n, 1, p), _valid(n, -1, p)
        # sign +: Zbar-(z+1,t+1) = c Zbar-(z,t) + zm Z-(z,t) + zp Zbar+(z,t)
        rp = _shift(bar1[:, MINUS], 1, p) - (c * bar[:, MINUS] + zm * z[:, MINUS] + zp * bar[:, PLUS])
        # sign -: Zbar+(z-1,t+1) = c Zbar+(z,t) + zp Z+(z,t) + zm Zbar-(z,t)
        rm = _shift(bar1[:, PLUS], -1, p) - (c * bar[:, PLUS] + zp * z[:, PLUS] + zm * bar[:, MINUS])
        eq2.append(max(np.abs(rp[vp]).max(initial=0.0), np.abs(rm[vm]).max(initial=0.0)))
        eq3.append(causality_residual(cur, nxt, spec))
    if eq2:
        out["eq2"] = float(max(eq2))
        out["eq3"] = float(max(eq3))
    return out
