"""Verification suite behind ``checkerboard verify``.

Each check takes a numpy ``Generator`` plus keyword options and returns a
:class:`CheckResult`. Checks draw from their own child seed, so results do
not depend on which thread runs them or in what order.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import backend
from .gauge import FourPotential, dirac_with_potential, gauge_shifted_plane_wave, position_space_residual
from .lattice import (
    DirectedAmplitudeField,
    LatticeSpec,
    TransitionRates,
    Weight,
    causality_residual,
    consistent_pair,
    evolve_simple,
    master_equation_residuals,
    path_sum_field,
    step_causal,
    step_simple,
)
from .spectral import (
    I2,
    I4,
    MomentumPoint,
    assemble_intermediate,
    bilinearization_residual,
    block_hadamard,
    dirac_form,
    eig4,
    phase_matrix,
    phase_matrix_inverse,
    rotate_momentum_block,
    sigma_conjugate,
    sigma_dot,
    sigma_permutation,
    two_block_det,
    u_theta,
)


@dataclass
class CheckResult:
    name: str
    passed: bool
    max_residual: float
    tolerance: float
    details: dict = field(default_factory=dict)


def random_momenta(rng: np.random.Generator, count: int, scale: float = 5.0) -> np.ndarray:
    """Uniform momenta with axis-aligned, zero and near-zero cases mixed in."""
    p = rng.uniform(-scale, scale, size=(count, 3))
    special = [
        (0, 0, 0), (1e-9, 0, 0), (0, -1e-9, 1e-12), (3, 0, 0), (0, 3, 0), (0, 0, -3),
        (0, 0, 3), (1e-14, 1e-14, 2), (-2, 1e-13, 0), (4, -4, 1e-10),
    ]
    k = min(len(special), count)
    p[:k] = special[:k]
    return p


def check_path_oracle(rng, n: int = 12, **_) -> CheckResult:
    """Iterated simple master equation against exhaustive path sums, both weight modes."""
    worst = {}
    for label, rates, weight, complex_ in (
        ("real", TransitionRates.symmetric(0.7), Weight(), False),
        ("imaginary", None, Weight.imaginary(0.05), True),
    ):
        dev = 0.0
        for steps in range(n + 1):
            spec = LatticeSpec(0.1, 2 * n + 3)
            start = n + 1
            for sd in (1, -1):
                src = DirectedAmplitudeField.point_source(spec.num_sites, start, sd, complex_)
                evolved = evolve_simple(src, rates, spec, steps, weight)
                oracle = path_sum_field(steps, start, sd, rates, spec, weight)
                dev = max(dev, float(np.abs(evolved.values - oracle.values).max()))
        worst[label] = dev
    res = max(worst.values())
    return CheckResult("path-oracle", res <= 1e-12, res, 1e-12, {"n_max": n, "by_mode": worst})


def check_conservation(rng, steps: int = 1000, sites: int = 256, **_) -> CheckResult:
    """Sum of amplitudes under the simple master equation.

    The real (probability) mode is gated on absolute drift. The imaginary
    mode keeps the sum exactly too, but it is not norm-preserving (entries
    grow like ``sqrt(1 + eps^2)`` per step), so its drift is measured
    relative to the size of the entries being summed.
    """
    spec = LatticeSpec(0.1, sites)
    init = rng.uniform(0, 1, size=(sites, 2))
    init /= init.sum()

    f = DirectedAmplitudeField(init)
    s0, absolute = f.total(), 0.0
    rates = TransitionRates.symmetric(0.5)
    for _ in range(steps):
        f = step_simple(f, rates, spec)
        absolute = max(absolute, abs(f.total() - s0))

    g = DirectedAmplitudeField(init.astype(complex))
    weight, relative, peak = Weight.imaginary(0.05), 0.0, 0.0
    for _ in range(steps):
        g = step_simple(g, None, spec, weight)
        scale = float(np.abs(g.values).sum())
        peak = max(peak, scale)
        relative = max(relative, abs(g.total() - s0) / scale)

    absolute, relative = float(absolute), float(relative)
    passed = absolute <= 1e-10 and relative <= 1e-12
    return CheckResult("conservation", passed, absolute, 1e-10, {
        "steps": steps, "sites": sites, "real_drift": absolute,
        "imaginary_relative_drift": relative, "imaginary_peak_l1": peak,
    })


def check_causality(rng, steps: int = 1000, sites: int = 256, zeta_plus: float = 0.3, zeta_minus: float = 0.1,
                    dt: float = 0.01, **_) -> CheckResult:
    spec = LatticeSpec(dt, sites)
    rates = TransitionRates(zeta_plus, zeta_minus)
    z = spec.positions()
    L = sites * spec.delta_z
    bump = np.exp(-((z - L / 2) ** 2) / (2 * (L / 16) ** 2))
    init = DirectedAmplitudeField(np.stack([bump, 0.5 * bump], axis=1) * rng.uniform(0.5, 1.5))
    pair = consistent_pair(init, rates, spec)
    history = [pair]
    worst = 0.0
    for _ in range(steps):
        nxt = step_causal(history[-1], rates, spec)
        worst = max(worst, causality_residual(history[-1], nxt, spec))
        history = history[-2:] + [nxt]
    eqs = master_equation_residuals(history, rates, spec)
    res = max(worst, eqs["eq1"], eqs["eq2"])
    return CheckResult("causality", res <= 1e-12, res, 1e-12,
                       {"steps": steps, "constraint": worst, "final_equations": eqs})


def check_chain(rng, trials: int = 1000, p=(1.0, 2.0, 2.0), m: float = 4.0, **_) -> CheckResult:
    ps = random_momenta(rng, trials)
    ms = rng.uniform(0, 5, size=trials)
    entry_dev = eig_dev = rot_dev = 0.0
    for pv, mv in zip(ps, ms):
        s = sigma_dot(pv)
        expected = np.block([[mv * I2, s], [s, -mv * I2]])
        entry_dev = max(entry_dev, float(np.abs(dirac_form(pv, mv) - expected).max()))
        rot_dev = max(rot_dev, float(np.abs(rotate_momentum_block(pv) - s).max()))
        e = math.sqrt(float(pv @ pv) + mv * mv)
        eig_dev = max(eig_dev, float(np.abs(eig4(dirac_form(pv, mv)) - [e, e, -e, -e]).max()))
    pt = MomentumPoint.along_z(3.0, 5.0, 4.0)
    interleaved = np.array([[3, 0, -4, 0], [0, -3, 0, -4], [-4, 0, -3, 0], [0, -4, 0, 3]])
    conj_dev = float(np.abs(sigma_conjugate(assemble_intermediate(pt)) - interleaved).max())
    eig_point = [float(x) for x in eig4(dirac_form(p, m))]
    passed = entry_dev <= 1e-13 and rot_dev <= 1e-13 and eig_dev <= 1e-10 and conj_dev == 0.0
    return CheckResult("chain", passed, max(entry_dev, rot_dev, eig_dev, conj_dev), 1e-13, {
        "trials": trials, "entrywise": entry_dev, "rotation": rot_dev, "eigenvalues": eig_dev,
        "sigma_conjugation": conj_dev, "point": {"p": [float(c) for c in p], "m": float(m), "eigenvalues": eig_point},
    })


def check_involutions(rng, trials: int = 200, **_) -> CheckResult:
    s = sigma_permutation()
    r = block_hadamard()
    dev = {"sigma": float(np.abs(s @ s - I4).max()), "block_hadamard": float(np.abs(r @ r.T - I4).max())}
    dev["u_theta"] = max(float(np.abs(u_theta(th) @ u_theta(th) - I2).max())
                         for th in rng.uniform(-2 * math.pi, 2 * math.pi, trials))
    dev["phase"] = max(float(np.abs(phase_matrix(ph) @ phase_matrix_inverse(ph) - I2).max())
                       for ph in rng.uniform(-2 * math.pi, 2 * math.pi, trials))
    res = max(dev.values())
    return CheckResult("involutions", res <= 1e-13, res, 1e-13, dev)


def check_dispersion(rng, trials: int = 1000, **_) -> CheckResult:
    on = 0.0
    off = math.inf
    for pv, mv, branch in zip(random_momenta(rng, trials), rng.uniform(0.1, 5, trials), rng.choice([-1, 1], trials)):
        pt = MomentumPoint.on_shell(pv, mv, int(branch))
        on = max(on, abs(two_block_det(pt)))
        for delta in (1e-3, -1e-3):
            off = min(off, abs(two_block_det(pt, pt.E + delta)))
    passed = on <= 1e-12 and off > 1e-4
    return CheckResult("dispersion", passed, float(on), 1e-12, {"trials": trials, "min_off_shell_det": float(off)})


def check_bilinearization(rng, trials: int = 1000, **_) -> CheckResult:
    res = max(bilinearization_residual(pv) for pv in random_momenta(rng, trials))
    return CheckResult("bilinearization", res <= 1e-12, res, 1e-12, {"trials": trials})


def check_gauge(rng, trials: int = 100, grid: int = 128, **_) -> CheckResult:
    spec_dev = 0.0
    for _ in range(trials):
        pv = rng.uniform(-3, 3, 3)
        m = rng.uniform(0, 3)
        pot = FourPotential(rng.uniform(-2, 2), tuple(rng.uniform(-2, 2, 3)), rng.uniform(-1.5, 1.5))
        h, _ = dirac_with_potential(MomentumPoint(pv, 0.0, m), pot)
        kin = pv - pot.charge * np.array(pot.a_vec)
        e = math.sqrt(float(kin @ kin) + m * m)
        shift = pot.charge * pot.a0
        spec_dev = max(spec_dev, float(np.abs(eig4(h) + shift - [e + shift, e + shift, shift - e, shift - e]).max()))
    # plane waves on a periodic box of length 2 pi carry integer p_z
    pos_dev = 0.0
    dz = 2 * math.pi / grid
    for _ in range(5):
        pot = FourPotential(rng.uniform(-1, 1), tuple(rng.uniform(-1, 1, 3)), 1.0)
        p = (rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), float(rng.integers(-3, 4)))
        m = rng.uniform(0.5, 2)
        psi = gauge_shifted_plane_wave(p, m, pot, grid, dz, grid, 2e-4, branch=int(rng.choice([-1, 1])))
        pos_dev = max(pos_dev, position_space_residual(psi, pot, m))
    passed = spec_dev <= 1e-10 and pos_dev <= 1e-10
    return CheckResult("gauge", passed, max(spec_dev, pos_dev), 1e-10,
                       {"trials": trials, "spectrum": spec_dev, "position_space": pos_dev, "grid": [grid, grid]})


CHECKS = {
    "path-oracle": check_path_oracle,
    "conservation": check_conservation,
    "causality": check_causality,
    "chain": check_chain,
    "involutions": check_involutions,
    "dispersion": check_dispersion,
    "bilinearization": check_bilinearization,
    "gauge": check_gauge,
}


def run_checks(names=None, seed: int = 0, threads: int | None = None, **options) -> dict:
    """Run the named checks (all by default) and return a JSON-ready report."""
    names = list(CHECKS) if not names else list(names)
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {', '.join(unknown)}")
    # child seeds are tied to the check's position in CHECKS, not to the selection
    children = dict(zip(CHECKS, np.random.SeedSequence(seed).spawn(len(CHECKS))))

    def run(name):
        return CHECKS[name](np.random.default_rng(children[name]), **options)

    workers = threads or backend.thread_count()
    with ThreadPoolExecutor(max_workers=max(1, min(workers, len(names)))) as pool:
        results = list(pool.map(run, names))
    return {
        "seed": seed,
        "passed": all(r.passed for r in results),
        "checks": [asdict(r) for r in results],
    }
