import math

import numpy as np
import pytest

from checkerboard.continuum import (
    ChiralField,
    ResidualReport,
    advection_residual,
    chiral_field,
    convergence_order,
    difference_field,
    free_streaming_history,
    mode_vector,
    transport_residual,
    wavepacket_history,
    zzb_pde_residual,
)
from checkerboard.lattice import (
    CausalFieldPair,
    DirectedAmplitudeField,
    LatticeSpec,
    TransitionRates,
    consistent_pair,
    evolve_causal,
)

LADDER = (0.1, 0.05, 0.025, 0.0125)


def random_pair(n, seed=0, t_index=0):
    rng = np.random.default_rng(seed)
    return CausalFieldPair(DirectedAmplitudeField(rng.normal(size=(n, 2))),
                           DirectedAmplitudeField(rng.normal(size=(n, 2))), t_index)


def test_equal_fields_give_zero_chiral():
    z = DirectedAmplitudeField(np.random.default_rng(1).normal(size=(8, 2)))
    swapped = DirectedAmplitudeField(z.values[:, ::-1])
    a = chiral_field(CausalFieldPair(z, swapped), TransitionRates(0.4, 0.2), 0.7)
    assert np.all(a.values == 0)


def test_integrating_factor():
    pair = random_pair(8)
    d = difference_field(pair)
    np.testing.assert_array_equal(chiral_field(pair, TransitionRates(0.3, 0.9), 0.0).values, d)
    a = chiral_field(pair, TransitionRates(1.2, 0.8), 0.5)
    np.testing.assert_allclose(a.values, 2.718281828459045 * d, rtol=1e-15)
    np.testing.assert_allclose(a.unweighted(), d, rtol=1e-13)


def test_difference_uses_opposite_label():
    z = DirectedAmplitudeField(np.array([[1.0, 2.0]]))
    bar = DirectedAmplitudeField(np.array([[10.0, 20.0]]))
    np.testing.assert_array_equal(difference_field(CausalFieldPair(z, bar)), [[1 - 20, 2 - 10]])


def test_zzb_ode_reduction_hand_defect():
    # constant-in-z data with Zbar = 0: the PDE reduces to the ODE dD/dt + (z+ + z-) D - (+-m) D_other = 0
    spec = LatticeSpec(0.1, 6)
    rates = TransitionRates(0.5, 0.2)
    values = [(1.0, 0.5), (0.9, 0.6), (0.85, 0.8)]
    history = [CausalFieldPair(DirectedAmplitudeField(np.tile(v, (6, 1))), DirectedAmplitudeField.zeros(6), k)
               for k, v in enumerate(values)]
    dt_p = (0.85 - 1.0) / 0.2
    dt_m = (0.8 - 0.5) / 0.2
    want_p = dt_p + 0.7 * 0.9 - 0.3 * 0.6
    want_m = dt_m + 0.7 * 0.6 + 0.3 * 0.9
    _, res = zzb_pde_residual(history, spec, rates)
    assert res == pytest.approx(max(abs(want_p), abs(want_m)), rel=1e-13)


def test_zero_history_residuals():
    spec = LatticeSpec(0.1, 10)
    rates = TransitionRates(0.3, 0.1)
    zero = DirectedAmplitudeField.zeros(10)
    assert zzb_pde_residual([CausalFieldPair(zero, zero, k) for k in range(3)], spec, rates) == (0.1, 0.0)
    chi = [ChiralField(np.zeros((10, 2)), 0.1 * k, rates) for k in range(3)]
    assert transport_residual(chi, spec, rates) == (0.1, 0.0)


def test_residual_input_errors():
    spec = LatticeSpec(0.1, 10)
    rates = TransitionRates(0.3, 0.1)
    with pytest.raises(ValueError):
        zzb_pde_residual([random_pair(10, t_index=k) for k in range(2)], spec, rates)
    with pytest.raises(ValueError):
        zzb_pde_residual([random_pair(10, t_index=k) for k in (0, 1, 3)], spec, rates)
    with pytest.raises(ValueError):
        transport_residual([ChiralField(np.zeros((10, 2)), t, rates) for t in (0.0, 0.1, 0.3)], spec, rates)


def test_convergence_order_examples():
    assert convergence_order([(0.1, 1e-2), (0.05, 2.5e-3), (0.025, 6.25e-4)]) == pytest.approx(2.0, abs=1e-12)
    assert convergence_order([(0.1, 3.0), (0.05, 3.0), (0.025, 3.0)]) == pytest.approx(0.0, abs=1e-12)
    assert math.isinf(convergence_order([(0.1, 0.0), (0.05, 0.0), (0.025, 0.0)]))
    report = ResidualReport([(0.1, 0.0), (0.05, 0.0), (0.025, 0.0)])
    assert report.exact and report.to_dict()["order"] == "exact"
    with pytest.raises(ValueError):
        convergence_order([(0.1, 1.0), (0.05, 0.5)])
    with pytest.raises(ValueError):
        ResidualReport([(0.05, 1.0), (0.1, 0.5), (0.2, 0.1)])


def test_floor_marks_rounding_level_as_exact():
    entries = [(0.1, 2e-14), (0.05, 4e-14), (0.025, 8e-14)]
    assert convergence_order(entries) == pytest.approx(-1.0)
    assert math.isinf(convergence_order(entries, floor=1e-10))


def test_mode_vector_solves_mode_equation():
    rates = TransitionRates(0.9, 0.2)
    for p in (-2.0, 0.0, 1.3):
        for branch in (1, -1):
            e, a = mode_vector(p, rates, branch=branch)
            assert e == pytest.approx(branch * math.hypot(p, 0.7))
            h = np.array([[p, -0.7j], [0.7j, -p]])
            np.testing.assert_allclose(h @ a, e * a, atol=1e-14)


def test_massless_transport_equals_advection():
    spec = LatticeSpec(0.05, 512)
    rates = TransitionRates(0.4, 0.4)
    hist = free_streaming_history(spec, rates, 0.5)
    assert transport_residual(hist, spec, rates) == advection_residual(hist, spec)


def test_free_streaming_exact_on_light_cone_stencil():
    # with dz = v dt the centred stencils cancel exactly on f(z -+ vt)
    for dt in LADDER:
        spec = LatticeSpec(dt, int(round(51.2 / dt)))
        _, res = transport_residual(free_streaming_history(spec, TransitionRates(0, 0), 1.0), spec, TransitionRates(0, 0))
        assert res < 1e-12


def test_massive_wavepacket_transport_order():
    rates = TransitionRates(0.8, 0.3)
    entries = []
    for dt in LADDER:
        spec = LatticeSpec(dt, int(round(51.2 / dt)))
        entries.append(transport_residual(wavepacket_history(spec, rates, 0.5), spec, rates))
    assert convergence_order(entries) >= 1.8


def test_lattice_difference_field_residual_tracks_field_size():
    # on lattice data D = Z - Zbar is itself O(dt), so the absolute residual falls at first order
    # while the residual relative to max|D| stays O(1)
    rates = TransitionRates(0.3, 0.1)
    entries, relative = [], []
    for dt in LADDER:
        spec = LatticeSpec(dt, int(round(25.6 / dt)))
        z = spec.positions()
        bump = np.exp(-((z - 12.8) ** 2) / 8.0)
        pair = consistent_pair(DirectedAmplitudeField(np.stack([bump, 0.5 * bump], axis=1)), rates, spec)
        history = evolve_causal(pair, rates, spec, int(round(1.0 / dt)) + 2)[-3:]
        entries.append(zzb_pde_residual(history, spec, rates))
        relative.append(entries[-1][1] / np.abs(difference_field(history[1])).max())
    assert convergence_order(entries) >= 0.95
    assert min(relative) > 0.5
