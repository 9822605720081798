import numpy as np
import pytest

from nlkuramoto import (BlowUpError, ParameterError, PhaseField, assemble_kernel_matrix,
                        build_grid, gauge_reduce, mean_phase, select_dt, simulate, step)

import oracles
from conftest import make_config


def test_gauge_reduce_constant(grid16):
    reduced, bar = gauge_reduce(PhaseField(np.full(16, 2.5), 0.0, grid16))
    assert bar == pytest.approx(2.5, rel=1e-15)
    assert np.allclose(reduced.values, 0.0, atol=1e-15)


def test_gauge_reduce_mean_zero_is_identity(grid16):
    values = np.sin(2 * np.pi * grid16.coords[:, 0])
    values -= grid16.weight * values.sum() / grid16.measure
    reduced, bar = gauge_reduce(PhaseField(values, 0.0, grid16))
    assert abs(bar) <= 1e-15
    assert np.allclose(reduced.values, values, atol=1e-15)


def test_gauge_reduce_zeroes_mean(grid64):
    rng = np.random.default_rng(0)
    reduced, _ = gauge_reduce(PhaseField(rng.uniform(-3, 3, 64), 0.0, grid64))
    assert abs(mean_phase(reduced.values, grid64)) < 1e-13


def test_select_dt_free_drift(grid16, singular16):
    assert select_dt(None, None, 0.0, 0.0, 0.5, free_drift_horizon=2.0) == 1.0
    assert select_dt(singular16, singular16, 0.0, 0.0, 0.25) == 0.25


def test_select_dt_scales_inversely_with_kappa(singular16):
    dt1 = select_dt(singular16, singular16, 1.0, 0.0, 0.5)
    dt2 = select_dt(singular16, singular16, 2.0, 0.0, 0.5)
    assert dt2 == pytest.approx(dt1 / 2.0, rel=1e-15)


def test_select_dt_matches_oracle_row_sums():
    g = build_grid(1, 64, [(0.0, 1.0)])
    sing = assemble_kernel_matrix(g, "singular", 0.5)
    trunc = assemble_kernel_matrix(g, "truncated", 0.5, 0.1)
    w_sing = oracles.kernel_matrix_loop(g, 0.5)
    w_trunc = oracles.kernel_matrix_loop(g, 0.5, 0.1)
    lam = 2.0 * 1.0 * w_trunc.sum(axis=1).max() + 2.0 * 0.01 * w_sing.sum(axis=1).max()
    assert select_dt(trunc, sing, 1.0, 0.01, 0.5) == pytest.approx(0.5 / lam, rel=1e-13)


def test_select_dt_rejects_bad_safety(singular16):
    for sigma in (0.0, 1.5, -1.0):
        with pytest.raises(ParameterError):
            select_dt(singular16, singular16, 1.0, 0.0, sigma)


def test_step_zero_rhs_is_identity():
    values = np.array([1.0, -2.0, 3.0])
    out = step(values, lambda v: np.zeros_like(v), 0.1, "rk4")
    assert np.array_equal(out, values)


def test_step_rk4_linear_taylor():
    lam, dt = 0.7, 0.3
    out = step(np.array([1.0]), lambda v: -lam * v, dt, "rk4")
    z = -lam * dt
    poly = 1.0 + z + z ** 2 / 2.0 + z ** 3 / 6.0 + z ** 4 / 24.0
    assert out[0] == pytest.approx(poly, rel=1e-15)


def test_step_euler_linear():
    out = step(np.array([2.0]), lambda v: -0.5 * v, 0.1, "euler")
    assert out[0] == pytest.approx(2.0 * (1.0 - 0.05), rel=1e-15)


def test_step_rejects_bad_scheme():
    with pytest.raises(ParameterError):
        step(np.zeros(2), lambda v: v, 0.1, "rk7")
    with pytest.raises(ParameterError):
        step(np.zeros(2), lambda v: v, -0.1, "rk4")


def test_step_detects_blow_up():
    with pytest.raises(BlowUpError):
        step(np.array([1.0]), lambda v: np.full_like(v, np.inf), 0.1, "euler")


def test_rk4_order_via_step_halving(grid16, singular16):
    trunc = assemble_kernel_matrix(grid16, "truncated", 0.5, 0.2)
    rng = np.random.default_rng(12)
    theta = rng.uniform(-0.7, 0.7, 16)

    def rhs(v):
        from nlkuramoto import rhs_regularized
        return rhs_regularized(v, trunc, singular16, kappa=1.0, delta=0.1)

    tau = 0.05
    coarse = step(theta, rhs, tau, "rk4")
    half = step(step(theta, rhs, tau / 2, "rk4"), rhs, tau / 2, "rk4")
    fine = theta.copy()
    for _ in range(64):
        fine = step(fine, rhs, tau / 64, "rk4")
    err_coarse = np.abs(coarse - fine).max()
    err_half = np.abs(half - fine).max()
    # fourth order: two half steps cut the error over the same window ~16x
    assert 10.0 <= err_coarse / err_half <= 24.0


def test_simulate_constant_field_is_equilibrium():
    cfg = make_config(n=16, kind="constant", value=1.2, horizon=0.5, stride=4)
    traj = simulate(cfg)
    assert traj.status == "completed"
    for snap in traj.snapshots:
        assert np.all(snap.values == traj.snapshots[0].values)
    assert traj.records[-1].dissipation_cum == 0.0


def test_simulate_pure_dissipation_l2_contracts():
    cfg = make_config(n=32, model="singular", kappa=0.0, delta=0.3, kind="random",
                      seed=4, diameter=2.0, horizon=0.5)
    traj = simulate(cfg)
    dists = [r.dist_sq for r in traj.records]
    assert all(b <= a + 1e-12 for a, b in zip(dists, dists[1:]))


def test_simulate_trajectory_contract():
    cfg = make_config(n=16, nu=0.7, horizon=0.25, stride=3, diameter=1.0)
    traj = simulate(cfg)
    times = np.array(traj.times)
    assert np.all(np.diff(times) > 0)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(0.25, rel=1e-12)
    # first snapshot is the gauge-reduced initial data; the physical field
    # restores the original profile
    from nlkuramoto import initial_field
    theta0 = initial_field("smooth", traj.grid, diameter=1.0)
    bar = mean_phase(theta0, traj.grid)
    assert np.allclose(traj.snapshots[0].values, theta0 - bar, atol=1e-15)
    assert np.allclose(traj.physical_values(0), theta0, atol=1e-14)
    # gauge bookkeeping: physical field at T includes nu * T
    assert traj.gauge_reduced and traj.nu == 0.7
    drift = traj.physical_values(-1).mean() - traj.physical_values(0).mean()
    assert drift == pytest.approx(0.7 * 0.25, abs=1e-10)


def test_simulate_extrema_contract_pointwise_in_time():
    # along a bounded-diameter flow the running max never rises and the
    # running min never falls (up to time-discretization slack)
    cfg = make_config(n=48, model="regularized", epsilon=0.1, delta=0.1, kind="random",
                      seed=17, diameter=2.8, horizon=1.0, stride=3)
    traj = simulate(cfg)
    tops = [float(s.values.max()) for s in traj.snapshots]
    bottoms = [float(s.values.min()) for s in traj.snapshots]
    for (ta, tb), (a, b) in zip(zip(traj.times, traj.times[1:]), zip(tops, tops[1:])):
        assert b <= a + 1e-9 * (tb - ta)
    for (ta, tb), (a, b) in zip(zip(traj.times, traj.times[1:]), zip(bottoms, bottoms[1:])):
        assert b >= a - 1e-9 * (tb - ta)


def test_simulate_two_dimensional_run():
    cfg = make_config(dim=2, n=8, model="regularized", epsilon=0.15, delta=0.1,
                      kind="two_cluster", diameter=2.0, nu=0.3, horizon=0.4, stride=4,
                      safety=0.1)
    traj = simulate(cfg)
    assert traj.grid.node_count == 64
    assert max(abs(r.mean) for r in traj.records) <= 1e-10
    diameters = [r.diameter for r in traj.records]
    assert all(b <= a + 1e-10 for a, b in zip(diameters, diameters[1:]))
    from nlkuramoto import energy_identity_residual
    e0 = traj.records[0].e_pot + traj.records[0].e_kin
    assert energy_identity_residual(traj) <= 2e-4 * e0


def test_simulate_lattice_with_per_node_frequencies(tmp_path):
    nu = np.linspace(-0.5, 0.5, 16) ** 2
    nu_path = tmp_path / "nu.txt"
    np.savetxt(nu_path, nu)
    cfg = make_config(n=16, model="lattice", nu_file=str(nu_path), kind="smooth",
                      diameter=1.0, horizon=0.2, stride=2)
    traj = simulate(cfg)
    assert not traj.gauge_reduced
    assert np.array_equal(traj.nu, nu)
    # the raw mean drifts at the average frequency
    drift = traj.records[-1].mean - traj.records[0].mean
    expect = float(traj.grid.weight * nu.sum() / traj.grid.measure) * traj.times[-1]
    assert drift == pytest.approx(expect, rel=1e-6)


def test_simulate_lattice_frequency_file_length_checked(tmp_path):
    nu_path = tmp_path / "nu.txt"
    np.savetxt(nu_path, np.zeros(5))
    cfg = make_config(n=16, model="lattice", nu_file=str(nu_path))
    from nlkuramoto import ConfigurationError
    with pytest.raises(ConfigurationError):
        simulate(cfg)


def test_simulate_mean_conserved_in_gauge():
    cfg = make_config(n=64, model="regularized", epsilon=0.1, delta=0.1, nu=1.5,
                      kind="random", seed=8, diameter=2.5, horizon=1.0, stride=7)
    traj = simulate(cfg)
    assert max(abs(r.mean) for r in traj.records) <= 1e-10


def test_simulate_deterministic():
    cfg = make_config(n=32, kind="random", seed=13, diameter=2.0, horizon=0.3)
    a = simulate(cfg)
    b = simulate(cfg)
    assert a.dt == b.dt
    for sa, sb in zip(a.snapshots, b.snapshots):
        assert np.array_equal(sa.values, sb.values)


def test_simulate_matches_independent_euler():
    # gentle instance so the first-order oracle at 10x smaller steps stays
    # within 1e-6 of the fourth-order run
    cfg = make_config(n=8, model="regularized", epsilon=0.3, kappa=0.05, delta=0.02,
                      kind="smooth", diameter=0.2, horizon=0.1, dt=2.5e-3)
    traj = simulate(cfg)
    g = traj.grid
    w_trunc = oracles.kernel_matrix_loop(g, 0.5, 0.3)
    w_sing = oracles.kernel_matrix_loop(g, 0.5)
    theta0 = traj.snapshots[0].values
    n_euler = traj.n_steps * 10
    expect = oracles.euler_reference(theta0, w_trunc, w_sing, 0.05, 0.02,
                                     0.1 / n_euler, n_euler)
    assert np.abs(traj.snapshots[-1].values - expect).max() <= 1e-6


def test_simulate_blow_up_keeps_partial_trajectory():
    # force instability: fixed dt far beyond the dissipation stability limit
    cfg = make_config(n=64, model="singular", kappa=0.0, delta=1.0, kind="random",
                      seed=3, diameter=2.0, horizon=30.0, dt=0.5, stride=1)
    with pytest.raises(BlowUpError) as err:
        simulate(cfg)
    partial = err.value.trajectory
    assert partial is not None and partial.status == "blow-up"
    assert 1 <= len(partial.records) < 61
    assert all(b > a for a, b in zip(partial.times, partial.times[1:]))
    assert err.value.t is not None and 0.0 <= err.value.t < 30.0
