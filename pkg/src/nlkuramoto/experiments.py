"""Scripted studies: truncation and dissipation sweeps, relaxation-rate
verification, grid refinement, and the run-level invariant suite.

Sweeps share one grid, one fixed step size (chosen for the stiffest rung so
every rung is stable) and one output stride, so trajectories can be compared
at identical times.  The successive differences Delta_j are the computable
stand-in for the compactness limits the analysis provides: the sweeps certify
a decreasing Cauchy trend, never a convergence order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .config import SimConfig
from .diagnostics import (BoundCheck, energy_identity_residual, fit_decay_rate, min_sinc,
                          poincare_sharp_discrete, truncation_functionals,
                          uniform_bound_report)
from .errors import BlowUpError, ConfigurationError
from .grid import build_grid, poincare_domain_constant
from .integrate import Trajectory, select_dt
from .kernel import TRUNCATED, assemble_kernel_matrix
from .run import build_operators, simulate

RELAXATION_TOL = 1e-2  # slack on the pointwise exponential bound
DIAMETER_SLOPE_TOL = 1e-8  # allowed diameter growth per unit time
MEAN_DRIFT_TOL = 1e-10
TRUNCATION_TOL = 1e-16
CONTRACTION_STEP_TOL = 1e-10  # per-step slack for the kappa = 0 semigroup checks


@dataclass(frozen=True)
class RungResult:
    value: float
    config: SimConfig
    config_hash: str
    records: list
    final_values: np.ndarray
    bound_checks: list[BoundCheck]
    n_steps: int


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    ladder: tuple[float, ...]
    rungs: list[RungResult]
    differences: list[float]
    decreasing: bool
    bounds_ok: bool
    dt: float
    stride: int

    def report(self) -> dict:
        return {
            "parameter": self.parameter,
            "ladder": list(self.ladder),
            "dt": self.dt,
            "stride": self.stride,
            "successive_differences": self.differences,
            "decreasing": self.decreasing,
            "bounds_ok": self.bounds_ok,
            "rungs": [
                {
                    "value": rung.value,
                    "config_hash": rung.config_hash,
                    "n_steps": rung.n_steps,
                    "final_diameter": rung.records[-1].diameter,
                    "final_dist_sq": rung.records[-1].dist_sq,
                    "bounds": [
                        {"name": c.name, "lhs": c.lhs, "rhs": c.rhs,
                         "satisfied": c.satisfied, "reason": c.reason}
                        for c in rung.bound_checks
                    ],
                }
                for rung in self.rungs
            ],
        }


def _check_ladder(ladder, name) -> tuple[float, ...]:
    ladder = tuple(float(v) for v in ladder)
    problems = []
    if len(ladder) < 2:
        problems.append(f"{name}: need at least two rungs, got {len(ladder)}")
    if any(v <= 0.0 for v in ladder):
        problems.append(f"{name}: rung values must be positive")
    if any(b >= a for a, b in zip(ladder, ladder[1:])):
        problems.append(f"{name}: ladder must be strictly decreasing")
    if problems:
        raise ConfigurationError(problems)
    return ladder


def _run_rungs(configs: list[SimConfig], ladder, workers: int) -> list[Trajectory]:
    def one(j):
        try:
            return simulate(configs[j])
        except BlowUpError as exc:
            raise BlowUpError(
                f"rung {j} (value {ladder[j]}) blew up: {exc}",
                trajectory=exc.trajectory, t=exc.t) from exc

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, range(len(configs))))
    return [one(j) for j in range(len(configs))]


def _successive_differences(trajs: list[Trajectory]) -> list[float]:
    w = trajs[0].grid.weight
    diffs = []
    for a, b in zip(trajs, trajs[1:]):
        if a.times != b.times:
            raise ConfigurationError(["sweep rungs recorded at different times"])
        worst = 0.0
        for sa, sb in zip(a.snapshots, b.snapshots):
            d = sa.values - sb.values
            worst = max(worst, math.sqrt(w * float(d @ d)))
        diffs.append(worst)
    return diffs


def _rung_results(trajs, configs, ladder) -> list[RungResult]:
    out = []
    for traj, cfg, value in zip(trajs, configs, ladder):
        _, coupling, dissipation, _ = build_operators(cfg)
        checks = uniform_bound_report(traj, coupling, dissipation,
                                      cfg.physics.kappa, cfg.physics.delta)
        out.append(RungResult(
            value=value, config=cfg, config_hash=cfg.content_hash(),
            records=traj.records, final_values=traj.snapshots[-1].values.copy(),
            bound_checks=checks, n_steps=traj.n_steps))
    return out


def _finish_sweep(parameter, ladder, trajs, configs, stride) -> SweepResult:
    diffs = _successive_differences(trajs)
    rungs = _rung_results(trajs, configs, ladder)
    decreasing = all(b < a for a, b in zip(diffs, diffs[1:]))
    bounds_ok = all(c.satisfied is not False
                    for rung in rungs for c in rung.bound_checks)
    return SweepResult(parameter=parameter, ladder=ladder, rungs=rungs,
                       differences=diffs, decreasing=decreasing, bounds_ok=bounds_ok,
                       dt=trajs[0].dt, stride=stride)


def sweep_epsilon(base: SimConfig, ladder, workers: int = 1) -> SweepResult:
    """Shrink the kernel truncation along a decreasing ladder at fixed delta.

    The step size is chosen for the smallest truncation (the stiffest rung)
    and shared; each rung's report includes the dissipation-seminorm uniform
    bound.
    """
    ladder = _check_ladder(ladder, "epsilon ladder")
    problems = []
    if base.physics.model != "regularized":
        problems.append("sweep-eps: base config must use the regularized model")
    if base.physics.delta <= 0.0:
        problems.append("sweep-eps: needs a fixed positive delta")
    if problems:
        raise ConfigurationError(problems)

    grid, _, dissipation, _ = build_operators(replace(
        base, physics=replace(base.physics, epsilon=ladder[0])))
    dt = math.inf
    for eps in ladder:
        coupling = assemble_kernel_matrix(grid, TRUNCATED, base.physics.s, eps)
        dt = min(dt, select_dt(coupling, dissipation, base.physics.kappa,
                               base.physics.delta, base.integrator.safety,
                               free_drift_horizon=base.integrator.horizon))
    configs = [
        replace(base,
                physics=replace(base.physics, epsilon=eps),
                integrator=replace(base.integrator, dt=dt))
        for eps in ladder
    ]
    trajs = _run_rungs(configs, ladder, workers)
    return _finish_sweep("epsilon", ladder, trajs, configs, base.integrator.stride)


def sweep_delta(base: SimConfig, ladder, workers: int = 1) -> SweepResult:
    """Shrink the dissipation strength with the singular coupling in force.

    The initial diameter must be below pi: that hypothesis backs the
    sinc-seminorm uniform bound checked on every rung.
    """
    ladder = _check_ladder(ladder, "delta ladder")
    problems = []
    if base.physics.model != "singular":
        problems.append("sweep-delta: base config must use the singular model "
                        "(the sine coupling keeps the untruncated kernel)")
    if base.initial.effective_diameter >= math.pi:
        problems.append("sweep-delta: initial diameter must be below pi")
    if base.physics.kappa <= 0.0:
        problems.append("sweep-delta: needs positive coupling strength")
    if problems:
        raise ConfigurationError(problems)

    probe = replace(base, physics=replace(base.physics, delta=ladder[0]))
    _, coupling, dissipation, _ = build_operators(probe)
    dt = min(select_dt(coupling, dissipation, base.physics.kappa, d,
                       base.integrator.safety,
                       free_drift_horizon=base.integrator.horizon)
             for d in ladder)
    configs = [
        replace(base,
                physics=replace(base.physics, delta=d),
                integrator=replace(base.integrator, dt=dt))
        for d in ladder
    ]
    trajs = _run_rungs(configs, ladder, workers)
    return _finish_sweep("delta", ladder, trajs, configs, base.integrator.stride)


@dataclass(frozen=True)
class RelaxationReport:
    """Outcome of a relaxation run against its certified exponential rate."""

    m: float
    c_m: float
    lambda_star: float
    c_p_domain: float
    certified_rate: float
    gamma_hat: float
    fit_residual: float
    pointwise_ok: bool
    pointwise_margin: float
    rate_ok: bool
    satisfied: bool
    table: list[dict]

    def report(self) -> dict:
        return {
            "initial_diameter": self.m,
            "c_m": self.c_m,
            "lambda_star": self.lambda_star,
            "c_p_domain": self.c_p_domain,
            "certified_rate": self.certified_rate,
            "gamma_hat": self.gamma_hat,
            "fit_residual": self.fit_residual,
            "pointwise_ok": self.pointwise_ok,
            "pointwise_margin": self.pointwise_margin,
            "rate_ok": self.rate_ok,
            "satisfied": self.satisfied,
            "table": self.table,
        }


def relaxation_experiment(cfg: SimConfig) -> tuple[RelaxationReport, Trajectory]:
    """Run the undamped singular dynamics and verify exponential relaxation.

    Certifies the rate kappa * min_sinc(M) * lambda_star built from the sharp
    discrete constant; the loose constructive domain constant is reported
    alongside.  Hypothesis violations fail before any computation.
    """
    problems = []
    if cfg.physics.model != "singular":
        problems.append("relax: needs the singular model")
    if cfg.physics.delta != 0.0:
        problems.append("relax: needs delta = 0 (undamped dynamics)")
    if cfg.physics.kappa <= 0.0:
        problems.append("relax: needs positive coupling strength")
    if cfg.physics.nu_file is not None:
        problems.append("relax: needs a constant natural frequency")
    m = cfg.initial.effective_diameter
    if m >= math.pi:
        problems.append(f"relax: initial diameter must be below pi, got {m}")
    if problems:
        raise ConfigurationError(problems)

    _, _, dissipation, _ = build_operators(cfg)
    lam_star = poincare_sharp_discrete(dissipation)
    c_p_dom = poincare_domain_constant(dissipation.grid, cfg.physics.s)
    traj = simulate(cfg)

    m0 = traj.records[0].diameter
    c_m = min_sinc(m0)
    rate = cfg.physics.kappa * c_m * lam_star
    dist0 = traj.records[0].dist_sq

    table = []
    pointwise_ok = True
    margin = math.inf
    for rec in traj.records:
        bound = dist0 * math.exp(-rate * rec.t) * (1.0 + RELAXATION_TOL)
        table.append({"t": rec.t, "dist_sq": rec.dist_sq, "bound": bound})
        if rec.dist_sq > bound:
            pointwise_ok = False
        if rec.dist_sq > 0.0:
            margin = min(margin, bound / rec.dist_sq)

    if dist0 <= 1e-28:
        # Already at the mean: nothing decays, the bound holds trivially.
        gamma_hat, residual, rate_ok = 0.0, 0.0, True
    else:
        gamma_hat, residual = fit_decay_rate([r.t for r in traj.records],
                                             [r.dist_sq for r in traj.records])
        rate_ok = gamma_hat >= rate * (1.0 - 1e-9)

    report = RelaxationReport(
        m=m0, c_m=c_m, lambda_star=lam_star, c_p_domain=c_p_dom,
        certified_rate=rate, gamma_hat=gamma_hat, fit_residual=residual,
        pointwise_ok=pointwise_ok,
        pointwise_margin=margin if margin is not math.inf else 1.0,
        rate_ok=rate_ok, satisfied=pointwise_ok and rate_ok, table=table,
    )
    return report, traj


def restrict_to_coarse(values: np.ndarray, dim: int, n_fine: int, n_coarse: int) -> np.ndarray:
    """Piecewise-constant restriction: average fine cells inside each coarse cell."""
    if n_fine % n_coarse:
        raise ConfigurationError([f"refinement ladder: {n_fine} is not a multiple of {n_coarse}"])
    f = n_fine // n_coarse
    if dim == 1:
        return values.reshape(n_coarse, f).mean(axis=1)
    return values.reshape(n_coarse, f, n_coarse, f).mean(axis=(1, 3)).ravel()


@dataclass(frozen=True)
class RefinementReport:
    rows: list[dict]
    coarse_diffs: list[float]
    dt_halving: dict

    def report(self) -> dict:
        return {"rows": self.rows, "coarse_diffs": self.coarse_diffs,
                "dt_halving": self.dt_halving}


def refinement_study(base: SimConfig, n_ladder) -> RefinementReport:
    """Refine the grid at fixed physics; separate h-error from the parameter limits.

    Reports the energy-identity residual per rung, final-state differences
    between consecutive rungs restricted to the coarsest grid, and one
    step-halving row on the coarsest rung (fourth-order stepping with a
    second-order dissipation quadrature: the residual must drop at least 4x).
    """
    n_ladder = tuple(int(n) for n in n_ladder)
    if any(b <= a for a, b in zip(n_ladder, n_ladder[1:])):
        raise ConfigurationError(["refinement ladder must be strictly increasing"])
    for n in n_ladder[1:]:
        if n % n_ladder[0]:
            raise ConfigurationError(
                [f"refinement ladder: {n} is not a multiple of the coarsest {n_ladder[0]}"])

    rows = []
    finals = []
    for n in n_ladder:
        cfg = replace(base, grid=replace(base.grid, nodes=n))
        traj = simulate(cfg)
        e0 = traj.records[0].e_pot + traj.records[0].e_kin
        residual = energy_identity_residual(traj)
        rows.append({"n": n, "dt": traj.dt, "n_steps": traj.n_steps,
                     "energy_residual": residual,
                     "energy_residual_rel": residual / e0 if e0 > 0 else 0.0})
        finals.append(traj.snapshots[-1].values.copy())

    dim = base.grid.dimension
    n0 = n_ladder[0]
    w_coarse = build_grid(dim, n0, base.grid.extents).weight
    diffs = []
    for (na, fa), (nb, fb) in zip(zip(n_ladder, finals), zip(n_ladder[1:], finals[1:])):
        ra = restrict_to_coarse(fa, dim, na, n0)
        rb = restrict_to_coarse(fb, dim, nb, n0)
        d = ra - rb
        diffs.append(math.sqrt(w_coarse * float(d @ d)))

    cfg0 = replace(base, grid=replace(base.grid, nodes=n0))
    traj_a = simulate(cfg0)
    cfg_half = replace(cfg0, integrator=replace(cfg0.integrator, dt=traj_a.dt / 2.0))
    traj_b = simulate(cfg_half)
    res_a = energy_identity_residual(traj_a)
    res_b = energy_identity_residual(traj_b)
    dt_halving = {"n": n0, "dt": traj_a.dt, "residual": res_a,
                  "residual_half": res_b,
                  "ratio": res_a / res_b if res_b > 0 else math.inf}
    return RefinementReport(rows=rows, coarse_diffs=diffs, dt_halving=dt_halving)


@dataclass(frozen=True)
class CheckOutcome:
    name: str
    passed: bool | None
    detail: str = ""


def _pairwise(records):
    return zip(records, records[1:])


def run_invariant_suite(cfg: SimConfig, lambda_star_cap: int = 1024):
    """Simulate a config and check every invariant that applies to it.

    Returns (trajectory, checks, ok).  Checks that do not apply are reported
    as skipped with the reason; ok means no applicable check failed.
    """
    cfg.validate()
    traj = simulate(cfg)
    grid, coupling, dissipation, _ = build_operators(cfg)
    kappa, delta = cfg.physics.kappa, cfg.physics.delta
    model = cfg.physics.model
    continuum = model != "lattice"
    m0 = traj.records[0].diameter
    checks = []

    if traj.gauge_reduced:
        worst = max(abs(r.mean) for r in traj.records)
        checks.append(CheckOutcome("mean-conservation", worst <= MEAN_DRIFT_TOL,
                                   f"max |mean| = {worst:.3e}"))
    else:
        checks.append(CheckOutcome("mean-conservation", None,
                                   "per-node frequencies drift the mean"))

    contracting = traj.gauge_reduced and (m0 < math.pi or kappa == 0.0)
    if contracting:
        ok = traj.records[-1].diameter <= m0 + 1e-12
        worst_slope = 0.0
        for a, b in _pairwise(traj.records):
            growth = b.diameter - a.diameter - DIAMETER_SLOPE_TOL * (b.t - a.t)
            worst_slope = max(worst_slope, growth)
        ok = ok and worst_slope <= 1e-12
        checks.append(CheckOutcome("diameter-monotone", ok,
                                   f"D(0) = {m0:.6g}, D(T) = {traj.records[-1].diameter:.6g}"))

        hi, lo = truncation_functionals(traj)
        checks.append(CheckOutcome("truncation-decay", max(hi, lo) <= TRUNCATION_TOL,
                                   f"overshoot norms {hi:.3e} / {lo:.3e}"))
    else:
        reason = "needs initial diameter below pi (or kappa = 0) and a constant frequency"
        checks.append(CheckOutcome("diameter-monotone", None, reason))
        checks.append(CheckOutcome("truncation-decay", None, reason))

    if continuum:
        e0 = traj.records[0].e_pot + traj.records[0].e_kin
        slack = 1e-9 * (e0 + 1.0)
        ok = all(b.e_pot + b.e_kin <= a.e_pot + a.e_kin + slack
                 for a, b in _pairwise(traj.records))
        checks.append(CheckOutcome("energy-monotone", ok, f"E(0) = {e0:.6g}"))

        rows = uniform_bound_report(traj, coupling, dissipation, kappa, delta)
        bad = [c.name for c in rows if c.satisfied is False]
        checks.append(CheckOutcome("uniform-bounds", not bad,
                                   "all applicable rows hold" if not bad
                                   else f"violated: {', '.join(bad)}"))
    else:
        checks.append(CheckOutcome("energy-monotone", None,
                                   "lattice coupling uses its own normalization"))
        checks.append(CheckOutcome("uniform-bounds", None,
                                   "lattice coupling uses its own normalization"))

    if kappa == 0.0 and continuum:
        steps_between = [max(1, round((b.t - a.t) / traj.dt))
                         for a, b in _pairwise(traj.records)]
        l2 = [math.sqrt(r.dist_sq) for r in traj.records]
        linf = [float(np.abs(s.values).max()) for s in traj.snapshots]
        ok = all(b <= a + CONTRACTION_STEP_TOL * m
                 for (a, b), m in zip(_pairwise(l2), steps_between))
        ok = ok and all(b <= a + CONTRACTION_STEP_TOL * m
                        for (a, b), m in zip(_pairwise(linf), steps_between))
        checks.append(CheckOutcome("semigroup-contraction", ok,
                                   f"L2 {l2[0]:.6g} -> {l2[-1]:.6g}, "
                                   f"Linf {linf[0]:.6g} -> {linf[-1]:.6g}"))
    else:
        checks.append(CheckOutcome("semigroup-contraction", None,
                                   "applies to kappa = 0 continuum runs"))

    relax_applies = (model == "singular" and delta == 0.0 and kappa > 0.0
                     and 0.0 < m0 < math.pi)
    if relax_applies and grid.node_count <= lambda_star_cap:
        lam_star = poincare_sharp_discrete(dissipation)
        rate = kappa * min_sinc(m0) * lam_star
        dist0 = traj.records[0].dist_sq
        ok = all(r.dist_sq <= dist0 * math.exp(-rate * r.t) * (1.0 + RELAXATION_TOL)
                 for r in traj.records)
        checks.append(CheckOutcome("relaxation-pointwise", ok,
                                   f"certified rate {rate:.6g}"))
    elif relax_applies:
        checks.append(CheckOutcome("relaxation-pointwise", None,
                                   f"grid too large for the dense sharp-constant solve "
                                   f"(> {lambda_star_cap} nodes); run the poincare command"))
    else:
        checks.append(CheckOutcome("relaxation-pointwise", None,
                                   "applies to undamped singular runs with 0 < diameter < pi"))

    ok = all(c.passed is not False for c in checks)
    return traj, checks, ok
