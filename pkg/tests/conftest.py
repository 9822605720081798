from __future__ import annotations

import numpy as np
import pytest

from nlkuramoto import (GridConfig, InitialConfig, IntegratorPolicy, OutputConfig,
                        PhysicsConfig, SimConfig, assemble_kernel_matrix, build_grid)


def make_config(*, dim=1, n=64, extents=((0.0, 1.0),), model="singular", s=0.5,
                kappa=1.0, delta=0.0, epsilon=None, nu=0.0, nu_file=None,
                kind="smooth", diameter=1.0, seed=None, value=0.0,
                allow_large_diameter=False, scheme="rk4", dt=None, safety=0.5,
                horizon=1.0, stride=1, directory="out",
                formats=("csv", "manifest")) -> SimConfig:
    return SimConfig(
        grid=GridConfig(dimension=dim, nodes=n, extents=tuple(tuple(e) for e in extents)),
        physics=PhysicsConfig(model=model, s=s, kappa=kappa, delta=delta,
                              epsilon=epsilon, nu=nu, nu_file=nu_file),
        initial=InitialConfig(kind=kind, diameter=diameter, value=value, seed=seed,
                              allow_large_diameter=allow_large_diameter),
        integrator=IntegratorPolicy(scheme=scheme, dt=dt, safety=safety,
                                    horizon=horizon, stride=stride),
        output=OutputConfig(directory=directory, formats=tuple(formats)),
    )


def rel_close(a, b, rtol, atol=1e-15):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = max(np.abs(a).max(initial=0.0), np.abs(b).max(initial=0.0), atol / rtol)
    return float(np.abs(a - b).max(initial=0.0)) <= rtol * scale


@pytest.fixture(scope="session")
def grid16():
    return build_grid(1, 16, [(0.0, 1.0)])


@pytest.fixture(scope="session")
def grid64():
    return build_grid(1, 64, [(0.0, 1.0)])


@pytest.fixture(scope="session")
def singular16(grid16):
    return assemble_kernel_matrix(grid16, "singular", 0.5)


@pytest.fixture(scope="session")
def singular64(grid64):
    return assemble_kernel_matrix(grid64, "singular", 0.5)
