"""Shared fixtures: the canonical instance and its heavy artefacts.

The canonical instance is x_n = 1 - 2^-n, y_n = 1 - 3^-n, depth 8,
Y = [0, 1].  Everything expensive (converged interpolants, attractor clouds)
is session-scoped so the acceptance tests and unit tests share one build.
"""

import time

import numpy as np
import pytest

import countable_fif as cf


@pytest.fixture(scope="session")
def canonical_sys():
    xs = cf.SequenceSpec.geometric(0.5, -1.0, 1.0)
    ys = cf.SequenceSpec.geometric(1.0 / 3.0, -1.0, 1.0)
    return cf.build_system(xs, ys, 8, (0.0, 1.0))


@pytest.fixture(scope="session")
def ms_a(canonical_sys):
    return cf.build_map_system(canonical_sys, family="A")


@pytest.fixture(scope="session")
def ms_b(canonical_sys):
    return cf.build_map_system(canonical_sys, family="B")


@pytest.fixture(scope="session")
def const_sys():
    xs = cf.SequenceSpec.geometric(0.5, -1.0, 1.0)
    ys = cf.SequenceSpec.constant(0.0)
    return cf.build_system(xs, ys, 8, (0.0, 1.0))


@pytest.fixture(scope="session")
def ms_const(const_sys):
    return cf.build_map_system(const_sys, family="A")


def _timed_picard(ms, **kw):
    t0 = time.perf_counter()
    f, rep = cf.picard_iterate(ms, **kw)
    return f, rep, time.perf_counter() - t0


@pytest.fixture(scope="session")
def solved_a(ms_a):
    """(interpolant, report, seconds) for family A at grid 4096, tol 2e-11."""
    return _timed_picard(ms_a, seed="chord", grid=4096, tol=2e-11)


@pytest.fixture(scope="session")
def solved_b(ms_b):
    return _timed_picard(ms_b, seed="chord", grid=4096, tol=2e-11)


@pytest.fixture(scope="session")
def cloud_a(ms_a):
    cfg = cf.IterationConfig(initial_set="nodes", tol=5e-4, size_cap=50_000,
                             max_iterations=400)
    return cf.iterate_attractor(ms_a, cfg)


@pytest.fixture(scope="session")
def cloud_b(ms_b):
    cfg = cf.IterationConfig(initial_set="nodes", tol=5e-4, size_cap=50_000,
                             max_iterations=400)
    return cf.iterate_attractor(ms_b, cfg)
