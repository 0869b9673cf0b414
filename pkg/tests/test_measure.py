import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from assocpoisson.errors import InvalidSpecError, PreconditionError
from assocpoisson.field import FieldSample, FieldSpec, LatticeWindow, sample_field
from assocpoisson.measure import (
    BoxRegion,
    TestFunction,
    integral,
    lattice_support,
    measure_of_box,
    quadrature,
    support_constant,
)
from assocpoisson.montecarlo import map_replicates


def constant_sample(spec, window, value):
    x = np.full(window.shape, value, dtype=np.uint8)
    return FieldSample(window, x, x.copy(), spec, 0)


SPEC10 = FieldSpec.pattern([0], n=10)
TRAP = TestFunction([(0.0, 0.25, 0.75, 1.0)])


def test_rejects_discontinuous_profiles():
    with pytest.raises(InvalidSpecError):
        TestFunction([(0, 0, 1, 1)])
    with pytest.raises(InvalidSpecError):
        TestFunction([(0, 0.5, 0.4, 1)])
    with pytest.raises(InvalidSpecError):
        TestFunction([(0, 0.1, 0.9, 1)], amplitude=-1)


def test_evaluation_and_sup_norm():
    f = TestFunction([(0, 0.5, 0.5, 1.0), (0, 0.25, 0.75, 1)], amplitude=3.0)
    assert f.sup_norm == 3.0
    assert f([0.5, 0.5]) == 3.0
    assert f([0.25, 0.5]) == 1.5
    assert f([1.0, 0.5]) == 0.0
    xs = np.random.default_rng(0).uniform(-0.5, 1.5, size=(2000, 2))
    assert f(xs).max() <= f.sup_norm
    assert f(xs).min() >= 0


def test_measure_of_box_examples():
    w = LatticeWindow((0,), (20,))
    A = BoxRegion([0], [1])
    assert measure_of_box(constant_sample(SPEC10, w, 0), A) == 0
    assert measure_of_box(constant_sample(SPEC10, w, 1), A) == 11


def test_measure_of_box_requires_coverage():
    s = constant_sample(SPEC10, LatticeWindow((0,), (5,)), 1)
    with pytest.raises(PreconditionError):
        measure_of_box(s, BoxRegion([0], [1]))
    with pytest.raises(PreconditionError):
        integral(TRAP, s)


def test_measure_of_box_mean_iid():
    spec = FieldSpec.pattern([0], n=100)
    R = 100_000
    counts = map_replicates(spec, LatticeWindow((0,), (100,)), 8, R, lambda x: x.sum(axis=1))
    p = 1 / 100
    mean = 101 * p
    se = math.sqrt(101 * p * (1 - p) / R)
    assert abs(counts.mean() - mean) < 3 * se


def test_lattice_support_examples():
    assert lattice_support(TestFunction([(0, 0.1, 0.9, 1)]), 10)[:, 0].tolist() == list(range(11))
    assert len(lattice_support(TestFunction([(0, 0.1, 0.9, 1)] * 2), 3)) == 16
    assert lattice_support(TestFunction([(0.25, 0.3, 0.6, 0.75)]), 8)[:, 0].tolist() == [2, 3, 4, 5, 6]


@settings(max_examples=80, deadline=None)
@given(
    st.lists(
        st.tuples(st.floats(-3, 3), st.floats(0.01, 2), st.floats(0, 2), st.floats(0.01, 2)),
        min_size=1,
        max_size=2,
    ),
    st.integers(1, 60),
)
def test_lattice_support_bound(axes, n):
    breaks = [(a, a + r, a + r + p, a + r + p + fl) for a, r, p, fl in axes]
    f = TestFunction(breaks)
    pts = lattice_support(f, n)
    assert len(pts) <= support_constant(f) * n**f.d
    lo = np.array([b[0] for b in f.breaks]) * n
    hi = np.array([b[3] for b in f.breaks]) * n
    assert np.all(pts >= lo - 1e-9) and np.all(pts <= hi + 1e-9)
    # exact count by brute force along each axis
    per_axis = [[j for j in range(-400, 400) if a * n <= j <= e * n] for a, _, _, e in f.breaks]
    assert len(pts) == math.prod(len(v) for v in per_axis)
    if len(pts):
        for i, brute in enumerate(per_axis):
            assert sorted(set(pts[:, i].tolist())) == brute


def test_integral_examples():
    w = LatticeWindow((-5,), (20,))
    zero_f = TestFunction([(0, 0.25, 0.75, 1)], amplitude=0.0)
    s = sample_field(FieldSpec.pattern([0], n=10, lam=5.0), w, 3)
    assert integral(zero_f, s) == 0.0
    ones = constant_sample(SPEC10, w, 1)
    riemann = sum(TRAP(j / 10) for j in range(0, 11))
    assert integral(TRAP, ones) == pytest.approx(riemann, abs=1e-15)
    assert integral(TRAP.scaled(2), s) == 2 * integral(TRAP, s)


@pytest.mark.parametrize("seed", range(5))
def test_integral_invariants(seed):
    spec = FieldSpec.pattern([(0, 0), (1, 0)], n=6, lam=3.0)
    f = TestFunction([(0, 0.2, 0.5, 1.0), (-0.5, 0.0, 0.3, 0.6)], amplitude=2.5)
    w = LatticeWindow((-4, -4), (8, 8))
    s = sample_field(spec, w, seed)
    pts = lattice_support(f, spec.n)
    direct = sum(f(p / spec.n) * s.x_values[p[0] + 4, p[1] + 4] for p in pts)
    assert integral(f, s) == pytest.approx(direct, abs=1e-12)
    assert 0 <= integral(f, s) <= f.sup_norm * measure_of_box(s, f.support) + 1e-12


def test_quadrature_trivial_cases():
    assert quadrature(TRAP, 0.0) == 0j
    assert quadrature(TRAP.scaled(0), 3.0) == 0j


@pytest.mark.parametrize(
    "breaks,amp,t,scale",
    [
        ((0, 0.1, 0.9, 1), 1.0, math.pi, 1.0),
        ((0, 0.25, 0.75, 1), 1.0, 2.0, 2.0),
        ((-1, 0.5, 0.5, 3), 2.5, 0.7, 1.0),
        ((0, 0.3, 1.4, 1.5), 0.8, -5.0, 1.0),
    ],
)
def test_quadrature_matches_segment_antiderivatives(breaks, amp, t, scale):
    f = TestFunction([breaks], amplitude=amp)
    got = quadrature(f, t, scale)
    want = oracles.simpson_free_integral(breaks, amp, t * scale)
    assert abs(got - want) < 1e-8
    assert got.real <= 0
    assert abs(got) <= 2 * f.support_volume


def test_quadrature_two_dimensional_product_oracle():
    # for amplitude-scaled products there is no separable closed form; compare with a dense midpoint rule
    f = TestFunction([(0, 0.2, 0.6, 1), (0, 0.5, 0.5, 1)])
    got = quadrature(f, 1.5)
    n = 2000
    xs = (np.arange(n) + 0.5) / n
    grid = f(np.stack(np.meshgrid(xs, xs, indexing="ij"), axis=-1))
    approx = np.mean(np.exp(1j * 1.5 * grid) - 1)
    assert abs(got - approx) < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.floats(-8, 8), st.floats(0.1, 3))
def test_quadrature_conjugate_symmetry(t, amp):
    f = TestFunction([(0, 0.3, 0.6, 1.2)], amplitude=amp)
    a, b = quadrature(f, t), quadrature(f, -t)
    assert abs(a - b.conjugate()) <= 1e-12
