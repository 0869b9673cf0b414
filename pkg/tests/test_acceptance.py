"""Acceptance checks, one marked group per criterion.

The terminal summary (see ``conftest.py``) prints one PASS/FAIL line per
criterion after the run. Tolerances are the stated ones and are not
loosened; a criterion that does not hold is left failing.
"""

import itertools
import math
from pathlib import Path

import numpy as np
import pytest

import oracles
from assocpoisson.association import JointDistribution, exact_fkg_check, window_distribution
from assocpoisson.cli import main
from assocpoisson.counts import (
    COMPOUND2,
    POISSON,
    count_experiment,
    factorial_moments,
    lam_eff,
    parity_fraction,
    tv_distance,
)
from assocpoisson.field import FieldSpec, exact_cov, lag_set, marginal_prob, sigma
from assocpoisson.limit import exact_charfn, limit_charfn, mc_charfn, newman_bound, product_charfn
from assocpoisson.measure import BoxRegion, TestFunction
from assocpoisson.montecarlo import THREADS_ENV

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
TRAP = TestFunction([(0, 0.25, 0.75, 1)])
WIDE = TestFunction([(-0.5, 0.25, 0.75, 1.5)], amplitude=1.3)
UNIT = BoxRegion((0.0,), (1.0,))


def acceptance(cid, title):
    return pytest.mark.acceptance(cid, title)


def small_specs(n):
    yield FieldSpec.or_field(n=n)
    for G in ([0], [0, 1], [0, 2], [0, 1, 3]):
        yield FieldSpec.pattern(G, n=n)


@acceptance("1", "exact moments match enumeration (1e-12)")
@pytest.mark.parametrize("n", [2, 4, 16])
def test_exact_moments_match_enumeration(n):
    for spec in small_specs(n):
        ref = oracles.marginal(spec.kind, spec.G, spec.q)
        assert abs(marginal_prob(spec) - ref) <= 1e-12
        for j in lag_set(spec):
            ref = oracles.covariance(spec.kind, spec.G, spec.q, j)
            assert abs(exact_cov(spec, j) - ref) <= 1e-12, (spec, j)


@acceptance("2", "n*sigma(n) closed forms (1e-12)")
@pytest.mark.parametrize("n", [4, 16, 64, 256])
def test_decay_closed_forms(n):
    pattern = FieldSpec.pattern([0, 1], n=n, lam=1.0)
    expected = 2 * n**-0.5 * (1 - n**-0.5)
    assert abs(n * sigma(pattern) - expected) <= 1e-12
    orf = FieldSpec.or_field(n=n, lam=1.0)
    assert abs(n * sigma(orf) - 2 * (1 - 1 / n) ** 3) <= 1e-12


def test_decay_trend():
    ns = [4, 16, 64, 256]
    pattern = [n * sigma(FieldSpec.pattern([0, 1], n=n)) for n in ns]
    orf = [n * sigma(FieldSpec.or_field(n=n)) for n in ns]
    assert all(a > b for a, b in zip(pattern, pattern[1:]))
    assert all(a < b < 2 for a, b in zip(orf, orf[1:]))


NEWMAN_GRID = list(itertools.product(
    ["or", "pattern"], [2, 3, 4], [0.5, 1.0, 2.0, math.pi], ["TRAP", "WIDE"],
))


@acceptance("3", f"Newman inequality on {len(NEWMAN_GRID)} exact instances (1e-9)")
@pytest.mark.parametrize("kind,n,t,fname", NEWMAN_GRID)
def test_newman_inequality_grid(kind, n, t, fname):
    spec = FieldSpec.or_field(n=n) if kind == "or" else FieldSpec.pattern([0, 1], n=n)
    f = TRAP if fname == "TRAP" else WIDE
    b = newman_bound(t, f, spec)
    gap = abs(exact_charfn(t, f, spec) - product_charfn(t, f, spec))
    assert gap <= b.tight + 1e-9
    assert b.tight <= b.coarse + 1e-9


@acceptance("4", "characteristic-function convergence and MC agreement")
@pytest.mark.parametrize("t", [0.5, 1.0, 2.0])
def test_charfn_convergence(t):
    coarse = FieldSpec.pattern([0, 1], n=10, lam=1.0)
    fine = coarse.with_n(160)
    phi = limit_charfn(t, TRAP, 1.0)
    d10 = abs(product_charfn(t, TRAP, coarse) - phi)
    d160 = abs(product_charfn(t, TRAP, fine) - phi)
    assert d160 < d10 / 4
    mc = mc_charfn(t, TRAP, fine, 10**6, 20240601)
    allowance = 4 * mc.se + d160 + newman_bound(t, TRAP, fine).tight
    assert abs(mc.value - phi) <= allowance


@pytest.fixture(scope="module")
def pattern_counts():
    spec = FieldSpec.pattern([0, 1], n=200, lam=1.0)
    return spec, count_experiment(spec, UNIT, 10**5, 7)


@acceptance("5", "pattern-field counts: TV < 0.05 and factorial moments within 4 SE")
def test_pattern_count_tv(pattern_counts):
    spec, hist = pattern_counts
    assert tv_distance(hist, POISSON, lam_eff(spec, UNIT)) < 0.05


@acceptance("5", "pattern-field counts: TV < 0.05 and factorial moments within 4 SE")
def test_pattern_count_factorial_moments(pattern_counts):
    spec, hist = pattern_counts
    lam = lam_eff(spec, UNIT)
    # exact finite-n moments of the count, for the failure message
    law = oracles.count_law_transfer(spec.kind, spec.G, spec.q, 0, spec.n)
    k = np.arange(len(law), dtype=np.float64)
    lines, ok = [], True
    for r, (est, se) in enumerate(factorial_moments(hist, 4), start=1):
        falling = np.prod([k - i for i in range(r)], axis=0)
        exact = float(law @ falling)
        z = (est - lam**r) / se
        ok &= abs(z) <= 4
        lines.append(f"r={r}: est={est:.4f} se={se:.4f} lam^r={lam**r:.4f} z={z:.1f} exact={exact:.4f}")
    assert ok, "\n".join(lines)


@acceptance("6", "OR-field counts follow the doubled Poisson law")
def test_or_field_compound_counts():
    spec = FieldSpec.or_field(n=200, lam=1.0)
    hist = count_experiment(spec, UNIT, 10**5, 7)
    assert parity_fraction(hist) < 0.05
    assert tv_distance(hist, COMPOUND2, 1.0) < 0.05
    assert tv_distance(hist, POISSON, 2.0) > 0.2


def _windows(max_site=4):
    for size in (1, 2, 3):
        yield from itertools.combinations(range(max_site + 1), size)


@acceptance("7", "exact FKG certification and rejection")
@pytest.mark.parametrize("n", [1, 2, 5])
def test_fields_certified_associated(n):
    for spec in small_specs(n):
        for sites in _windows():
            res = exact_fkg_check(window_distribution(spec, [[s] for s in sites]))
            assert res.min_cov >= -1e-12, (spec, sites)


@acceptance("7", "exact FKG certification and rejection")
def test_anticorrelated_distribution_rejected():
    res = exact_fkg_check(JointDistribution(2, [0.0, 0.5, 0.5, 0.0]))
    assert not res.associated
    assert res.witness is not None
    assert res.min_cov < -1e-12


def _run(command, config, out, threads, monkeypatch, extra):
    monkeypatch.setenv(THREADS_ENV, str(threads))
    args = [command, "--config", str(CONFIGS / config), "--out", str(out), *extra]
    assert main(args) == 0
    return {p.name: p.read_bytes() for p in sorted(out.iterdir())}


@acceptance("8", "byte-identical reruns across thread counts")
@pytest.mark.parametrize(
    "command,config,extra",
    [
        ("sigma-sweep", "sigma_sweep.yaml", ()),
        ("charfn", "charfn.yaml", ("--replicates", "20000")),
        ("count-fit", "count_fit_pattern.yaml", ()),
        ("count-fit", "count_fit_or.yaml", ()),
        ("fkg-check", "fkg_check.yaml", ()),
    ],
)
def test_reruns_byte_identical(tmp_path, monkeypatch, command, config, extra):
    first = _run(command, config, tmp_path / "a", 1, monkeypatch, extra)
    again = _run(command, config, tmp_path / "b", 1, monkeypatch, extra)
    threaded = _run(command, config, tmp_path / "c", 4, monkeypatch, extra)
    assert "manifest.json" in first and len(first) >= 2
    assert first == again == threaded
