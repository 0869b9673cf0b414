"""Characteristic functions of ``∫ f dmu_n`` and the pieces of the Poisson limit argument.

For a fixed test function ``f`` and frequency ``t``:

* ``product_charfn``: the product of the one-site characteristic
  functions, i.e. what ``E exp(it∫f dmu_n)`` would be under independence;
* ``limit_charfn``: the Poisson (or mass-2 compound Poisson) limit;
* ``newman_bound``: the covariance bound on the gap between the two
  quantities above and the true characteristic function;
* ``exact_charfn`` / ``mc_charfn``: the true characteristic function by
  enumeration or by simulation.
"""

import cmath
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import FeasibilityError
from .field import (
    FieldSpec,
    LatticeWindow,
    config_weights,
    dependency_sites,
    enumerate_y,
    exact_cov,
    lag_set,
    marginal_prob,
    sigma,
    x_on_points,
)
from .measure import TestFunction, lattice_support, lattice_weights, quadrature
from .montecarlo import map_replicates

MAX_ENUM_SITES = 24


class MCEstimate(NamedTuple):
    value: complex
    se: float


class NewmanBound(NamedTuple):
    tight: float
    coarse: float


def product_charfn(t, f, spec):
    """``prod_j (1 + p_n (exp(i t f(j/n)) - 1))`` over the lattice support of ``f``."""
    p = marginal_prob(spec)
    _, w = lattice_weights(f, spec.n)
    out = complex(1.0, 0.0)
    if t == 0:
        return out
    for wj in w[w != 0]:
        theta = t * wj
        out *= complex(1.0 + p * (math.cos(theta) - 1.0), p * math.sin(theta))
    return out


def limit_charfn(t, f, lam, mass=1):
    """``exp(lam ∫ (exp(i t mass f(x)) - 1) dx)``; ``mass=2`` gives the doubled-atom limit."""
    if mass not in (1, 2):
        raise ValueError(f"mass must be 1 or 2, got {mass}")
    return cmath.exp(lam * quadrature(f, t, mass))


def _weight_grid(f, n):
    sites = lattice_support(f, n)
    if len(sites) == 0:
        return None, None
    window = LatticeWindow(tuple(sites.min(axis=0)), tuple(sites.max(axis=0)))
    return window, f(sites / n).reshape(window.shape)


def newman_bound(t, f, spec):
    """Bounds on ``|E exp(it∫f dmu_n) - product_charfn|`` from pairwise covariances.

    ``tight`` keeps the weights ``f(j1/n) f(j2/n)`` and the exact covariance
    of each pair; ``coarse`` replaces them by ``|f|_inf**2`` and the
    row sum ``sigma(n)``. Always ``tight <= coarse``.
    """
    window, w = _weight_grid(f, spec.n)
    if window is None or t == 0:
        return NewmanBound(0.0, 0.0)
    total = 0.0
    for lag in lag_set(spec):
        c = exact_cov(spec, lag)
        if c == 0.0:
            continue
        src, dst = [], []
        for ax, l in enumerate(lag):
            size = window.shape[ax]
            if abs(l) >= size:
                break
            src.append(slice(max(0, -l), size - max(0, l)))
            dst.append(slice(max(0, l), size - max(0, -l)))
        else:
            total += c * float(np.sum(w[tuple(src)] * w[tuple(dst)]))
    half_t2 = 0.5 * t * t
    tight = half_t2 * total
    coarse = half_t2 * f.sup_norm**2 * window.size * sigma(spec)
    return NewmanBound(tight, coarse)


def exact_charfn(t, f, spec, max_sites=MAX_ENUM_SITES):
    """``E exp(i t ∫f dmu_n)`` by summing over every configuration of the relevant Y sites.

    Only sites with ``f(j/n) > 0`` contribute; the Y sites they depend on
    are enumerated (``2**k`` configurations, ``k <= max_sites``).
    """
    sites, w = lattice_weights(f, spec.n)
    keep = w > 0
    sites, w = sites[keep], w[keep]
    if t == 0 or len(sites) == 0:
        return complex(1.0, 0.0)
    points = [tuple(s) for s in sites]
    ysites = dependency_sites(spec, points)
    k = len(ysites)
    if k > max_sites:
        raise FeasibilityError(
            f"exact characteristic function needs 2**{k} configurations (cap 2**{max_sites})",
            parameter="f",
        )
    re = im = 0.0
    for _, bits in enumerate_y(k):
        s = x_on_points(spec, points, ysites, bits).astype(np.float64) @ w
        p = config_weights(bits, spec.q)
        re += float(np.sum(p * np.cos(t * s)))
        im += float(np.sum(p * np.sin(t * s)))
    return complex(re, im)


def integral_samples(f, spec, replicates, seed):
    """``∫ f dmu_n`` for replicates ``0..replicates-1`` under master ``seed``."""
    sites, w = lattice_weights(f, spec.n)
    if len(sites) == 0:
        return np.zeros(replicates)
    window = f.support.lattice_window(spec.n)
    w = w.reshape(window.shape).ravel()

    def stat(x):
        return x.reshape(len(x), -1).astype(np.float64) @ w

    return map_replicates(spec, window, seed, replicates, stat)


def mc_charfn(t, f, spec, replicates, seed):
    """Sample mean of ``exp(i t ∫f dmu_n)`` with its standard error.

    The standard error is the Euclidean norm of the real- and
    imaginary-part standard errors (sample std with ddof=1 over sqrt(R)).
    """
    if replicates < 2:
        raise ValueError("mc_charfn needs at least 2 replicates")
    s = integral_samples(f, spec, replicates, seed)
    c, sn = np.cos(t * s), np.sin(t * s)
    se = math.hypot(c.std(ddof=1), sn.std(ddof=1)) / math.sqrt(replicates)
    return MCEstimate(complex(c.mean(), sn.mean()), float(se))


@dataclass
class CharfnReport:
    t: float
    f: TestFunction
    spec: FieldSpec
    i1: complex
    phi: complex
    newman_bound: float
    newman_coarse: float
    mc_estimate: complex
    mc_se: float
    replicates: int
    exact_value: Optional[complex] = None

    CSV_COLUMNS = (
        "t", "n", "i1_re", "i1_im", "phi_re", "phi_im", "bound_tight", "bound_coarse",
        "mc_re", "mc_im", "mc_se", "exact_re", "exact_im",
    )

    def row(self):
        exact = self.exact_value
        return [
            self.t, self.spec.n,
            self.i1.real, self.i1.imag, self.phi.real, self.phi.imag,
            self.newman_bound, self.newman_coarse,
            self.mc_estimate.real, self.mc_estimate.imag, self.mc_se,
            None if exact is None else exact.real,
            None if exact is None else exact.imag,
        ]


def charfn_report(t, f, spec, replicates, seed, lam=None, mass=1):
    """All characteristic-function quantities for one ``(t, f, spec)``.

    ``lam`` and ``mass`` choose the limit reference; by default the
    Poisson limit with the field's own intensity.
    """
    bound = newman_bound(t, f, spec)
    mc = mc_charfn(t, f, spec, replicates, seed)
    try:
        exact = exact_charfn(t, f, spec)
    except FeasibilityError:
        exact = None
    return CharfnReport(
        t=float(t),
        f=f,
        spec=spec,
        i1=product_charfn(t, f, spec),
        phi=limit_charfn(t, f, spec.lam if lam is None else lam, mass),
        newman_bound=bound.tight,
        newman_coarse=bound.coarse,
        mc_estimate=mc.value,
        mc_se=mc.se,
        replicates=replicates,
        exact_value=exact,
    )
