"""Checks of the association (FKG) inequality for finite families of 0/1 variables.

For binary coordinates every bounded nondecreasing function is a constant
plus a nonnegative combination of up-set indicators (take the level sets
``{g >= s}``). Covariance is bilinear and ignores constants, so
``cov(g, h) >= 0`` for all nondecreasing ``g, h`` holds iff it holds for
every pair of up-set indicators. That makes the exact check finite.

Up-sets of ``{0,1}^m`` are stored as integer masks over the ``2**m``
patterns: bit ``b`` of the mask is set when pattern ``b`` belongs to the
set, and coordinate ``i`` of pattern ``b`` is ``(b >> i) & 1``.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np

from .errors import FeasibilityError, InvalidSpecError
from .field import (
    LatticeWindow,
    as_point,
    config_weights,
    dependency_sites,
    enumerate_y,
    x_on_points,
)
from .montecarlo import map_replicates
from .rng import check_seed

MAX_EXACT_COORDS = 4
MAX_JOINT_COORDS = 24
ASSOC_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class JointDistribution:
    m: int
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if not 1 <= self.m <= MAX_JOINT_COORDS:
            raise InvalidSpecError(f"m must be in 1..{MAX_JOINT_COORDS}, got {self.m}")
        if probs.shape != (2**self.m,):
            raise InvalidSpecError(f"expected {2**self.m} probabilities, got shape {probs.shape}")
        if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
            raise InvalidSpecError("probabilities must be nonnegative and sum to 1")
        object.__setattr__(self, "probs", probs)


def window_distribution(spec, sites, max_sites=MAX_JOINT_COORDS):
    """Exact joint law of ``(X_s)`` for ``s`` in ``sites``, by enumerating the Y variables."""
    points = [as_point(s, spec.d) for s in sites]
    ysites = dependency_sites(spec, points)
    if len(ysites) > max_sites:
        raise FeasibilityError(
            f"{len(ysites)} underlying sites exceed the cap of {max_sites}", parameter="sites"
        )
    m = len(points)
    probs = np.zeros(2**m)
    shifts = np.arange(m, dtype=np.int64)
    for _, bits in enumerate_y(len(ysites)):
        x = x_on_points(spec, points, ysites, bits).astype(np.int64)
        codes = (x << shifts).sum(axis=1)
        probs += np.bincount(codes, weights=config_weights(bits, spec.q), minlength=2**m)
    return JointDistribution(m, probs)


@lru_cache(maxsize=None)
def _upsets(m):
    if m == 0:
        return (0, 1)
    lower = _upsets(m - 1)
    half = 2 ** (m - 1)
    # slice with last coordinate 0 must sit inside the slice with last coordinate 1
    return tuple(
        sorted(u0 | (u1 << half) for u0 in lower for u1 in lower if u0 & ~u1 == 0)
    )


def enumerate_upsets(m):
    """All up-sets of ``{0,1}^m`` as pattern masks (Dedekind number of them)."""
    if not 1 <= m <= MAX_EXACT_COORDS:
        raise FeasibilityError(f"up-set enumeration is limited to 1 <= m <= {MAX_EXACT_COORDS}")
    return list(_upsets(m))


def upset_indicator_matrix(masks, m):
    """0/1 matrix with one row per up-set mask and one column per pattern."""
    masks = np.asarray(masks, dtype=np.int64)
    return ((masks[:, None] >> np.arange(2**m, dtype=np.int64)) & 1).astype(np.float64)


def upset_from_generators(generators, m):
    """Mask of the up-set generated by ``generators`` (patterns given as coordinate bitmasks)."""
    mask = 0
    for b in range(2**m):
        if any(b & g == g for g in generators):
            mask |= 1 << b
    return mask


def upset_cov(dist, mask_f, mask_g):
    ind = upset_indicator_matrix([mask_f, mask_g], dist.m)
    ef, eg = ind @ dist.probs
    return float(np.sum(ind[0] * ind[1] * dist.probs) - ef * eg)


@dataclass(frozen=True)
class FKGResult:
    min_cov: float
    witness: Optional[tuple]

    @property
    def associated(self):
        return self.min_cov >= -ASSOC_TOL


def exact_fkg_check(dist):
    """Minimum covariance over all pairs of up-set indicators under ``dist``.

    ``witness`` is the minimizing pair of masks when that minimum is below
    ``-ASSOC_TOL``, otherwise None.
    """
    if dist.m > MAX_EXACT_COORDS:
        raise FeasibilityError(f"exact check is limited to m <= {MAX_EXACT_COORDS}")
    masks = enumerate_upsets(dist.m)
    ind = upset_indicator_matrix(masks, dist.m)
    mean = ind @ dist.probs
    cov = (ind * dist.probs) @ ind.T - np.outer(mean, mean)
    i, j = np.unravel_index(np.argmin(cov), cov.shape)
    min_cov = float(cov[i, j])
    witness = (masks[i], masks[j]) if min_cov < -ASSOC_TOL else None
    return FKGResult(min_cov, witness)


def random_upset_generators(rng, m, max_generators=3):
    """Generators of a random up-set: a few random coordinate bitmasks."""
    k = int(rng.integers(1, max_generators + 1))
    return tuple(sorted({int(g) for g in rng.integers(0, 2**m, size=k)}))


def _indicator(codes, generators):
    hit = np.zeros(codes.shape, dtype=bool)
    for g in generators:
        hit |= (codes & g) == g
    return hit.astype(np.float64)


@dataclass(frozen=True)
class MCPairResult:
    pair_id: int
    f_generators: tuple
    g_generators: tuple
    cov: float
    se: float


def site_codes(spec, sites, replicates, seed):
    """Pattern code ``sum_i X_{s_i} << i`` of the sites for each replicate."""
    points = np.array([as_point(s, spec.d) for s in sites], dtype=np.int64)
    if len(points) > 62:
        raise InvalidSpecError("at most 62 sites fit in a pattern code")
    window = LatticeWindow(tuple(points.min(axis=0)), tuple(points.max(axis=0)))
    idx = window.index(points)
    shifts = np.arange(len(points), dtype=np.int64)

    def stat(x):
        sel = x[(slice(None),) + idx].astype(np.int64)
        return (sel << shifts).sum(axis=1)

    return map_replicates(spec, window, seed, replicates, stat)


def mc_fkg_check(spec, sites, pairs, replicates, seed, upsets=None):
    """Monte Carlo covariances of random pairs of monotone indicators of ``X`` on ``sites``.

    Pairs are up-sets generated by random seed patterns (or the explicit
    ``upsets`` list of ``(f_generators, g_generators)``). Each estimate is
    the unbiased sample covariance; its standard error is the sample std of
    the centred products over ``sqrt(replicates)``.
    """
    if replicates < 100:
        raise ValueError("mc_fkg_check needs at least 100 replicates")
    seed = check_seed(seed)
    m = len(sites)
    if upsets is None:
        rng = np.random.default_rng([seed, 0x464B47])
        upsets = [
            (random_upset_generators(rng, m), random_upset_generators(rng, m))
            for _ in range(pairs)
        ]
    codes = site_codes(spec, sites, replicates, seed)
    out = []
    for pid, (gf, gg) in enumerate(upsets):
        a = _indicator(codes, gf)
        b = _indicator(codes, gg)
        prod = (a - a.mean()) * (b - b.mean())
        cov = float(prod.sum() / (replicates - 1))
        se = float(prod.std(ddof=1) / np.sqrt(replicates))
        out.append(MCPairResult(pid, tuple(gf), tuple(gg), cov, se))
    return out
