"""Box counts ``mu_n(A)`` and their fit to Poisson / mass-2 compound Poisson laws."""

from collections import Counter
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.stats import poisson

from .montecarlo import map_replicates

POISSON = "poisson"
COMPOUND2 = "compound2"
JACKKNIFE_BLOCK = 1000


@dataclass
class CountHistogram:
    """Occurrences of each count over ``replicates`` runs.

    ``values`` keeps the per-replicate counts in replicate order when they
    are available (needed for the block jackknife).
    """

    counts: dict
    replicates: int
    meta: dict = field(default_factory=dict)
    values: Optional[np.ndarray] = None

    def __post_init__(self):
        self.counts = {int(k): int(v) for k, v in sorted(self.counts.items()) if v}
        if sum(self.counts.values()) != self.replicates:
            raise ValueError("histogram occurrences do not add up to the replicate count")

    @classmethod
    def from_values(cls, values, meta=None):
        values = np.asarray(values, dtype=np.int64)
        return cls(dict(Counter(values.tolist())), len(values), meta or {}, values)

    def support(self):
        return np.array(sorted(self.counts), dtype=np.int64)

    def empirical(self):
        k = self.support()
        return k, np.array([self.counts[i] for i in k], dtype=np.float64) / self.replicates

    def mean(self):
        k, p = self.empirical()
        return float(k @ p)

    def merge(self, other):
        merged = Counter(self.counts)
        merged.update(other.counts)
        return CountHistogram(dict(merged), self.replicates + other.replicates, dict(self.meta))


def count_experiment(spec, A, replicates, seed):
    """Histogram of ``mu_n(A)`` over replicates ``0..replicates-1`` of master ``seed``."""
    window = A.lattice_window(spec.n)
    meta = {"spec": spec.to_record(), "box": A.to_record(), "seed": int(seed)}
    if window is None:
        return CountHistogram.from_values(np.zeros(replicates, dtype=np.int64), meta)

    def stat(x):
        return x.reshape(len(x), -1).sum(axis=1, dtype=np.int64)

    values = map_replicates(spec, window, seed, replicates, stat)
    return CountHistogram.from_values(values, meta)


def reference_pmf(kind, lam_eff, k):
    """P{N = k} under Poisson(lam_eff), or for ``2 * Poisson(lam_eff)`` when kind is compound2."""
    k = np.asarray(k)
    if kind == POISSON:
        return poisson.pmf(k, lam_eff)
    if kind == COMPOUND2:
        even = k % 2 == 0
        return np.where(even, poisson.pmf(k // 2, lam_eff), 0.0)
    raise ValueError(f"unknown reference kind {kind!r}")


def tv_distance(hist, kind, lam_eff):
    """Total variation distance between the histogram and the reference law.

    Reference mass beyond the largest observed count is added in full.
    """
    k, emp = hist.empirical()
    top = int(k.max()) if len(k) else 0
    grid = np.arange(top + 1)
    e = np.zeros(top + 1)
    e[k] = emp
    ref = reference_pmf(kind, lam_eff, grid)
    tail = max(0.0, 1.0 - float(ref.sum()))
    return float(min(1.0, 0.5 * (np.abs(e - ref).sum() + tail)))


def parity_fraction(hist):
    """Fraction of replicates with an odd count."""
    return sum(c for k, c in hist.counts.items() if k % 2) / hist.replicates


def _falling(values, r):
    out = np.ones_like(values, dtype=np.float64)
    for i in range(r):
        out *= values - i
    return out


def factorial_moments(hist, r_max=4):
    """Empirical ``E[N (N-1) ... (N-r+1)]`` for ``r = 1..r_max`` with jackknife SEs.

    Uses the block jackknife over consecutive blocks of ``JACKKNIFE_BLOCK``
    replicates when per-replicate values are available and there are at
    least two blocks; otherwise the delete-one jackknife, which only needs
    the histogram.

    Returns
    -------
    list of (moment, se) tuples
    """
    if not 1 <= r_max <= 4:
        raise ValueError("r_max must be between 1 and 4")
    R = hist.replicates
    out = []
    use_blocks = hist.values is not None and R >= 2 * JACKKNIFE_BLOCK
    for r in range(1, r_max + 1):
        if use_blocks:
            g = _falling(hist.values.astype(np.float64), r)
            total = g.sum()
            starts = range(0, R, JACKKNIFE_BLOCK)
            loo = np.array([
                (total - g[s:s + JACKKNIFE_BLOCK].sum()) / (R - len(g[s:s + JACKKNIFE_BLOCK]))
                for s in starts
            ])
            B = len(loo)
            est = total / R
            se = np.sqrt((B - 1) / B * np.sum((loo - loo.mean()) ** 2))
        else:
            k = hist.support().astype(np.float64)
            c = np.array([hist.counts[int(i)] for i in k], dtype=np.float64)
            g = _falling(k, r)
            total = float(c @ g)
            est = total / R
            if R < 2:
                se = 0.0
            else:
                loo = (total - g) / (R - 1)
                loo_mean = float(c @ loo) / R
                se = np.sqrt((R - 1) / R * float(c @ (loo - loo_mean) ** 2))
        out.append((float(est), float(se)))
    return out


def lam_eff(spec, A, convention="lattice"):
    """Effective Poisson parameter for counts in ``A`` at scale ``n``.

    ``"lattice"`` uses ``lam * |Z^d ∩ nA| / n**d``; ``"volume"`` uses
    ``lam * vol(A)``.
    """
    if convention == "lattice":
        return spec.lam * A.lattice_count(spec.n) / spec.n**spec.d
    if convention == "volume":
        return spec.lam * A.volume
    raise ValueError(f"unknown convention {convention!r}")


def fit_summary(hist, spec, A, r_max=4):
    """Flat record of fit statistics against both reference laws.

    For the pattern field the Poisson parameter is ``lam_eff``; for the
    OR-field the atoms come from the underlying Bernoulli sites, so the
    compound reference uses ``lam_eff`` and the plain Poisson reference
    (matching the marginal intensity) uses ``2 * lam_eff``.
    """
    rec = {"replicates": hist.replicates, "mean": hist.mean(), "parity_fraction": parity_fraction(hist)}
    scale = 2.0 if spec.kind == "or" else 1.0
    for conv in ("lattice", "volume"):
        lam = lam_eff(spec, A, conv)
        rec[f"lam_eff_{conv}"] = lam
        rec[f"tv_poisson_{conv}"] = tv_distance(hist, POISSON, scale * lam)
        rec[f"tv_compound2_{conv}"] = tv_distance(hist, COMPOUND2, lam)
    for r, (mom, se) in enumerate(factorial_moments(hist, r_max), start=1):
        rec[f"factorial_moment_{r}"] = mom
        rec[f"factorial_moment_{r}_se"] = se
    return rec
