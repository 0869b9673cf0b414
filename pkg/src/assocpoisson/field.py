"""Associated 0/1 random fields built from an i.i.d. Bernoulli field.

Two families are supported:

* ``pattern``: ``X_k = prod_{g in G} Y_{k+g}``, i.e. the Bernoulli field equals 1
  on the whole translate ``k + G``.
* ``or``: ``X_k = Y_k or Y_{k+1}`` on Z (d = 1 only).

Both are nondecreasing functions of independent variables, hence associated.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import InvalidSpecError, PreconditionError, ResourceError
from .rng import bernoulli_sites, check_seed

PATTERN = "pattern"
OR_FIELD = "or"

# Upper bound on underlying Bernoulli values materialized by a single call.
MAX_SITES = 16_000_000


def as_point(j, d):
    """Coerce an int or a sequence to a d-tuple of ints."""
    if np.ndim(j) == 0:
        point = (int(j),)
    else:
        point = tuple(int(c) for c in j)
    if len(point) != d:
        raise InvalidSpecError(f"point {j!r} does not have dimension {d}")
    return point


@dataclass(frozen=True)
class FieldSpec:
    """One member (fixed scale ``n``) of a field family.

    ``lam`` is the target intensity: the marginal probability of ``X_0 = 1``
    is exactly ``lam / n**d``. For ``kind="pattern"`` the underlying
    Bernoulli parameter is ``(lam / n**d) ** (1/m)`` with ``m = |G|``; for
    ``kind="or"`` it is ``lam / n``.
    """

    d: int
    n: int
    lam: float = 1.0
    kind: str = PATTERN
    G: tuple = ((0,),)

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise InvalidSpecError(f"d must be a positive integer, got {self.d!r}")
        if int(self.n) != self.n or self.n < 1:
            raise InvalidSpecError(f"n must be a positive integer, got {self.n!r}")
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise InvalidSpecError(f"lam must be a positive real, got {self.lam!r}")
        object.__setattr__(self, "d", int(self.d))
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))
        if self.kind == PATTERN:
            pts = [as_point(g, self.d) for g in self.G]
            if not pts:
                raise InvalidSpecError("pattern G must be nonempty")
            if len(set(pts)) != len(pts):
                raise InvalidSpecError(f"pattern G has repeated points: {pts}")
            object.__setattr__(self, "G", tuple(sorted(pts)))
        elif self.kind == OR_FIELD:
            if self.d != 1:
                raise InvalidSpecError("the OR-field is only defined for d = 1")
            object.__setattr__(self, "G", ((0,), (1,)))
        else:
            raise InvalidSpecError(f"unknown field kind {self.kind!r}")
        q = self.q
        if not 0 < q <= 1:
            raise InvalidSpecError(
                f"underlying Bernoulli probability {q} is outside (0, 1] "
                f"for lam={self.lam}, n={self.n}"
            )

    @classmethod
    def pattern(cls, G, d=None, n=1, lam=1.0):
        G = list(G)
        if d is None:
            d = 1 if np.ndim(G[0]) == 0 else len(G[0])
        return cls(d=d, n=n, lam=lam, kind=PATTERN, G=tuple(as_point(g, d) for g in G))

    @classmethod
    def or_field(cls, n, lam=1.0):
        return cls(d=1, n=n, lam=lam, kind=OR_FIELD)

    @property
    def m(self):
        return len(self.G) if self.kind == PATTERN else 2

    @property
    def q(self):
        """Success probability of each underlying Bernoulli variable."""
        if self.kind == OR_FIELD:
            return self.lam / self.n
        return (self.lam / self.n**self.d) ** (1.0 / len(self.G))

    @property
    def offsets(self):
        """Offsets ``o`` such that ``X_k`` is a function of ``Y_{k+o}``."""
        return self.G

    def with_n(self, n):
        return FieldSpec(d=self.d, n=n, lam=self.lam, kind=self.kind, G=self.G)

    def to_record(self):
        rec = {"d": self.d, "n": self.n, "lambda": self.lam, "kind": self.kind}
        if self.kind == PATTERN:
            rec["G"] = [list(g) for g in self.G]
        return rec

    @classmethod
    def from_record(cls, rec):
        try:
            kind = rec["kind"]
            d = int(rec.get("d", 1))
            n = int(rec["n"])
            lam = float(rec.get("lambda", 1.0))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidSpecError(f"bad field spec record {rec!r}: {exc}") from exc
        if kind == PATTERN:
            if "G" not in rec:
                raise InvalidSpecError("pattern spec requires G")
            return cls(d=d, n=n, lam=lam, kind=PATTERN, G=tuple(as_point(g, d) for g in rec["G"]))
        return cls(d=d, n=n, lam=lam, kind=kind)


@dataclass(frozen=True)
class LatticeWindow:
    """Inclusive box ``lo <= k <= hi`` of Z^d."""

    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(int(c) for c in np.atleast_1d(self.lo))
        hi = tuple(int(c) for c in np.atleast_1d(self.hi))
        if len(lo) != len(hi):
            raise InvalidSpecError(f"window corners {lo} and {hi} differ in dimension")
        if any(a > b for a, b in zip(lo, hi)):
            raise InvalidSpecError(f"window lo={lo} exceeds hi={hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def d(self):
        return len(self.lo)

    @property
    def shape(self):
        return tuple(b - a + 1 for a, b in zip(self.lo, self.hi))

    @property
    def size(self):
        return int(np.prod(self.shape, dtype=object))

    def contains(self, other):
        return all(a <= c and e <= b for a, b, c, e in zip(self.lo, self.hi, other.lo, other.hi))

    def sites(self):
        """All sites as an int64 array of shape (size, d), C order."""
        axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(self.lo, self.hi)]
        grids = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def index(self, points):
        """Index tuples into an array of shape ``self.shape`` for lattice points."""
        points = np.asarray(points, dtype=np.int64).reshape(-1, self.d)
        return tuple(points[:, i] - self.lo[i] for i in range(self.d))


def y_window(spec, window):
    """Window of underlying variables that determines every X in ``window``."""
    off = np.array(spec.offsets)
    return LatticeWindow(
        tuple(np.array(window.lo) + off.min(axis=0)),
        tuple(np.array(window.hi) + off.max(axis=0)),
    )


def x_from_y(spec, y, window):
    """Apply the field transform to Y values on ``y_window(spec, window)``.

    ``y`` may carry leading batch axes; the trailing ``d`` axes are spatial.
    """
    off = np.array(spec.offsets)
    base = off.min(axis=0)
    shape = window.shape
    batch = (slice(None),) * (y.ndim - spec.d)
    terms = []
    for g in off:
        start = g - base
        sl = tuple(slice(s, s + w) for s, w in zip(start, shape))
        terms.append(y[batch + sl])
    if spec.kind == OR_FIELD:
        return terms[0] | terms[1]
    x = terms[0].copy()
    for t in terms[1:]:
        x &= t
    return x


@dataclass(frozen=True, eq=False)
class FieldSample:
    """A realization of X on ``window`` together with the Y values that produced it."""

    window: LatticeWindow
    x_values: np.ndarray
    y_values: np.ndarray
    spec: FieldSpec
    seed: int
    y_window: LatticeWindow = field(default=None)

    def recompute_x(self):
        return x_from_y(self.spec, self.y_values, self.window)

    def x_at(self, points):
        return self.x_values[self.window.index(points)]


def _check_pair(spec, window):
    if window.d != spec.d:
        raise InvalidSpecError(f"window dimension {window.d} != field dimension {spec.d}")


def sample_batch(spec, window, seeds):
    """Sample one realization per seed; returns ``(x, y)`` with a leading replicate axis."""
    _check_pair(spec, window)
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    yw = y_window(spec, window)
    if yw.size * len(seeds) > MAX_SITES:
        raise ResourceError(
            f"{len(seeds)} replicates of a {yw.size}-site window exceed the "
            f"budget of {MAX_SITES} underlying variables",
            parameter="window",
        )
    y = bernoulli_sites(seeds, yw.sites(), spec.q).reshape((len(seeds),) + yw.shape)
    return x_from_y(spec, y, window), y


def sample_field(spec, window, seed):
    """Sample X on ``window``; identical arguments give bit-identical output."""
    seed = check_seed(seed)
    x, y = sample_batch(spec, window, [seed])
    return FieldSample(window, x[0], y[0], spec, seed, y_window(spec, window))


def marginal_prob(spec):
    """P{X_0 = 1}: ``lam / n**d`` for patterns, ``2q - q**2`` for the OR-field."""
    if spec.kind == OR_FIELD:
        q = spec.q
        return 2 * q - q * q
    return spec.lam / spec.n**spec.d


def union_size(G, j):
    """``|G ∪ (j + G)|`` for a nonzero lag ``j``."""
    G = [tuple(np.atleast_1d(g).tolist()) for g in G]
    if not G:
        raise InvalidSpecError("G must be nonempty")
    j = as_point(j, len(G[0]))
    if not any(j):
        raise PreconditionError("lag j must be nonzero")
    shifted = {tuple(a + b for a, b in zip(g, j)) for g in G}
    return len(set(G) | shifted)


def lag_set(spec):
    """Nonzero lags at which ``cov(X_0, X_j)`` can be nonzero."""
    if spec.kind == OR_FIELD:
        return [(-1,), (1,)]
    diffs = {tuple(a - b for a, b in zip(g, h)) for g in spec.G for h in spec.G}
    diffs.discard((0,) * spec.d)
    return sorted(diffs)


def exact_cov(spec, j):
    """Closed-form ``cov(X_0, X_j)`` for a nonzero lag ``j``."""
    j = as_point(j, spec.d)
    if not any(j):
        raise PreconditionError("lag j must be nonzero")
    q = spec.q
    if spec.kind == OR_FIELD:
        return q * (1 - q) ** 3 if abs(j[0]) == 1 else 0.0
    m = len(spec.G)
    u = union_size(spec.G, j)
    if u == 2 * m:
        return 0.0
    return q**u - q ** (2 * m)


def sigma(spec):
    """Total covariance ``sum_{j != 0} cov(X_0, X_j)``."""
    return float(sum(exact_cov(spec, j) for j in lag_set(spec)))


def decay_diagnostic(family, n_values):
    """Rows ``(n, n**d * sigma(n))``.

    ``family`` is either a FieldSpec (its ``n`` is replaced) or a callable
    mapping ``n`` to a FieldSpec.
    """
    make = family.with_n if isinstance(family, FieldSpec) else family
    rows = []
    for n in n_values:
        spec = make(int(n))
        rows.append((spec.n, spec.n**spec.d * sigma(spec)))
    return rows


def dependency_sites(spec, points):
    """Sorted list of underlying Y sites that the X values at ``points`` depend on."""
    out = set()
    for p in points:
        p = as_point(p, spec.d)
        for o in spec.offsets:
            out.add(tuple(a + b for a, b in zip(p, o)))
    return sorted(out)


def enumerate_y(k, chunk=1 << 20):
    """Yield ``(start, bits)`` blocks of all 2**k configurations, bit i = variable i."""
    total = 1 << k
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        bits = ((codes[:, None] >> np.arange(k, dtype=np.int64)) & 1).astype(np.uint8)
        yield start, bits


def config_weights(bits, q):
    """Product Bernoulli(q) probability of each row of a 0/1 matrix."""
    ones = bits.sum(axis=1)
    zeros = bits.shape[1] - ones
    if q == 1.0:
        return (zeros == 0).astype(np.float64)
    return np.exp(ones * np.log(q) + zeros * np.log1p(-q))


def x_on_points(spec, points, ysites, bits):
    """X values at ``points`` for each Y configuration row in ``bits`` (columns follow ``ysites``)."""
    col = {s: i for i, s in enumerate(ysites)}
    out = np.empty((bits.shape[0], len(points)), dtype=np.uint8)
    for c, p in enumerate(points):
        p = as_point(p, spec.d)
        idx = [col[tuple(a + b for a, b in zip(p, o))] for o in spec.offsets]
        if spec.kind == OR_FIELD:
            out[:, c] = bits[:, idx[0]] | bits[:, idx[1]]
        else:
            out[:, c] = np.bitwise_and.reduce(bits[:, idx], axis=1)
    return out


def grid_points(lo, hi):
    """All integer points of the inclusive box [lo, hi] as tuples."""
    return list(product(*[range(a, b + 1) for a, b in zip(lo, hi)]))
