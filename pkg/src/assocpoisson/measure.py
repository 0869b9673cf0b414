"""The rescaled counting measure ``mu_n`` and integrals against trapezoid test functions."""

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidSpecError, NumericalAccuracyError, PreconditionError
from .field import LatticeWindow

QUAD_TOL = 1e-10
MAX_PANELS = 2**20
# Tensor grids beyond this many nodes are treated as hitting the panel cap.
MAX_GRID_NODES = 2**24


def _lattice_range(lo, hi, n):
    """Integers j with n*lo <= j <= n*hi, computed exactly from the float inputs."""
    return math.ceil(Fraction(lo) * n), math.floor(Fraction(hi) * n)


@dataclass(frozen=True)
class BoxRegion:
    lo: tuple
    hi: tuple

    def __post_init__(self):
        lo = tuple(float(c) for c in np.atleast_1d(self.lo))
        hi = tuple(float(c) for c in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not all(a < b for a, b in zip(lo, hi)):
            raise InvalidSpecError(f"box needs lo < hi coordinatewise, got {lo}, {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def d(self):
        return len(self.lo)

    @property
    def volume(self):
        return float(np.prod([b - a for a, b in zip(self.lo, self.hi)]))

    def lattice_window(self, n):
        """Smallest LatticeWindow holding Z^d ∩ nA, or None when that set is empty."""
        ranges = [_lattice_range(a, b, n) for a, b in zip(self.lo, self.hi)]
        if any(a > b for a, b in ranges):
            return None
        return LatticeWindow(tuple(a for a, _ in ranges), tuple(b for _, b in ranges))

    def lattice_count(self, n):
        w = self.lattice_window(n)
        return 0 if w is None else w.size

    def to_record(self):
        return {"lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class TestFunction:
    """Tensor product of trapezoid profiles times an amplitude.

    Each axis is described by breaks ``(a, b, c, e)``: the profile rises
    linearly from 0 at ``a`` to 1 at ``b``, stays at 1 until ``c`` and
    falls back to 0 at ``e``. Rise and fall must have positive width so the
    function is continuous.
    """

    __test__ = False  # keep pytest from collecting this class

    breaks: tuple
    amplitude: float = 1.0

    def __post_init__(self):
        br = np.atleast_2d(np.asarray(self.breaks, dtype=np.float64))
        if br.shape[1] != 4 or not np.all(np.isfinite(br)):
            raise InvalidSpecError(f"each axis needs four finite breaks, got {self.breaks!r}")
        for a, b, c, e in br:
            if not (a < b <= c < e):
                raise InvalidSpecError(
                    f"breaks must satisfy a < b <= c < e (continuous trapezoid), got {(a, b, c, e)}"
                )
        amp = float(self.amplitude)
        if not (np.isfinite(amp) and amp >= 0):
            raise InvalidSpecError(f"amplitude must be finite and nonnegative, got {amp}")
        object.__setattr__(self, "breaks", tuple(tuple(float(v) for v in row) for row in br))
        object.__setattr__(self, "amplitude", amp)

    @property
    def d(self):
        return len(self.breaks)

    @property
    def sup_norm(self):
        # every profile reaches 1 on [b, c], which is nonempty since b <= c
        return self.amplitude

    @property
    def support(self):
        return BoxRegion(tuple(r[0] for r in self.breaks), tuple(r[3] for r in self.breaks))

    @property
    def support_volume(self):
        return float(np.prod([e - a for a, _, _, e in self.breaks]))

    def scaled(self, factor):
        return TestFunction(self.breaks, self.amplitude * factor)

    def profile(self, axis, x):
        a, b, c, e = self.breaks[axis]
        x = np.asarray(x, dtype=np.float64)
        rise = (x - a) / (b - a)
        fall = (e - x) / (e - c)
        return np.clip(np.minimum(rise, fall), 0.0, 1.0)

    def __call__(self, x):
        """Evaluate at points of shape (..., d) (or scalars when d = 1)."""
        x = np.asarray(x, dtype=np.float64)
        if self.d == 1 and (x.ndim == 0 or x.shape[-1] != 1):
            x = x[..., None]
        val = np.full(x.shape[:-1], self.amplitude)
        for i in range(self.d):
            val = val * self.profile(i, x[..., i])
        return val

    def to_record(self):
        return {"breaks": [list(r) for r in self.breaks], "amplitude": self.amplitude}

    @classmethod
    def from_record(cls, rec):
        try:
            return cls(rec["breaks"], rec.get("amplitude", 1.0))
        except (KeyError, TypeError) as exc:
            raise InvalidSpecError(f"bad test function record {rec!r}: {exc}") from exc


def lattice_support(f, n):
    """Z^d ∩ n·supp(f) as an int64 array of shape (count, d)."""
    w = f.support.lattice_window(n)
    if w is None:
        return np.empty((0, f.d), dtype=np.int64)
    return w.sites()


def support_constant(f):
    """``K = prod(e_i - a_i + 1)``, so that ``|lattice_support(f, n)| <= K n**d``."""
    return float(np.prod([e - a + 1 for a, _, _, e in f.breaks]))


def lattice_weights(f, n):
    """Sites of the lattice support and the weights ``f(j/n)`` there."""
    sites = lattice_support(f, n)
    return sites, f(sites / n)


def _require_cover(sample, window, what):
    if window is not None and not sample.window.contains(window):
        raise PreconditionError(
            f"sample window {sample.window.lo}..{sample.window.hi} does not cover "
            f"the lattice points of {what} ({window.lo}..{window.hi})"
        )


def measure_of_box(sample, A):
    """``mu_n(A)``: number of sites j in Z^d ∩ nA (closed box) with X_j = 1."""
    w = A.lattice_window(sample.spec.n)
    if w is None:
        return 0
    _require_cover(sample, w, "nA")
    return int(sample.x_at(w.sites()).sum())


def integral(f, sample):
    """``∫ f dmu_n = sum_j f(j/n) X_j`` over the lattice support of f."""
    n = sample.spec.n
    _require_cover(sample, f.support.lattice_window(n), "n·supp(f)")
    sites, w = lattice_weights(f, n)
    if len(sites) == 0:
        return 0.0
    return float(sample.x_at(sites).astype(np.float64) @ w)


def _simpson_axis(breaks, panels):
    """Nodes and composite Simpson weights on [a,b], [b,c], [c,e] with ``panels`` each."""
    a, b, c, e = breaks
    nodes, weights = [], []
    for lo, hi in ((a, b), (b, c), (c, e)):
        if hi <= lo:
            continue
        h = (hi - lo) / panels
        x = lo + h * np.arange(panels + 1)
        x[-1] = hi
        w = np.full(panels + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        nodes.append(x)
        weights.append(w * h / 3.0)
    return np.concatenate(nodes), np.concatenate(weights)


def _simpson_estimate(f, theta, panels):
    """Simpson estimate of ∫ (exp(i theta f(x)/amp) - 1) dx, theta = t*scale*amp."""
    axes = [_simpson_axis(br, panels) for br in f.breaks]
    nodes = 1
    for x, _ in axes:
        nodes *= len(x)
    if nodes > MAX_GRID_NODES:
        return None
    g = np.ones(())
    w = np.ones(())
    for i, (x, wx) in enumerate(axes):
        g = np.multiply.outer(g, f.profile(i, x))
        w = np.multiply.outer(w, wx)
    arg = theta * g
    re = float(np.sum(w * (np.cos(arg) - 1.0)))
    im = float(np.sum(w * np.sin(arg)))
    return complex(re, im)


def quadrature(f, t, scale=1.0):
    """``∫_{R^d} (exp(i t scale f(x)) - 1) dx`` by tensor-product composite Simpson.

    Each axis is split at the trapezoid breaks so the integrand is smooth on
    every cell; panels per cell are doubled until successive estimates
    differ by less than ``QUAD_TOL``.

    Raises
    ------
    NumericalAccuracyError
        If the panel cap is reached first. The last two estimates are
        attached as ``exc.estimates``.
    """
    t, scale = float(t), float(scale)
    if not (np.isfinite(t) and np.isfinite(scale)):
        raise InvalidSpecError("t and scale must be finite")
    theta = t * scale * f.amplitude
    if theta == 0.0:
        return 0j
    panels = 2
    estimates = [_simpson_estimate(f, theta, panels)]
    while 3 * panels * 2 <= MAX_PANELS:
        panels *= 2
        cur = _simpson_estimate(f, theta, panels)
        if cur is None or estimates[-1] is None:
            break
        if abs(cur - estimates[-1]) < QUAD_TOL:
            return cur
        estimates.append(cur)
    raise NumericalAccuracyError(
        f"quadrature did not reach tolerance {QUAD_TOL} before the panel cap",
        estimates=tuple(e for e in estimates[-2:] if e is not None),
    )
