"""Counter-based random bits addressed by (seed, lattice site).

Every underlying Bernoulli variable is a pure function of a 64-bit stream
key and its absolute lattice coordinates, so two windows sampled with the
same seed agree on their overlap and the result never depends on how work
is split across threads.
"""

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_REPLICATE_SALT = 0xD1B54A32D192ED03

U64_MAX = 2**64 - 1


def mix64(z):
    """SplitMix64 finalizer applied elementwise to a uint64 array (wraps mod 2**64)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def check_seed(seed):
    seed = int(seed)
    if not 0 <= seed <= U64_MAX:
        raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return seed


def derive_seed(master_seed, replicate):
    """Seed of replicate ``replicate`` under ``master_seed``.

    Deterministic in both arguments; ``sample_field(spec, window,
    derive_seed(s, r))`` reproduces replicate ``r`` of any batched run with
    master seed ``s``.
    """
    master_seed = check_seed(master_seed)
    r = np.asarray(replicate, dtype=np.uint64)
    with np.errstate(over="ignore"):
        key = mix64(np.uint64(master_seed) ^ np.uint64(_REPLICATE_SALT))
        out = mix64(key + (r + np.uint64(1)) * _GAMMA)
    if out.ndim == 0:
        return int(out)
    return out


def site_uniforms(seeds, coords):
    """Uniforms in [0, 1) for every (seed, site) pair.

    Parameters
    ----------
    seeds : uint64 array of shape (R,)
        Stream keys, one per replicate.
    coords : int array of shape (S, d)
        Absolute lattice coordinates.

    Returns
    -------
    float64 array of shape (R, S)
    """
    seeds = np.atleast_1d(np.asarray(seeds, dtype=np.uint64))
    coords = np.asarray(coords, dtype=np.int64)
    with np.errstate(over="ignore"):
        h = mix64(seeds)[:, None]
        for axis in range(coords.shape[1]):
            c = coords[:, axis].astype(np.uint64)[None, :]
            h = mix64(h + (c + np.uint64(1)) * _GAMMA)
    return (h >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def bernoulli_sites(seeds, coords, prob):
    """0/1 uint8 array of shape (R, S): site uniforms thresholded at ``prob``."""
    u = site_uniforms(seeds, coords)
    return (u < prob).astype(np.uint8)
