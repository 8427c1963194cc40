"""Deterministic seed derivation.

Every stochastic component (field realizations, bootstrap resamples,
fold shuffles, ...) receives its own 64-bit seed derived from a base
seed and one or more integer indices through the SplitMix64 mixer.
Derivation is a pure function, so results never depend on execution
order or worker count.
"""

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def splitmix64(state: int) -> int:
    """One output of the SplitMix64 finalizer for ``state``."""
    z = state & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(base: int, *indices: int) -> int:
    """Mix ``base`` with each index in turn; returns a 64-bit seed.

    With no indices the base itself is passed through the mixer once,
    so raw user seeds never reach a generator unmixed.
    """
    s = base & MASK64
    if not indices:
        return splitmix64(s)
    for ix in indices:
        s = splitmix64((s ^ (((ix + 1) * GOLDEN) & MASK64)) & MASK64)
    return s


def sample_seed(base_seed: int, sample_id: int) -> int:
    """Per-sample realization seed for a Monte Carlo campaign."""
    return derive_seed(base_seed, sample_id)
