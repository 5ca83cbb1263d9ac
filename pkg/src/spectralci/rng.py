"""Counter-based random streams.

Every stochastic routine takes a :class:`Seed` naming a (base, stream)
pair.  The pair is the whole state: stream k of base b produces the same
draws no matter which machine, thread, or call order asks for it, which
is what makes the replication driver schedule-invariant.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["Seed", "standard_normal"]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class Seed:
    """Name of one reproducible random stream."""

    base: int
    stream: int = 0

    def __post_init__(self):
        for name in ("base", "stream"):
            value = getattr(self, name)
            if not 0 <= int(value) < 2**64:
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {value!r}")

    def child(self, stream):
        """Same base, different stream."""
        return Seed(self.base, stream)

    def generator(self):
        """A fresh Philox generator keyed by (base, stream)."""
        key = (int(self.stream) << 64) | int(self.base)
        return np.random.Generator(np.random.Philox(key=key))


def standard_normal(rng, shape):
    """Draw N(0, 1) variates via the Box-Muller transform.

    Consumes the generator only through its 53-bit uniform stream, so
    output is a pure function of the seed independent of any library's
    normal-sampling internals.
    """
    shape = (int(shape),) if np.isscalar(shape) else tuple(int(s) for s in shape)
    count = int(np.prod(shape, dtype=np.int64))
    pairs = (count + 1) // 2
    u1 = rng.random(pairs)
    u2 = rng.random(pairs)
    radius = np.sqrt(-2.0 * np.log1p(-u1))  # log1p(-u) keeps u = 0 finite
    angle = _TWO_PI * u2
    flat = np.concatenate([radius * np.cos(angle), radius * np.sin(angle)])[:count]
    return flat.reshape(shape)
