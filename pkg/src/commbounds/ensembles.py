"""Seeded random-matrix ensembles.

Randomness comes from numpy's PCG64 bit generator with standard normals drawn
by numpy's ziggurat sampler. Trials are grouped in blocks of
:data:`BLOCK_SIZE`; block ``b`` of stream ``stream`` under ``seed`` draws from
``PCG64(SeedSequence(seed, spawn_key=(stream, b)))``. Each block is an
independent substream, so blocks can be generated in any order or in parallel
and trial ``t`` can be regenerated from ``(seed, stream, t)`` alone.
A block always draws the full ``BLOCK_SIZE`` matrices, so its contents do not
depend on the campaign's trial count.
"""

from dataclasses import asdict, dataclass

import numpy as np

BLOCK_SIZE = 256

KINDS = (
    "gaussian",
    "symmetric",
    "diagonal",
    "orthogonal-conjugated-diagonal",
    "nilpotent-upper",
    "zero",
)


@dataclass(frozen=True)
class EnsembleSpec:
    n: int
    kind: str = "gaussian"
    count: int = 1
    seed: int = 0
    stream: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.kind not in KINDS:
            raise ValueError(f"unknown ensemble kind {self.kind!r}; expected one of {KINDS}")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.stream < 0:
            raise ValueError("stream must be non-negative")

    @property
    def blocks(self):
        return -(-self.count // BLOCK_SIZE)

    def to_dict(self):
        return asdict(self)


def block_rng(spec, block):
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(spec.seed, spawn_key=(spec.stream, block)))
    )


def _haar_orthogonal(g):
    q, r = np.linalg.qr(g)
    signs = np.sign(np.diagonal(r, axis1=-2, axis2=-1))
    signs[signs == 0] = 1.0
    return q * signs[..., None, :]


def _shape(kind, g, rng):
    n = g.shape[-1]
    if kind == "gaussian":
        return g
    if kind == "symmetric":
        return 0.5 * (g + np.swapaxes(g, -1, -2))
    if kind == "diagonal":
        return g * np.eye(n)
    if kind == "nilpotent-upper":
        return np.triu(g, 1)
    if kind == "orthogonal-conjugated-diagonal":
        d = rng.standard_normal(g.shape[:-1])
        q = _haar_orthogonal(g)
        m = (q * d[..., None, :]) @ np.swapaxes(q, -1, -2)
        return 0.5 * (m + np.swapaxes(m, -1, -2))
    if kind == "zero":
        return np.zeros_like(g)
    raise ValueError(kind)


def sample_block(spec, block):
    """Matrices ``block * BLOCK_SIZE`` up to the end of that block (or of the
    ensemble, if it ends first), as a ``(k, n, n)`` array."""
    if not 0 <= block < spec.blocks:
        raise IndexError(f"block {block} out of range")
    rng = block_rng(spec, block)
    g = rng.standard_normal((BLOCK_SIZE, spec.n, spec.n))
    full = _shape(spec.kind, g, rng)
    stop = min(BLOCK_SIZE, spec.count - block * BLOCK_SIZE)
    return np.ascontiguousarray(full[:stop])


def sample(spec):
    """Stream every matrix of the ensemble in trial order."""
    for block in range(spec.blocks):
        yield from sample_block(spec, block)


def draw(spec, offset):
    """The single matrix at trial ``offset``."""
    if not 0 <= offset < spec.count:
        raise IndexError(f"offset {offset} out of range")
    block, index = divmod(offset, BLOCK_SIZE)
    return sample_block(spec, block)[index]
