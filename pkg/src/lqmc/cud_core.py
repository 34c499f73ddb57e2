"""Full-period LFSR (Tausworthe) driving sequences and uniformity diagnostics.

A binary LFSR of order ``m`` with a primitive characteristic polynomial
runs through every nonzero ``m``-bit state exactly once per period
``n = 2**m - 1``.  Reading ``m``-bit windows at stride ``s`` (the offset,
coprime with ``n``) and interpreting them as binary fractions yields a
sequence of ``n`` distinct scalars in (0, 1) — one in each dyadic interval
``(k/2**m, (k+1)/2**m]``.  Used over its entire period this is the
completely-uniformly-distributed drive for the samplers in this package.

Uniformity is measured by the exact star discrepancy in one and two
dimensions (higher dimensions are out of reach for exact computation and
are diagnosed via projections).
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, DomainError, SizeError

# ---------------------------------------------------------------------------
# GF(2) polynomials
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Gf2Poly:
    """Monic binary polynomial x^m + a_{m-1} x^{m-1} + ... + a_1 x + a_0.

    ``coeffs[j]`` is a_j; the leading coefficient is implicit.  a_0 must be
    1, otherwise x divides the polynomial and it cannot be primitive.
    """

    degree: int
    coeffs: tuple[int, ...]

    def __post_init__(self):
        if self.degree < 2:
            raise ConfigurationError(f"degree must be >= 2, got {self.degree}")
        if len(self.coeffs) != self.degree:
            raise ConfigurationError(
                f"expected {self.degree} coefficients, got {len(self.coeffs)}"
            )
        if any(c not in (0, 1) for c in self.coeffs):
            raise ConfigurationError("coefficients must be bits")
        if self.coeffs[0] != 1:
            raise ConfigurationError("constant coefficient a_0 must be 1")

    @property
    def mask(self) -> int:
        """Integer encoding with bit j = coefficient of x^j (leading bit set)."""
        m = 1 << self.degree
        for j, c in enumerate(self.coeffs):
            m |= c << j
        return m

    @classmethod
    def from_mask(cls, mask: int) -> "Gf2Poly":
        degree = mask.bit_length() - 1
        return cls(degree, tuple((mask >> j) & 1 for j in range(degree)))

    def __str__(self) -> str:
        terms = ["x^%d" % self.degree]
        for j in range(self.degree - 1, 0, -1):
            if self.coeffs[j]:
                terms.append("x" if j == 1 else "x^%d" % j)
        terms.append("1")
        return " + ".join(terms)


def _gf2_mulmod(a: int, b: int, f: int, m: int) -> int:
    """Carry-less multiply of a and b, reduced modulo f (degree m)."""
    r = 0
    while b:
        if b & 1:
            r ^= a
        b >>= 1
        a <<= 1
        if (a >> m) & 1:
            a ^= f
    return r


def _gf2_powmod(base: int, exp: int, f: int, m: int) -> int:
    r = 1
    while exp:
        if exp & 1:
            r = _gf2_mulmod(r, base, f, m)
        base = _gf2_mulmod(base, base, f, m)
        exp >>= 1
    return r


def _gf2_mod(a: int, b: int) -> int:
    """Remainder of binary-polynomial long division a mod b."""
    db = b.bit_length()
    while a.bit_length() >= db:
        a ^= b << (a.bit_length() - db)
    return a


def _gf2_gcd(a: int, b: int) -> int:
    while b:
        a, b = b, _gf2_mod(a, b)
    return a


@functools.cache
def _primes_to(limit: int) -> tuple[int, ...]:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(limit**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return tuple(int(p) for p in np.nonzero(sieve)[0])


def factorize(n: int) -> list[int]:
    """Prime factors of n (without multiplicity) by trial division.

    Feasible for n < 2**64 with smallest factor <= 2**16, which covers
    every 2**m - 1 with m <= 32.
    """
    factors = []
    for p in _primes_to(1 << 16):
        if p * p > n:
            break
        if n % p == 0:
            factors.append(p)
            while n % p == 0:
                n //= p
    if n > 1:
        factors.append(n)
    return factors


def is_primitive(poly: Gf2Poly) -> bool:
    """Whether ``poly`` is primitive over GF(2).

    Decided by an irreducibility test (Rabin) followed by the order check:
    x has order 2**m - 1 modulo ``poly`` iff x^((2**m-1)/q) != 1 for every
    prime q dividing 2**m - 1.
    """
    m = poly.degree
    if m > 32:
        raise SizeError(f"order {m} unsupported (need 2 <= m <= 32)")
    f = poly.mask
    # Irreducibility: x^(2^m) == x mod f, and gcd(x^(2^(m/q)) - x, f) == 1
    # for each prime q | m.
    x = 2
    t = x
    for _ in range(m):
        t = _gf2_mulmod(t, t, f, m)
    if t != x:
        return False
    for q in factorize(m):
        t = x
        for _ in range(m // q):
            t = _gf2_mulmod(t, t, f, m)
        if _gf2_gcd(t ^ x, f) != 1:
            return False
    # Order check.
    n = (1 << m) - 1
    if _gf2_powmod(x, n, f, m) != 1:
        return False
    return all(_gf2_powmod(x, n // q, f, m) != 1 for q in factorize(n))


# ---------------------------------------------------------------------------
# Built-in generator table
# ---------------------------------------------------------------------------

# One verified primitive polynomial per order (smallest coefficient mask;
# each entry is re-verified by is_primitive in the test suite).  The default
# offset is the smallest integer >= 2 coprime with 2**m - 1, which is 2 for
# every m since the period is odd.
_POLY_MASKS = {
    3: 0xB,
    4: 0x13,
    5: 0x25,
    6: 0x43,
    7: 0x83,
    8: 0x11D,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x402B,
    15: 0x8003,
    16: 0x1002D,
    17: 0x20009,
    18: 0x40027,
    19: 0x80027,
    20: 0x100009,
    21: 0x200005,
    22: 0x400003,
    23: 0x800021,
    24: 0x100001B,
    25: 0x2000009,
    26: 0x4000047,
    27: 0x8000027,
    28: 0x10000009,
    29: 0x20000005,
    30: 0x40000053,
    31: 0x80000009,
    32: 0x1000000AF,
}

DEFAULT_OFFSET = 2
TABLE_RANGE = range(3, 33)


def builtin_poly(m: int) -> Gf2Poly:
    """Table polynomial for order ``m`` (3 <= m <= 32)."""
    if m not in _POLY_MASKS:
        raise ConfigurationError(
            f"m={m} outside built-in table range {TABLE_RANGE.start}..{TABLE_RANGE.stop - 1}"
        )
    return Gf2Poly.from_mask(_POLY_MASKS[m])


def default_seed(m: int) -> tuple[int, ...]:
    """Fixed seed (1, 0, ..., 0): randomization comes from the shift, not here."""
    return (1,) + (0,) * (m - 1)


def table_listing() -> str:
    """Plain-text audit listing: one line per order, `m hex_mask offset`."""
    lines = ["# m  poly_mask_hex  offset"]
    for m in TABLE_RANGE:
        lines.append(f"{m}  0x{_POLY_MASKS[m]:x}  {DEFAULT_OFFSET}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# LFSR bitstream and CUD sequence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LfsrConfig:
    """Fully determines one period-(2**m - 1) driving sequence."""

    poly: Gf2Poly
    offset: int = DEFAULT_OFFSET
    seed: tuple[int, ...] = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.seed is None:
            object.__setattr__(self, "seed", default_seed(self.poly.degree))
        m = self.poly.degree
        if len(self.seed) != m:
            raise ConfigurationError(f"seed must have {m} bits")
        if any(b not in (0, 1) for b in self.seed):
            raise ConfigurationError("seed entries must be bits")
        if not any(self.seed):
            raise ConfigurationError("seed must not be all-zero (absorbing state)")
        n = (1 << m) - 1
        if self.offset < 1 or math.gcd(self.offset, n) != 1:
            raise ConfigurationError(
                f"offset {self.offset} must be positive and coprime with 2^{m}-1={n}"
            )

    @property
    def m(self) -> int:
        return self.poly.degree

    @property
    def period(self) -> int:
        return (1 << self.m) - 1


def builtin_config(m: int, offset: int | None = None) -> LfsrConfig:
    """Table-backed configuration for order ``m`` with optional offset override."""
    return LfsrConfig(builtin_poly(m), DEFAULT_OFFSET if offset is None else offset)


def lfsr_bitstream(config: LfsrConfig, count: int) -> np.ndarray:
    """First ``count`` bits b_0, b_1, ... of the shift-register recursion.

    b_i = sum_j a_j b_{i-m+j} mod 2 for i >= m, with the first m bits equal
    to the seed.  Deterministic in the configuration.
    """
    if count < 0:
        raise DomainError("count must be nonnegative")
    m = config.m
    amask = sum(c << j for j, c in enumerate(config.poly.coeffs))
    state = sum(b << j for j, b in enumerate(config.seed))
    out = np.empty(count, dtype=np.uint8)
    top = m - 1
    for i in range(count):
        out[i] = state & 1
        state = (state >> 1) | (((state & amask).bit_count() & 1) << top)
    return out


def lfsr_period(config: LfsrConfig, cap: int | None = None) -> int:
    """Exact period of the state sequence by brute-force stepping.

    Steps until the initial state recurs; intended for m small enough that
    2**m steps are affordable.
    """
    m = config.m
    amask = sum(c << j for j, c in enumerate(config.poly.coeffs))
    start = sum(b << j for j, b in enumerate(config.seed))
    limit = cap if cap is not None else (1 << m) + 1
    state = start
    top = m - 1
    for i in range(1, limit + 1):
        state = (state >> 1) | (((state & amask).bit_count() & 1) << top)
        if state == start:
            return i
    raise ConfigurationError(f"no period found within {limit} steps")


@dataclass(frozen=True)
class CudSequence:
    """One full period of offset-decimated LFSR fractions.

    ``values[i] = sum_j b_{s*i+j} 2**-(j+1)`` for i = 0..2**m-2: the m-bit
    window starting at bit s*i, read as a binary expansion.  All values are
    distinct, nonzero, and of the form k/2**m.
    """

    values: np.ndarray = field(repr=False)
    config: LfsrConfig

    @property
    def m(self) -> int:
        return self.config.m

    @property
    def n(self) -> int:
        return len(self.values)


def generate_cud(config: LfsrConfig) -> CudSequence:
    """Materialize the full driving sequence for ``config``.

    Requires a primitive characteristic polynomial (so the period really is
    2**m - 1); the offset condition gcd(s, 2**m - 1) = 1 is enforced by
    ``LfsrConfig``.  Memory is O(2**m).
    """
    if not is_primitive(config.poly):
        raise ConfigurationError(
            f"polynomial {config.poly} (mask 0x{config.poly.mask:x}) is not primitive"
        )
    m = config.m
    n = config.period
    # One period plus wrap margin; window start positions reduce mod n.
    bits = lfsr_bitstream(config, n + m - 1)
    starts = (np.arange(n, dtype=np.uint64) * np.uint64(config.offset % n)) % np.uint64(n)
    starts = starts.astype(np.int64)
    values = np.zeros(n, dtype=np.float64)
    for j in range(m):
        values += bits[starts + j] * 2.0 ** -(j + 1)
    return CudSequence(values=values, config=config)


def overlapping_tuples(seq: CudSequence, d: int = 2) -> "PointSet":
    """Cyclic overlapping d-tuples (v_i, ..., v_{i+d-1}), one per period index.

    This is the point set whose equidistribution the CUD property is about;
    used here as a discrepancy diagnostic.
    """
    n = seq.n
    idx = (np.arange(n)[:, None] + np.arange(d)[None, :]) % n
    return PointSet(dimension=d, points=seq.values[idx])


# ---------------------------------------------------------------------------
# Star discrepancy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointSet:
    """Points in [0, 1)^d, rows of ``points``."""

    dimension: int
    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts[:, None]
        if pts.ndim != 2 or pts.shape[1] != self.dimension:
            raise DomainError(
                f"points must be (N, {self.dimension}), got shape {np.shape(self.points)}"
            )
        if pts.size and (pts.min() < 0.0 or pts.max() >= 1.0):
            raise DomainError("coordinates must lie in [0, 1)")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)


def star_discrepancy_1d(points: PointSet) -> float:
    """Exact D*_N for d=1 via the sorted-points formula."""
    if points.dimension != 1:
        raise DomainError("star_discrepancy_1d needs a 1-dimensional point set")
    n = len(points)
    if n == 0:
        raise DomainError("empty point set")
    u = np.sort(points.points[:, 0])
    i = np.arange(1, n + 1)
    return float(np.maximum(i / n - u, u - (i - 1) / n).max())


def star_discrepancy_2d(points: PointSet) -> float:
    """Exact D*_N for d=2 by sweeping the grid of critical corners.

    For anchored half-open boxes the supremum is attained in the limit at
    corners built from the coordinate values (and 1.0), evaluating the
    point count both with and without the boundary:

        D* = max over grid (a, b) of
             max(closed(a, b)/N - ab,  ab - open(a, b)/N)

    where closed counts x <= a, y <= b and open counts strict inequalities.
    O(N^2) time, O(N) memory; guarded at N <= 2**14.
    """
    if points.dimension != 2:
        raise DomainError("star_discrepancy_2d needs a 2-dimensional point set")
    n = len(points)
    if n == 0:
        raise DomainError("empty point set")
    if n > 1 << 14:
        raise SizeError(f"N={n} above the 2^14 exact-computation guard; subsample first")
    x = points.points[:, 0]
    y = points.points[:, 1]
    gy = np.unique(y)
    grid_b = np.append(gy, 1.0)
    yrank = np.searchsorted(gy, y)
    order = np.argsort(x, kind="stable")
    xs = x[order]
    yrs = yrank[order]
    grid_a = np.append(np.unique(x), 1.0)

    hist_closed = np.zeros(len(gy), dtype=np.int64)
    hist_open = np.zeros(len(gy), dtype=np.int64)
    best = 0.0
    ic = io = 0
    for a in grid_a:
        while ic < n and xs[ic] <= a:
            hist_closed[yrs[ic]] += 1
            ic += 1
        while io < n and xs[io] < a:
            hist_open[yrs[io]] += 1
            io += 1
        cum_c = np.cumsum(hist_closed)
        cum_o = np.cumsum(hist_open)
        closed = np.append(cum_c, cum_c[-1] if len(cum_c) else 0)
        opened = np.concatenate(([0], cum_o))
        vol = a * grid_b
        best = max(
            best,
            float((closed / n - vol).max()),
            float((vol - opened / n).max()),
        )
    return best
