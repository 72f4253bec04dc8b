"""Prime pools, primitive roots and the residue representation of generating vectors.

The budget-n prime pool is the set of primes in (n/2, n].  A generating
vector modulo N = prod(p in pool) is stored as per-prime residue tuples;
the huge integer representative is only materialised on request through
the Chinese remainder theorem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np


class NotPrimeError(ValueError):
    """Raised when an argument expected to be prime is composite."""


class BudgetTooSmallError(ValueError):
    """Raised when the budget n is too small to yield a nonempty prime pool."""


def sieve_primes(limit: int) -> list[int]:
    """All primes <= limit via the sieve of Eratosthenes."""
    if limit < 2:
        return []
    mask = np.ones(limit + 1, dtype=bool)
    mask[:2] = False
    for p in range(2, int(limit ** 0.5) + 1):
        if mask[p]:
            mask[p * p :: p] = False
    return [int(p) for p in np.flatnonzero(mask)]


# Deterministic Miller-Rabin witnesses, valid for all n < 3.3e24.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin primality test (exact for 64-bit inputs)."""
    if n < 2:
        return False
    for p in _MR_WITNESSES:
        if n % p == 0:
            return n == p
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _prime_factors(n: int) -> list[int]:
    out = []
    f = 2
    while f * f <= n:
        if n % f == 0:
            out.append(f)
            while n % f == 0:
                n //= f
        f += 1
    if n > 1:
        out.append(n)
    return out


def primitive_root(p: int) -> int:
    """Smallest generator of the multiplicative group modulo prime p."""
    if not is_prime(p):
        raise NotPrimeError(f"primitive_root requires a prime, got {p}")
    if p == 2:
        return 1
    factors = _prime_factors(p - 1)
    for g in range(2, p):
        if all(pow(g, (p - 1) // q, p) != 1 for q in factors):
            return g
    raise AssertionError(f"no primitive root found for prime {p}")  # unreachable


@dataclass(frozen=True)
class PrimePool:
    """Primes in (n/2, n] for budget n, with their primitive roots."""

    n: int
    primes: tuple[int, ...]
    primitive_roots: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.primes)

    def root_of(self, p: int) -> int:
        return self.primitive_roots[self.primes.index(p)]

    @property
    def modulus(self) -> int:
        """N = product of the pool primes (arbitrary precision)."""
        return reduce(lambda a, b: a * b, self.primes, 1)


def build_prime_pool(n: int) -> PrimePool:
    """Complete sorted pool of primes in (n/2, n] with verified primitive roots."""
    if n < 4:
        raise BudgetTooSmallError(f"budget must be >= 4 to guarantee a prime in (n/2, n], got {n}")
    primes = tuple(p for p in sieve_primes(n) if 2 * p > n)
    # Bertrand's postulate guarantees nonemptiness for n >= 4.
    assert primes, f"empty pool at n={n}"
    # Advisory lower bound on the pool size: |P_n| > 0.23 n / ln n.
    assert len(primes) > 0.23 * n / math.log(n), (
        f"pool size {len(primes)} below the 0.23 n/ln n lower bound at n={n}"
    )
    roots = tuple(primitive_root(p) for p in primes)
    return PrimePool(n=n, primes=primes, primitive_roots=roots)


@dataclass(frozen=True)
class ResidueVector:
    """Generating vector stored as per-prime residue tuples.

    residues[i] holds (z_1, ..., z_d) modulo pool.primes[i].  Constructed
    vectors always have z_1 = 1 for every prime; synthetic vectors used in
    tests may violate that, so it is not enforced here.
    """

    pool: PrimePool
    residues: tuple[tuple[int, ...], ...]
    d: int

    def __post_init__(self) -> None:
        if len(self.residues) != len(self.pool.primes):
            raise ValueError("one residue tuple per pool prime required")
        for p, res in zip(self.pool.primes, self.residues):
            if len(res) != self.d:
                raise ValueError(f"residue tuple for p={p} has wrong dimension")
            if any(not (0 <= r < p) for r in res):
                raise ValueError(f"residues for p={p} must lie in [0, {p})")

    def residues_for(self, p: int) -> tuple[int, ...]:
        return self.residues[self.pool.primes.index(p)]

    def truncated(self, d: int) -> "ResidueVector":
        """Restriction to the first d components (usable for any d' <= d)."""
        if not 1 <= d <= self.d:
            raise ValueError(f"cannot truncate dimension {self.d} to {d}")
        return ResidueVector(
            pool=self.pool,
            residues=tuple(res[:d] for res in self.residues),
            d=d,
        )


def crt_pair(r1: int, m1: int, r2: int, m2: int) -> int:
    """Unique x in [0, m1 m2) with x = r1 (mod m1) and x = r2 (mod m2)."""
    inv = pow(m2, -1, m1)
    return (r2 + m2 * ((r1 - r2) * inv % m1)) % (m1 * m2)


def crt_reconstruct(v: ResidueVector, component: int) -> int:
    """The unique z_j in Z_N with z_j = z_j^(p) (mod p) for every pool prime.

    component is 0-based.  Exact arbitrary-precision arithmetic; intended
    for export and display only.
    """
    x, m = 0, 1
    for p, res in zip(v.pool.primes, v.residues):
        x = crt_pair(res[component], p, x, m)
        m *= p
    return x
