"""Online randomised integration algorithms and built-in test integrands.

Randomness comes from a SplitMix64 generator specified bit-exactly below,
so identical (seed, repetitions) configurations reproduce byte-identical
estimate streams on any platform.  Each repetition derives its own stream
from (seed, repetition index), making parallel and serial runs agree.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import cbc
from .errors import BoundParams, default_lambda_grid, good_set_threshold, omega_weight
from .kernels import DomainError, KorobovSpaceParams, r_alpha, sigma_alpha
from .primes import PrimePool, ResidueVector, build_prime_pool

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """SplitMix64 output mix (Steele/Lea/Flood finaliser)."""
    x &= _MASK64
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB & _MASK64
    return x ^ (x >> 31)


class SplitMix64:
    """Counter-based 64-bit generator: out_i = mix64(seed + (i+1) * GOLDEN)."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GOLDEN) & _MASK64
        return _mix64(self._state)

    def next_below(self, m: int) -> int:
        """Uniform draw from {0, ..., m-1} by rejection (no modulo bias)."""
        if m <= 0:
            raise DomainError(f"modulus must be positive, got {m}")
        limit = (1 << 64) - ((1 << 64) % m)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % m


def stream_seed(seed: int, index: int) -> int:
    """Per-repetition stream seed: mix64(seed) XOR mix64(index + 1)."""
    return _mix64(seed & _MASK64) ^ _mix64((index + 1) & _MASK64)


class SamplingFailureError(RuntimeError):
    """Rejection sampling exceeded its try cap (indicates a threshold bug)."""


@dataclass(frozen=True)
class Integrand:
    """Vectorised integrand on [0,1)^d with an optional known integral."""

    evaluate: Callable[[np.ndarray], np.ndarray]  # (m, d) -> (m,)
    d: int
    known_integral: Optional[float] = None
    description: str = ""

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return self.evaluate(points)


def constant_integrand(d: int, c: float = 1.0) -> Integrand:
    return Integrand(
        evaluate=lambda x: np.full(len(x), c),
        d=d, known_integral=c, description=f"constant {c}",
    )


def product_cosine(d: int) -> Integrand:
    """f(x) = prod_j (1 + cos(2 pi x_j) / j^2); integral 1."""
    coeffs = 1.0 / np.arange(1, d + 1, dtype=float) ** 2

    def f(x: np.ndarray) -> np.ndarray:
        return np.prod(1.0 + coeffs * np.cos(2.0 * math.pi * x), axis=1)

    return Integrand(evaluate=f, d=d, known_integral=1.0,
                     description="product cosine")


def product_bernoulli(params: KorobovSpaceParams) -> Integrand:
    """f(x) = prod_j (1 + gamma_j sigma_alpha(x_j)); integral 1, lies in the space."""
    gam = np.asarray(params.gamma)

    def f(x: np.ndarray) -> np.ndarray:
        return np.prod(1.0 + gam * sigma_alpha(x, params.alpha), axis=1)

    return Integrand(evaluate=f, d=params.d, known_integral=1.0,
                     description="product Bernoulli kernel")


def truncated_extremal(
    v: ResidueVector, params: KorobovSpaceParams, hmax: int
) -> Integrand:
    """Unit-norm truncation of the worst-case fit function for the fixed-vector rule.

    f(x) = (1/c) sum over the |h_j| <= hmax box, h != 0, of
    omega_n(h) r_alpha^{-2}(h) cos(2 pi h . x), with c chosen so ||f|| = 1.
    Integral is 0.
    """
    d = params.d
    h1 = np.arange(-hmax, hmax + 1, dtype=np.int64)
    grids = np.meshgrid(*([h1] * d), indexing="ij")
    H = np.stack([g.ravel() for g in grids], axis=1)
    H = H[np.any(H != 0, axis=1)]
    coeff = np.array(
        [omega_weight(h, v) / r_alpha(params, h) ** 2 for h in H]
    )
    keep = coeff > 0.0
    H, coeff = H[keep], coeff[keep]
    norm = math.sqrt(
        math.fsum(c * c * r_alpha(params, h) ** 2 for c, h in zip(coeff, H))
    )

    def f(x: np.ndarray) -> np.ndarray:
        phase = 2.0 * math.pi * (x @ H.T)
        return (np.cos(phase) @ coeff) / norm

    return Integrand(evaluate=f, d=d, known_integral=0.0,
                     description=f"truncated extremal fit (|h|<={hmax})")


@dataclass(frozen=True)
class RunConfig:
    """Seed, repetition count and relaxation parameter for the online runs."""

    seed: int
    repetitions: int
    tau: float = 0.5

    def __post_init__(self) -> None:
        if self.repetitions < 1:
            raise DomainError("repetitions must be >= 1")


def lattice_points(n: int, z) -> np.ndarray:
    """Points {k z mod n}/n for k = 0..n-1; z is reduced mod n first.

    Reducing z before forming k * z keeps every product below n^2, so no
    integer overflow can occur at supported scales.
    """
    zmod = np.asarray(z, dtype=np.int64) % n
    k = np.arange(n, dtype=np.int64)
    return (k[:, None] * zmod[None, :] % n) / n


def lattice_rule(f: Integrand, n: int, z) -> float:
    """Equal-weight average of f over the n-point rank-1 lattice."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return float(math.fsum(f(lattice_points(n, z))) / n)


def run_rpfv(f: Integrand, v: ResidueVector, cfg: RunConfig) -> np.ndarray:
    """Random-prime fixed-vector algorithm: draw p uniformly, use z* mod p.

    Since each repetition's estimate depends only on the drawn prime, the
    per-prime rule values are computed once and indexed by the draws.
    """
    if f.d != v.d:
        raise DomainError(f"integrand dimension {f.d} != vector dimension {v.d}")
    primes = v.pool.primes
    per_prime = np.array(
        [lattice_rule(f, p, res) for p, res in zip(primes, v.residues)]
    )
    out = np.empty(cfg.repetitions)
    for i in range(cfg.repetitions):
        rng = SplitMix64(stream_seed(cfg.seed, i))
        out[i] = per_prime[rng.next_below(len(primes))]
    return out


def _good_component_set(
    state: cbc.CbcState, tau: float
) -> np.ndarray:
    """Indices of the ceil(tau p) smallest-theta candidates (stable order)."""
    theta = cbc.theta_all(state)
    m = math.ceil(tau * state.p)
    return np.argsort(theta, kind="stable")[:m]


def run_rp_cbc(
    f: Integrand,
    n: int,
    params: KorobovSpaceParams,
    tau: float,
    cfg: RunConfig,
) -> np.ndarray:
    """Random-prime random-CBC-vector: z_1 = 1, then each z_s uniform among
    the ceil(tau p) best-theta candidates for the drawn prime."""
    pool = build_prime_pool(n)
    good_cache: dict[tuple[int, tuple[int, ...]], np.ndarray] = {}
    out = np.empty(cfg.repetitions)
    for i in range(cfg.repetitions):
        rng = SplitMix64(stream_seed(cfg.seed, i))
        p = pool.primes[rng.next_below(len(pool.primes))]
        z = [1]
        for _ in range(2, params.d + 1):
            key = (p, tuple(z))
            good = good_cache.get(key)
            if good is None:
                state = cbc.CbcState(p=p, g=pool.root_of(p), params=params)
                for zj in z:
                    state.extend(zj)
                good = _good_component_set(state, tau)
                good_cache[key] = good
            z.append(int(good[rng.next_below(len(good))]))
        out[i] = lattice_rule(f, p, z)
    return out


def run_rp_rv(
    f: Integrand,
    n: int,
    params: KorobovSpaceParams,
    tau: float,
    cfg: RunConfig,
    max_tries: int = 10_000,
) -> np.ndarray:
    """Random-prime random-vector: rejection-sample z uniform over the good set.

    Acceptance probability is at least tau, so the try cap should never bind;
    hitting it raises SamplingFailureError.
    """
    from .errors import worst_case_error_sq  # local import avoids cycle at module load

    pool = build_prime_pool(n)
    bounds = BoundParams(tau=tau, lambda_grid=default_lambda_grid(params.alpha))
    thresholds = {
        p: good_set_threshold(p, params, bounds) ** 2 for p in pool.primes
    }
    ecache: dict[tuple[int, tuple[int, ...]], float] = {}
    out = np.empty(cfg.repetitions)
    for i in range(cfg.repetitions):
        rng = SplitMix64(stream_seed(cfg.seed, i))
        p = pool.primes[rng.next_below(len(pool.primes))]
        for _ in range(max_tries):
            z = tuple(rng.next_below(p) for _ in range(params.d))
            e2 = ecache.get((p, z))
            if e2 is None:
                e2 = worst_case_error_sq(p, z, params)
                ecache[(p, z)] = e2
            if e2 <= thresholds[p]:
                break
        else:
            raise SamplingFailureError(
                f"no accepted vector for p={p} within {max_tries} tries"
            )
        out[i] = lattice_rule(f, p, z)
    return out
