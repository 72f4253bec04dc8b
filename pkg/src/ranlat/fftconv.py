"""Arbitrary-length cyclic convolution and the Rader-style candidate-sweep kernel.

Cyclic convolution of odd length L (typically p - 1) is computed as a
zero-padded linear convolution at the next power of two >= 2L - 1.  The
Rader kernel maps a multiplicative sum over Z_p onto such a convolution
using a primitive root, which evaluates the CBC search criteria for all
candidate residues at once in O(p log p).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .primes import is_prime, _prime_factors


class ShapeError(ValueError):
    """Raised on mismatched vector lengths."""


class InvalidRootError(ValueError):
    """Raised when the supplied generator is not a primitive root."""


def next_pow2(m: int) -> int:
    return 1 << max(0, (m - 1).bit_length())


@dataclass(frozen=True)
class ConvolutionPlan:
    """Transform sizing for cyclic convolutions of a fixed length."""

    length: int
    padded_length: int

    @classmethod
    def for_length(cls, length: int) -> "ConvolutionPlan":
        if length < 1:
            raise ShapeError(f"length must be >= 1, got {length}")
        return cls(length=length, padded_length=next_pow2(2 * length - 1))


def cyclic_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """c[m] = sum_k a[k] b[(m - k) mod L] along the last axis.

    Inputs may carry leading batch axes (broadcast against each other).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape[-1] != b.shape[-1]:
        raise ShapeError(f"length mismatch: {a.shape[-1]} vs {b.shape[-1]}")
    L = a.shape[-1]
    if L == 1:
        return a * b
    M = next_pow2(2 * L - 1)
    fa = np.fft.rfft(a, M, axis=-1)
    fb = np.fft.rfft(b, M, axis=-1)
    lin = np.fft.irfft(fa * fb, M, axis=-1)[..., : 2 * L - 1]
    out = lin[..., :L].copy()
    out[..., : L - 1] += lin[..., L:]
    return out


def check_primitive_root(p: int, g: int) -> None:
    if not is_prime(p):
        raise InvalidRootError(f"{p} is not prime")
    if p == 2:
        if g % 2 != 1:
            raise InvalidRootError(f"{g} is not a primitive root of 2")
        return
    if g % p == 0 or any(pow(g, (p - 1) // q, p) == 1 for q in _prime_factors(p - 1)):
        raise InvalidRootError(f"{g} is not a primitive root of {p}")


def power_permutation(p: int, g: int) -> np.ndarray:
    """powers[a] = g^a mod p for a = 0..p-2."""
    out = np.empty(p - 1, dtype=np.int64)
    acc = 1
    for a in range(p - 1):
        out[a] = acc
        acc = acc * g % p
    return out


def rader_cbc_kernel(
    p: int, g: int, values: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """S[z] = sum_{k in Z_p} values[(k z) mod p] * weights[k] for every z in Z_p.

    Splits off the k = 0 and z = 0 terms, reindexes k = g^a and z = g^{-b},
    and reduces to a cyclic convolution of length p - 1.  values/weights may
    carry a leading batch axis; the result has the matching shape (..., p).
    """
    check_primitive_root(p, g)
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape[-1] != p or w.shape[-1] != p:
        raise ShapeError(f"values and weights must have length p={p}")
    batch = np.broadcast_shapes(v.shape[:-1], w.shape[:-1])
    v = np.broadcast_to(v, batch + (p,))
    w = np.broadcast_to(w, batch + (p,))

    L = p - 1
    powers = power_permutation(p, g)
    t = v[..., powers]  # t[a] = v[g^a]
    u = w[..., powers]  # u[a] = w[g^a]
    t_rev = t[..., (-np.arange(L)) % L]
    c = cyclic_convolve(t_rev, u)  # c[b] = sum_a v[g^(a-b)] w[g^a]

    S = np.empty(batch + (p,), dtype=float)
    S[..., 0] = v[..., 0] * w.sum(axis=-1)
    z_index = powers[(L - np.arange(L)) % L]  # z = g^{-b}
    S[..., z_index] = v[..., :1] * w[..., :1] + c
    return S


def rader_cbc_kernel_naive(
    p: int, values: np.ndarray, weights: np.ndarray
) -> np.ndarray:
    """O(p^2) reference evaluation of the candidate sweep."""
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.shape != (p,) or w.shape != (p,):
        raise ShapeError(f"naive kernel expects 1-D inputs of length p={p}")
    k = np.arange(p)
    out = np.empty(p)
    for z in range(p):
        out[z] = float(v[(k * z) % p] @ w)
    return out
