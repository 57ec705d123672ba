"""Exact big-integer helpers: roots, powers, primality, logs."""

from __future__ import annotations

import math
import random
from fractions import Fraction

import gmpy2

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def iroot(n: int, k: int) -> tuple[int, bool]:
    """Floor k-th root of n >= 0 plus exactness flag."""
    if n < 0:
        raise ValueError("iroot of negative value")
    r, exact = gmpy2.iroot(gmpy2.mpz(n), k)
    return int(r), bool(exact)


def ceil_pow_frac(base: int, exponent: Fraction) -> int:
    """ceil(base**exponent) computed exactly with integer arithmetic.

    Used for every N**beta style comparison; never goes through floats.
    """
    if base <= 0:
        raise ValueError("base must be positive")
    num, den = exponent.numerator, exponent.denominator
    if num < 0:
        raise ValueError("negative exponent")
    power = int(gmpy2.mpz(base) ** num)
    if den == 1:
        return power
    root, exact = iroot(power, den)
    return root if exact else root + 1


def is_probable_prime(n: int) -> bool:
    """Miller-Rabin with fixed bases (deterministic below 3.3e24)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than n."""
    c = n + 1
    if c <= 2:
        return 2
    if c % 2 == 0:
        c += 1
    while not is_probable_prime(c):
        c += 2
    return c


def log2_int(n: int) -> float:
    """log2 of a positive integer of arbitrary size."""
    if n <= 0:
        raise ValueError("log2 of non-positive value")
    bl = n.bit_length()
    if bl <= 900:
        return math.log2(n)
    top = n >> (bl - 64)
    return math.log2(top) + (bl - 64)


def ln_int(n: int) -> float:
    return log2_int(n) * math.log(2.0)


def random_nbits(rng: random.Random, bits: int) -> int:
    """Uniform integer with exactly `bits` bits (top bit set)."""
    if bits <= 0:
        raise ValueError("bits must be positive")
    if bits == 1:
        return 1
    return (1 << (bits - 1)) | rng.getrandbits(bits - 1)


def balanced_mod(x: int, p: int) -> int:
    """Representative of x mod p in (-p/2, p/2]."""
    r = x % p
    if 2 * r > p:
        r -= p
    return r
