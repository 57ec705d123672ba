"""Exact integer lattices: storage, LLL reduction, norms, determinants.

Values are immutable after construction; all operations are pure functions,
so disjoint lattices can be reduced concurrently.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from . import _lll
from ._intmath import ln_int
from .errors import RankDeficient

DEFAULT_DELTA = Fraction(99, 100)


@dataclass(frozen=True)
class IntLattice:
    """Row lattice: d generator rows of length n (d <= n), full rank."""

    rows: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if not self.rows:
            raise ValueError("lattice needs at least one generator")
        n = len(self.rows[0])
        if any(len(r) != n for r in self.rows):
            raise ValueError("ragged generator matrix")
        if len(self.rows) > n:
            raise ValueError("more generators than ambient dimension")

    @classmethod
    def from_rows(cls, rows: Iterable[Iterable[int]]) -> "IntLattice":
        return cls(tuple(tuple(int(x) for x in r) for r in rows))

    @property
    def d(self) -> int:
        return len(self.rows)

    @property
    def n(self) -> int:
        return len(self.rows[0])

    @property
    def is_square(self) -> bool:
        return self.d == self.n


@dataclass(frozen=True)
class ReducedBasis:
    """LLL output: rows sorted by ascending Euclidean norm.

    ``vectors == transform @ original`` with |det transform| = 1.
    """

    vectors: tuple[tuple[int, ...], ...]
    transform: tuple[tuple[int, ...], ...]
    delta: Fraction

    @property
    def d(self) -> int:
        return len(self.vectors)


def l1_norm(v: Sequence[int]) -> int:
    return sum(abs(int(x)) for x in v)


def l2_norm_sq(v: Sequence[int]) -> int:
    return sum(int(x) * int(x) for x in v)


def lattice_det(lat: IntLattice) -> int:
    """Square input: |det| exactly.  Non-square: det(B*B^T), the squared
    covolume (an exact representation of the square root it stands for)."""
    if lat.is_square:
        return abs(_bareiss_det([list(r) for r in lat.rows]))
    gram = [[sum(a * b for a, b in zip(ri, rj)) for rj in lat.rows]
            for ri in lat.rows]
    det = _bareiss_det(gram)
    if det <= 0:
        raise RankDeficient("Gram determinant not positive")
    return det


def log_covolume(lat: IntLattice, det: int | None = None) -> float:
    """Natural log of the covolume |det L|; accepts a precomputed det."""
    if det is not None:
        return ln_int(abs(det)) if lat.is_square else ln_int(det) / 2.0
    if lat.is_square:
        return ln_int(lattice_det(lat))
    return ln_int(lattice_det(lat)) / 2.0


def _bareiss_det(M: list[list[int]]) -> int:
    """Fraction-free Gaussian elimination determinant."""
    d = len(M)
    if any(len(row) != d for row in M):
        raise ValueError("determinant needs a square matrix")
    sign = 1
    prev = 1
    for col in range(d - 1):
        if M[col][col] == 0:
            piv = next((r for r in range(col + 1, d) if M[r][col]), None)
            if piv is None:
                return 0
            M[col], M[piv] = M[piv], M[col]
            sign = -sign
        pivot = M[col][col]
        for r in range(col + 1, d):
            row_r = M[r]
            row_c = M[col]
            f = row_r[col]
            for c in range(col + 1, d):
                row_r[c] = (pivot * row_r[c] - f * row_c[c]) // prev
            row_r[col] = 0
        prev = pivot
    return sign * M[d - 1][d - 1]


def lll_reduce(lat: IntLattice, delta: Fraction = DEFAULT_DELTA, *,
               method: str = "auto", pre_reduce: bool = True,
               verify: bool = True) -> ReducedBasis:
    """LLL-reduce the lattice; output rows sorted by ascending |.|_2.

    method: "auto" | "exact" | "fp".  The exact engine does rational
    Gram-Schmidt, the fp engine keeps basis and Gram matrix exact and runs
    the Gram-Schmidt bookkeeping in arbitrary-exponent floats; its output is
    re-verified against the input (row space and unimodularity).
    """
    delta = Fraction(delta)
    if not Fraction(1, 4) < delta < 1:
        raise ValueError("delta must lie in (1/4, 1)")
    d, n = lat.d, lat.n
    max_bits = max(abs(x).bit_length() for row in lat.rows for x in row)
    if method == "auto":
        method = "exact" if (d <= 10 and max_bits <= 96) else "fp"

    B = [[int(x) for x in row] for row in lat.rows]
    U = [[1 if i == j else 0 for j in range(d)] for i in range(d)]
    if pre_reduce and method != "exact":
        _lll.echelon_prereduce(B, U)

    if method == "exact":
        B2, U2 = _lll.lll_exact(B, delta)
    elif method == "fp":
        B2, U2, _ = _lll.lll_fp_fast(B, delta)
    elif method == "fp-mpfr":
        B2, U2, _ = _lll.lll_fp(B, delta)
    else:
        raise ValueError(f"unknown method {method!r}")

    # fold the pre-reduction transform in
    if any(U[i][j] != (i == j) for i in range(d) for j in range(d)):
        U2 = _mat_mul(U2, U)

    order = sorted(range(d), key=lambda i: l2_norm_sq(B2[i]))
    vectors = tuple(tuple(int(x) for x in B2[i]) for i in order)
    transform = tuple(tuple(int(x) for x in U2[i]) for i in order)

    if verify:
        if not _lll.verify_transform(lat.rows, vectors, transform):
            raise ArithmeticError("reduction verification failed: row space changed")
        if not _lll.unimodular_mod_primes(transform):
            raise ArithmeticError("reduction verification failed: transform not unimodular")
    return ReducedBasis(vectors=vectors, transform=transform, delta=delta)


def _mat_mul(A, B):
    rows = len(A)
    inner = len(B)
    cols = len(B[0])
    out = []
    for i in range(rows):
        ai = A[i]
        row = [0] * cols
        for j in range(inner):
            aij = ai[j]
            if aij:
                bj = B[j]
                for c in range(cols):
                    row[c] += aij * bj[c]
        out.append(row)
    return out


def lll_factor(rb: ReducedBasis, m: int, *, log_det: float | None = None,
               original: IntLattice | None = None) -> float:
    """Empirical reduction-quality ratio lambda with
    |v_m| ~ lambda**d * (det L)**(1/d).  Diagnostic only.

    log_det is the natural log of the covolume; when absent it is computed
    from `original` (or from the reduced vectors themselves).
    """
    d = rb.d
    if not 1 <= m <= d:
        raise ValueError("m out of range")
    if log_det is None:
        src = original if original is not None else IntLattice(rb.vectors)
        log_det = log_covolume(src)
    norm_sq = l2_norm_sq(rb.vectors[m - 1])
    ln_vm = 0.5 * ln_int(norm_sq)
    return math.exp((ln_vm - log_det / d) / d)


def herrmann_may_bound_ok(rb: ReducedBasis, det: int, m: int) -> bool:
    """Exact check of |v_m| <= 2^(d/4) * det^(1/(d+1-m)) for a square lattice
    with |det| = det.  Works on squared integer quantities only."""
    d = rb.d
    e = d + 1 - m
    lhs = l2_norm_sq(rb.vectors[m - 1]) ** e
    # (2^(d/4) det^(1/e))^2e = 2^(d*e/2) * det^2
    shift = d * e
    rhs = (det * det) << (shift // 2)
    if shift % 2:
        # multiply both sides by 2 to stay integral
        lhs *= 2
        rhs = (det * det) << ((shift + 1) // 2)
    return lhs <= rhs
