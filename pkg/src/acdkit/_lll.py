"""LLL engines.

Two implementations behind one interface:

* ``lll_exact``   -- textbook LLL over exact rationals; the reference engine,
  used for small inputs and in tests.
* ``lll_fp``      -- exact integer basis and Gram matrix, floating-point
  Gram-Schmidt coefficients (arbitrary-exponent mpfr), lazy size reduction.
  This is the production engine; entries of tens of thousands of bits are
  fine because mpfr exponents are not range-limited like doubles.

Both track the unimodular transform and both are preceded (for echelon
inputs) by an exact nearest-plane pre-reduction pass that shrinks the huge
entries produced by shift-polynomial constructions before the main loop runs.
"""

from __future__ import annotations

import random
from fractions import Fraction

import gmpy2
from gmpy2 import mpfr, mpz

from .errors import RankDeficient

_VERIFY_PRIMES = (2305843009213693951, 4611686018427387847, 9223372036854775783)


def _round_div(a, b):
    """Round a/b to the nearest integer (ties toward even are fine)."""
    q, r = divmod(a, b)
    if 2 * r >= b:
        q += 1
    return q


def echelon_prereduce(B, U):
    """Exact nearest-plane reduction against an echelon pivot structure.

    Requires every row to have a distinct rightmost-nonzero column (true for
    the triangular shift-polynomial bases).  Returns True when applied.
    Mutates B and U in place.
    """
    d = len(B)
    pivots = []
    for row in B:
        p = -1
        for j in range(len(row) - 1, -1, -1):
            if row[j]:
                p = j
                break
        if p < 0:
            raise RankDeficient("zero generator row")
        pivots.append(p)
    if len(set(pivots)) != d:
        return False
    order = sorted(range(d), key=lambda i: pivots[i])
    for oi in range(1, d):
        i = order[oi]
        for oj in range(oi - 1, -1, -1):
            j = order[oj]
            c = pivots[j]
            q = _round_div(B[i][c], B[j][c])
            if q:
                bj = B[j]
                bi = B[i]
                for idx in range(c + 1):
                    bi[idx] -= q * bj[idx]
                uj = U[j]
                ui = U[i]
                for idx in range(d):
                    ui[idx] -= q * uj[idx]
    return True


# ---------------------------------------------------------------------------
# exact engine


def lll_exact(rows, delta: Fraction):
    """Textbook LLL with exact rational Gram-Schmidt.  Returns (B, U)."""
    d = len(rows)
    n = len(rows[0])
    B = [[mpz(x) for x in row] for row in rows]
    U = [[mpz(1) if i == j else mpz(0) for j in range(d)] for i in range(d)]

    ortho: list[list[Fraction]] = [[Fraction(0)] * n for _ in range(d)]
    mu = [[Fraction(0)] * d for _ in range(d)]
    norm2 = [Fraction(0)] * d

    def update_gso(i):
        vec = [Fraction(int(x)) for x in B[i]]
        for j in range(i):
            num = sum(Fraction(int(B[i][c])) * ortho[j][c] for c in range(n))
            if norm2[j] == 0:
                raise RankDeficient("dependent generators")
            mu[i][j] = num / norm2[j]
            for c in range(n):
                vec[c] -= mu[i][j] * ortho[j][c]
        ortho[i] = vec
        norm2[i] = sum(x * x for x in vec)
        if norm2[i] == 0:
            raise RankDeficient("dependent generators")

    update_gso(0)
    k = 1
    while k < d:
        update_gso(k)
        for j in range(k - 1, -1, -1):
            q = _round_div(mu[k][j].numerator, mu[k][j].denominator)
            if q:
                for c in range(n):
                    B[k][c] -= q * B[j][c]
                for c in range(d):
                    U[k][c] -= q * U[j][c]
                for c in range(j):
                    mu[k][c] -= q * mu[j][c]
                mu[k][j] -= q
        if norm2[k] >= (delta - mu[k][k - 1] ** 2) * norm2[k - 1]:
            k += 1
        else:
            B[k], B[k - 1] = B[k - 1], B[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            update_gso(k - 1)
            k = max(k - 1, 1)
    return B, U


# ---------------------------------------------------------------------------
# fp engine


class _FpState:
    def __init__(self, B, U, prec):
        self.B = B
        self.U = U
        self.d = len(B)
        self.n = len(B[0])
        self.prec = prec
        self.G = [[None] * self.d for _ in range(self.d)]
        for i in range(self.d):
            bi = B[i]
            for j in range(i + 1):
                s = mpz(0)
                bj = B[j]
                for c in range(self.n):
                    s += bi[c] * bj[c]
                self.G[i][j] = s
                self.G[j][i] = s
        self.r = [[None] * self.d for _ in range(self.d)]
        self.mu = [[None] * self.d for _ in range(self.d)]
        self.swaps = 0

    def compute_row(self, k):
        G, r, mu = self.G, self.r, self.mu
        rk = r[k]
        muk = mu[k]
        for j in range(k):
            s = mpfr(G[k][j])
            muj = mu[j]
            for i in range(j):
                s -= muj[i] * rk[i]
            rk[j] = s
            piv = r[j][j]
            if not piv > 0:
                raise RankDeficient("non-positive Gram-Schmidt norm (dependent rows?)")
            muk[j] = s / piv
        s = mpfr(G[k][k])
        for i in range(k):
            s -= muk[i] * rk[i]
        rk[k] = s

    def size_reduce_row(self, k, eta):
        """Lazy size reduction of row k.  Returns True if B changed."""
        changed_any = False
        max_bits = max((x.bit_length() for x in self.B[k]), default=0)
        for _pass in range(64 + max_bits // max(self.prec - 8, 1)):
            self.compute_row(k)
            muk = self.mu[k]
            changed = False
            for j in range(k - 1, -1, -1):
                m = muk[j]
                if abs(m) > eta:
                    x = mpz(gmpy2.rint(m))
                    if x == 0:
                        continue
                    changed = True
                    changed_any = True
                    muj = self.mu[j]
                    for i in range(j):
                        muk[i] -= x * muj[i]
                    muk[j] -= x
                    self.apply_reduction(k, j, x)
            if not changed:
                return changed_any
        raise ArithmeticError("size reduction failed to converge; raise precision")

    def apply_reduction(self, k, j, x):
        B, U, G, d = self.B, self.U, self.G, self.d
        bk, bj = B[k], B[j]
        for c in range(self.n):
            bk[c] -= x * bj[c]
        uk, uj = U[k], U[j]
        for c in range(d):
            uk[c] -= x * uj[c]
        gk, gj = G[k], G[j]
        gkk = gk[k] - 2 * x * gk[j] + x * x * gj[j]
        for c in range(d):
            gk[c] -= x * gj[c]
        gk[k] = gkk
        for c in range(d):
            if c != k:
                G[c][k] = gk[c]

    def swap(self, k):
        B, U, G = self.B, self.U, self.G
        B[k - 1], B[k] = B[k], B[k - 1]
        U[k - 1], U[k] = U[k], U[k - 1]
        G[k - 1], G[k] = G[k], G[k - 1]
        for row in G:
            row[k - 1], row[k] = row[k], row[k - 1]
        self.swaps += 1


def lll_fp(rows, delta: Fraction, eta: float = 0.52, prec: int | None = None,
           max_rounds: int | None = None):
    """Exact-basis LLL with mpfr Gram-Schmidt.  Returns (B, U, swaps)."""
    d = len(rows)
    B = [[mpz(x) for x in row] for row in rows]
    U = [[mpz(1) if i == j else mpz(0) for j in range(d)] for i in range(d)]
    if prec is None:
        prec = max(96, 2 * d + 48)
    if max_rounds is None:
        max_rounds = 40_000_000

    old_ctx = gmpy2.get_context().copy()
    ctx = gmpy2.get_context()
    ctx.precision = prec
    try:
        st = _FpState(B, U, prec)
        dlt = mpfr(delta.numerator) / mpfr(delta.denominator)
        st.compute_row(0)
        if not st.r[0][0] > 0:
            raise RankDeficient("zero leading vector")
        k = 1
        rounds = 0
        while k < d:
            rounds += 1
            if rounds > max_rounds:
                raise ArithmeticError("LLL iteration cap hit; raise precision")
            st.size_reduce_row(k, eta)
            rk = st.r[k]
            lhs = rk[k]
            rhs = (dlt - st.mu[k][k - 1] ** 2) * st.r[k - 1][k - 1]
            if lhs >= rhs:
                k += 1
            else:
                st.swap(k)
                k = max(k - 1, 1)
                if k == 1:
                    st.compute_row(0)
        return st.B, st.U, st.swaps
    finally:
        gmpy2.set_context(old_ctx)


# ---------------------------------------------------------------------------
# numba-kernel engine


def lll_fp_fast(rows, delta: Fraction, eta: float = 0.52, log_cap: int = 8192):
    """Kernel-based LLL.  Returns (B, U, kernel_calls).

    The compiled loop works on a scaled (mantissa, exponent) copy of the Gram
    matrix and logs every integral row operation; the log is replayed here
    against the exact Gram matrix and the transform, so the output lattice is
    exact by construction regardless of float behaviour.
    """
    import numpy as np

    from . import _lllkernel as K

    d = len(rows)
    B = [[int(x) for x in row] for row in rows]
    Gx = [[0] * d for _ in range(d)]
    for i in range(d):
        bi = B[i]
        for j in range(i + 1):
            s = 0
            bj = B[j]
            for c in range(len(bi)):
                s += bi[c] * bj[c]
            Gx[i][j] = s
            Gx[j][i] = s
    U = [[1 if i == j else 0 for j in range(d)] for i in range(d)]

    gm = np.zeros((d, d), dtype=np.float64)
    ge = np.full((d, d), K.EMIN, dtype=np.int64)
    gerr = np.full((d, d), K.EMIN, dtype=np.int64)
    for i in range(d):
        for j in range(d):
            m, e = _int_to_xf(Gx[i][j])
            gm[i, j] = m
            ge[i, j] = e
            gerr[i, j] = e - 52
    rm = np.zeros((d, d), dtype=np.float64)
    re = np.full((d, d), K.EMIN, dtype=np.int64)
    mm = np.zeros((d, d), dtype=np.float64)
    me = np.full((d, d), K.EMIN, dtype=np.int64)
    perm = np.arange(d, dtype=np.int64)
    need_anchor = np.zeros(d, dtype=np.int64)
    log_pk = np.zeros(log_cap, dtype=np.int64)
    log_pj = np.zeros(log_cap, dtype=np.int64)
    log_xm = np.zeros(log_cap, dtype=np.float64)
    log_xe = np.zeros(log_cap, dtype=np.int64)
    state = np.array([1, 0, 0, -1], dtype=np.int64)

    def replay():
        nlog = int(state[1])
        for idx in range(nlog):
            pk = int(log_pk[idx])
            pj = int(log_pj[idx])
            x = int(log_xm[idx])
            xe = int(log_xe[idx])
            if xe:
                x <<= xe
            grow_k = Gx[pk]
            grow_j = Gx[pj]
            grow_k[pk] = grow_k[pk] - 2 * x * grow_k[pj] + x * x * grow_j[pj]
            for c in range(d):
                if c != pk:
                    v = grow_k[c] - x * grow_j[c]
                    grow_k[c] = v
                    Gx[c][pk] = v
            uk = U[pk]
            uj = U[pj]
            for c in range(d):
                uk[c] -= x * uj[c]
        state[1] = 0

    def anchor(row):
        grow = Gx[row]
        for c in range(d):
            m, e = _int_to_xf(grow[c])
            gm[row, c] = m
            ge[row, c] = e
            gerr[row, c] = e - 52
            gm[c, row] = m
            ge[c, row] = e
            gerr[c, row] = e - 52
        need_anchor[row] = 0

    calls = 0
    rank_retries = {}
    while True:
        calls += 1
        if calls > 2_000_000:
            raise ArithmeticError("LLL kernel failed to terminate")
        K.lll_loop(perm, gm, ge, gerr, rm, re, mm, me,
                   log_pk, log_pj, log_xm, log_xe,
                   need_anchor, state, float(delta), eta)
        code = int(state[2])
        replay()
        if code == 0:
            break
        if code == 1:
            continue
        if code == 2:
            anchor(int(state[3]))
            continue
        # code 3: non-positive Gram-Schmidt square
        row = int(state[3])
        rank_retries[row] = rank_retries.get(row, 0) + 1
        if rank_retries[row] > 2:
            raise RankDeficient("dependent generators (or precision exhausted)")
        for r_ in range(d):
            anchor(r_)
        state[0] = 1

    # final basis: U * input, ordered by ascending exact norm
    order = sorted((int(p) for p in perm), key=lambda p: Gx[p][p])
    n = len(B[0])
    out_rows = []
    out_U = []
    for p in order:
        up = U[p]
        row = [0] * n
        for j in range(d):
            upj = up[j]
            if upj:
                bj = B[j]
                for c in range(n):
                    row[c] += upj * bj[c]
        out_rows.append(row)
        out_U.append(list(up))
    return out_rows, out_U, calls


def _int_to_xf(v: int):
    """Exact integer -> (mantissa in +-[0.5,1), exponent)."""
    if v == 0:
        return 0.0, -(1 << 60)
    neg = v < 0
    if neg:
        v = -v
    bl = v.bit_length()
    if bl <= 53:
        m = float(v)
        e = 0
    else:
        m = float(v >> (bl - 53))
        e = bl - 53
    import math as _math

    fm, fe = _math.frexp(m)
    if neg:
        fm = -fm
    return fm, fe + e


# ---------------------------------------------------------------------------
# verification helpers


def verify_transform(original, reduced, U, exact_rows: int = 2,
                     seed: int = 0xACD) -> bool:
    """Check reduced == U * original.

    Full check modulo a few large primes, plus an exact check of a handful of
    rows; together with the modular unimodularity check this certifies the
    reduction (the modular part is probabilistic with error < 2^-180).
    """
    d = len(original)
    n = len(original[0])
    for p in _VERIFY_PRIMES:
        om = [[int(x) % p for x in row] for row in original]
        rm = [[int(x) % p for x in row] for row in reduced]
        um = [[int(x) % p for x in row] for row in U]
        for i in range(d):
            ui = um[i]
            for c in range(n):
                s = 0
                for j in range(d):
                    uij = ui[j]
                    if uij:
                        s += uij * om[j][c]
                if s % p != rm[i][c]:
                    return False
    rng = random.Random(seed)
    for i in rng.sample(range(d), min(exact_rows, d)):
        for c in range(n):
            s = sum(int(U[i][j]) * int(original[j][c]) for j in range(d))
            if s != int(reduced[i][c]):
                return False
    return True


def unimodular_mod_primes(U) -> bool:
    """|det U| == 1 checked modulo several 62-bit primes."""
    d = len(U)
    for p in _VERIFY_PRIMES:
        M = [[int(x) % p for x in row] for row in U]
        det = 1
        for col in range(d):
            piv = None
            for r in range(col, d):
                if M[r][col]:
                    piv = r
                    break
            if piv is None:
                return False
            if piv != col:
                M[col], M[piv] = M[piv], M[col]
                det = -det
            inv = pow(M[col][col], p - 2, p)
            det = det * M[col][col] % p
            for r in range(col + 1, d):
                f = M[r][col] * inv % p
                if f:
                    row_r = M[r]
                    row_c = M[col]
                    for c in range(col, d):
                        row_r[c] = (row_r[c] - f * row_c[c]) % p
        if det % p not in (1, p - 1):
            return False
    return True
