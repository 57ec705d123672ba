"""Compiled inner loop for the fp LLL engine.

Numbers of wildly different magnitudes (Gram entries reach 2^80000) are kept
as software floats: a float64 mantissa in +-[0.5, 1) paired with an int64
exponent.  The kernel owns a scaled copy of the Gram matrix and the
Gram-Schmidt tables and walks the LLL index; every integral row operation it
decides on is appended to an action log and simultaneously applied to the
scaled state.  The caller replays the log against the exact integer Gram
matrix and transform, and refreshes ("anchors") scaled rows whose float copy
has accumulated too much error.

Each scaled Gram entry carries an error exponent (|absolute error| <= 2^err);
updates propagate the error bound, and a row whose entries drop below a
minimum of sound bits forces an anchor.  This keeps the float state honest
across cancellation-heavy reductions without leaving compiled code on every
row operation.

Exit codes: 0 done, 1 log full, 2 anchor request (row in state[3]),
3 rank problem (non-positive Gram-Schmidt square, row in state[3]).
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

EMIN = -(1 << 60)
GOOD_BITS = 12


@njit(cache=True, inline="always")
def _nrm(m, e):
    if m == 0.0:
        return 0.0, EMIN
    fm, fe = math.frexp(m)
    return fm, e + fe


@njit(cache=True, inline="always")
def _add(m1, e1, m2, e2):
    if m1 == 0.0:
        return m2, e2
    if m2 == 0.0:
        return m1, e1
    de = e1 - e2
    if de >= 0:
        if de > 64:
            return m1, e1
        s = m1 + math.ldexp(m2, -int(de))
        return _nrm(s, e1)
    if de < -64:
        return m2, e2
    s = m2 + math.ldexp(m1, int(de))
    return _nrm(s, e2)


@njit(cache=True, inline="always")
def _mul(m1, e1, m2, e2):
    if m1 == 0.0 or m2 == 0.0:
        return 0.0, EMIN
    return _nrm(m1 * m2, e1 + e2)


@njit(cache=True)
def _compute_row(k, perm, gm, ge, rm, re, mm, me):
    """Fill r/mu row k from the scaled Gram.  Returns offending j or -1."""
    pk = perm[k]
    for j in range(k):
        pj = perm[j]
        sm = gm[pk, pj]
        se = ge[pk, pj]
        for i in range(j):
            tm, te = _mul(mm[j, i], me[j, i], rm[k, i], re[k, i])
            sm, se = _add(sm, se, -tm, te)
        rm[k, j] = sm
        re[k, j] = se
        dm = rm[j, j]
        if dm <= 0.0:
            return j
        qm, qe = _nrm(sm / dm, se - re[j, j])
        mm[k, j] = qm
        me[k, j] = qe
    sm = gm[pk, pk]
    se = ge[pk, pk]
    for i in range(k):
        tm, te = _mul(mm[k, i], me[k, i], rm[k, i], re[k, i])
        sm, se = _add(sm, se, -tm, te)
    # a non-positive value here is cancellation noise; the Lovasz branch
    # treats it as "swap needed", which is the graceful reaction
    rm[k, k] = sm
    re[k, k] = se
    return -1


@njit(cache=True, inline="always")
def _upd_err(old_err, src_err_plus_x, new_e):
    e = old_err
    if src_err_plus_x > e:
        e = src_err_plus_x
    r = new_e - 52
    if r > e:
        e = r
    return e + 1


@njit(cache=True)
def lll_loop(perm, gm, ge, gerr, rm, re, mm, me,
             log_pk, log_pj, log_xm, log_xe,
             need_anchor, state, delta, eta):
    """Run LLL visits until an exit condition.

    state layout: [resume_k, log_count, out_code, out_row]
    """
    d = perm.shape[0]
    k = state[0]
    nlog = state[1]
    cap = log_pk.shape[0]

    if k <= 1:
        k = 1
        p0 = perm[0]
        rm[0, 0] = gm[p0, p0]
        re[0, 0] = ge[p0, p0]

    while k < d:
        pk = perm[k]
        if need_anchor[pk] != 0:
            state[0] = k
            state[1] = nlog
            state[2] = 2
            state[3] = pk
            return
        bad = _compute_row(k, perm, gm, ge, rm, re, mm, me)
        if bad >= 0:
            state[0] = k
            state[1] = nlog
            state[2] = 3
            state[3] = perm[bad]
            return
        npass = 0
        while True:
            npass += 1
            if npass > 256:
                # refresh from exact data rather than risk a float livelock
                need_anchor[pk] = 1
                state[0] = k
                state[1] = nlog
                state[2] = 2
                state[3] = pk
                return
            changed = False
            for j in range(k - 1, -1, -1):
                m = mm[k, j]
                e = me[k, j]
                if m == 0.0 or e < 0:
                    continue
                am = abs(m)
                if e == 0 and am <= eta:
                    continue
                if e <= 53:
                    xv = math.ldexp(m, int(e))
                    xm = np.rint(xv)
                    if xm == 0.0:
                        continue
                    xe = 0
                else:
                    xm = np.rint(math.ldexp(m, 53))
                    xe = e - 53
                changed = True
                pj = perm[j]
                if nlog >= cap:
                    state[0] = k
                    state[1] = nlog
                    state[2] = 1
                    state[3] = -1
                    return
                log_pk[nlog] = pk
                log_pj[nlog] = pj
                log_xm[nlog] = xm
                log_xe[nlog] = xe
                nlog += 1
                nxm, nxe = _nrm(xm, xe)
                xbits = nxe + 1
                for i in range(j):
                    tm, te = _mul(nxm, nxe, mm[j, i], me[j, i])
                    mm[k, i], me[k, i] = _add(mm[k, i], me[k, i], -tm, te)
                mm[k, j], me[k, j] = _add(mm[k, j], me[k, j], -nxm, nxe)
                # scaled Gram update; diagonal first (uses old row values)
                t1m, t1e = _mul(nxm, nxe, gm[pk, pj], ge[pk, pj])
                t2m, t2e = _mul(nxm, nxe, gm[pj, pj], ge[pj, pj])
                t2m, t2e = _mul(nxm, nxe, t2m, t2e)
                dm_, de_ = _add(gm[pk, pk], ge[pk, pk], -2.0 * t1m, t1e)
                dm_, de_ = _add(dm_, de_, t2m, t2e)
                derr = _upd_err(gerr[pk, pk],
                                max(gerr[pk, pj], gerr[pj, pj]) + 2 * xbits + 2,
                                de_)
                for c in range(d):
                    if c == pk:
                        continue
                    tm, te = _mul(nxm, nxe, gm[pj, c], ge[pj, c])
                    nm, ne = _add(gm[pk, c], ge[pk, c], -tm, te)
                    nerr = _upd_err(gerr[pk, c], gerr[pj, c] + xbits, ne)
                    gm[pk, c] = nm
                    ge[pk, c] = ne
                    gerr[pk, c] = nerr
                    gm[c, pk] = nm
                    ge[c, pk] = ne
                    gerr[c, pk] = nerr
                    if nm != 0.0 and nerr > ne - GOOD_BITS:
                        need_anchor[pk] = 1
                gm[pk, pk] = dm_
                ge[pk, pk] = de_
                gerr[pk, pk] = derr
                if dm_ != 0.0 and derr > de_ - GOOD_BITS:
                    need_anchor[pk] = 1
            if not changed:
                break
            if need_anchor[pk] != 0:
                state[0] = k
                state[1] = nlog
                state[2] = 2
                state[3] = pk
                return
            bad = _compute_row(k, perm, gm, ge, rm, re, mm, me)
            if bad >= 0:
                state[0] = k
                state[1] = nlog
                state[2] = 3
                state[3] = perm[bad]
                return
        # Lovasz condition: advance if r[k][k] >= (delta - mu^2) * r[k-1][k-1]
        mum = mm[k, k - 1]
        mue = me[k, k - 1]
        t2m, t2e = _mul(mum, mue, mum, mue)
        cm, ce = _add(delta, 0, -t2m, t2e)
        rhsm, rhse = _mul(cm, ce, rm[k - 1, k - 1], re[k - 1, k - 1])
        lm, le = rm[k, k], re[k, k]
        if rhsm <= 0.0:
            ok = True
        elif lm <= 0.0:
            ok = False
        elif le != rhse:
            ok = le > rhse
        else:
            ok = lm >= rhsm
        if ok:
            k += 1
        else:
            tmp = perm[k - 1]
            perm[k - 1] = perm[k]
            perm[k] = tmp
            k = k - 1
            if k < 1:
                k = 1
            p0 = perm[0]
            rm[0, 0] = gm[p0, p0]
            re[0, 0] = ge[p0, p0]
    state[0] = k
    state[1] = nlog
    state[2] = 0
    state[3] = -1
