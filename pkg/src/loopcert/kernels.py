"""Hot inner loops over integer structure-constant tables.

Each kernel is written once.  With numba available they are compiled with
``@njit``; setting ``LOOPCERT_DISABLE_NUMBA=1`` before import runs the very
same source as plain Python over numpy arrays, which is slow but keeps a
second, uncompiled execution path for cross-checks and benchmarks.

Arithmetic is exact: residues mod p (p < 2**31, so every product of two
reduced residues fits in int64) or plain integers when ``mod == 0``, guarded
by an a-priori magnitude bound.
"""

from __future__ import annotations

import os
from fractions import Fraction

import numpy as np

DISABLE_ENV = "LOOPCERT_DISABLE_NUMBA"


def _numba_wanted() -> bool:
    if os.environ.get(DISABLE_ENV, "").strip().lower() in ("1", "true", "yes", "on"):
        return False
    try:
        import numba  # noqa: F401
    except ImportError:
        return False
    return True


USE_NUMBA = _numba_wanted()

if USE_NUMBA:
    from numba import njit

    jit = njit(cache=True, nogil=True)
else:

    def jit(fn):
        return fn


BACKEND = "numba" if USE_NUMBA else "python"

# |intermediate| must stay below this when mod == 0
_INT_LIMIT = 2**62


@jit
def _red(x, mod):
    if mod:
        return x % mod
    return x


@jit
def _modpow(b, e, mod):
    r = 1
    b = b % mod
    while e > 0:
        if e & 1:
            r = (r * b) % mod
        b = (b * b) % mod
        e >>= 1
    return r


# -- axiom scans -----------------------------------------------------------


@jit
def _push(acc, mark, touched, nt, s, val, mod):
    if mark[s] == 0:
        mark[s] = 1
        touched[nt] = s
        nt += 1
    acc[s] = _red(acc[s] + val, mod)
    return nt


@jit
def _compare_reset(accl, accr, markl, markr, tl, ntl, tr, ntr):
    same = True
    for t in range(ntl):
        s = tl[t]
        if accl[s] != accr[s]:
            same = False
    for t in range(ntr):
        s = tr[t]
        if accl[s] != accr[s]:
            same = False
    for t in range(ntl):
        s = tl[t]
        accl[s] = 0
        markl[s] = 0
    for t in range(ntr):
        s = tr[t]
        accr[s] = 0
        markr[s] = 0
    return same


@jit
def scan_associativity(m, oow, p_ptr, p_idx, p_val, mod):
    accl = np.zeros(m, np.int64)
    accr = np.zeros(m, np.int64)
    markl = np.zeros(m, np.uint8)
    markr = np.zeros(m, np.uint8)
    tl = np.zeros(m, np.int64)
    tr = np.zeros(m, np.int64)
    checked = 0
    skipped = 0
    failed = 0
    first = np.full(3, -1, np.int64)
    for i in range(m):
        for j in range(m):
            for k in range(m):
                ok = True
                ntl = 0
                ntr = 0
                ij = i * m + j
                if oow[ij]:
                    ok = False
                else:
                    for q in range(p_ptr[ij], p_ptr[ij + 1]):
                        r = p_idx[q]
                        v = p_val[q]
                        rk = r * m + k
                        if oow[rk]:
                            ok = False
                            break
                        for q2 in range(p_ptr[rk], p_ptr[rk + 1]):
                            ntl = _push(accl, markl, tl, ntl, p_idx[q2],
                                        _red(v * p_val[q2], mod), mod)
                jk = j * m + k
                if ok:
                    if oow[jk]:
                        ok = False
                    else:
                        for q in range(p_ptr[jk], p_ptr[jk + 1]):
                            r = p_idx[q]
                            v = p_val[q]
                            ir = i * m + r
                            if oow[ir]:
                                ok = False
                                break
                            for q2 in range(p_ptr[ir], p_ptr[ir + 1]):
                                ntr = _push(accr, markr, tr, ntr, p_idx[q2],
                                            _red(v * p_val[q2], mod), mod)
                same = _compare_reset(accl, accr, markl, markr, tl, ntl, tr, ntr)
                if not ok:
                    skipped += 1
                    continue
                checked += 1
                if not same:
                    failed += 1
                    if first[0] < 0:
                        first[0] = i
                        first[1] = j
                        first[2] = k
    return checked, skipped, failed, first


@jit
def scan_commutativity(m, par, oow, p_ptr, p_idx, p_val, mod):
    accl = np.zeros(m, np.int64)
    accr = np.zeros(m, np.int64)
    markl = np.zeros(m, np.uint8)
    markr = np.zeros(m, np.uint8)
    tl = np.zeros(m, np.int64)
    tr = np.zeros(m, np.int64)
    checked = 0
    skipped = 0
    failed = 0
    first = np.full(2, -1, np.int64)
    for i in range(m):
        for j in range(m):
            ij = i * m + j
            ji = j * m + i
            if oow[ij] or oow[ji]:
                skipped += 1
                continue
            sign = -1 if (par[i] & par[j]) else 1
            ntl = 0
            ntr = 0
            for q in range(p_ptr[ij], p_ptr[ij + 1]):
                ntl = _push(accl, markl, tl, ntl, p_idx[q], p_val[q], mod)
            for q in range(p_ptr[ji], p_ptr[ji + 1]):
                ntr = _push(accr, markr, tr, ntr, p_idx[q], _red(sign * p_val[q], mod), mod)
            same = _compare_reset(accl, accr, markl, markr, tl, ntl, tr, ntr)
            checked += 1
            if not same:
                failed += 1
                if first[0] < 0:
                    first[0] = i
                    first[1] = j
    return checked, skipped, failed, first


@jit
def scan_ev_algebra(m, nb, oow, p_ptr, p_idx, p_val, e_ptr, e_idx, e_val,
                    x_ptr, x_idx, x_val, mod):
    accl = np.zeros(nb, np.int64)
    accr = np.zeros(nb, np.int64)
    markl = np.zeros(nb, np.uint8)
    markr = np.zeros(nb, np.uint8)
    tl = np.zeros(nb, np.int64)
    tr = np.zeros(nb, np.int64)
    checked = 0
    skipped = 0
    failed = 0
    first = np.full(2, -1, np.int64)
    for i in range(m):
        for j in range(m):
            ij = i * m + j
            if oow[ij]:
                skipped += 1
                continue
            ntl = 0
            ntr = 0
            for q in range(p_ptr[ij], p_ptr[ij + 1]):
                r = p_idx[q]
                v = p_val[q]
                for q2 in range(e_ptr[r], e_ptr[r + 1]):
                    ntl = _push(accl, markl, tl, ntl, e_idx[q2], _red(v * e_val[q2], mod), mod)
            for q in range(e_ptr[i], e_ptr[i + 1]):
                u = e_idx[q]
                uv = e_val[q]
                for q2 in range(e_ptr[j], e_ptr[j + 1]):
                    w = e_idx[q2]
                    c = _red(uv * e_val[q2], mod)
                    uw = u * nb + w
                    for q3 in range(x_ptr[uw], x_ptr[uw + 1]):
                        ntr = _push(accr, markr, tr, ntr, x_idx[q3],
                                    _red(c * x_val[q3], mod), mod)
            same = _compare_reset(accl, accr, markl, markr, tl, ntl, tr, ntr)
            checked += 1
            if not same:
                failed += 1
                if first[0] < 0:
                    first[0] = i
                    first[1] = j
    return checked, skipped, failed, first


@jit
def _bracket_pair(b, a, m, par, oow, p_ptr, p_idx, p_val, d_ptr, d_idx, d_val, mod,
                  acc, mark, touched):
    """Accumulate [e_b, e_a] into acc.  Returns (in_window, n_touched)."""
    nt = 0
    ba = b * m + a
    if oow[ba]:
        return False, nt
    # Δ(b*a)
    for q in range(p_ptr[ba], p_ptr[ba + 1]):
        r = p_idx[q]
        v = p_val[q]
        for q2 in range(d_ptr[r], d_ptr[r + 1]):
            nt = _push(acc, mark, touched, nt, d_idx[q2], _red(v * d_val[q2], mod), mod)
    # - Δ(b)*a
    for q in range(d_ptr[b], d_ptr[b + 1]):
        s = d_idx[q]
        sv = d_val[q]
        sa = s * m + a
        if oow[sa]:
            return False, nt
        for q2 in range(p_ptr[sa], p_ptr[sa + 1]):
            nt = _push(acc, mark, touched, nt, p_idx[q2], _red(-sv * p_val[q2], mod), mod)
    # - (-1)^|b| b*Δ(a)
    c3 = 1 if par[b] else -1
    for q in range(d_ptr[a], d_ptr[a + 1]):
        u = d_idx[q]
        uv = _red(c3 * d_val[q], mod)
        bu = b * m + u
        if oow[bu]:
            return False, nt
        for q2 in range(p_ptr[bu], p_ptr[bu + 1]):
            nt = _push(acc, mark, touched, nt, p_idx[q2], _red(uv * p_val[q2], mod), mod)
    if par[b]:
        for t in range(nt):
            s = touched[t]
            acc[s] = _red(-acc[s], mod)
    return True, nt


@jit
def bracket_table(m, par, oow, p_ptr, p_idx, p_val, d_ptr, d_idx, d_val, mod):
    """CSR table of [e_b, e_a] for every ordered basis pair (row index b*m + a)."""
    acc = np.zeros(m, np.int64)
    mark = np.zeros(m, np.uint8)
    touched = np.zeros(m, np.int64)
    br_oow = np.zeros(m * m, np.uint8)
    br_ptr = np.zeros(m * m + 1, np.int64)
    cap = 4 * m * m + 16
    br_idx = np.zeros(cap, np.int64)
    br_val = np.zeros(cap, np.int64)
    nnz = 0
    for b in range(m):
        for a in range(m):
            ok, nt = _bracket_pair(b, a, m, par, oow, p_ptr, p_idx, p_val,
                                   d_ptr, d_idx, d_val, mod, acc, mark, touched)
            row = b * m + a
            if not ok:
                br_oow[row] = 1
            else:
                # sorted support keeps the table canonical
                order = np.sort(touched[:nt])
                for t in range(nt):
                    s = order[t]
                    if acc[s] != 0:
                        if nnz >= cap:
                            cap *= 2
                            ni = np.zeros(cap, np.int64)
                            nv = np.zeros(cap, np.int64)
                            ni[:nnz] = br_idx[:nnz]
                            nv[:nnz] = br_val[:nnz]
                            br_idx = ni
                            br_val = nv
                        br_idx[nnz] = s
                        br_val[nnz] = acc[s]
                        nnz += 1
            for t in range(nt):
                s = touched[t]
                acc[s] = 0
                mark[s] = 0
            br_ptr[row + 1] = nnz
    return br_oow, br_ptr, br_idx[:nnz].copy(), br_val[:nnz].copy()


@jit
def scan_leibniz(m, par, oow, p_ptr, p_idx, p_val, br_oow, br_ptr, br_idx, br_val, mod):
    """[a, bc] == [a,b]c + (-1)^{(|a|+1)|b|} b[a,c] over all basis triples."""
    accl = np.zeros(m, np.int64)
    accr = np.zeros(m, np.int64)
    markl = np.zeros(m, np.uint8)
    markr = np.zeros(m, np.uint8)
    tl = np.zeros(m, np.int64)
    tr = np.zeros(m, np.int64)
    checked = 0
    skipped = 0
    failed = 0
    first = np.full(3, -1, np.int64)
    for a in range(m):
        for b in range(m):
            sign = -1 if ((par[a] + 1) * par[b]) & 1 else 1
            for c in range(m):
                ok = True
                ntl = 0
                ntr = 0
                bc = b * m + c
                if oow[bc]:
                    ok = False
                else:
                    for q in range(p_ptr[bc], p_ptr[bc + 1]):
                        r = p_idx[q]
                        v = p_val[q]
                        ar = a * m + r
                        if br_oow[ar]:
                            ok = False
                            break
                        for q2 in range(br_ptr[ar], br_ptr[ar + 1]):
                            ntl = _push(accl, markl, tl, ntl, br_idx[q2],
                                        _red(v * br_val[q2], mod), mod)
                ab = a * m + b
                if ok:
                    if br_oow[ab]:
                        ok = False
                    else:
                        for q in range(br_ptr[ab], br_ptr[ab + 1]):
                            r = br_idx[q]
                            w = br_val[q]
                            rc = r * m + c
                            if oow[rc]:
                                ok = False
                                break
                            for q2 in range(p_ptr[rc], p_ptr[rc + 1]):
                                ntr = _push(accr, markr, tr, ntr, p_idx[q2],
                                            _red(w * p_val[q2], mod), mod)
                ac = a * m + c
                if ok:
                    if br_oow[ac]:
                        ok = False
                    else:
                        for q in range(br_ptr[ac], br_ptr[ac + 1]):
                            r = br_idx[q]
                            w = _red(sign * br_val[q], mod)
                            brr = b * m + r
                            if oow[brr]:
                                ok = False
                                break
                            for q2 in range(p_ptr[brr], p_ptr[brr + 1]):
                                ntr = _push(accr, markr, tr, ntr, p_idx[q2],
                                            _red(w * p_val[q2], mod), mod)
                same = _compare_reset(accl, accr, markl, markr, tl, ntl, tr, ntr)
                if not ok:
                    skipped += 1
                    continue
                checked += 1
                if not same:
                    failed += 1
                    if first[0] < 0:
                        first[0] = a
                        first[1] = b
                        first[2] = c
    return checked, skipped, failed, first


# -- brute-force oracles ---------------------------------------------------


@jit
def apply_letters_normalized(mats, frontier, p):
    """Every ``M_a v`` for letter matrices ``mats`` and states ``frontier``, mod p,
    scaled so the first nonzero coordinate is 1."""
    na = mats.shape[0]
    nb = mats.shape[1]
    nf = frontier.shape[0]
    out = np.zeros((nf * na, nb), np.int64)
    for f in range(nf):
        for a in range(na):
            row = f * na + a
            lead = 0
            for r in range(nb):
                s = 0
                for c in range(nb):
                    s = (s + mats[a, r, c] * frontier[f, c]) % p
                out[row, r] = s
                if lead == 0 and s != 0:
                    lead = s
            if lead != 0 and lead != 1:
                inv = _modpow(lead, p - 2, p)
                for r in range(nb):
                    out[row, r] = (out[row, r] * inv) % p
    return out


@jit
def min_max_level(x, bounds, ranks, q):
    """min over ``y = x + sum c_i bounds[i]`` (c in F_q^g) of the top level rank of y.

    Returns -1 when some representative vanishes, i.e. x is a boundary.
    """
    g = bounds.shape[0]
    nn = x.shape[0]
    coeffs = np.zeros(g, np.int64)
    y = np.zeros(nn, np.int64)
    best = -1
    total = 1
    for _ in range(g):
        total *= q
    for code in range(total):
        c = code
        for i in range(g):
            coeffs[i] = c % q
            c //= q
        for t in range(nn):
            s = x[t]
            for i in range(g):
                s += coeffs[i] * bounds[i, t]
            y[t] = s % q
        top = -1
        for t in range(nn):
            if y[t] != 0 and ranks[t] > top:
                top = ranks[t]
        if top < 0:
            return -1
        if best < 0 or top < best:
            best = top
    return best


# -- table compilation -----------------------------------------------------


class Tables:
    """Integer CSR images of a model's structure constants."""

    def __init__(self, model):
        lb = model.loop_basis
        bb = model.base_basis
        f = model.field
        m = len(lb)
        nb = len(bb)
        self.m, self.nb = m, nb
        self.mod = np.int64(f.p)
        self.par = np.array([model.shifted_parity(i) for i in range(m)], np.int64)
        self.oow = np.zeros(m * m, np.uint8)
        ptr, idx, val = [0], [], []
        biggest = 1
        for i in range(m):
            for j in range(m):
                e = model.product.get((i, j))
                if e is not None and not hasattr(e, "_c"):
                    self.oow[i * m + j] = 1
                elif e is not None:
                    for r, v in e.items():
                        idx.append(r)
                        val.append(_as_int(v))
                ptr.append(len(idx))
        self.p_ptr, self.p_idx, self.p_val = _arrays(ptr, idx, val)
        self.d_ptr, self.d_idx, self.d_val = _csr_map(model.delta, m)
        self.e_ptr, self.e_idx, self.e_val = _csr_map(model.ev, m)
        ptr, idx, val = [0], [], []
        for u in range(nb):
            for w in range(nb):
                e = model.intersection.get((u, w))
                if e is not None:
                    for r, v in e.items():
                        idx.append(r)
                        val.append(_as_int(v))
                ptr.append(len(idx))
        self.x_ptr, self.x_idx, self.x_val = _arrays(ptr, idx, val)
        for arr in (self.p_val, self.d_val, self.e_val, self.x_val):
            if arr.size:
                biggest = max(biggest, int(np.abs(arr).max()))
        self.biggest = biggest
        self._brackets = None

    def brackets(self):
        if self._brackets is None:
            self._brackets = bracket_table(self.m, self.par, self.oow, self.p_ptr, self.p_idx,
                                           self.p_val, self.d_ptr, self.d_idx, self.d_val,
                                           self.mod)
        return self._brackets


def _as_int(v) -> int:
    if isinstance(v, Fraction):
        if v.denominator != 1:
            raise ValueError("non-integral structure constant")
        return v.numerator
    return int(v)


def _arrays(ptr, idx, val):
    return (np.array(ptr, np.int64), np.array(idx, np.int64), np.array(val, np.int64))


def _csr_map(mp, ncols):
    ptr, idx, val = [0], [], []
    for j in range(ncols):
        col = mp.columns.get(j)
        if col is not None:
            for r, v in col.items():
                idx.append(r)
                val.append(_as_int(v))
        ptr.append(len(idx))
    return _arrays(ptr, idx, val)


def _integral(model) -> bool:
    if model.field.p:
        return True
    vecs = [v for v in model.product.values() if hasattr(v, "_c")]
    vecs += list(model.intersection.values())
    for mp in (model.delta, model.ev):
        vecs += list(mp.columns.values())
    return all(x.denominator == 1 for v in vecs for x in v._c.values())


def tables_supported(model) -> bool:
    """True when the kernels can run exactly on this model."""
    cache = model._cache
    if "kernel_ok" in cache:
        return cache["kernel_ok"]
    ok = _integral(model)
    if ok and not model.field.p:
        t = tables(model)
        # worst case: 4 constants per term, m^2 terms, 3 summands
        ok = 3 * (t.m ** 2) * t.biggest ** 4 * 4 < _INT_LIMIT
    cache["kernel_ok"] = ok
    return ok


def tables(model) -> Tables:
    t = model._cache.get("tables")
    if t is None:
        t = Tables(model)
        model._cache["tables"] = t
    return t


def scan_axiom(model, name: str):
    """Run one compiled axiom scan; returns (checked, skipped, failed, first_tuple)."""
    t = tables(model)
    if name == "associativity":
        res = scan_associativity(t.m, t.oow, t.p_ptr, t.p_idx, t.p_val, t.mod)
    elif name == "graded_commutativity":
        res = scan_commutativity(t.m, t.par, t.oow, t.p_ptr, t.p_idx, t.p_val, t.mod)
    elif name == "ev_algebra_map":
        res = scan_ev_algebra(t.m, t.nb, t.oow, t.p_ptr, t.p_idx, t.p_val, t.e_ptr, t.e_idx,
                              t.e_val, t.x_ptr, t.x_idx, t.x_val, t.mod)
    elif name == "bv_leibniz":
        br_oow, br_ptr, br_idx, br_val = t.brackets()
        res = scan_leibniz(t.m, t.par, t.oow, t.p_ptr, t.p_idx, t.p_val,
                           br_oow, br_ptr, br_idx, br_val, t.mod)
    else:
        raise KeyError(name)
    checked, skipped, failed, first = res
    return int(checked), int(skipped), int(failed), tuple(int(x) for x in first)
