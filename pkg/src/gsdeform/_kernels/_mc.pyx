# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Metropolis/measurement kernels.

Twin of ``reference.py``: consumes the same pre-generated proposal arrays and
evaluates the acceptance ratio with the same floating-point expression
(factor * ldexp(1.0, d_loops)), so chains agree bit-for-bit across backends.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport ldexp
from libc.string cimport memset

cnp.import_array()

KERNEL_NAME = "c"

ctypedef cnp.int8_t i8
ctypedef cnp.uint8_t u8
ctypedef cnp.int32_t i32
ctypedef cnp.uint64_t u64


cdef inline double _ratio(int v, int lab, i8* sig, i8* col,
                          i32* nbr_ptr, i32* nbr, double beta,
                          i8* par, long long* stamp, long long* cur,
                          i32* stack, int* b_out):
    """Writes the proposed label to b_out and returns the acceptance ratio."""
    cdef int a = sig[v]
    cdef int b = (a + lab) % 3
    cdef int n_a = 0, n_b = 0
    cdef int p0 = nbr_ptr[v], p1 = nbr_ptr[v + 1]
    cdef int i, j, w, x, y, px, sp, s
    cdef int k_b = 0
    cdef bint ok = True
    cdef long long c
    cdef int d_match, d_loops
    cdef double factor

    b_out[0] = b
    for i in range(p0, p1):
        w = nbr[i]
        if sig[w] == a:
            n_a += 1
        elif sig[w] == b:
            n_b += 1

    # parity-checked merge of the adjacent b-domains through v
    if n_b:
        cur[0] += 1
        c = cur[0]
        for i in range(p0, p1):
            w = nbr[i]
            if sig[w] != b:
                continue
            if stamp[w] == c:
                if par[w] != 1:
                    ok = False
                    break
                continue
            k_b += 1
            stamp[w] = c
            par[w] = 1
            sp = 0
            stack[sp] = w
            sp += 1
            while sp > 0 and ok:
                sp -= 1
                x = stack[sp]
                px = par[x]
                for j in range(nbr_ptr[x], nbr_ptr[x + 1]):
                    y = nbr[j]
                    if sig[y] != b:
                        continue
                    if stamp[y] != c:
                        stamp[y] = c
                        par[y] = px ^ 1
                        stack[sp] = y
                        sp += 1
                    elif par[y] == px:
                        ok = False
                        break
            if not ok:
                break
    if not ok:
        return 0.0

    if n_a == 0:
        s = 0
    elif n_a == 1:
        s = 1
    else:
        s = 0
        cur[0] += 1
        c = cur[0]
        stamp[v] = c  # exclude v from its old domain
        for i in range(p0, p1):
            w = nbr[i]
            if sig[w] != a or stamp[w] == c:
                continue
            s += 1
            stamp[w] = c
            sp = 0
            stack[sp] = w
            sp += 1
            while sp > 0:
                sp -= 1
                x = stack[sp]
                for j in range(nbr_ptr[x], nbr_ptr[x + 1]):
                    y = nbr[j]
                    if sig[y] == a and stamp[y] != c:
                        stamp[y] = c
                        stack[sp] = y
                        sp += 1

    d_match = (1 if b == col[v] else 0) - (1 if a == col[v] else 0)
    d_loops = (n_b - n_a) + (s - k_b)
    if d_match == 0:
        factor = 1.0
    elif d_match == 1:
        factor = beta
    else:
        factor = 1.0 / beta
    return factor * ldexp(1.0, d_loops)


cdef inline int _find(i32* parent, int x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


cdef inline u64 _hash_slot(u64 key, u64 mask):
    cdef u64 h = key
    h ^= h >> 33
    h *= <u64>0xff51afd7ed558ccd
    h ^= h >> 33
    return h & mask


cdef void _measure(i8* sig, int n, i32[:, ::1] edges,
                   i32* ci, i32* cj, int L1, int L2, i32[:, ::1] faces,
                   i32* parent, i32* parent2, i32* size, u8* flags,
                   u64* hkey, u8* hpar, long long cap, bint want_code,
                   i32* out_ndom, i32* out_maxdom, u8* out_cross1,
                   u8* out_cross2, i32* out_mono, u64* out_code):
    cdef int ne = edges.shape[0]
    cdef int nf = faces.shape[0]
    cdef int v, e, a, b, ra, rb, r, f, k, first
    cdef int ndom = 0, maxdom = 0, mono = 0
    cdef bint cross1 = False, cross2 = False, same
    cdef u64 key, idx, mask = <u64>(cap - 1)
    cdef u64 code = 0

    for v in range(n):
        parent[v] = v
        parent2[v] = v
    memset(size, 0, n * sizeof(i32))
    memset(flags, 0, n)
    memset(hkey, 0, cap * sizeof(u64))

    for e in range(ne):
        a = edges[e, 0]
        b = edges[e, 1]
        if sig[a] == sig[b]:
            ra = _find(parent, a)
            rb = _find(parent, b)
            if ra != rb:
                parent[ra] = rb

    for v in range(n):
        size[_find(parent, v)] += 1
    for v in range(n):
        if parent[v] == v:
            ndom += 1
            if size[v] > maxdom:
                maxdom = size[v]

    # parity of inter-domain edge multiplicities, keyed by root pair
    for e in range(ne):
        a = edges[e, 0]
        b = edges[e, 1]
        if sig[a] != sig[b]:
            ra = _find(parent, a)
            rb = _find(parent, b)
            if ra > rb:
                r = ra
                ra = rb
                rb = r
            key = (<u64>ra) * (<u64>n) + (<u64>rb) + 1
            idx = _hash_slot(key, mask)
            while hkey[idx] != 0 and hkey[idx] != key:
                idx = (idx + 1) & mask
            if hkey[idx] == 0:
                hkey[idx] = key
                hpar[idx] = 1
            else:
                hpar[idx] ^= 1

    for idx in range(<u64>cap):
        if hkey[idx] != 0 and hpar[idx] == 1:
            key = hkey[idx] - 1
            ra = <int>(key / (<u64>n))
            rb = <int>(key % (<u64>n))
            a = _find(parent2, ra)
            b = _find(parent2, rb)
            if a != b:
                parent2[a] = b

    for v in range(n):
        r = _find(parent2, _find(parent, v))
        f = flags[r]
        if ci[v] == 0:
            f |= 1
        if ci[v] == L1 - 1:
            f |= 2
        if cj[v] == 0:
            f |= 4
        if cj[v] == L2 - 1:
            f |= 8
        flags[r] = <u8>f
    for v in range(n):
        f = flags[v]
        if (f & 3) == 3:
            cross1 = True
        if (f & 12) == 12:
            cross2 = True

    for e in range(nf):
        first = sig[faces[e, 0]]
        same = True
        for k in range(1, 12):
            if sig[faces[e, k]] != first:
                same = False
                break
        if same:
            mono += 1

    if want_code:
        for v in range(n - 1, -1, -1):
            code = code * 3 + <u64>sig[v]

    out_ndom[0] = ndom
    out_maxdom[0] = maxdom
    out_cross1[0] = 1 if cross1 else 0
    out_cross2[0] = 1 if cross2 else 0
    out_mono[0] = mono
    out_code[0] = code


def run_sweeps(i8[::1] sigma, i8[::1] color, i32[::1] nbr_ptr, i32[::1] nbr,
               double beta, i32[:, ::1] sites, i8[:, ::1] labels,
               double[:, ::1] urand):
    """Advance the chain without measuring; returns the acceptance count."""
    cdef int n = sigma.shape[0]
    cdef int nswp = sites.shape[0]
    cdef int nprop = sites.shape[1]
    cdef cnp.ndarray par_a = np.zeros(n, dtype=np.int8)
    cdef cnp.ndarray stamp_a = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray stack_a = np.zeros(n, dtype=np.int32)
    cdef i8* par = <i8*>cnp.PyArray_DATA(par_a)
    cdef long long* stamp = <long long*>cnp.PyArray_DATA(stamp_a)
    cdef i32* stack = <i32*>cnp.PyArray_DATA(stack_a)
    cdef long long cur = 0
    cdef long accepts = 0
    cdef int t, i, v, b
    cdef double r
    for t in range(nswp):
        for i in range(nprop):
            v = sites[t, i]
            r = _ratio(v, labels[t, i], &sigma[0], &color[0], &nbr_ptr[0],
                       &nbr[0], beta, par, stamp, &cur, stack, &b)
            if urand[t, i] < r:
                sigma[v] = <i8>b
                accepts += 1
    return accepts


def accumulate_occupancy(i8[::1] sigma, i8[::1] color, i32[::1] nbr_ptr,
                         i32[::1] nbr, double beta, i32[:, ::1] sites,
                         i8[:, ::1] labels, double[:, ::1] urand,
                         double[::1] occ):
    """Advance the chain, accumulating expected per-proposal occupancy.

    At every proposal the estimator deposits weight 1-alpha on the current
    configuration code and alpha = min(1, ratio) on the proposed one, which
    averages out the accept/reject noise of plain frequency counting. ``occ``
    (length 3^N) is accumulated in place; returns the acceptance count.
    """
    cdef int n = sigma.shape[0]
    cdef long long expect = 1
    cdef int k
    for k in range(n):
        expect *= 3
    if occ.shape[0] != expect:
        raise ValueError("occupancy table must have length 3^N")
    cdef int nswp = sites.shape[0]
    cdef int nprop = sites.shape[1]
    cdef cnp.ndarray par_a = np.zeros(n, dtype=np.int8)
    cdef cnp.ndarray stamp_a = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray stack_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray pow3_a = np.zeros(n, dtype=np.int64)
    cdef i8* par = <i8*>cnp.PyArray_DATA(par_a)
    cdef long long* stamp = <long long*>cnp.PyArray_DATA(stamp_a)
    cdef i32* stack = <i32*>cnp.PyArray_DATA(stack_a)
    cdef long long* pow3 = <long long*>cnp.PyArray_DATA(pow3_a)
    cdef long long code = 0, code2
    pow3[0] = 1
    for k in range(1, n):
        pow3[k] = 3 * pow3[k - 1]
    for k in range(n):
        code += sigma[k] * pow3[k]
    cdef long long cur = 0
    cdef long accepts = 0
    cdef int t, i, v, b
    cdef double r, alpha
    for t in range(nswp):
        for i in range(nprop):
            v = sites[t, i]
            r = _ratio(v, labels[t, i], &sigma[0], &color[0], &nbr_ptr[0],
                       &nbr[0], beta, par, stamp, &cur, stack, &b)
            alpha = r if r < 1.0 else 1.0
            code2 = code + (b - sigma[v]) * pow3[v]
            occ[code] += 1.0 - alpha
            occ[code2] += alpha
            if urand[t, i] < r:
                sigma[v] = <i8>b
                code = code2
                accepts += 1
    return accepts


def run_sweeps_measured(i8[::1] sigma, i8[::1] color, i32[::1] nbr_ptr,
                        i32[::1] nbr, double beta, i32[:, ::1] sites,
                        i8[:, ::1] labels, double[:, ::1] urand,
                        i32[:, ::1] edges, i32[::1] cell_i, i32[::1] cell_j,
                        int L1, int L2, i32[:, ::1] faces,
                        bint record_codes=False):
    """Advance the chain, measuring after every sweep.

    Returns (acceptance count, dict of per-sweep record arrays).
    """
    cdef int n = sigma.shape[0]
    cdef int nswp = sites.shape[0]
    cdef int nprop = sites.shape[1]
    cdef int ne = edges.shape[0]
    cdef long long cap = 1
    while cap < 4 * (ne + 1):
        cap <<= 1

    cdef cnp.ndarray par_a = np.zeros(n, dtype=np.int8)
    cdef cnp.ndarray stamp_a = np.zeros(n, dtype=np.int64)
    cdef cnp.ndarray stack_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray parent_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray parent2_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray size_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray flags_a = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray hkey_a = np.zeros(cap, dtype=np.uint64)
    cdef cnp.ndarray hpar_a = np.zeros(cap, dtype=np.uint8)

    ndom_arr = np.zeros(nswp, dtype=np.int32)
    maxdom_arr = np.zeros(nswp, dtype=np.int32)
    nmatch_arr = np.zeros(nswp, dtype=np.int32)
    cross1_arr = np.zeros(nswp, dtype=np.uint8)
    cross2_arr = np.zeros(nswp, dtype=np.uint8)
    mono_arr = np.zeros(nswp, dtype=np.int32)
    codes_arr = np.zeros(nswp, dtype=np.uint64)

    cdef i8* par = <i8*>cnp.PyArray_DATA(par_a)
    cdef long long* stamp = <long long*>cnp.PyArray_DATA(stamp_a)
    cdef i32* stack = <i32*>cnp.PyArray_DATA(stack_a)
    cdef i32* parent = <i32*>cnp.PyArray_DATA(parent_a)
    cdef i32* parent2 = <i32*>cnp.PyArray_DATA(parent2_a)
    cdef i32* size = <i32*>cnp.PyArray_DATA(size_a)
    cdef u8* flags = <u8*>cnp.PyArray_DATA(flags_a)
    cdef u64* hkey = <u64*>cnp.PyArray_DATA(hkey_a)
    cdef u8* hpar = <u8*>cnp.PyArray_DATA(hpar_a)

    cdef i32[::1] ndom_v = ndom_arr
    cdef i32[::1] maxdom_v = maxdom_arr
    cdef i32[::1] nmatch_v = nmatch_arr
    cdef u8[::1] cross1_v = cross1_arr
    cdef u8[::1] cross2_v = cross2_arr
    cdef i32[::1] mono_v = mono_arr
    cdef u64[::1] codes_v = codes_arr

    cdef long long cur = 0
    cdef long accepts = 0
    cdef int t, i, v, b, nm
    cdef double r
    for t in range(nswp):
        for i in range(nprop):
            v = sites[t, i]
            r = _ratio(v, labels[t, i], &sigma[0], &color[0], &nbr_ptr[0],
                       &nbr[0], beta, par, stamp, &cur, stack, &b)
            if urand[t, i] < r:
                sigma[v] = <i8>b
                accepts += 1
        _measure(&sigma[0], n, edges, &cell_i[0], &cell_j[0], L1, L2, faces,
                 parent, parent2, size, flags, hkey, hpar, cap, record_codes,
                 &ndom_v[t], &maxdom_v[t], &cross1_v[t], &cross2_v[t],
                 &mono_v[t], &codes_v[t])
        nm = 0
        for v in range(n):
            if sigma[v] == color[v]:
                nm += 1
        nmatch_v[t] = nm
    rec = {
        "ndom": ndom_arr,
        "maxdom": maxdom_arr,
        "nmatch": nmatch_arr,
        "cross1": cross1_arr,
        "cross2": cross2_arr,
        "mono": mono_arr,
        "codes": codes_arr,
    }
    return accepts, rec


def measure_config(i8[::1] sigma, i32[::1] nbr_ptr, i32[::1] nbr,
                   i32[:, ::1] edges, i32[::1] cell_i, i32[::1] cell_j,
                   int L1, int L2, i32[:, ::1] faces):
    """One-shot measurement of a configuration (same quantities as a sweep)."""
    cdef int n = sigma.shape[0]
    cdef int ne = edges.shape[0]
    cdef long long cap = 1
    while cap < 4 * (ne + 1):
        cap <<= 1
    cdef cnp.ndarray parent_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray parent2_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray size_a = np.zeros(n, dtype=np.int32)
    cdef cnp.ndarray flags_a = np.zeros(n, dtype=np.uint8)
    cdef cnp.ndarray hkey_a = np.zeros(cap, dtype=np.uint64)
    cdef cnp.ndarray hpar_a = np.zeros(cap, dtype=np.uint8)
    cdef i32 ndom = 0, maxdom = 0, mono = 0
    cdef u8 cross1 = 0, cross2 = 0
    cdef u64 code = 0
    _measure(&sigma[0], n, edges, &cell_i[0], &cell_j[0], L1, L2, faces,
             <i32*>cnp.PyArray_DATA(parent_a), <i32*>cnp.PyArray_DATA(parent2_a),
             <i32*>cnp.PyArray_DATA(size_a), <u8*>cnp.PyArray_DATA(flags_a),
             <u64*>cnp.PyArray_DATA(hkey_a), <u8*>cnp.PyArray_DATA(hpar_a),
             cap, True, &ndom, &maxdom, &cross1, &cross2, &mono, &code)
    return {
        "ndom": int(ndom),
        "maxdom": int(maxdom),
        "cross1": bool(cross1),
        "cross2": bool(cross2),
        "mono": int(mono),
        "code": int(code),
    }
