"""Pure-Python Metropolis/measurement kernels.

Semantics contract shared with the compiled twin in ``_mc.pyx``: both consume
the same pre-generated arrays of proposal sites, label offsets, and uniform
variates (one of each per proposal), and both compute the acceptance ratio
with the same floating-point expression, so a fixed seed produces
bit-identical chains and records on either backend.

Proposal at site v, outcome a -> b: the weight ratio is
beta^dNm * 2^dL with dNm the change in coloring matches and
dL = (n_b - n_a) + (s - k_b), where n_a/n_b count neighbors currently at
a/b, k_b counts distinct b-domains among the neighbors, and s counts the
pieces v's old domain splits into without v. The move is rejected outright
when merging v into the adjacent b-domains would create an odd cycle
(checked by 2-coloring those domains with parities seeded relative to v).
"""

import math

import numpy as np

KERNEL_NAME = "py"


def _adjacency_lists(nbr_ptr, nbr):
    return [nbr[nbr_ptr[v] : nbr_ptr[v + 1]].tolist() for v in range(len(nbr_ptr) - 1)]


def _ratio(v, lab, sigma, color, adj, beta):
    """Returns (proposed label, acceptance ratio) for flipping site v."""
    a = sigma[v]
    b = (a + lab) % 3
    n_a = 0
    n_b = 0
    for w in adj[v]:
        sw = sigma[w]
        if sw == a:
            n_a += 1
        elif sw == b:
            n_b += 1

    # parity-checked merge of the adjacent b-domains through v
    k_b = 0
    par = {}
    ok = True
    if n_b:
        for w in adj[v]:
            if sigma[w] != b:
                continue
            if w in par:
                if par[w] != 1:
                    ok = False
                    break
                continue
            k_b += 1
            par[w] = 1
            stack = [w]
            while stack and ok:
                x = stack.pop()
                px = par[x]
                for y in adj[x]:
                    if sigma[y] != b:
                        continue
                    py = par.get(y)
                    if py is None:
                        par[y] = px ^ 1
                        stack.append(y)
                    elif py == px:
                        ok = False
                        break
            if not ok:
                break
    if not ok:
        return b, 0.0

    if n_a == 0:
        s = 0
    elif n_a == 1:
        s = 1
    else:
        s = 0
        seen = {v}
        for w in adj[v]:
            if sigma[w] != a or w in seen:
                continue
            s += 1
            seen.add(w)
            stack = [w]
            while stack:
                x = stack.pop()
                for y in adj[x]:
                    if sigma[y] == a and y not in seen:
                        seen.add(y)
                        stack.append(y)

    d_match = (1 if b == color[v] else 0) - (1 if a == color[v] else 0)
    d_loops = (n_b - n_a) + (s - k_b)
    if d_match == 0:
        factor = 1.0
    elif d_match == 1:
        factor = beta
    else:
        factor = 1.0 / beta
    ratio = factor * math.ldexp(1.0, d_loops)
    return b, ratio


def run_sweeps(sigma, color, nbr_ptr, nbr, beta, sites, labels, urand):
    """Advance the chain without measuring; returns the acceptance count."""
    adj = _adjacency_lists(nbr_ptr, nbr)
    sig = sigma.tolist()
    col = color.tolist()
    accepts = 0
    nswp, nprop = sites.shape
    for t in range(nswp):
        row_v, row_l, row_u = sites[t].tolist(), labels[t].tolist(), urand[t].tolist()
        for i in range(nprop):
            v = row_v[i]
            b, r = _ratio(v, row_l[i], sig, col, adj, beta)
            if row_u[i] < r:
                sig[v] = b
                accepts += 1
    sigma[:] = sig
    return accepts


def accumulate_occupancy(sigma, color, nbr_ptr, nbr, beta, sites, labels, urand, occ):
    """Advance the chain, accumulating expected per-proposal occupancy.

    At every proposal the estimator deposits weight 1-alpha on the current
    configuration code and alpha = min(1, ratio) on the proposed one, which
    averages out the accept/reject noise of plain frequency counting. ``occ``
    (length 3^N) is accumulated in place; returns the acceptance count.
    """
    n = len(sigma)
    if occ.shape[0] != 3**n:
        raise ValueError("occupancy table must have length 3^N")
    adj = _adjacency_lists(nbr_ptr, nbr)
    sig = sigma.tolist()
    col = color.tolist()
    pow3 = [3**v for v in range(n)]
    code = sum(sig[v] * pow3[v] for v in range(n))
    accepts = 0
    nswp, nprop = sites.shape
    for t in range(nswp):
        row_v, row_l, row_u = sites[t].tolist(), labels[t].tolist(), urand[t].tolist()
        for i in range(nprop):
            v = row_v[i]
            b, r = _ratio(v, row_l[i], sig, col, adj, beta)
            alpha = r if r < 1.0 else 1.0
            code2 = code + (b - sig[v]) * pow3[v]
            occ[code] += 1.0 - alpha
            occ[code2] += alpha
            if row_u[i] < r:
                sig[v] = b
                code = code2
                accepts += 1
    sigma[:] = sig
    return accepts


def _measure(sig, adj, edges, cell_i, cell_j, L1, L2, faces, want_code):
    n = len(sig)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        if sig[a] == sig[b]:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb

    size = {}
    for v in range(n):
        r = find(v)
        size[r] = size.get(r, 0) + 1
    ndom = len(size)
    maxdom = max(size.values())

    parity = {}
    for a, b in edges:
        if sig[a] != sig[b]:
            ra, rb = find(a), find(b)
            key = (ra, rb) if ra < rb else (rb, ra)
            parity[key] = parity.get(key, 0) ^ 1

    parent2 = {r: r for r in size}

    def find2(x):
        while parent2[x] != x:
            parent2[x] = parent2[parent2[x]]
            x = parent2[x]
        return x

    for (ra, rb), odd in parity.items():
        if odd:
            qa, qb = find2(ra), find2(rb)
            if qa != qb:
                parent2[qa] = qb

    flags = {}
    for v in range(n):
        r = find2(find(v))
        f = flags.get(r, 0)
        if cell_i[v] == 0:
            f |= 1
        if cell_i[v] == L1 - 1:
            f |= 2
        if cell_j[v] == 0:
            f |= 4
        if cell_j[v] == L2 - 1:
            f |= 8
        flags[r] = f
    cross1 = any((f & 3) == 3 for f in flags.values())
    cross2 = any((f & 12) == 12 for f in flags.values())

    mono = 0
    for face in faces:
        first = sig[face[0]]
        if all(sig[x] == first for x in face[1:]):
            mono += 1

    code = 0
    if want_code:
        for v in range(n - 1, -1, -1):
            code = (code * 3 + sig[v]) & 0xFFFFFFFFFFFFFFFF
    return ndom, maxdom, cross1, cross2, mono, code


def run_sweeps_measured(
    sigma,
    color,
    nbr_ptr,
    nbr,
    beta,
    sites,
    labels,
    urand,
    edges,
    cell_i,
    cell_j,
    L1,
    L2,
    faces,
    record_codes=False,
):
    """Advance the chain, measuring after every sweep.

    Returns (acceptance count, dict of per-sweep record arrays).
    """
    adj = _adjacency_lists(nbr_ptr, nbr)
    sig = sigma.tolist()
    col = color.tolist()
    edge_list = [tuple(e) for e in edges.tolist()]
    ci, cj = cell_i.tolist(), cell_j.tolist()
    face_list = [f.tolist() for f in faces]
    nswp, nprop = sites.shape
    rec = {
        "ndom": np.zeros(nswp, dtype=np.int32),
        "maxdom": np.zeros(nswp, dtype=np.int32),
        "nmatch": np.zeros(nswp, dtype=np.int32),
        "cross1": np.zeros(nswp, dtype=np.uint8),
        "cross2": np.zeros(nswp, dtype=np.uint8),
        "mono": np.zeros(nswp, dtype=np.int32),
        "codes": np.zeros(nswp, dtype=np.uint64),
    }
    accepts = 0
    for t in range(nswp):
        row_v, row_l, row_u = sites[t].tolist(), labels[t].tolist(), urand[t].tolist()
        for i in range(nprop):
            v = row_v[i]
            b, r = _ratio(v, row_l[i], sig, col, adj, beta)
            if row_u[i] < r:
                sig[v] = b
                accepts += 1
        ndom, maxdom, c1, c2, mono, code = _measure(
            sig, adj, edge_list, ci, cj, L1, L2, face_list, record_codes
        )
        rec["ndom"][t] = ndom
        rec["maxdom"][t] = maxdom
        rec["nmatch"][t] = sum(1 for v in range(len(sig)) if sig[v] == col[v])
        rec["cross1"][t] = c1
        rec["cross2"][t] = c2
        rec["mono"][t] = mono
        rec["codes"][t] = code
    sigma[:] = sig
    return accepts, rec


def measure_config(sigma, nbr_ptr, nbr, edges, cell_i, cell_j, L1, L2, faces):
    """One-shot measurement of a configuration (same quantities as a sweep)."""
    adj = _adjacency_lists(nbr_ptr, nbr)
    ndom, maxdom, c1, c2, mono, code = _measure(
        sigma.tolist(),
        adj,
        [tuple(e) for e in edges.tolist()],
        cell_i.tolist(),
        cell_j.tolist(),
        L1,
        L2,
        [f.tolist() for f in faces],
        True,
    )
    return {
        "ndom": ndom,
        "maxdom": maxdom,
        "cross1": bool(c1),
        "cross2": bool(c2),
        "mono": mono,
        "code": code,
    }
