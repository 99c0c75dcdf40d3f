"""Pure-Python kernels; the reference the compiled extension must match bit for bit.

Every routine consumes pre-drawn uniforms so that both backends produce
identical output for identical input.
"""

import math

import numpy as np

BACKEND = "python"


def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        parent[a], a = root, parent[a]
    return root


def batch_components(bits, eu, ev, n_vertices):
    bits = np.asarray(bits)
    n_rows = bits.shape[0]
    labels = np.empty((n_rows, n_vertices), dtype=np.int32)
    counts = np.empty(n_rows, dtype=np.int32)
    eu = [int(u) for u in eu]
    ev = [int(v) for v in ev]
    for r in range(n_rows):
        parent = list(range(n_vertices))
        for e in np.flatnonzero(bits[r]).tolist():
            a, b = _find(parent, eu[e]), _find(parent, ev[e])
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
        seen = {}
        row = labels[r]
        for v in range(n_vertices):
            root = _find(parent, v)
            if root not in seen:
                seen[root] = len(seen)
            row[v] = seen[root]
        counts[r] = len(seen)
    return labels, counts


def batch_windings(bits, eu, ev, shifts, n_vertices):
    """Per row and axis: does some open cycle have nonzero winding along that axis."""
    bits = np.asarray(bits)
    shifts = np.asarray(shifts, dtype=np.int64)
    n_rows = bits.shape[0]
    d = shifts.shape[1]
    out = np.zeros((n_rows, d), dtype=np.uint8)
    shift_rows = [tuple(int(c) for c in s) for s in shifts]
    for r in range(n_rows):
        parent = list(range(n_vertices))
        pot = [[0] * d for _ in range(n_vertices)]  # offset from vertex to its parent

        def find(a):
            path = []
            while parent[a] != a:
                path.append(a)
                a = parent[a]
            root = a
            # compress from the top down so offsets accumulate
            for x in reversed(path):
                p = parent[x]
                if p != root:
                    pot[x] = [pot[x][i] + pot[p][i] for i in range(d)]
                parent[x] = root
            return root

        for e in np.flatnonzero(bits[r]).tolist():
            u, v, s = int(eu[e]), int(ev[e]), shift_rows[e]
            ru, rv = find(u), find(v)
            pu = pot[u] if u != ru else [0] * d
            pv = pot[v] if v != rv else [0] * d
            if ru == rv:
                for i in range(d):
                    if pu[i] + s[i] - pv[i] != 0:
                        out[r, i] = 1
            else:
                # position(v) = position(u) + s; attach rv below ru
                parent[rv] = ru
                pot[rv] = [pu[i] + s[i] - pv[i] for i in range(d)]
    return out


def glauber_run(spins, indptr, nbr, coup, field, order, beta, uniforms, thinning, out):
    s = [int(x) for x in spins]
    indptr = [int(x) for x in indptr]
    nbr = [int(x) for x in nbr]
    coup = [float(x) for x in coup]
    field = [float(x) for x in field]
    order = [int(x) for x in order]
    uni = np.asarray(uniforms).tolist()
    k = 0
    for r in range(out.shape[0]):
        for _ in range(thinning):
            for v in order:
                local = field[v]
                for m in range(indptr[v], indptr[v + 1]):
                    w = nbr[m]
                    if w != v:
                        local += coup[m] * s[w]
                arg = -2.0 * beta * local
                if arg > 700.0:
                    prob_up = 0.0
                else:
                    prob_up = 1.0 / (1.0 + math.exp(arg))
                s[v] = 1 if uni[k] < prob_up else -1
                k += 1
        out[r, :] = s
    spins[:] = s


def rc_run(bits, eu, ev, indptr, nbr, eid, p_edge, q, uniforms, thinning, out):
    state = [int(x) for x in bits]
    eu = [int(x) for x in eu]
    ev = [int(x) for x in ev]
    indptr = [int(x) for x in indptr]
    nbr = [int(x) for x in nbr]
    eid = [int(x) for x in eid]
    p_edge = [float(x) for x in p_edge]
    uni = np.asarray(uniforms).tolist()
    n_edges = len(state)
    n_vertices = len(indptr) - 1
    stamp = [0] * n_vertices
    tick = 0
    k = 0
    for r in range(out.shape[0]):
        for _ in range(thinning):
            for e in range(n_edges):
                u, v = eu[e], ev[e]
                connected = u == v
                if not connected:
                    tick += 1
                    stamp[u] = tick
                    queue = [u]
                    head = 0
                    while head < len(queue) and not connected:
                        a = queue[head]
                        head += 1
                        for m in range(indptr[a], indptr[a + 1]):
                            f = eid[m]
                            if f == e or not state[f]:
                                continue
                            b = nbr[m]
                            if stamp[b] != tick:
                                if b == v:
                                    connected = True
                                    break
                                stamp[b] = tick
                                queue.append(b)
                p = p_edge[e]
                if connected:
                    p_open = p
                else:
                    p_open = p / (p + q * (1.0 - p))
                state[e] = 1 if uni[k] < p_open else 0
                k += 1
        out[r, :] = state
    bits[:] = state


def loop_run(eta, bptr, bedges, x, uniforms, thinning, out):
    state = [int(b) for b in eta]
    bptr = [int(b) for b in bptr]
    bedges = [int(b) for b in bedges]
    uni = np.asarray(uniforms).tolist()
    n_basis = len(bptr) - 1
    k = 0
    for r in range(out.shape[0]):
        for _ in range(thinning):
            for _ in range(n_basis):
                c = int(uni[k] * n_basis)
                if c >= n_basis:
                    c = n_basis - 1
                delta = 0
                for m in range(bptr[c], bptr[c + 1]):
                    delta += 1 - 2 * state[bedges[m]]
                if delta <= 0 or uni[k + 1] < math.pow(x, delta):
                    for m in range(bptr[c], bptr[c + 1]):
                        state[bedges[m]] ^= 1
                k += 2
        out[r, :] = state
    eta[:] = state
