# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same contracts as ``_kernels_py``; outputs are bit-identical."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, pow
from libc.stdlib cimport malloc, free

BACKEND = "cython"


cdef inline int _find(int* parent, int a) noexcept nogil:
    cdef int root = a
    cdef int nxt
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


def batch_components(const unsigned char[:, ::1] bits, const int[::1] eu,
                     const int[::1] ev, int n_vertices):
    cdef Py_ssize_t n_rows = bits.shape[0]
    cdef Py_ssize_t n_edges = bits.shape[1]
    labels_arr = np.empty((n_rows, n_vertices), dtype=np.int32)
    counts_arr = np.empty(n_rows, dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    cdef int[::1] counts = counts_arr
    cdef int* parent = <int*> malloc(max(n_vertices, 1) * sizeof(int))
    cdef int* relabel = <int*> malloc(max(n_vertices, 1) * sizeof(int))
    cdef Py_ssize_t r, e
    cdef int v, a, b, root, nlab
    with nogil:
        for r in range(n_rows):
            for v in range(n_vertices):
                parent[v] = v
                relabel[v] = -1
            for e in range(n_edges):
                if bits[r, e]:
                    a = _find(parent, eu[e])
                    b = _find(parent, ev[e])
                    if a != b:
                        if a < b:
                            parent[b] = a
                        else:
                            parent[a] = b
            nlab = 0
            for v in range(n_vertices):
                root = _find(parent, v)
                if relabel[root] < 0:
                    relabel[root] = nlab
                    nlab += 1
                labels[r, v] = relabel[root]
            counts[r] = nlab
    free(parent)
    free(relabel)
    return labels_arr, counts_arr


def batch_windings(const unsigned char[:, ::1] bits, const int[::1] eu, const int[::1] ev,
                   const long long[:, ::1] shifts, int n_vertices):
    cdef Py_ssize_t n_rows = bits.shape[0]
    cdef Py_ssize_t n_edges = bits.shape[1]
    cdef int d = shifts.shape[1]
    out_arr = np.zeros((n_rows, d), dtype=np.uint8)
    cdef unsigned char[:, ::1] out = out_arr
    cdef int* parent = <int*> malloc(max(n_vertices, 1) * sizeof(int))
    cdef int* path = <int*> malloc(max(n_vertices, 1) * sizeof(int))
    cdef long long* pot = <long long*> malloc(max(n_vertices * d, 1) * sizeof(long long))
    cdef long long* pu = <long long*> malloc(max(d, 1) * sizeof(long long))
    cdef long long* pv = <long long*> malloc(max(d, 1) * sizeof(long long))
    cdef Py_ssize_t r, e
    cdef int v, i, u, w, ru, rv, x, p, depth, j
    with nogil:
        for r in range(n_rows):
            for v in range(n_vertices):
                parent[v] = v
                for i in range(d):
                    pot[v * d + i] = 0
            for e in range(n_edges):
                if not bits[r, e]:
                    continue
                u = eu[e]
                w = ev[e]
                # find with offset compression, for both endpoints
                for j in range(2):
                    x = u if j == 0 else w
                    depth = 0
                    while parent[x] != x:
                        path[depth] = x
                        depth += 1
                        x = parent[x]
                    while depth > 0:
                        depth -= 1
                        p = parent[path[depth]]
                        if p != x:
                            for i in range(d):
                                pot[path[depth] * d + i] += pot[p * d + i]
                        parent[path[depth]] = x
                    if j == 0:
                        ru = x
                    else:
                        rv = x
                for i in range(d):
                    pu[i] = pot[u * d + i] if u != ru else 0
                    pv[i] = pot[w * d + i] if w != rv else 0
                if ru == rv:
                    for i in range(d):
                        if pu[i] + shifts[e, i] - pv[i] != 0:
                            out[r, i] = 1
                else:
                    parent[rv] = ru
                    for i in range(d):
                        pot[rv * d + i] = pu[i] + shifts[e, i] - pv[i]
    free(parent)
    free(path)
    free(pot)
    free(pu)
    free(pv)
    return out_arr


def glauber_run(signed char[::1] spins, const int[::1] indptr, const int[::1] nbr,
                const double[::1] coup, const double[::1] field, const int[::1] order,
                double beta, const double[::1] uniforms, int thinning,
                signed char[:, ::1] out):
    cdef Py_ssize_t n_rec = out.shape[0]
    cdef Py_ssize_t n_vertices = spins.shape[0]
    cdef Py_ssize_t n_order = order.shape[0]
    cdef Py_ssize_t r, i, k = 0
    cdef int t, v, w, m
    cdef double local, arg, prob_up
    with nogil:
        for r in range(n_rec):
            for t in range(thinning):
                for i in range(n_order):
                    v = order[i]
                    local = field[v]
                    for m in range(indptr[v], indptr[v + 1]):
                        w = nbr[m]
                        if w != v:
                            local = local + coup[m] * spins[w]
                    arg = -2.0 * beta * local
                    if arg > 700.0:
                        prob_up = 0.0
                    else:
                        prob_up = 1.0 / (1.0 + exp(arg))
                    if uniforms[k] < prob_up:
                        spins[v] = 1
                    else:
                        spins[v] = -1
                    k += 1
            for i in range(n_vertices):
                out[r, i] = spins[i]


def rc_run(unsigned char[::1] bits, const int[::1] eu, const int[::1] ev,
           const int[::1] indptr, const int[::1] nbr, const int[::1] eid,
           const double[::1] p_edge, double q, const double[::1] uniforms,
           int thinning, unsigned char[:, ::1] out):
    cdef Py_ssize_t n_rec = out.shape[0]
    cdef int n_edges = bits.shape[0]
    cdef int n_vertices = indptr.shape[0] - 1
    cdef int* stamp = <int*> malloc(max(n_vertices, 1) * sizeof(int))
    cdef int* queue = <int*> malloc(max(n_vertices, 1) * sizeof(int))
    cdef Py_ssize_t r, k = 0
    cdef int t, e, u, v, a, b, f, m, head, tail, connected
    cdef int tick = 0
    cdef double p, p_open
    with nogil:
        for a in range(n_vertices):
            stamp[a] = 0
        for r in range(n_rec):
            for t in range(thinning):
                for e in range(n_edges):
                    u = eu[e]
                    v = ev[e]
                    connected = u == v
                    if not connected:
                        tick += 1
                        stamp[u] = tick
                        queue[0] = u
                        head = 0
                        tail = 1
                        while head < tail and not connected:
                            a = queue[head]
                            head += 1
                            for m in range(indptr[a], indptr[a + 1]):
                                f = eid[m]
                                if f == e or not bits[f]:
                                    continue
                                b = nbr[m]
                                if stamp[b] != tick:
                                    if b == v:
                                        connected = 1
                                        break
                                    stamp[b] = tick
                                    queue[tail] = b
                                    tail += 1
                    p = p_edge[e]
                    if connected:
                        p_open = p
                    else:
                        p_open = p / (p + q * (1.0 - p))
                    bits[e] = 1 if uniforms[k] < p_open else 0
                    k += 1
            for e in range(n_edges):
                out[r, e] = bits[e]
    free(stamp)
    free(queue)


def loop_run(unsigned char[::1] eta, const int[::1] bptr, const int[::1] bedges,
             double x, const double[::1] uniforms, int thinning,
             unsigned char[:, ::1] out):
    cdef Py_ssize_t n_rec = out.shape[0]
    cdef int n_edges = eta.shape[0]
    cdef int n_basis = bptr.shape[0] - 1
    cdef Py_ssize_t r, k = 0
    cdef int t, j, c, m, delta, e
    with nogil:
        for r in range(n_rec):
            for t in range(thinning):
                for j in range(n_basis):
                    c = <int> (uniforms[k] * n_basis)
                    if c >= n_basis:
                        c = n_basis - 1
                    delta = 0
                    for m in range(bptr[c], bptr[c + 1]):
                        delta += 1 - 2 * eta[bedges[m]]
                    if delta <= 0 or uniforms[k + 1] < pow(x, delta):
                        for m in range(bptr[c], bptr[c + 1]):
                            eta[bedges[m]] ^= 1
                    k += 2
            for e in range(n_edges):
                out[r, e] = eta[e]
