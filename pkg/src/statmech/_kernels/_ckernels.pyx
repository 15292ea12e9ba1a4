# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled sampler and forward-recursion kernels.

Signatures and results mirror statmech._kernels._pykernels exactly.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport exp, log, INFINITY

cnp.import_array()


cdef long long _spin_index(long long[::1] s):
    cdef long long idx = 0
    cdef Py_ssize_t i
    for i in range(s.shape[0]):
        if s[i] < 0:
            idx |= (<long long>1) << i
    return idx


def _spin_sweep(s_in, J_in, h_in, double beta, sites_in, uniforms_in, bint heat_bath):
    cdef long long[::1] s = np.array(s_in, dtype=np.int64)
    cdef double[:, ::1] J = np.ascontiguousarray(J_in, dtype=np.float64)
    cdef double[::1] h = np.ascontiguousarray(h_in, dtype=np.float64)
    cdef long long[::1] sites = np.ascontiguousarray(sites_in, dtype=np.int64)
    cdef double[::1] uniforms = np.ascontiguousarray(uniforms_in, dtype=np.float64)
    cdef Py_ssize_t n = s.shape[0]
    cdef Py_ssize_t steps = sites.shape[0]
    cdef double[::1] field = np.empty(n)
    cdef Py_ssize_t i, j, t
    cdef double e = 0.0, m = 0.0, dE, x, p_up, d, u
    cdef long long si, new, idx, accepted = 0
    cdef bint flip

    for i in range(n):
        field[i] = h[i]
        for j in range(n):
            field[i] += J[i, j] * s[j]
    for i in range(n):
        e -= h[i] * s[i]
        for j in range(i + 1, n):
            e -= J[i, j] * s[i] * s[j]
        m += s[i]
    idx = _spin_index(s)

    energies_a = np.empty(steps)
    mags_a = np.empty(steps)
    states_a = np.empty(steps, dtype=np.int64)
    cdef double[::1] energies = energies_a
    cdef double[::1] mags = mags_a
    cdef long long[::1] states = states_a

    for t in range(steps):
        i = sites[t]
        u = uniforms[t]
        si = s[i]
        dE = 2.0 * si * field[i]
        if heat_bath:
            x = -2.0 * beta * field[i]
            p_up = 1.0 / (1.0 + exp(x)) if x < 700 else 0.0
            new = 1 if u < p_up else -1
            flip = new != si
        else:
            flip = dE <= 0.0 or u < exp(-beta * dE)
        if flip:
            accepted += 1
            s[i] = -si
            e += dE
            m -= 2 * si
            idx ^= (<long long>1) << i
            d = -2.0 * si
            for j in range(n):
                field[j] += J[j, i] * d
        energies[t] = e
        mags[t] = m / n
        states[t] = idx
    return np.asarray(s), energies_a, mags_a, states_a, accepted


def metropolis_spins(s, J, h, double beta, sites, uniforms):
    return _spin_sweep(s, J, h, beta, sites, uniforms, False)


def heat_bath_spins(s, J, h, double beta, sites, uniforms):
    return _spin_sweep(s, J, h, beta, sites, uniforms, True)


def _table_sweep(x_in, long long q, table_in, double beta, sites_in, offsets_in,
                 uniforms_in, bint heat_bath):
    cdef long long[::1] x = np.array(x_in, dtype=np.int64)
    cdef double[::1] table = np.ascontiguousarray(table_in, dtype=np.float64)
    cdef long long[::1] sites = np.ascontiguousarray(sites_in, dtype=np.int64)
    cdef double[::1] uniforms = np.ascontiguousarray(uniforms_in, dtype=np.float64)
    cdef long long[::1] offsets
    if not heat_bath:
        offsets = np.ascontiguousarray(offsets_in, dtype=np.int64)
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t steps = sites.shape[0]
    cdef long long[::1] powers = np.empty(n, dtype=np.int64)
    cdef double[::1] probs = np.empty(q)
    cdef Py_ssize_t i, t, a
    cdef long long idx = 0, base, new, accepted = 0, pw = 1
    cdef double u, ea, emin, tot, target, acc, dE

    for i in range(n):
        powers[i] = pw
        idx += x[i] * pw
        pw *= q

    states_a = np.empty(steps, dtype=np.int64)
    energies_a = np.empty(steps)
    cdef long long[::1] states = states_a
    cdef double[::1] energies = energies_a

    for t in range(steps):
        i = sites[t]
        u = uniforms[t]
        base = idx - x[i] * powers[i]
        if heat_bath:
            emin = INFINITY
            for a in range(q):
                ea = table[base + a * powers[i]]
                probs[a] = ea
                if ea < emin:
                    emin = ea
            tot = 0.0
            for a in range(q):
                probs[a] = exp(-beta * (probs[a] - emin))
                tot += probs[a]
            target = u * tot
            acc = 0.0
            new = q - 1
            for a in range(q):
                acc += probs[a]
                if target < acc:
                    new = a
                    break
        else:
            new = (x[i] + offsets[t]) % q
            dE = table[base + new * powers[i]] - table[idx]
            if not (dE <= 0.0 or u < exp(-beta * dE)):
                new = x[i]
        if new != x[i]:
            accepted += 1
            x[i] = new
            idx = base + new * powers[i]
        states[t] = idx
        energies[t] = table[idx]
    return np.asarray(x), energies_a, states_a, accepted


def metropolis_table(x, long long q, table, double beta, sites, offsets, uniforms):
    return _table_sweep(x, q, table, beta, sites, offsets, uniforms, False)


def heat_bath_table(x, long long q, table, double beta, sites, uniforms):
    return _table_sweep(x, q, table, beta, sites, None, uniforms, True)


cdef inline long long _draw(double[:, ::1] cdf, Py_ssize_t row, double u):
    cdef Py_ssize_t a, k = cdf.shape[1]
    for a in range(k):
        if u < cdf[row, a]:
            return a
    return k - 1


def hmm_sample(Q, W, pi, ux_in, uy_in):
    cdef double[:, ::1] cq = np.ascontiguousarray(np.cumsum(Q, axis=1), dtype=np.float64)
    cdef double[:, ::1] cw = np.ascontiguousarray(np.cumsum(W, axis=1), dtype=np.float64)
    cdef double[:, ::1] cp = np.ascontiguousarray(np.cumsum(pi)[None, :], dtype=np.float64)
    cdef double[::1] ux = np.ascontiguousarray(ux_in, dtype=np.float64)
    cdef double[::1] uy = np.ascontiguousarray(uy_in, dtype=np.float64)
    cdef Py_ssize_t n = ux.shape[0], t
    xs_a = np.empty(n, dtype=np.int64)
    ys_a = np.empty(n, dtype=np.int64)
    cdef long long[::1] xs = xs_a
    cdef long long[::1] ys = ys_a
    cdef long long x = _draw(cp, 0, ux[0])
    for t in range(n):
        if t > 0:
            x = _draw(cq, x, ux[t])
        xs[t] = x
        ys[t] = _draw(cw, x, uy[t])
    return xs_a, ys_a


def hmm_forward_increments(Q_in, W_in, pi_in, ys_in):
    cdef double[:, ::1] Q = np.ascontiguousarray(Q_in, dtype=np.float64)
    cdef double[:, ::1] W = np.ascontiguousarray(W_in, dtype=np.float64)
    cdef long long[::1] ys = np.ascontiguousarray(ys_in, dtype=np.int64)
    cdef Py_ssize_t kx = Q.shape[0], n = ys.shape[0], t, a, b
    cdef double[::1] pred = np.array(pi_in, dtype=np.float64)
    cdef double[::1] post = np.empty(kx)
    out_a = np.empty(n)
    cdef double[::1] out = out_a
    cdef double c, acc
    cdef long long y
    for t in range(n):
        y = ys[t]
        c = 0.0
        for a in range(kx):
            post[a] = pred[a] * W[a, y]
            c += post[a]
        out[t] = log(c)
        for a in range(kx):
            post[a] /= c
        for b in range(kx):
            acc = 0.0
            for a in range(kx):
                acc += post[a] * Q[a, b]
            pred[b] = acc
    return out_a
