"""Pure-Python reference versions of the compiled kernels.

Each function consumes pre-drawn random numbers, so the compiled and
fallback backends produce identical paths for the same inputs.
"""
import math

import numpy as np


def _spin_index(s):
    idx = 0
    for i in range(len(s)):
        if s[i] < 0:
            idx |= 1 << i
    return idx


def _spin_energy(s, J, h):
    n = len(s)
    e = 0.0
    for i in range(n):
        e -= h[i] * s[i]
        for j in range(i + 1, n):
            e -= J[i, j] * s[i] * s[j]
    return e


def _spin_sweep(s, J, h, beta, sites, uniforms, heat_bath):
    s = np.array(s, dtype=np.int64)
    J = np.ascontiguousarray(J, dtype=np.float64)
    h = np.ascontiguousarray(h, dtype=np.float64)
    n = len(s)
    steps = len(sites)
    # same summation order as the compiled kernel, so traces agree bitwise
    field = np.empty(n)
    for i in range(n):
        field[i] = h[i]
        for j in range(n):
            field[i] += J[i, j] * s[j]
    e = _spin_energy(s, J, h)
    m = float(s.sum())
    idx = _spin_index(s)
    energies = np.empty(steps)
    mags = np.empty(steps)
    states = np.empty(steps, dtype=np.int64)
    accepted = 0
    for t in range(steps):
        i = sites[t]
        u = uniforms[t]
        si = s[i]
        dE = 2.0 * si * field[i]
        if heat_bath:
            # P(s_i = +1 | rest) = 1 / (1 + exp(-2 beta f_i))
            x = -2.0 * beta * field[i]
            p_up = 1.0 / (1.0 + math.exp(x)) if x < 700 else 0.0
            new = 1 if u < p_up else -1
            flip = new != si
        else:
            flip = dE <= 0.0 or u < math.exp(-beta * dE)
        if flip:
            accepted += 1
            s[i] = -si
            e += dE
            m -= 2 * si
            idx ^= 1 << i
            d = -2.0 * si
            for j in range(n):
                field[j] += J[j, i] * d
        energies[t] = e
        mags[t] = m / n
        states[t] = idx
    return s, energies, mags, states, accepted


def metropolis_spins(s, J, h, beta, sites, uniforms):
    """Single-spin-flip Metropolis for E(s) = -sum h_i s_i - sum_{i<j} J_ij s_i s_j."""
    return _spin_sweep(s, J, h, beta, sites, uniforms, False)


def heat_bath_spins(s, J, h, beta, sites, uniforms):
    """Single-site heat-bath (Glauber) resampling for the same energy."""
    return _spin_sweep(s, J, h, beta, sites, uniforms, True)


def _table_sweep(x, q, table, beta, sites, offsets, uniforms, heat_bath):
    x = np.array(x, dtype=np.int64)
    n = len(x)
    steps = len(sites)
    powers = np.array([q**i for i in range(n)], dtype=np.int64)
    idx = int(np.dot(x, powers))
    states = np.empty(steps, dtype=np.int64)
    energies = np.empty(steps)
    probs = np.empty(q)
    accepted = 0
    for t in range(steps):
        i = sites[t]
        u = uniforms[t]
        base = idx - x[i] * powers[i]
        if heat_bath:
            emin = math.inf
            for a in range(q):
                ea = table[base + a * powers[i]]
                probs[a] = ea
                if ea < emin:
                    emin = ea
            tot = 0.0
            for a in range(q):
                probs[a] = math.exp(-beta * (probs[a] - emin))
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
            if not (dE <= 0.0 or u < math.exp(-beta * dE)):
                new = x[i]
        if new != x[i]:
            accepted += 1
            x[i] = new
            idx = base + new * powers[i]
        states[t] = idx
        energies[t] = table[idx]
    return x, energies, states, accepted


def metropolis_table(x, q, table, beta, sites, offsets, uniforms):
    """Metropolis on X^n (|X| = q) with a tabulated energy; the proposal moves
    coordinate ``sites[t]`` by ``offsets[t]`` in 1..q-1 (mod q)."""
    return _table_sweep(x, q, table, beta, sites, offsets, uniforms, False)


def heat_bath_table(x, q, table, beta, sites, uniforms):
    """Heat-bath coordinate resampling on X^n with a tabulated energy."""
    return _table_sweep(x, q, table, beta, sites, None, uniforms, True)


def _draw(cdf_row, u):
    k = len(cdf_row)
    for a in range(k):
        if u < cdf_row[a]:
            return a
    return k - 1


def hmm_sample(Q, W, pi, ux, uy):
    """Sample (x_t, y_t) of a hidden Markov chain by inverse-CDF draws."""
    cq = np.cumsum(Q, axis=1)
    cw = np.cumsum(W, axis=1)
    cp = np.cumsum(pi)
    n = len(ux)
    xs = np.empty(n, dtype=np.int64)
    ys = np.empty(n, dtype=np.int64)
    x = _draw(cp, ux[0])
    for t in range(n):
        if t > 0:
            x = _draw(cq[x], ux[t])
        xs[t] = x
        ys[t] = _draw(cw[x], uy[t])
    return xs, ys


def hmm_forward_increments(Q, W, pi, ys):
    """ln P(y_t | y_0..y_{t-1}) for each t, by the normalized forward recursion."""
    Q = np.asarray(Q, dtype=float)
    W = np.asarray(W, dtype=float)
    kx = Q.shape[0]
    n = len(ys)
    out = np.empty(n)
    pred = np.array(pi, dtype=float)
    post = np.empty(kx)
    for t in range(n):
        y = ys[t]
        c = 0.0
        for a in range(kx):
            post[a] = pred[a] * W[a, y]
            c += post[a]
        out[t] = math.log(c)
        for a in range(kx):
            post[a] /= c
        for b in range(kx):
            acc = 0.0
            for a in range(kx):
                acc += post[a] * Q[a, b]
            pred[b] = acc
    return out
