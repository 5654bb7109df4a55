"""Compiled inner loops for the NAND jump process.

Everything here works in reduced units: energies in kT, voltages in V_T,
capacitance in q/V_T and time in 1/Gamma.  Islands are numbered by their
bit in the state index: N1=0, N2=1, P1=2, P2=3.
"""
import math

import numba as nb
import numpy as np

N1, N2, P1, P2 = 0, 1, 2, 3
DRAIN, SOURCE, GATE = 0, 1, 2

# electrode couplings: (island, electrode)
EDGE_SITE = np.array([P1, P2, P1, P2, N1, N2], dtype=np.int64)
EDGE_ELEC = np.array([DRAIN, DRAIN, GATE, GATE, GATE, SOURCE], dtype=np.int64)
# island-island hops a <-> b; "forward" moves the carrier from a to b
DOT_A = np.array([P1, N1, N1, N1], dtype=np.int64)
DOT_B = np.array([P2, N2, P1, P2], dtype=np.int64)
N_CHANNELS = 6 + 2 * 4


@nb.njit(cache=True, inline="always")
def fermi(x):
    return 0.5 * (1.0 - math.tanh(0.5 * x))


@nb.njit(cache=True, inline="always")
def _mu(el, mu_d, mu_s, v):
    if el == DRAIN:
        return mu_d
    if el == SOURCE:
        return mu_s
    return v


@nb.njit(cache=True)
def fill_generator(eps, mu_d, mu_s, v, dot_fw, dot_bw, out):
    """Column-convention generator in units of Gamma; ``v`` is mu_g in kT."""
    out[:, :] = 0.0
    for e in range(6):
        j = EDGE_SITE[e]
        x = eps[j] - _mu(EDGE_ELEC[e], mu_d, mu_s, v)
        fill, empty = fermi(x), fermi(-x)
        for s in range(16):
            t = s ^ (1 << j)
            out[t, s] += empty if (s >> j) & 1 else fill
    for k in range(4):
        a, b = DOT_A[k], DOT_B[k]
        for s in range(16):
            oa, ob = (s >> a) & 1, (s >> b) & 1
            if oa == ob:
                continue
            t = s ^ (1 << a) ^ (1 << b)
            out[t, s] += dot_fw[k] if oa else dot_bw[k]
    for s in range(16):
        tot = 0.0
        for t in range(16):
            if t != s:
                tot += out[t, s]
        out[s, s] = -tot


@nb.njit(cache=True)
def occupations(p, out):
    for j in range(4):
        acc = 0.0
        for s in range(16):
            if (s >> j) & 1:
                acc += p[s]
        out[j] = acc


@nb.njit(cache=True)
def gate_current(eps, v, p):
    """Net carrier flow into the load node (per 1/Gamma)."""
    J = 0.0
    for e in range(6):
        if EDGE_ELEC[e] != GATE:
            continue
        j = EDGE_SITE[e]
        n = 0.0
        for s in range(16):
            if (s >> j) & 1:
                n += p[s]
        x = eps[j] - v
        J += fermi(-x) * n - fermi(x) * (1.0 - n)
    return J


@nb.njit(cache=True)
def supply_power(eps, mu_d, mu_s, v, p):
    """Dissipation integrand J_s->N2 (mu_s-mu_g) + J_d->P (mu_d-mu_g), kT per 1/Gamma."""
    W = 0.0
    for e in range(6):
        el = EDGE_ELEC[e]
        if el == GATE:
            continue
        j = EDGE_SITE[e]
        n = 0.0
        for s in range(16):
            if (s >> j) & 1:
                n += p[s]
        mu = _mu(el, mu_d, mu_s, v)
        x = eps[j] - mu
        W += (fermi(x) * (1.0 - n) - fermi(-x) * n) * (mu - v)
    return W


@nb.njit(cache=True)
def expm_generator(A, h, out):
    """exp(A h) for a generator A.

    Shifting by the largest exit rate makes the matrix entrywise nonnegative,
    so every Taylor term is nonnegative and the result is a stochastic matrix
    up to rounding, for any step length.
    """
    n = A.shape[0]
    m = 0.0
    for i in range(n):
        m = max(m, -A[i, i])
    s = 0
    while m * h > 0.25 * 2.0 ** s:
        s += 1
    hs = h / 2.0 ** s
    B = A * hs
    for i in range(n):
        B[i, i] += m * hs
    T = np.eye(n)
    term = np.eye(n)
    for k in range(1, 40):
        term = (term @ B) / k
        T += term
        if term.max() < 1e-18:
            break
    T *= math.exp(-m * hs)
    for _ in range(s):
        T = T @ T
    out[:, :] = T


@nb.njit(cache=True)
def _grow(a, n):
    b = np.empty((2 * a.shape[0],) + a.shape[1:], dtype=a.dtype)
    b[:n] = a[:n]
    return b


@nb.njit(cache=True)
def integrate_expm(eps, mu_d, mu_s, c, dot_fw, dot_bw, p0, v0, t_end,
                   v_stop, stop_tol, dv_max, dp_max, h_max, frozen):
    """Coupled master equation + load-node integration.

    Each step applies exp(D(v_mid) h) to the distribution, with v_mid the
    predicted midpoint potential, and advances v with the trapezoid rule on
    the node current.  Step length adapts so that neither the node voltage
    nor the distribution (in L1) moves more than the given bounds.

    Stops at ``t_end`` or, unless frozen, once ``|v - v_stop| <= stop_tol``.
    Returns (n, t, v, P, W) with W the cumulative dissipation.
    """
    cap = 1024
    ts = np.empty(cap)
    vs = np.empty(cap)
    ws = np.empty(cap)
    ps = np.empty((cap, 16))
    A = np.empty((16, 16))
    E = np.empty((16, 16))
    p = p0.copy()
    v = v0
    t = 0.0
    W = 0.0
    J0 = 0.0 if frozen else gate_current(eps, v, p)
    P0 = supply_power(eps, mu_d, mu_s, v, p)
    ts[0], vs[0], ws[0] = t, v, W
    ps[0] = p
    n = 1
    h = 1e-3
    while t < t_end:
        if not frozen and abs(v - v_stop) <= stop_tol:
            break
        h = min(h, t_end - t)
        dvdt = 0.0 if frozen else J0 / c
        fill_generator(eps, mu_d, mu_s, v + 0.5 * h * dvdt, dot_fw, dot_bw, A)
        expm_generator(A, h, E)
        p1 = E @ p
        tot = 0.0
        for k in range(16):
            if p1[k] < 0.0:
                p1[k] = 0.0
            tot += p1[k]
        p1 /= tot
        if frozen:
            v1 = v
        else:
            J1 = gate_current(eps, v + h * dvdt, p1)
            v1 = v + 0.5 * h * (J0 + J1) / c
        dp = np.abs(p1 - p).sum()
        dv = abs(v1 - v)
        if (dp > 2.0 * dp_max or dv > 2.0 * dv_max) and h > 1e-9:
            h *= 0.5
            continue
        J1 = 0.0 if frozen else gate_current(eps, v1, p1)
        P1 = supply_power(eps, mu_d, mu_s, v1, p1)
        W += 0.5 * h * (P0 + P1)
        t += h
        p, v, J0, P0 = p1, v1, J1, P1
        if n == ts.shape[0]:
            ts, vs, ws, ps = _grow(ts, n), _grow(vs, n), _grow(ws, n), _grow(ps, n)
        ts[n], vs[n], ws[n] = t, v, W
        ps[n] = p
        n += 1
        r = min(dp_max / max(dp, 1e-300), dv_max / max(dv, 1e-300))
        h = min(h * min(2.0, max(0.5, 0.9 * r)), h_max)
    return n, ts[:n].copy(), vs[:n].copy(), ps[:n].copy(), ws[:n].copy()


@nb.njit(cache=True)
def integrate_heun(eps, mu_d, mu_s, c, dot_fw, dot_bw, p0, v0, t_end,
                   safety, stride, frozen):
    """Explicit Heun reference scheme, h = safety / max|diag D|, per step."""
    A = np.empty((16, 16))
    p = p0.copy()
    v = v0
    t = 0.0
    W = 0.0
    P0 = supply_power(eps, mu_d, mu_s, v, p)
    cap = 1024
    ts = np.empty(cap)
    vs = np.empty(cap)
    ws = np.empty(cap)
    ps = np.empty((cap, 16))
    ts[0], vs[0], ws[0] = t, v, W
    ps[0] = p
    n = 1
    k = 0
    while t < t_end:
        fill_generator(eps, mu_d, mu_s, v, dot_fw, dot_bw, A)
        m = 0.0
        for i in range(16):
            m = max(m, -A[i, i])
        h = min(safety / m, t_end - t)
        k1 = A @ p
        j1 = 0.0 if frozen else gate_current(eps, v, p) / c
        pp = p + h * k1
        vp = v + h * j1
        fill_generator(eps, mu_d, mu_s, vp, dot_fw, dot_bw, A)
        k2 = A @ pp
        j2 = 0.0 if frozen else gate_current(eps, vp, pp) / c
        p = p + 0.5 * h * (k1 + k2)
        v = v + 0.5 * h * (j1 + j2)
        t += h
        P1 = supply_power(eps, mu_d, mu_s, v, p)
        W += 0.5 * h * (P0 + P1)
        P0 = P1
        k += 1
        if k % stride == 0 or t >= t_end:
            if n == ts.shape[0]:
                ts, vs, ws, ps = _grow(ts, n), _grow(vs, n), _grow(ws, n), _grow(ps, n)
            ts[n], vs[n], ws[n] = t, v, W
            ps[n] = p
            n += 1
    return n, ts[:n].copy(), vs[:n].copy(), ps[:n].copy(), ws[:n].copy()


@nb.njit(cache=True)
def _channel_rates(eps, mu_d, mu_s, v, dot_fw, dot_bw, s, rates, half=0.0):
    """Rates of the 14 elementary moves out of state s (0 where impossible).

    Channels 0-5 are the electrode couplings, 6-9 forward island hops,
    10-13 backward hops.  ``half`` is the half-step charging shift of the
    node potential: a gate-edge jump between v and v + 2*half sees the
    midpoint, so forward and backward rates obey detailed balance exactly.
    """
    tot = 0.0
    for e in range(6):
        j = EDGE_SITE[e]
        full = (s >> j) & 1
        mu = _mu(EDGE_ELEC[e], mu_d, mu_s, v)
        if EDGE_ELEC[e] == GATE:
            mu += half if full else -half
        x = eps[j] - mu
        r = fermi(-x) if full else fermi(x)
        rates[e] = r
        tot += r
    for k in range(4):
        a, b = DOT_A[k], DOT_B[k]
        oa, ob = (s >> a) & 1, (s >> b) & 1
        rates[6 + k] = dot_fw[k] if (oa == 1 and ob == 0) else 0.0
        rates[10 + k] = dot_bw[k] if (oa == 0 and ob == 1) else 0.0
        tot += rates[6 + k] + rates[10 + k]
    return tot


@nb.njit(cache=True)
def _apply(s, ch):
    if ch < 6:
        return s ^ (1 << EDGE_SITE[ch])
    k = (ch - 6) % 4
    return s ^ (1 << DOT_A[k]) ^ (1 << DOT_B[k])


@nb.njit(cache=True)
def ssa_nand(eps, mu_d, mu_s, c, dot_fw, dot_bw, s0, v0, horizon, rng,
             record, frozen, checkpoints):
    """Gillespie simulation of one NAND with load-node feedback.

    A carrier entering the node raises v by 1/c (V_T), one leaving lowers it;
    gate-edge rates see the midpoint of the jump, which carries the charging
    energy 1/(2c).  Rates are recomputed after every jump.  ``checkpoints`` (sorted times)
    receive the state and v in force at that time.

    Returns (n_events, times, from, to, channel, exit_rate, s, v,
    checkpoint_states, checkpoint_v).
    """
    rates = np.empty(N_CHANNELS)
    cap = 256 if record else 1
    times = np.empty(cap)
    frm = np.empty(cap, dtype=np.int64)
    to = np.empty(cap, dtype=np.int64)
    chs = np.empty(cap, dtype=np.int64)
    exits = np.empty(cap)
    ncp = checkpoints.shape[0]
    cp_s = np.empty(ncp, dtype=np.int64)
    cp_v = np.empty(ncp)
    ic = 0
    s = s0
    v = v0
    t = 0.0
    n = 0
    half = 0.0 if frozen else 0.5 / c
    while True:
        tot = _channel_rates(eps, mu_d, mu_s, v, dot_fw, dot_bw, s, rates, half)
        t_next = t - math.log(1.0 - rng.random()) / tot
        while ic < ncp and checkpoints[ic] < min(t_next, horizon):
            cp_s[ic] = s
            cp_v[ic] = v
            ic += 1
        if t_next >= horizon:
            break
        u = rng.random() * tot
        ch = 0
        acc = rates[0]
        while acc <= u and ch < N_CHANNELS - 1:
            ch += 1
            acc += rates[ch]
        while rates[ch] == 0.0:     # guard against u landing on the upper edge
            ch -= 1
        s1 = _apply(s, ch)
        if record:
            if n == times.shape[0]:
                times, frm, to = _grow(times, n), _grow(frm, n), _grow(to, n)
                chs, exits = _grow(chs, n), _grow(exits, n)
            times[n] = t_next
            frm[n] = s
            to[n] = s1
            chs[n] = ch
            exits[n] = tot
        if not frozen and ch < 6 and EDGE_ELEC[ch] == GATE:
            # carrier leaves the island into the node when the island was full
            if (s >> EDGE_SITE[ch]) & 1:
                v += 1.0 / c
            else:
                v -= 1.0 / c
        s = s1
        t = t_next
        n += 1
    while ic < ncp:
        cp_s[ic] = s
        cp_v[ic] = v
        ic += 1
    m = n if record else 0
    return (n, times[:m].copy(), frm[:m].copy(), to[:m].copy(), chs[:m].copy(),
            exits[:m].copy(), s, v, cp_s, cp_v)
