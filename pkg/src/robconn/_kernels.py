"""Compiled closed-loop RK4 integration.

Mirrors ``simulator._NumpyClosedLoop`` exactly; the two are cross-checked in
the test suite. Codes are plain ints so a single compiled signature serves
every configuration.
"""
import numba
import numpy as np

POT_LINEAR, POT_NL, POT_TABLE = 0, 1, 2
DIST_ZERO, DIST_CONSTANT, DIST_SINUSOID, DIST_RANDOM, DIST_ADVERSARIAL = 0, 1, 2, 3, 4
STATUS_OK, STATUS_DISCONNECTED, STATUS_LEFT_DOMAIN, STATUS_BLOWUP = 0, 1, 2, 3
BLOWUP = 1e12


@numba.njit(cache=True)
def _weight(pot_code, s, Rt, R, tab_s, tab_r):
    if pot_code == POT_LINEAR:
        return 1.0
    if pot_code == POT_NL:
        if s <= Rt:
            return 1.0
        if s <= R:
            return s / Rt
        return R / Rt
    return np.interp(s, tab_s, tab_r)


@numba.njit(cache=True)
def _rhs(t, x, out, tails, heads, pot_code, Rt, R, tab_s, tab_r,
         dom_on, radius, eps, gain, h_exp,
         dist_code, mag, vec, phases, omega, table, hold):
    N, n = x.shape
    grad = np.zeros((N, n))
    for e in range(tails.shape[0]):
        a = tails[e]
        b = heads[e]
        d2 = 0.0
        for k in range(n):
            diff = x[b, k] - x[a, k]
            d2 += diff * diff
        w = _weight(pot_code, np.sqrt(d2), Rt, R, tab_s, tab_r)
        for k in range(n):
            f = w * (x[b, k] - x[a, k])
            grad[b, k] += f
            grad[a, k] -= f
    for i in range(N):
        for k in range(n):
            out[i, k] = -grad[i, k]
    if dom_on:
        inner = radius - eps
        for i in range(N):
            nrm = 0.0
            for k in range(n):
                nrm += x[i, k] * x[i, k]
            nrm = np.sqrt(nrm)
            if nrm >= inner and nrm > 0.0:
                level = (eps + nrm - radius) / eps
                if level > 1.0:
                    level = 1.0
                if level < 0.0:
                    level = 0.0
                m = gain * level**h_exp
                for k in range(n):
                    out[i, k] -= m * x[i, k] / nrm
    if dist_code == DIST_CONSTANT:
        for i in range(N):
            for k in range(n):
                out[i, k] += vec[i, k]
    elif dist_code == DIST_SINUSOID:
        for i in range(N):
            amp = mag * np.sin(omega * t + phases[i])
            for k in range(n):
                out[i, k] += amp * vec[i, k]
    elif dist_code == DIST_RANDOM:
        idx = int(np.floor(t / hold))
        if idx > table.shape[0] - 1:
            idx = table.shape[0] - 1
        if idx < 0:
            idx = 0
        for i in range(N):
            for k in range(n):
                out[i, k] += table[idx, i, k]
    elif dist_code == DIST_ADVERSARIAL:
        for i in range(N):
            g2 = 0.0
            for k in range(n):
                g2 += grad[i, k] * grad[i, k]
            if g2 > 0.0:
                s = mag / np.sqrt(g2)
                for k in range(n):
                    out[i, k] += s * grad[i, k]


@numba.njit(cache=True)
def integrate(x0, tails, heads, pot_code, Rt, R, tab_s, tab_r,
              dom_on, radius, eps, gain, h_exp,
              dist_code, mag, vec, phases, omega, table, hold,
              t0, dt, n_steps, R_conn):
    N, n = x0.shape
    traj = np.empty((n_steps + 1, N, n))
    traj[0] = x0
    x = x0.copy()
    k1 = np.empty((N, n))
    k2 = np.empty((N, n))
    k3 = np.empty((N, n))
    k4 = np.empty((N, n))
    for step in range(n_steps):
        t = t0 + step * dt
        _rhs(t, x, k1, tails, heads, pot_code, Rt, R, tab_s, tab_r, dom_on, radius, eps, gain, h_exp,
             dist_code, mag, vec, phases, omega, table, hold)
        _rhs(t + 0.5 * dt, x + 0.5 * dt * k1, k2, tails, heads, pot_code, Rt, R, tab_s, tab_r,
             dom_on, radius, eps, gain, h_exp, dist_code, mag, vec, phases, omega, table, hold)
        _rhs(t + 0.5 * dt, x + 0.5 * dt * k2, k3, tails, heads, pot_code, Rt, R, tab_s, tab_r,
             dom_on, radius, eps, gain, h_exp, dist_code, mag, vec, phases, omega, table, hold)
        _rhs(t + dt, x + dt * k3, k4, tails, heads, pot_code, Rt, R, tab_s, tab_r,
             dom_on, radius, eps, gain, h_exp, dist_code, mag, vec, phases, omega, table, hold)
        x = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        traj[step + 1] = x

        status = STATUS_OK
        for i in range(N):
            for k in range(n):
                if not np.isfinite(x[i, k]) or abs(x[i, k]) > BLOWUP:
                    status = STATUS_BLOWUP
        if status == STATUS_OK:
            for e in range(tails.shape[0]):
                d2 = 0.0
                for k in range(n):
                    diff = x[heads[e], k] - x[tails[e], k]
                    d2 += diff * diff
                if np.sqrt(d2) > R_conn:
                    status = STATUS_DISCONNECTED
        if status == STATUS_OK and dom_on:
            for i in range(N):
                nrm = 0.0
                for k in range(n):
                    nrm += x[i, k] * x[i, k]
                if np.sqrt(nrm) >= radius:
                    status = STATUS_LEFT_DOMAIN
        if status != STATUS_OK:
            return traj, step + 2, status
    return traj, n_steps + 1, STATUS_OK
