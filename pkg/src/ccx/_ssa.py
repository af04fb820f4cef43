"""JIT-compiled Gillespie direct-method loop.

The loop is resumable: it returns a status code whenever it needs more
uniforms or more record space, and the caller re-enters with the same
arrays. All floating-point work is done in the same order as the
pure-Python reference in ``simulator.py`` so both produce identical
trajectories from the same uniform stream.
"""

import math

import numpy as np
from numba import njit

QUIESCENT = 0
HORIZON = 1
MAX_STEPS = 2
NEED_UNIFORMS = 3
NEED_RECORDS = 4
NEED_FIRINGS = 5


@njit(cache=True)
def _prop(j, x, rate, r_ptr, r_sp, r_st):
    combos = 1
    for p in range(r_ptr[j], r_ptr[j + 1]):
        n = x[r_sp[p]]
        s = r_st[p]
        if n < s:
            return 0.0
        c = 1
        for q in range(s):
            c = c * (n - q) // (q + 1)
        combos *= c
    return rate[j] * combos


@njit(cache=True)
def fill_propensities(a, x, rate, r_ptr, r_sp, r_st):
    for j in range(a.shape[0]):
        a[j] = _prop(j, x, rate, r_ptr, r_sp, r_st)


@njit(cache=True)
def quiescent(x, rate, r_ptr, r_sp, r_st, maint, ind_x, ind_ab):
    """No non-maintenance reaction can fire now, nor once every pending indicator appears."""
    n_ind = ind_x.shape[0]
    raised = np.zeros(n_ind, dtype=np.bool_)
    for p in range(n_ind):
        if x[ind_x[p]] == 0 and x[ind_ab[p]] == 0:
            x[ind_ab[p]] = 1
            raised[p] = True
    still = True
    for j in range(maint.shape[0]):
        if not maint[j] and _prop(j, x, rate, r_ptr, r_sp, r_st) > 0.0:
            still = False
            break
    for p in range(n_ind):
        if raised[p]:
            x[ind_ab[p]] = 0
    return still


BLOCK = 32


@njit(cache=True)
def block_sums(a, bsum):
    n_r = a.shape[0]
    for b in range(bsum.shape[0]):
        acc = 0.0
        for j in range(b * BLOCK, min(n_r, (b + 1) * BLOCK)):
            acc += a[j]
        bsum[b] = acc


@njit(cache=True)
def _block_sum(a, b):
    acc = 0.0
    for j in range(b * BLOCK, min(a.shape[0], (b + 1) * BLOCK)):
        acc += a[j]
    return acc


@njit(cache=True)
def select(a, bsum, target):
    """First reaction whose running propensity sum exceeds ``target``."""
    n_r = a.shape[0]
    acc = 0.0
    for b in range(bsum.shape[0]):
        if acc + bsum[b] > target:
            for j in range(b * BLOCK, min(n_r, (b + 1) * BLOCK)):
                acc += a[j]
                if acc > target:
                    return j
        else:
            acc += bsum[b]
    for j in range(n_r - 1, -1, -1):
        if a[j] > 0.0:
            return j
    return -1


@njit(cache=True)
def run(
    x, a, bsum, tstate, istate,
    rate, r_ptr, r_sp, r_st, d_ptr, d_sp, d_dl, dep_ptr, dep_rx,
    maint, touches_obs, ind_x, ind_ab,
    horizon, max_steps,
    ubuf, obs_idx, rec_t, rec_x, fire_j, fire_t, record_firings,
):
    # tstate[0] = time
    # istate = [steps, n_records, uniform_pos, n_firings, active non-maintenance reactions]
    t = tstate[0]
    steps = istate[0]
    nrec = istate[1]
    upos = istate[2]
    nfire = istate[3]
    active = istate[4]
    dirty = np.zeros(bsum.shape[0], dtype=np.bool_)
    status = -1
    while True:
        a0 = 0.0
        for b in range(bsum.shape[0]):
            a0 += bsum[b]
        if active == 0:
            if a0 == 0.0 or quiescent(x, rate, r_ptr, r_sp, r_st, maint, ind_x, ind_ab):
                status = QUIESCENT
                break
        if steps >= max_steps:
            status = MAX_STEPS
            break
        if upos + 2 > ubuf.shape[0]:
            status = NEED_UNIFORMS
            break
        if nrec >= rec_t.shape[0]:
            status = NEED_RECORDS
            break
        if record_firings and nfire >= fire_j.shape[0]:
            status = NEED_FIRINGS
            break
        u1 = ubuf[upos]
        u2 = ubuf[upos + 1]
        upos += 2
        dt = -math.log(1.0 - u1) / a0
        if t + dt > horizon:
            t = horizon
            status = HORIZON
            break
        pick = select(a, bsum, u2 * a0)
        for p in range(d_ptr[pick], d_ptr[pick + 1]):
            x[d_sp[p]] += d_dl[p]
        t = t + dt
        steps += 1
        for p in range(dep_ptr[pick], dep_ptr[pick + 1]):
            k = dep_rx[p]
            new = _prop(k, x, rate, r_ptr, r_sp, r_st)
            if not maint[k]:
                if new > 0.0 and a[k] == 0.0:
                    active += 1
                elif new == 0.0 and a[k] > 0.0:
                    active -= 1
            a[k] = new
            dirty[k // BLOCK] = True
        for p in range(dep_ptr[pick], dep_ptr[pick + 1]):
            b = dep_rx[p] // BLOCK
            if dirty[b]:
                bsum[b] = _block_sum(a, b)
                dirty[b] = False
        if record_firings:
            fire_j[nfire] = pick
            fire_t[nfire] = t
            nfire += 1
        if touches_obs[pick]:
            if nrec > 0 and rec_t[nrec - 1] == t:
                nrec -= 1
            rec_t[nrec] = t
            for q in range(obs_idx.shape[0]):
                rec_x[nrec, q] = x[obs_idx[q]]
            nrec += 1
    tstate[0] = t
    istate[0] = steps
    istate[1] = nrec
    istate[2] = upos
    istate[3] = nfire
    istate[4] = active
    return status
