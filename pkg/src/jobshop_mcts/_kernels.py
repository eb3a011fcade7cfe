"""numba kernels behind the dispatchers. Arrays follow :class:`CompiledJobSet`."""

import numpy as np
from numba import njit

BIG = np.int64(1) << 60


@njit(cache=True)
def online_kernel(plan, rg, rp, rl, gptr, gmach, n_machines, gap):
    n, L = rg.shape
    starts = np.zeros((n, L), dtype=np.int64)
    mach = np.zeros((n, L), dtype=np.int64)
    comp = np.zeros(n, dtype=np.int64)
    free = np.zeros(n_machines, dtype=np.int64)
    prev_start = np.int64(0)
    for k in range(plan.shape[0]):
        j = plan[k]
        t0 = np.int64(0) if k == 0 else prev_start + gap
        for s in range(rl[j]):
            g = rg[j, s]
            best_t = BIG
            best_m = -1
            for q in range(gptr[g], gptr[g + 1]):
                m = gmach[q]
                t = free[m] if free[m] > t0 else t0
                if t < best_t:
                    best_t = t
                    best_m = m
            starts[j, s] = best_t
            mach[j, s] = best_m
            free[best_m] = best_t + rp[j, s]
            if s == 0:
                prev_start = best_t
            t0 = best_t + rp[j, s]
        comp[j] = t0
    return starts, mach, comp


@njit(cache=True)
def offline_kernel(plan, rg, rp, rl, gptr, gmach, n_machines):
    n, L = rg.shape
    starts = np.zeros((n, L), dtype=np.int64)
    mach = np.zeros((n, L), dtype=np.int64)
    comp = np.zeros(n, dtype=np.int64)
    cap = n * L + 1
    bs = np.zeros((n_machines, cap), dtype=np.int64)
    be = np.zeros((n_machines, cap), dtype=np.int64)
    cnt = np.zeros(n_machines, dtype=np.int64)
    for k in range(plan.shape[0]):
        j = plan[k]
        ready = np.int64(0)
        for s in range(rl[j]):
            g = rg[j, s]
            p = rp[j, s]
            best_t = BIG
            best_m = -1
            best_pos = -1
            for q in range(gptr[g], gptr[g + 1]):
                m = gmach[q]
                t = ready
                pos = cnt[m]
                for i in range(cnt[m]):
                    if t + p <= bs[m, i]:
                        pos = i
                        break
                    if be[m, i] > t:
                        t = be[m, i]
                if t < best_t:
                    best_t = t
                    best_m = m
                    best_pos = pos
            m = best_m
            for i in range(cnt[m], best_pos, -1):
                bs[m, i] = bs[m, i - 1]
                be[m, i] = be[m, i - 1]
            bs[m, best_pos] = best_t
            be[m, best_pos] = best_t + p
            cnt[m] += 1
            starts[j, s] = best_t
            mach[j, s] = m
            ready = best_t + p
        comp[j] = ready
    return starts, mach, comp
