"""Compiled batch evaluation of positions, mirroring ``decoder.decode``.

The pure-Python decoder is the reference; this kernel reproduces it operation
for operation (same summation order) so fitness values agree bit for bit.
Only fitness summaries are produced here; full schedules come from the
Python path.
"""
from __future__ import annotations

import numpy as np
from numba import njit

INFEASIBLE = -1


@njit(cache=True)
def _rank(x, n, seq):
    order = np.argsort(x, kind="mergesort")
    for r in range(n):
        seq[order[r]] = r + 1


@njit(cache=True)
def _correct(seq, n, counts, succ_ptr, succ_idx, out, remaining, done):
    for k in range(n):
        remaining[k] = counts[k]
        done[k] = False
    j = 0
    i = 0
    while j < n:
        a = seq[i] - 1
        if not done[a] and remaining[a] == 0:
            done[a] = True
            out[j] = a
            j += 1
            for q in range(succ_ptr[a], succ_ptr[a + 1]):
                remaining[succ_idx[q]] -= 1
        i += 1
        if i == n:
            i = 0


@njit(cache=True)
def _fill(pool, lo, hi, times, zones, cost, C, kmax, home, tol,
          pred_ptr, pred_idx, finish, owner, sid,
          wz, clock, lastz, load, cnt):
    """Returns (number of workplaces opened, tasks placed)."""
    totals = np.zeros(9)
    present = np.zeros(9, dtype=np.bool_)
    for p in range(lo, hi):
        z = zones[pool[p]]
        totals[z] += times[pool[p]]
        present[z] = True
    # top-kmax zones by total time, ties to the lower zone index
    chosen = np.zeros(9, dtype=np.bool_)
    k = 0
    while k < kmax:
        best = -1
        for z in range(9):
            if present[z] and not chosen[z]:
                if best < 0 or totals[z] > totals[best]:
                    best = z
        if best < 0:
            break
        chosen[best] = True
        k += 1
    k = 0
    for z in range(9):
        if chosen[z]:
            wz[k] = z
            clock[k] = 0.0
            lastz[k] = z
            load[k] = 0.0
            cnt[k] = 0
            k += 1
    nwp = k

    cand = np.empty(nwp, dtype=np.int64)
    placed = 0
    for p in range(lo, hi):
        t = pool[p]
        z = zones[t]
        # candidate workplaces: same zone first, then by displacement, then zone
        for a in range(nwp):
            cand[a] = a
        for a in range(1, nwp):
            c = cand[a]
            b = a - 1
            while b >= 0:
                d = cand[b]
                kc0 = 0 if wz[c] == z else 1
                kd0 = 0 if wz[d] == z else 1
                if kc0 < kd0 or (kc0 == kd0 and (cost[wz[c], z] < cost[wz[d], z] or
                                                 (cost[wz[c], z] == cost[wz[d], z] and wz[c] < wz[d]))):
                    cand[b + 1] = d
                    b -= 1
                else:
                    break
            cand[b + 1] = c
        ready = 0.0
        for q in range(pred_ptr[t], pred_ptr[t + 1]):
            pr = pred_idx[q]
            if owner[pr] == sid and finish[pr] > ready:
                ready = finish[pr]
        base = times[t]
        ok = False
        for a in range(nwp):
            w = cand[a]
            if home:
                disp = cost[wz[w], z]
            else:
                disp = cost[lastz[w], z]
            start = clock[w] if clock[w] > ready else ready
            end = start + base + disp
            if end <= C + tol:
                clock[w] = end
                lastz[w] = z
                load[w] += base + disp
                cnt[w] += 1
                finish[t] = end
                owner[t] = sid
                ok = True
                break
        if not ok:
            break
        placed += 1
    return nwp, placed


@njit(cache=True)
def evaluate_batch(X, counts, succ_ptr, succ_idx, pred_ptr, pred_idx,
                   times, zones, cost, C, kmax, home, tol):
    N, n = X.shape
    primary = np.empty(N)
    workload = np.empty(N)
    opened = np.empty(N, dtype=np.int64)
    orders = np.empty((N, n), dtype=np.int64)

    seq = np.empty(n, dtype=np.int64)
    pool = np.empty(n, dtype=np.int64)
    remaining = np.empty(n, dtype=np.int64)
    done = np.empty(n, dtype=np.bool_)
    finish = np.empty(n)
    owner = np.empty(n, dtype=np.int64)
    wz = np.empty(9, dtype=np.int64)
    clock = np.empty(9)
    lastz = np.empty(9, dtype=np.int64)
    load = np.empty(9)
    cnt = np.empty(9, dtype=np.int64)
    capacity = kmax * C

    for r in range(N):
        _rank(X[r], n, seq)
        _correct(seq, n, counts, succ_ptr, succ_idx, pool, remaining, done)
        for k in range(n):
            orders[r, k] = pool[k] + 1
            owner[k] = -1
            finish[k] = 0.0
        m = 0
        sq = 0.0
        total = 0.0
        pos = 0
        sid = 0
        feasible = True
        while pos < n:
            acc = 0.0
            end = pos
            while end < n and acc + times[pool[end]] <= capacity + tol:
                acc += times[pool[end]]
                end += 1
            nwp, placed = _fill(pool, pos, end, times, zones, cost, C, kmax, home, tol,
                                pred_ptr, pred_idx, finish, owner, sid, wz, clock, lastz, load, cnt)
            if placed == 0:
                nwp, placed = _fill(pool, pos, pos + 1, times, zones, cost, C, kmax, home, tol,
                                    pred_ptr, pred_idx, finish, owner, sid, wz, clock, lastz, load, cnt)
                if placed == 0:
                    feasible = False
                    break
            for w in range(nwp):
                if cnt[w] > 0:
                    m += 1
                    d = C - load[w]
                    sq += d * d
                    total += load[w]
            pos += placed
            sid += 1
        if feasible:
            primary[r] = m * np.sqrt(sq)
            workload[r] = total
            opened[r] = m
        else:
            primary[r] = np.inf
            workload[r] = np.inf
            opened[r] = INFEASIBLE
            orders[r, 0] = -(pool[pos] + 1)
    return primary, workload, opened, orders
