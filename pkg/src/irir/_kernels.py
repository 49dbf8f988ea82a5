"""Compiled event loops.

All loops draw the waiting time first and then one uniform to choose the
channel, scanning channels in a fixed order.  Keeping this pattern identical
across engines is what makes the k-infection engine at k = 2 reproduce the
two-infection engine event for event.

Status codes returned by the loops:
    0  absorbed (no infected vertex left)
    1  the next event would happen after t_max; time is set to t_max
    2  the event budget for this call is used up
"""

import numpy as np
from numba import njit

ABSORBED = 0
TIME_LIMIT = 1
BUDGET = 2

I1, R1, I2, R2 = 0, 1, 2, 3


@njit(cache=True)
def _pick(u, r0, r1, r2, r3):
    if u < r0:
        return 0
    u -= r0
    if u < r1:
        return 1
    u -= r1
    if u < r2:
        return 2
    u -= r2
    if u < r3:
        return 3
    # rounding pushed u past the last bucket: take the last live channel
    if r3 > 0:
        return 3
    if r2 > 0:
        return 2
    if r1 > 0:
        return 1
    return 0


@njit(cache=True)
def count_chunk(state, t, lam1, rho1, lam2, rho2, t_max, budget, rng):
    """Advance ``state`` = [I1, R1, I2, R2] in place by at most ``budget`` events."""
    done = 0
    while True:
        a1 = state[0]
        a2 = state[2]
        if a1 == 0 and a2 == 0:
            return t, done, ABSORBED
        if done >= budget:
            return t, done, BUDGET
        r0 = lam1 * (a1 * state[3])
        r1 = rho1 * a1
        r2 = lam2 * (a2 * state[1])
        r3 = rho2 * a2
        total = r0 + r1 + r2 + r3
        dt = rng.standard_exponential() / total
        u = rng.random() * total
        if t + dt > t_max:
            return t_max, done, TIME_LIMIT
        t += dt
        k = _pick(u, r0, r1, r2, r3)
        if k == 0:
            state[3] -= 1
            state[0] += 1
        elif k == 1:
            state[0] -= 1
            state[1] += 1
        elif k == 2:
            state[1] -= 1
            state[2] += 1
        else:
            state[2] -= 1
            state[3] += 1
        done += 1


@njit(cache=True)
def k_chunk(I, R, t, lam, rho, t_max, budget, rng, rates, avg_start, avg_I, avg_R, extinct_at):
    """k-infection count engine.

    Channels are ordered per infection i: infection of R_j for every j != i
    (ascending j), then recovery of i.  ``avg_I``/``avg_R`` accumulate the
    time integrals of the counts after ``avg_start``; ``extinct_at[i]`` is set
    the first time I_i reaches 0.
    """
    k = I.shape[0]
    done = 0
    while True:
        alive = False
        for i in range(k):
            if I[i] > 0:
                alive = True
                break
        if not alive:
            return t, done, ABSORBED
        if done >= budget:
            return t, done, BUDGET
        total = 0.0
        c = 0
        for i in range(k):
            for j in range(k):
                if j != i:
                    rates[c] = lam[i] * (I[i] * R[j])
                    total += rates[c]
                    c += 1
            rates[c] = rho[i] * I[i]
            total += rates[c]
            c += 1
        dt = rng.standard_exponential() / total
        u = rng.random() * total
        t_next = t + dt
        stop = t_next > t_max
        end = t_max if stop else t_next
        if end > avg_start:
            span = end - max(t, avg_start)
            for i in range(k):
                avg_I[i] += I[i] * span
                avg_R[i] += R[i] * span
        if stop:
            return t_max, done, TIME_LIMIT
        t = t_next
        chosen = -1
        last_live = -1
        for ch in range(c):
            if rates[ch] > 0:
                last_live = ch
                if u < rates[ch]:
                    chosen = ch
                    break
                u -= rates[ch]
        if chosen < 0:
            chosen = last_live
        i = chosen // k
        slot = chosen - i * k
        if slot == k - 1:
            I[i] -= 1
            R[i] += 1
            if I[i] == 0 and extinct_at[i] < 0:
                extinct_at[i] = t
        else:
            j = slot if slot < i else slot + 1
            R[j] -= 1
            I[i] += 1
        done += 1


# --------------------------------------------------------------------------
# vertex engine helpers


@njit(cache=True)
def fenwick_add(tree, idx, delta):
    i = idx + 1
    n = tree.shape[0] - 1
    while i <= n:
        tree[i] += delta
        i += i & (-i)


@njit(cache=True)
def fenwick_total(tree):
    n = tree.shape[0] - 1
    s = 0.0
    i = n
    while i > 0:
        s += tree[i]
        i -= i & (-i)
    return s


@njit(cache=True)
def fenwick_find(tree, u):
    """Smallest index whose prefix sum exceeds ``u``."""
    n = tree.shape[0] - 1
    pos = 0
    step = 1
    while step * 2 <= n:
        step *= 2
    while step > 0:
        nxt = pos + step
        if nxt <= n and tree[nxt] <= u:
            pos = nxt
            u -= tree[nxt]
        step //= 2
    if pos >= n:
        pos = n - 1
    return pos


@njit(cache=True)
def _member_remove(members, pos, counts, cls, v):
    p = pos[v]
    last = members[cls, counts[cls] - 1]
    members[cls, p] = last
    pos[last] = p
    counts[cls] -= 1


@njit(cache=True)
def _member_add(members, pos, counts, cls, v):
    members[cls, counts[cls]] = v
    pos[v] = counts[cls]
    counts[cls] += 1


@njit(cache=True)
def vertex_move(v, new, labels, pos, members, counts, p1, p2, tree1, tree2, cache, indptr, indices, weights):
    """Relabel vertex v and update pressures, sampling trees and the cached
    class-edge weights cache[0] = e(I1, R2), cache[1] = e(I2, R1)."""
    old = labels[v]
    # the vertex's own entries in the sampling trees
    if old == R2:
        fenwick_add(tree1, v, -p1[v])
        cache[0] -= p1[v]
    elif old == R1:
        fenwick_add(tree2, v, -p2[v])
        cache[1] -= p2[v]
    _member_remove(members, pos, counts, old, v)
    labels[v] = new
    _member_add(members, pos, counts, new, v)
    for e in range(indptr[v], indptr[v + 1]):
        u = indices[e]
        w = weights[e]
        lu = labels[u]
        if old == I1:
            p1[u] -= w
            if lu == R2:
                fenwick_add(tree1, u, -w)
                cache[0] -= w
        elif old == I2:
            p2[u] -= w
            if lu == R1:
                fenwick_add(tree2, u, -w)
                cache[1] -= w
        if new == I1:
            p1[u] += w
            if lu == R2:
                fenwick_add(tree1, u, w)
                cache[0] += w
        elif new == I2:
            p2[u] += w
            if lu == R1:
                fenwick_add(tree2, u, w)
                cache[1] += w
    if new == R2:
        fenwick_add(tree1, v, p1[v])
        cache[0] += p1[v]
    elif new == R1:
        fenwick_add(tree2, v, p2[v])
        cache[1] += p2[v]
    # empty classes carry exactly zero weight; clear accumulated rounding
    if counts[I1] == 0 or counts[R2] == 0:
        cache[0] = 0.0
    if counts[I2] == 0 or counts[R1] == 0:
        cache[1] = 0.0


@njit(cache=True)
def _sample_target(tree, u, labels, want, p):
    v = fenwick_find(tree, u)
    if labels[v] == want and p[v] > 0:
        return v
    # rounding landed on a zero-weight slot: take the next eligible vertex
    best = -1
    for x in range(labels.shape[0]):
        if labels[x] == want and p[x] > 0:
            best = x
            if x >= v:
                break
    return best


@njit(cache=True)
def vertex_chunk(
    labels, pos, members, counts, p1, p2, tree1, tree2, cache,
    indptr, indices, weights, lam1, rho1, lam2, rho2, t, t_max, budget, rng, last,
):
    """Vertex-level engine; ``lam1``/``lam2`` already include any uniform edge
    weight factored out of ``weights``.  ``last`` receives (kind, vertex) of the
    most recent event."""
    done = 0
    while True:
        a1 = counts[I1]
        a2 = counts[I2]
        if a1 == 0 and a2 == 0:
            return t, done, ABSORBED
        if done >= budget:
            return t, done, BUDGET
        e12 = cache[0] if cache[0] > 0 else 0.0
        e21 = cache[1] if cache[1] > 0 else 0.0
        r0 = lam1 * e12
        r1 = rho1 * a1
        r2 = lam2 * e21
        r3 = rho2 * a2
        total = r0 + r1 + r2 + r3
        dt = rng.standard_exponential() / total
        u = rng.random() * total
        if t + dt > t_max:
            return t_max, done, TIME_LIMIT
        t += dt
        k = _pick(u, r0, r1, r2, r3)
        if k == 0:
            v = _sample_target(tree1, rng.random() * fenwick_total(tree1), labels, R2, p1)
            vertex_move(v, I1, labels, pos, members, counts, p1, p2, tree1, tree2, cache, indptr, indices, weights)
        elif k == 1:
            v = members[I1, min(int(rng.random() * a1), a1 - 1)]
            vertex_move(v, R1, labels, pos, members, counts, p1, p2, tree1, tree2, cache, indptr, indices, weights)
        elif k == 2:
            v = _sample_target(tree2, rng.random() * fenwick_total(tree2), labels, R1, p2)
            vertex_move(v, I2, labels, pos, members, counts, p1, p2, tree1, tree2, cache, indptr, indices, weights)
        else:
            v = members[I2, min(int(rng.random() * a2), a2 - 1)]
            vertex_move(v, R2, labels, pos, members, counts, p1, p2, tree1, tree2, cache, indptr, indices, weights)
        last[0] = k
        last[1] = v
        done += 1
