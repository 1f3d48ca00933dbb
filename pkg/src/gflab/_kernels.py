"""Compiled inner loops.  Pure-Python twins live next to each public API."""

import numpy as np
from numba import njit

INF = np.int64(1) << np.int64(62)


@njit(cache=True, inline="always")
def _before(tau_a, tie_a, tau_b, tie_b):
    return tau_a < tau_b or (tau_a == tau_b and tie_a < tie_b)


@njit(cache=True)
def gf_kernel(left, right, parent, root, n,
              data, offsets, lengths, reps, next_local, first_local, first_from,
              by_value, invert, t_stop,
              keep_steps, step_cost, step_restr, seg_cost, seg_restr):
    """Run GreedyFuture in place on the link arrays.

    Returns ``(root, steps_done)``.  Priorities live in a bottom-up segment
    tree over keys holding each key's next access time.
    """
    size = 1
    while size < n + 2:
        size *= 2
    seg = np.full(2 * size, INF, dtype=np.int64)
    for k in range(1, n + 1):
        seg[size + k] = first_from[0, k]
    for i in range(size - 1, 0, -1):
        seg[i] = min(seg[2 * i], seg[2 * i + 1])

    path = np.empty(n + 1, dtype=np.int64)
    skeys = np.empty(n + 1, dtype=np.int64)
    depth_of = np.zeros(n + 1, dtype=np.int64)
    on_path = np.zeros(n + 1, dtype=np.bool_)
    gaps = np.zeros(n + 2, dtype=np.int64)
    ptau = np.empty(n + 1, dtype=np.int64)
    ptie = np.empty(n + 1, dtype=np.int64)
    cl = np.empty(n + 1, dtype=np.int64)
    cr = np.empty(n + 1, dtype=np.int64)
    stack = np.empty(n + 1, dtype=np.int64)

    t = 0
    for s in range(len(lengths)):
        L = lengths[s]
        off = offsets[s]
        R = reps[s]
        for j in range(R):
            for o in range(L):
                if t == t_stop:
                    return root, t
                x = data[off + o]
                k = 0
                v = root
                while v != 0:
                    path[k] = v
                    depth_of[v] = k
                    on_path[v] = True
                    k += 1
                    if v == x:
                        break
                    if x < v:
                        v = left[v]
                    else:
                        v = right[v]

                # the current access is consumed: x's priority becomes its next access
                nl = next_local[off + o]
                if nl >= 0:
                    nxt = t + (nl - o)
                elif j < R - 1:
                    nxt = t + (L - o) + first_local[s, x]
                else:
                    nxt = first_from[s + 1, x]
                p = size + x
                seg[p] = nxt
                p >>= 1
                while p >= 1:
                    seg[p] = min(seg[2 * p], seg[2 * p + 1])
                    p >>= 1

                for i in range(k):
                    key = path[i]
                    q = i - 1
                    while q >= 0 and skeys[q] > key:
                        skeys[q + 1] = skeys[q]
                        q -= 1
                    skeys[q + 1] = key

                for i in range(k):
                    lo = skeys[i - 1] + 1 if i > 0 else 1
                    hi = skeys[i + 1] - 1 if i < k - 1 else n
                    best = INF
                    a = lo + size
                    b = hi + size + 1
                    while a < b:
                        if a & 1:
                            if seg[a] < best:
                                best = seg[a]
                            a += 1
                        if b & 1:
                            b -= 1
                            if seg[b] < best:
                                best = seg[b]
                        a >>= 1
                        b >>= 1
                    if invert:
                        best = -best
                    ptau[i] = best
                    if by_value:
                        ptie[i] = skeys[i]
                    else:
                        ptie[i] = depth_of[skeys[i]]

                sp = 0
                for i in range(k):
                    last = -1
                    while sp > 0 and _before(ptau[i], ptie[i], ptau[stack[sp - 1]], ptie[stack[sp - 1]]):
                        last = stack[sp - 1]
                        sp -= 1
                    cl[i] = last
                    cr[i] = -1
                    if sp > 0:
                        cr[stack[sp - 1]] = i
                    stack[sp] = i
                    sp += 1
                top = stack[0]

                for i in range(k + 1):
                    gaps[i] = 0
                for i in range(k):
                    v = skeys[i]
                    lc = left[v]
                    rc = right[v]
                    if lc != 0 and not on_path[lc]:
                        gaps[i] = lc
                    if rc != 0 and not on_path[rc]:
                        gaps[i + 1] = rc
                changed = False
                for i in range(k):
                    v = skeys[i]
                    nlk = skeys[cl[i]] if cl[i] >= 0 else gaps[i]
                    nrk = skeys[cr[i]] if cr[i] >= 0 else gaps[i + 1]
                    if nlk != left[v] or nrk != right[v]:
                        changed = True
                    left[v] = nlk
                    right[v] = nrk
                    if nlk != 0:
                        parent[nlk] = v
                    if nrk != 0:
                        parent[nrk] = v
                root = skeys[top]
                parent[root] = 0
                for i in range(k):
                    on_path[path[i]] = False

                if keep_steps:
                    step_cost[t] = k
                    step_restr[t] = changed
                seg_cost[s] += k
                if changed:
                    seg_restr[s] += 1
                t += 1
    return root, t


@njit(cache=True)
def generate_kernel(root, left, right, pattern, plen, cursor, out):
    """Emit ``len(out)`` leaf queries, advancing cursors of visited nodes."""
    for i in range(len(out)):
        v = root
        while plen[v] > 0:
            side = pattern[v, cursor[v]]
            cursor[v] += 1
            if cursor[v] == plen[v]:
                cursor[v] = 0
            if side == 0:
                v = left[v]
            else:
                v = right[v]
        out[i] = v


@njit(cache=True)
def wilber_kernel(root, left, right, is_inner, data, offsets, lengths, reps, last, alt):
    """Count side changes per inner node of a reference tree."""
    for s in range(len(lengths)):
        off = offsets[s]
        for _ in range(reps[s]):
            for o in range(lengths[s]):
                x = data[off + o]
                v = root
                while is_inner[v]:
                    side = 0 if x < v else 1
                    if last[v] >= 0 and last[v] != side:
                        alt[v] += 1
                    last[v] = side
                    if side == 0:
                        v = left[v]
                    else:
                        v = right[v]


@njit(cache=True)
def knuth_kernel(w, n, cost, root):
    """Optimal static BST: cost[i, j] over keys i..j (1-based, inclusive).

    Uses root monotonicity root[i, j-1] <= root[i, j] <= root[i+1, j].
    """
    pre = np.zeros(n + 1, dtype=np.int64)
    for i in range(1, n + 1):
        pre[i] = pre[i - 1] + w[i]
    for i in range(1, n + 1):
        cost[i, i] = w[i]
        root[i, i] = i
    for length in range(2, n + 1):
        for i in range(1, n - length + 2):
            j = i + length - 1
            total = pre[j] - pre[i - 1]
            best = INF
            best_r = -1
            for r in range(root[i, j - 1], root[i + 1, j] + 1):
                c = total
                if r > i:
                    c += cost[i, r - 1]
                if r < j:
                    c += cost[r + 1, j]
                if c < best:
                    best = c
                    best_r = r
            cost[i, j] = best
            root[i, j] = best_r
