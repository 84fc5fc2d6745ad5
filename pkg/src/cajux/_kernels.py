"""Compiled inner loops.

The juxtaposition kernel is an iterative version of the column-filling
recursion: position ``p`` stands for column ``r = p // (v-1)`` of free block
``i = p % (v-1) + 1`` and its choices are enumerated as
``j * v! + e`` (source column ``j`` of block ``i``, relabeling ``e``). All
state lives in caller-owned arrays, so a call can stop after a node budget or
when the output buffer fills, and the next call resumes where it left off.

Coverage of a (t+1)-column set is kept as a bit vector of ``W`` 64-bit words
indexed by the mixed-radix tuple rank.
"""

from __future__ import annotations

import numpy as np
from numba import njit

DONE = 0
BUFFER_FULL = 1
NODE_LIMIT = 2


@njit(cache=True, nogil=True)
def popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(cache=True, nogil=True)
def _covered(bits, W):
    total = 0
    for w in range(W):
        total += popcount64(bits[w])
    return total


@njit(cache=True, nogil=True)
def _full_strength(J, s, v, all_sub):
    """Whether every column set in ``all_sub`` covers all ``v**s`` tuples of ``J``."""
    full = v**s
    seen = np.zeros(full, dtype=np.bool_)
    for q in range(all_sub.shape[0]):
        seen[:] = False
        cnt = 0
        for row in range(J.shape[0]):
            rank = 0
            for c in range(s):
                rank = rank * v + J[row, all_sub[q, c]]
            if not seen[rank]:
                seen[rank] = True
                cnt += 1
        if cnt < full:
            return False
    return True


@njit(cache=True, nogil=True)
def juxtapose_init(J, off, t, v, sub_cols, sub_start, base, W):
    """Fill ``base[r, q]`` with the coverage contributed by the fixed block 0."""
    k = J.shape[1]
    for r in range(t, k):
        for q in range(sub_start[r + 1] - sub_start[r]):
            sq = sub_start[r] + q
            for w in range(W):
                base[r, q, w] = 0
            for row in range(off[0], off[1]):
                rank = 0
                for c in range(t):
                    rank = rank * v + J[row, sub_cols[sq, c]]
                rank = rank * v + J[row, r]
                base[r, q, rank >> 6] |= np.uint64(1) << np.uint64(rank & 63)


@njit(cache=True, nogil=True)
def _prepare(p, J, off, t, v, sub_cols, sub_start, prank):
    nfree = off.shape[0] - 2
    r = p // nfree
    i = p % nfree + 1
    if r < t:
        return
    for q in range(sub_start[r + 1] - sub_start[r]):
        sq = sub_start[r] + q
        for row in range(off[i], off[i + 1]):
            rank = 0
            for c in range(t):
                rank = rank * v + J[row, sub_cols[sq, c]]
            prank[p, q, row - off[i]] = rank


@njit(cache=True, nogil=True)
def juxtapose_run(J, src, off, perms, t, v, sub_cols, sub_start, all_sub,
                  prune, early, remaining, W,
                  state, choice, assigned, base, bits, prank,
                  out, counters, max_nodes):
    """Advance the search; see the module docstring.

    ``state[0]`` is the current position (``-1`` when exhausted) and
    ``state[1]`` is 1 while the position still has to be prepared.
    ``counters`` = [nodes, leaves, pruned, emitted-in-buffer, leaf visits].
    Returns DONE, BUFFER_FULL or NODE_LIMIT.
    """
    k = J.shape[1]
    nperm = perms.shape[0]
    nfree = off.shape[0] - 2
    npos = k * nfree
    full = v ** (t + 1)
    limit = counters[0] + max_nodes
    cap = out.shape[0]
    pos = state[0]
    while True:
        if pos < 0:
            state[0] = pos
            return DONE
        if state[1] == 1:
            _prepare(pos, J, off, t, v, sub_cols, sub_start, prank)
            state[1] = 0
        r = pos // nfree
        i = pos % nfree + 1
        c = choice[pos]
        if c >= 0:
            assigned[i, c // nperm] = False
        c += 1
        while c < k * nperm and assigned[i, c // nperm]:
            c = (c // nperm + 1) * nperm
        if c >= k * nperm:
            choice[pos] = -1
            pos -= 1
            continue
        choice[pos] = c
        j = c // nperm
        e = c % nperm
        assigned[i, j] = True
        for row in range(off[i], off[i + 1]):
            J[row, r] = perms[e, src[row, j]]
        counters[0] += 1
        ok = True
        if prune and r >= t:
            nsub = sub_start[r + 1] - sub_start[r]
            for q in range(nsub):
                for w in range(W):
                    if i == 1:
                        bits[pos, q, w] = base[r, q, w]
                    else:
                        bits[pos, q, w] = bits[pos - 1, q, w]
                for row in range(off[i], off[i + 1]):
                    rank = prank[pos, q, row - off[i]] * v + J[row, r]
                    bits[pos, q, rank >> 6] |= np.uint64(1) << np.uint64(rank & 63)
                if i == nfree:
                    if _covered(bits[pos, q], W) < full:
                        ok = False
                        break
                elif early:
                    if full - _covered(bits[pos, q], W) > remaining[i]:
                        ok = False
                        break
        if not ok:
            counters[2] += 1
        elif pos == npos - 1:
            counters[4] += 1
            if prune or _full_strength(J, t + 1, v, all_sub):
                counters[1] += 1
                n = counters[3]
                out[n, :, :] = J
                counters[3] = n + 1
                if n + 1 >= cap:
                    state[0] = pos
                    return BUFFER_FULL
        else:
            pos += 1
            choice[pos] = -1
            state[1] = 1
        if counters[0] >= limit:
            state[0] = pos
            return NODE_LIMIT


@njit(cache=True, nogil=True)
def _cell_verdict(cnt, cand_exact, target, exact_upto, v):
    for s in range(exact_upto):
        if cnt[s] > target[s]:
            return -1
        if cnt[s] < target[s]:
            return 1
    if exact_upto == v and cand_exact:
        return 0
    return 1


@njit(cache=True, nogil=True)
def _beaten(i, y, v, perms, st_level, st_order, st_bounds, st_ncells, tcounts,
            id_bounds, id_ncells, jlevel, cnt, tgt):
    """Whether some recorded arrangement beats the partial column ``y[0..i]``."""
    nperm = perms.shape[0]
    for s in range(st_level.shape[0]):
        L = st_level[s]
        for e in range(nperm):
            for q in range(st_ncells[s]):
                if L < jlevel:
                    for a in range(v):
                        tgt[a] = tcounts[L, q, a]
                    upto = v
                else:
                    lo = id_bounds[q]
                    hi = id_bounds[q + 1]
                    if lo > i:
                        break
                    for a in range(v):
                        tgt[a] = 0
                    last = hi - 1
                    if last > i:
                        last = i
                    for row in range(lo, last + 1):
                        tgt[y[row]] += 1
                    upto = v if hi - 1 <= i else y[i]
                for a in range(v):
                    cnt[a] = 0
                exact = True
                for pos in range(st_bounds[s, q], st_bounds[s, q + 1]):
                    row = st_order[s, pos]
                    if row <= i:
                        cnt[perms[e, y[row]]] += 1
                    else:
                        exact = False
                verdict = _cell_verdict(cnt, exact, tgt, upto, v)
                if verdict < 0:
                    return True
                if verdict > 0:
                    break
    return False


@njit(cache=True, nogil=True)
def column_candidates(N, v, same, prev, has_prev, groups, need,
                      perms, st_level, st_order, st_bounds, st_ncells, tcounts,
                      id_bounds, id_ncells, jlevel, check_states,
                      out, counters):
    """Enumerate admissible next columns for a minimal parent, in lex order.

    ``same[i]``: row ``i`` equals row ``i-1`` on the parent. ``groups[q, i]``:
    group of row ``i`` under column subset ``q``; every (group, symbol) pair
    needs ``need`` occurrences. Returns the number of columns written to
    ``out`` or ``-1`` if ``out`` overflowed. ``counters[0]`` counts nodes.
    """
    nsub = groups.shape[0]
    G = 1
    for q in range(nsub):
        for i in range(N):
            if groups[q, i] + 1 > G:
                G = groups[q, i] + 1
    have = np.zeros((nsub, G, v), dtype=np.int64)
    rem = np.zeros((nsub, G), dtype=np.int64)
    for q in range(nsub):
        for i in range(N):
            rem[q, groups[q, i]] += 1
    y = np.full(N, -1, dtype=np.int64)
    tight = np.zeros(N + 1, dtype=np.bool_)
    tight[0] = has_prev
    cnt = np.zeros(v, dtype=np.int64)
    tgt = np.zeros(v, dtype=np.int64)
    nout = 0
    i = 0
    while i >= 0:
        if y[i] >= 0:
            for q in range(nsub):
                g = groups[q, i]
                have[q, g, y[i]] -= 1
                rem[q, g] += 1
            y[i] += 1
        else:
            lo = 0
            if i > 0 and same[i]:
                lo = y[i - 1]
            if tight[i] and prev[i] > lo:
                lo = prev[i]
            y[i] = lo
        if y[i] >= v:
            y[i] = -1
            i -= 1
            continue
        counters[0] += 1
        ok = True
        for q in range(nsub):
            g = groups[q, i]
            have[q, g, y[i]] += 1
            rem[q, g] -= 1
            deficit = 0
            for a in range(v):
                if have[q, g, a] < need:
                    deficit += need - have[q, g, a]
            if deficit > rem[q, g]:
                ok = False
        if ok and check_states and _beaten(i, y, v, perms, st_level, st_order, st_bounds,
                                           st_ncells, tcounts, id_bounds, id_ncells, jlevel, cnt, tgt):
            ok = False
        if not ok:
            continue
        tight[i + 1] = tight[i] and y[i] == prev[i]
        if i == N - 1:
            if nout >= out.shape[0]:
                return -1
            for a in range(N):
                out[nout, a] = y[a]
            nout += 1
            continue
        i += 1
        y[i] = -1
    return nout
