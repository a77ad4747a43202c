"""Numba kernel for sliding-window co-occurrence counting.

Same episode-sweep algorithm as the Python reference in corpus.py; pair
counts accumulate in an open-addressing hash table (packed int64 keys,
splitmix64 probe, linear probing, growth at 2/3 load). All arithmetic is
integral so results are bit-identical to the reference.
"""

import numba as nb
import numpy as np

_U = np.uint64


@nb.njit(cache=True, inline="always")
def _slot(keys, mask, key):
    h = _U(key)
    h = (h ^ (h >> _U(30))) * _U(0xBF58476D1CE4E5B9)
    h = (h ^ (h >> _U(27))) * _U(0x94D049BB133111EB)
    h = h ^ (h >> _U(31))
    idx = np.int64(h & _U(mask))
    while True:
        k = keys[idx]
        if k == key or k == -1:
            return idx
        idx = (idx + 1) & mask


@nb.njit(cache=True)
def _grown(keys, vals):
    cap = keys.shape[0] * 2
    nk = np.full(cap, -1, dtype=np.int64)
    nv = np.zeros(cap, dtype=np.int64)
    mask = cap - 1
    for i in range(keys.shape[0]):
        k = keys[i]
        if k != -1:
            j = _slot(nk, mask, k)
            nk[j] = k
            nv[j] = vals[i]
    return nk, nv


@nb.njit(cache=True)
def _sweep_kernel(token_ids, doc_offsets, s, vocab_size):
    cap = 1 << 16
    keys = np.full(cap, -1, dtype=np.int64)
    vals = np.zeros(cap, dtype=np.int64)
    size = 0

    occur = np.zeros(vocab_size, dtype=np.int64)
    cnt = np.zeros(vocab_size, dtype=np.int32)
    enter = np.zeros(vocab_size, dtype=np.int64)
    act_pos = np.full(vocab_size, -1, dtype=np.int32)
    act_list = np.empty(vocab_size, dtype=np.int32)
    n_act = 0
    total_windows = np.int64(0)

    for d in range(doc_offsets.shape[0] - 1):
        lo = doc_offsets[d]
        hi = doc_offsets[d + 1]
        n = hi - lo
        n_windows = n - s + 1
        if n_windows < 1:
            n_windows = 1
        total_windows += n_windows

        head = s if s < n else n
        for p in range(head):
            w = token_ids[lo + p]
            if w < 0:
                continue
            if cnt[w] == 0:
                enter[w] = 0
                act_pos[w] = n_act
                act_list[n_act] = w
                n_act += 1
            cnt[w] += 1

        for t in range(1, n_windows):
            w_out = token_ids[lo + t - 1]
            if w_out >= 0:
                cnt[w_out] -= 1
                if cnt[w_out] == 0:
                    e = enter[w_out]
                    occur[w_out] += t - e
                    pos = act_pos[w_out]
                    last = act_list[n_act - 1]
                    act_list[pos] = last
                    act_pos[last] = pos
                    n_act -= 1
                    act_pos[w_out] = -1
                    for ai in range(n_act):
                        v = act_list[ai]
                        ev = enter[v]
                        ov = t - (e if e > ev else ev)
                        if w_out < v:
                            key = (np.int64(w_out) << 32) | np.int64(v)
                        else:
                            key = (np.int64(v) << 32) | np.int64(w_out)
                        if 3 * size >= 2 * cap:
                            keys, vals = _grown(keys, vals)
                            cap = keys.shape[0]
                        j = _slot(keys, cap - 1, key)
                        if keys[j] == -1:
                            keys[j] = key
                            size += 1
                        vals[j] += ov
            w_in = token_ids[lo + t + s - 1]
            if w_in >= 0:
                if cnt[w_in] == 0:
                    enter[w_in] = t
                    act_pos[w_in] = n_act
                    act_list[n_act] = w_in
                    n_act += 1
                cnt[w_in] += 1

        # close remaining episodes at virtual window n_windows
        while n_act > 0:
            w = act_list[n_act - 1]
            n_act -= 1
            act_pos[w] = -1
            cnt[w] = 0
            e = enter[w]
            occur[w] += n_windows - e
            for ai in range(n_act):
                v = act_list[ai]
                ev = enter[v]
                ov = n_windows - (e if e > ev else ev)
                if w < v:
                    key = (np.int64(w) << 32) | np.int64(v)
                else:
                    key = (np.int64(v) << 32) | np.int64(w)
                if 3 * size >= 2 * cap:
                    keys, vals = _grown(keys, vals)
                    cap = keys.shape[0]
                j = _slot(keys, cap - 1, key)
                if keys[j] == -1:
                    keys[j] = key
                    size += 1
                vals[j] += ov

    out_keys = np.empty(size, dtype=np.int64)
    out_vals = np.empty(size, dtype=np.int64)
    j = 0
    for i in range(cap):
        if keys[i] != -1:
            out_keys[j] = keys[i]
            out_vals[j] = vals[i]
            j += 1
    order = np.argsort(out_keys)
    return total_windows, occur, out_keys[order], out_vals[order]


def sweep(token_ids, doc_offsets, window_size, vocab_size):
    total, occur, keys, counts = _sweep_kernel(
        token_ids, doc_offsets, np.int64(window_size), np.int64(vocab_size))
    return int(total), occur, keys, counts
