"""Pure-Python shot-sampling kernels, bit-identical to the compiled ones."""

import numpy as np

_MASK = (1 << 64) - 1
_INV53 = 1.0 / 9007199254740992.0


def _rotl(x, k):
    return ((x << k) | (x >> (64 - k))) & _MASK


def _take(state):
    if len(state) != 4:
        raise ValueError("state must hold 4 words")
    return [int(w) for w in state]


def _next(s):
    result = (_rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
    t = (s[1] << 17) & _MASK
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


def uniform_doubles(n, state):
    s = _take(state)
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        out[i] = (_next(s) >> 11) * _INV53
    state[:] = s
    return out


def multinomial_counts(cdf, shots, state):
    s = _take(state)
    edges = [float(c) for c in cdf]
    last = len(edges) - 1
    counts = [0] * len(edges)
    for _ in range(shots):
        u = (_next(s) >> 11) * _INV53
        j = 0
        while j < last and u >= edges[j]:
            j += 1
        counts[j] += 1
    state[:] = s
    return np.array(counts, dtype=np.int64)
