# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled shot-sampling kernels.

Bit-for-bit twins of ``elgi._fallback``. The generator is xoshiro256**
(Blackman & Vigna); the four-word state lives in a caller-owned
``uint64`` array and is advanced in place.
"""

import numpy as np

from libc.stdint cimport uint64_t, int64_t


cdef inline uint64_t _rotl(uint64_t x, int k) noexcept nogil:
    return (x << k) | (x >> (64 - k))


cdef inline uint64_t _next(uint64_t* s) noexcept nogil:
    cdef uint64_t result = _rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = _rotl(s[3], 45)
    return result


cdef inline double _uniform(uint64_t* s) noexcept nogil:
    return <double>(_next(s) >> 11) * (1.0 / 9007199254740992.0)


def uniform_doubles(Py_ssize_t n, uint64_t[::1] state):
    """``n`` doubles in ``[0, 1)`` using the top 53 bits of each draw."""
    if state.shape[0] != 4:
        raise ValueError("state must hold 4 words")
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    for i in range(4):
        s[i] = state[i]
    with nogil:
        for i in range(n):
            o[i] = _uniform(s)
    for i in range(4):
        state[i] = s[i]
    return out


def multinomial_counts(const double[::1] cdf, Py_ssize_t shots, uint64_t[::1] state):
    """Draw ``shots`` categorical outcomes by inverse CDF; return per-outcome counts.

    ``cdf`` must be nondecreasing and end at exactly 1.0.
    """
    if state.shape[0] != 4:
        raise ValueError("state must hold 4 words")
    cdef Py_ssize_t k = cdf.shape[0]
    counts = np.zeros(k, dtype=np.int64)
    cdef int64_t[::1] c = counts
    cdef uint64_t s[4]
    cdef Py_ssize_t i, j
    cdef double u
    for i in range(4):
        s[i] = state[i]
    with nogil:
        for i in range(shots):
            u = _uniform(s)
            j = 0
            while j < k - 1 and u >= cdf[j]:
                j += 1
            c[j] += 1
    for i in range(4):
        state[i] = s[i]
    return counts
