# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Semantics must match ``_pykernels`` exactly."""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t, uint8_t

cnp.import_array()


def lattice_return_counts(const uint8_t[::1] codes, int d, const int64_t[::1] checkpoints):
    cdef Py_ssize_t T = codes.shape[0]
    cdef Py_ssize_t ncp = checkpoints.shape[0]
    cdef int64_t pos[16]
    cdef Py_ssize_t t, i, j = 0
    cdef int c, axis, nonzero
    cdef int64_t count = 0
    out = np.zeros(ncp, dtype=np.int64)
    cdef int64_t[::1] res = out
    if d > 16:
        raise ValueError("dimension above 16 not supported by the compiled kernel")
    for i in range(d):
        pos[i] = 0
    while j < ncp and checkpoints[j] <= 0:
        j += 1
    for t in range(T):
        c = codes[t]
        if c < 2 * d:
            axis = c >> 1
            if c & 1:
                pos[axis] -= 1
            else:
                pos[axis] += 1
        nonzero = 0
        for i in range(d):
            if pos[i] != 0:
                nonzero = 1
                break
        if not nonzero:
            count += 1
        while j < ncp and checkpoints[j] == t + 1:
            res[j] = count
            j += 1
    while j < ncp:
        res[j] = count
        j += 1
    return out


def lattice_excursions(const uint8_t[::1] codes, int d, int64_t cap):
    cdef Py_ssize_t T = codes.shape[0]
    cdef int64_t pos[16]
    cdef Py_ssize_t t, i, consumed = 0
    cdef int c, axis, nonzero
    cdef int64_t length = 0
    lengths = []
    censored = []
    if d > 16:
        raise ValueError("dimension above 16 not supported by the compiled kernel")
    for i in range(d):
        pos[i] = 0
    for t in range(T):
        c = codes[t]
        if c < 2 * d:
            axis = c >> 1
            if c & 1:
                pos[axis] -= 1
            else:
                pos[axis] += 1
        length += 1
        nonzero = 0
        for i in range(d):
            if pos[i] != 0:
                nonzero = 1
                break
        if not nonzero:
            lengths.append(length)
            censored.append(0)
            length = 0
            consumed = t + 1
        elif length == cap:
            lengths.append(length)
            censored.append(1)
            length = 0
            consumed = t + 1
            for i in range(d):
                pos[i] = 0
    return np.array(lengths, dtype=np.int64), np.array(censored, dtype=np.uint8), consumed


cdef inline int _odo_step(uint8_t[:, ::1] bits, Py_ssize_t row, Py_ssize_t N) nogil:
    cdef Py_ssize_t k = 0
    while k < N and bits[row, k] == 1:
        k += 1
    if k == N:
        return -1
    cdef Py_ssize_t i
    for i in range(k):
        bits[row, i] = 0
    bits[row, k] = 1
    return <int>k


cdef inline uint64_t _odo_value(uint8_t[:, ::1] bits, Py_ssize_t row, Py_ssize_t N) nogil:
    cdef uint64_t v = 0
    cdef Py_ssize_t i
    for i in range(N):
        if bits[row, i]:
            v |= (<uint64_t>1) << i
    return v


def odometer_square(uint8_t[:, ::1] a, uint8_t[:, ::1] b, int64_t steps, int64_t record_every):
    cdef Py_ssize_t P = a.shape[0]
    cdef Py_ssize_t N = a.shape[1]
    cdef Py_ssize_t p
    cdef int64_t s, nrec
    cdef uint64_t mask, d0, dv, dev, back
    if N > 64:
        raise ValueError("depth above 64 not supported by the compiled kernel")
    mask = <uint64_t>0xFFFFFFFFFFFFFFFF if N == 64 else ((<uint64_t>1) << N) - 1
    nrec = steps // record_every + 1 if record_every > 0 else 1
    rec = np.zeros((P, nrec), dtype=np.uint64)
    maxdev = np.zeros(P, dtype=np.uint64)
    ovf = np.full(P, -1, dtype=np.int64)
    cdef uint64_t[:, ::1] r = rec
    cdef uint64_t[::1] md = maxdev
    cdef int64_t[::1] ov = ovf
    for p in range(P):
        d0 = (_odo_value(b, p, N) - _odo_value(a, p, N)) & mask
        r[p, 0] = d0
        for s in range(1, steps + 1):
            if _odo_step(a, p, N) < 0 or _odo_step(b, p, N) < 0:
                ov[p] = s
                break
            dv = (_odo_value(b, p, N) - _odo_value(a, p, N)) & mask
            dev = (dv - d0) & mask
            back = (d0 - dv) & mask
            if back < dev:
                dev = back
            if dev > md[p]:
                md[p] = dev
            if record_every > 0 and s % record_every == 0:
                r[p, s // record_every] = dv
    return rec, maxdev, ovf
