"""Numpy implementations of the hot loops, used when the extension is absent."""
import numpy as np


def _move_table(d):
    table = np.zeros((2 * d + 1, d), dtype=np.int64)
    for c in range(2 * d):
        table[c, c >> 1] = -1 if c & 1 else 1
    return table


def lattice_return_counts(codes, d, checkpoints):
    codes = np.asarray(codes, dtype=np.uint8)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    if len(codes) == 0:
        return np.zeros(len(checkpoints), dtype=np.int64)
    pos = np.cumsum(_move_table(d)[codes], axis=0)
    cum = np.cumsum(~pos.any(axis=1))
    idx = np.clip(checkpoints, 0, len(codes))
    return np.where(idx > 0, cum[np.maximum(idx - 1, 0)], 0).astype(np.int64)


def lattice_excursions(codes, d, cap):
    codes = np.asarray(codes, dtype=np.uint8)
    table = _move_table(d)
    lengths, censored = [], []
    i = consumed = 0
    T = len(codes)
    while i < T:
        window = codes[i : i + cap]
        pos = np.cumsum(table[window], axis=0)
        hits = np.flatnonzero(~pos.any(axis=1))
        if len(hits):
            n = int(hits[0]) + 1
            lengths.append(n)
            censored.append(0)
        elif len(window) == cap:
            n = cap
            lengths.append(n)
            censored.append(1)
        else:
            break
        i += n
        consumed = i
    return np.array(lengths, dtype=np.int64), np.array(censored, dtype=np.uint8), consumed


def odometer_square(a, b, steps, record_every):
    P, N = a.shape
    if N > 64:
        raise ValueError("depth above 64 not supported")
    mask = np.uint64((1 << N) - 1) if N < 64 else np.uint64(0xFFFFFFFFFFFFFFFF)
    pow2 = np.array([1 << i for i in range(N)], dtype=np.uint64)
    cols = np.arange(N)
    rows = np.arange(P)

    def value(x):
        return (x.astype(np.uint64) * pow2).sum(axis=1, dtype=np.uint64)

    def step(x, live):
        allones = x.all(axis=1)
        k = np.argmin(x, axis=1)
        ok = live & ~allones
        clear = (cols[None, :] < k[:, None]) & ok[:, None]
        x[clear] = 0
        x[rows[ok], k[ok]] = 1
        return allones & live

    nrec = steps // record_every + 1 if record_every > 0 else 1
    rec = np.zeros((P, nrec), dtype=np.uint64)
    maxdev = np.zeros(P, dtype=np.uint64)
    ovf = np.full(P, -1, dtype=np.int64)
    d0 = (value(b) - value(a)) & mask
    rec[:, 0] = d0
    live = np.ones(P, dtype=bool)
    for s in range(1, steps + 1):
        if not live.any():
            break
        bad = step(a, live)
        live_b = live & ~bad
        bad_b = step(b, live_b)
        newly = bad | bad_b
        ovf[newly] = s
        live = live & ~newly
        dv = (value(b) - value(a)) & mask
        dev = np.minimum((dv - d0) & mask, (d0 - dv) & mask)
        maxdev = np.where(live, np.maximum(maxdev, dev), maxdev)
        if record_every > 0 and s % record_every == 0:
            rec[live, s // record_every] = dv[live]
    return rec, maxdev, ovf
