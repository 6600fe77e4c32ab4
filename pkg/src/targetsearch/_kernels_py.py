"""Pure numpy implementation of the compiled kernels, used when the extension is absent."""

import numpy as np

_CHUNK_ENTRIES = 1 << 21


def scan_patterns(E, patterns):
    E = np.ascontiguousarray(E, dtype=np.uint8)
    patterns = np.ascontiguousarray(patterns, dtype=np.int32)
    N, M = E.shape
    P = patterns.shape[0]
    if patterns.shape[1] != N:
        raise ValueError("pattern length does not match observation length")
    hist = np.zeros(N + 1, dtype=np.int64)
    best, second, best_k = N + 1, N + 1, -1
    u = np.arange(M)
    chunk = max(1, _CHUNK_ENTRIES // M)
    for lo in range(0, P, chunk):
        pats = patterns[lo:lo + chunk]
        acc = np.zeros((len(pats), M), dtype=np.int32)
        for n in range(N):
            acc += E[n][(u[None, :] + pats[:, n, None]) % M]
        flat = acc.ravel()
        hist += np.bincount(flat, minlength=N + 1)
        i = int(np.argmin(flat))
        d = int(flat[i])
        if flat.size > 1:
            two = np.partition(flat, 1)[:2]
            chunk_second = int(two[1])
        else:
            chunk_second = N + 1
        if d < best:
            second = min(best, chunk_second)
            best, best_k = d, lo * M + i
        else:
            second = min(second, d)
    if P * M == 1:
        second = -1
    return best_k, best, second, hist
