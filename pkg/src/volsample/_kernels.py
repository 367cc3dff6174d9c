"""Compiled hot loop for the reverse elimination sampler."""

import numpy as np
from numba import njit


@njit(cache=True)
def eliminate_steps(x, z, p, scratch, alive, uniforms, size, tol):
    """Remove columns until ``size`` survive, updating state arrays in place.

    ``x`` is the d-by-n design matrix (read only).  ``z`` holds the inverse
    Gram matrix of the surviving columns, ``p`` the removal weights, and
    ``alive`` the survivor mask; ``scratch`` is an n-length work buffer.
    One entry of ``uniforms`` drives each removal: the column whose clamped
    weight brackets ``u * total`` in the running prefix sum is removed, with
    the last surviving positive entry absorbing any rounding residue.

    Returns the number of removals performed, or -1 as soon as the clamped
    weights sum to at most ``tol`` while removals remain (numeric breakdown).
    """
    d, n = x.shape
    remaining = 0
    for j in range(n):
        if alive[j]:
            remaining += 1
    v = np.empty(d)
    step = 0
    while remaining > size:
        total = 0.0
        for j in range(n):
            if alive[j] and p[j] > 0.0:
                total += p[j]
        if total <= tol:
            return -1
        target = uniforms[step] * total
        pick = -1
        last_positive = -1
        acc = 0.0
        for j in range(n):
            if alive[j] and p[j] > 0.0:
                last_positive = j
                acc += p[j]
                if target < acc:
                    pick = j
                    break
        if pick < 0:
            pick = last_positive
        root = np.sqrt(p[pick])
        for a in range(d):
            s = 0.0
            for b in range(d):
                s += z[a, b] * x[b, pick]
            v[a] = s / root
        alive[pick] = False
        p[pick] = 0.0
        # scratch <- x^T v, streamed row by row for contiguous access.
        for j in range(n):
            scratch[j] = 0.0
        for b in range(d):
            vb = v[b]
            for j in range(n):
                scratch[j] += x[b, j] * vb
        for j in range(n):
            if alive[j]:
                p[j] -= scratch[j] * scratch[j]
        for a in range(d):
            for b in range(d):
                z[a, b] += v[a] * v[b]
        remaining -= 1
        step += 1
    return step
