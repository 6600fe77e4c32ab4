import math

import numpy as np

INV_PHI = (math.sqrt(5) - 1) / 2


def golden_max(f, a, b, tol=1e-6):
    """Golden-section search for the maximiser of a unimodal ``f`` on [a, b].

    Returns the midpoint of the final bracket, whose width is below ``tol``.
    """
    a, b = min(a, b), max(a, b)
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def grid_golden_max(f_vec, f, lo, hi, step=1e-4, tol=1e-6, prefer="high"):
    """Maximise on [lo, hi]: grid scan with ``step``, then golden refinement.

    ``f_vec`` evaluates an array of points, ``f`` a scalar. Exact ties in the
    grid go to the larger (``prefer="high"``) or smaller argument. The refined
    point only replaces the grid point when it is strictly better.
    """
    n = int(round((hi - lo) / step))
    xs = lo + step * np.arange(n + 1)
    xs[-1] = hi
    vals = f_vec(xs)
    best = vals.max()
    hits = np.flatnonzero(vals == best)
    i = hits[-1] if prefer == "high" else hits[0]
    x_best, f_best = float(xs[i]), float(best)
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, n)]
    if b > a:
        x_ref = golden_max(f, a, b, tol)
        f_ref = f(x_ref)
        if f_ref > f_best:
            x_best, f_best = x_ref, f_ref
    return x_best, f_best
