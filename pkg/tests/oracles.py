"""Reference implementations used only by the tests.

Each oracle recomputes a quantity from its definition, by a different and
deliberately naive route than the production code.
"""

import math

import numpy as np


def direct_cwt_matrix(table, scale_a, fs, n):
    """Matrix ``W`` with ``(W @ x)[tau]`` the direct Riemann-sum CWT of an ``n``-sample ``x``.

    The wavelet is evaluated afresh at every (tau, n) pair from the tabulated
    mother wavelet, shifted to zero sum and scaled to unit norm over its
    samples; the alignment offset is the sample of largest magnitude.
    """
    lo, hi = table.support
    m_max = int(math.floor((hi - lo) * scale_a))
    m = np.arange(m_max + 1)
    sampled = np.interp(lo + m / scale_a, table.grid, table.values)
    # discrete zero-mean / unit-norm correction of the sampled wavelet
    offset = sampled.mean()
    gain = 1.0 / math.sqrt(np.sum((sampled - offset) ** 2) / fs)
    center = int(np.argmax(np.abs(sampled - offset)))
    tau = np.arange(n)[:, None]
    k = np.arange(n)[None, :] - tau + center  # kernel index touching sample n
    inside = (k >= 0) & (k <= m_max)
    psi = np.interp(lo + k / scale_a, table.grid, table.values, left=0.0, right=0.0)
    return np.where(inside, (psi - offset) * gain, 0.0) / fs


def fine_centroid(degrees, output_sets, points=1_000_000):
    """Centroid of ``max_j min(d_j, mu_j(y))`` by trapezoidal integration on ``points`` nodes."""
    y = np.linspace(0.0, 1.0, points)
    agg = np.zeros_like(y)
    for name, d in degrees.items():
        np.maximum(agg, np.minimum(d, output_sets[name](y)), out=agg)
    area = np.trapezoid(agg, y)
    return 0.0 if area == 0 else float(np.trapezoid(agg * y, y) / area)


def brute_force_matching(pos, marks, tol):
    """Maximum number of (mark, positive) pairs within ``tol``, one use each, by exhaustive search."""
    best = 0

    def rec(i, used, count):
        nonlocal best
        if count + (len(marks) - i) <= best:
            return
        if i == len(marks):
            best = max(best, count)
            return
        for j, p in enumerate(pos):
            if j not in used and abs(p - marks[i]) < tol - 1e-9:
                rec(i + 1, used | {j}, count + 1)
        rec(i + 1, used, count)

    rec(0, frozenset(), 0)
    return best
