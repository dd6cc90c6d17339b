"""Pure-Python (numpy) alignment search; reference twin of ``_match_ext``."""

from __future__ import annotations

import numpy as np


def best_alignment(ax, ay, at, bx, by, bt, dist_tol: float, angle_tol: float):
    """Return ``(pairs, i, j)`` for the best reference pair, ``(0, -1, -1)`` if empty.

    For every reference pair ``(i, j)`` the candidate correspondences ``(k, l)``
    within both tolerances are sorted by ``(squared distance, k, l)`` and
    paired greedily one-to-one.  The first reference pair reaching the highest
    pair count wins.
    """
    n1, n2 = ax.shape[0], bx.shape[0]
    if n1 == 0 or n2 == 0:
        return 0, -1, -1
    limit = min(n1, n2)
    tol2 = dist_tol * dist_tol

    bx64 = bx.astype(np.int64)
    by64 = by.astype(np.int64)
    bt64 = bt.astype(np.int64)
    best, best_i, best_j = -1, -1, -1
    for i in range(n1):
        if best == limit:
            break
        # (j, k, l) blocks for this reference minutia of a
        dx = ax[i].astype(np.int64)[None, :, None] - bx64[:, None, :]
        dy = ay[i].astype(np.int64)[None, :, None] - by64[:, None, :]
        d2 = dx * dx + dy * dy
        da = np.abs(at[i].astype(np.int64)[None, :, None] - bt64[:, None, :]) % 360
        da = np.minimum(da, 360 - da)
        jj, kk, ll = np.nonzero((d2 <= tol2) & (da <= angle_tol))
        dd = d2[jj, kk, ll]
        counts = np.bincount(jj, minlength=n2)
        order = np.lexsort((ll, kk, dd, jj))
        jj, kk, ll = jj[order].tolist(), kk[order].tolist(), ll[order].tolist()

        start = 0
        for j in range(n2):
            stop = start + int(counts[j])
            if stop - start > best:
                used_a = set()
                used_b = set()
                for c in range(start, stop):
                    k, l = kk[c], ll[c]
                    if k not in used_a and l not in used_b:
                        used_a.add(k)
                        used_b.add(l)
                pairs = len(used_a)
                if pairs > best:
                    best, best_i, best_j = pairs, i, j
                    if best == limit:
                        break
            start = stop
    return best, best_i, best_j
