"""Pure-Python pivot kernel (reference implementation and fallback)."""

import numpy as np


def pivot(T: np.ndarray, r: int, q: int) -> None:
    """Gauss-Jordan pivot of tableau ``T`` on element ``(r, q)`` in place.

    Row ``r`` is divided by the pivot; every other row with a nonzero entry
    in column ``q`` gets ``T[i, :] -= T[i, q] * T[r, :]``.  Rows with a zero
    entry are left untouched so the compiled kernel can match bit for bit.
    """
    T[r, :] = T[r, :] / T[r, q]
    col = T[:, q].copy()
    col[r] = 0.0
    rows = np.flatnonzero(col)
    if rows.size:
        T[rows, :] -= np.outer(col[rows], T[r, :])
