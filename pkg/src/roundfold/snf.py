"""Exact integer Smith normal form.

Sparse elimination over arbitrary-precision integers with pivoting by
least absolute value (unit pivots preferred, which keeps incidence-style
matrices fill-free).  Only the invariant factors and the rank are
returned; the transforms are not tracked.
"""

from __future__ import annotations

from math import gcd


def _to_sparse(matrix):
    rows: dict[int, dict[int, int]] = {}
    cols: dict[int, set[int]] = {}
    for i, row in enumerate(matrix):
        for j, v in enumerate(row):
            if v:
                rows.setdefault(i, {})[j] = v
                cols.setdefault(j, set()).add(i)
    return rows, cols


def _pick_pivot(rows):
    """Any unit entry if one exists, else a least-|value| entry."""
    best = None
    best_abs = None
    for i, row in rows.items():
        for j, v in row.items():
            a = -v if v < 0 else v
            if a == 1:
                return i, j
            if best_abs is None or a < best_abs:
                best, best_abs = (i, j), a
    return best


def _add_row(rows, cols, dst, src, q):
    """row[dst] += q * row[src]"""
    if q == 0:
        return
    src_row = rows.get(src, {})
    dst_row = rows.setdefault(dst, {})
    for j, v in list(src_row.items()):
        nv = dst_row.get(j, 0) + q * v
        if nv:
            dst_row[j] = nv
            cols.setdefault(j, set()).add(dst)
        elif j in dst_row:
            del dst_row[j]
            cols[j].discard(dst)
    if not dst_row:
        del rows[dst]


def _add_col(rows, cols, dst, src, q):
    """col[dst] += q * col[src]"""
    if q == 0:
        return
    for i in list(cols.get(src, ())):
        v = rows[i].get(src, 0)
        nv = rows[i].get(dst, 0) + q * v
        if nv:
            rows[i][dst] = nv
            cols.setdefault(dst, set()).add(i)
        else:
            rows[i].pop(dst, None)
            cols.get(dst, set()).discard(i)


def _drop_cross(rows, cols, i, j):
    """Remove pivot row i and column j from the active matrix."""
    for jj in list(rows.get(i, {})):
        cols[jj].discard(i)
        if not cols[jj]:
            del cols[jj]
    rows.pop(i, None)
    for ii in list(cols.get(j, ())):
        rows[ii].pop(j, None)
        if not rows[ii]:
            del rows[ii]
    cols.pop(j, None)


def smith_normal_form(matrix) -> tuple[tuple[int, ...], int]:
    """Invariant factors (d_1 | d_2 | ... | d_r, all positive) and rank r.

    Accepts any rectangular list-of-lists of integers, including empty
    matrices and matrices with empty rows.
    """
    rows, cols = _to_sparse(matrix)
    diagonal: list[int] = []
    while rows:
        i, j = _pick_pivot(rows)
        # Clear row i and column j with the pivot; repeat until isolated.
        while True:
            p = rows[i][j]
            touched = False
            for ii in list(cols.get(j, ())):
                if ii == i:
                    continue
                v = rows[ii].get(j, 0)
                if v:
                    _add_row(rows, cols, ii, i, -(v // p))
                    if rows.get(ii, {}).get(j):
                        # Remainder smaller than |p|: make it the new pivot.
                        i = ii
                        touched = True
                        break
            if touched:
                continue
            p = rows[i][j]
            for jj in list(rows[i]):
                if jj == j:
                    continue
                v = rows[i][jj]
                _add_col(rows, cols, jj, j, -(v // p))
                if rows[i].get(jj):
                    j = jj
                    touched = True
                    break
            if not touched:
                break
        diagonal.append(abs(rows[i][j]))
        _drop_cross(rows, cols, i, j)
    # Enforce the divisibility chain; diag(a, b) ~ diag(gcd, lcm).
    changed = True
    while changed:
        changed = False
        for a in range(len(diagonal)):
            for b in range(a + 1, len(diagonal)):
                if diagonal[b] % diagonal[a]:
                    g = gcd(diagonal[a], diagonal[b])
                    diagonal[a], diagonal[b] = g, diagonal[a] // g * diagonal[b]
                    changed = True
    diagonal.sort()
    return tuple(diagonal), len(diagonal)


def rank(matrix) -> int:
    return smith_normal_form(matrix)[1]


def torsion_factors(matrix) -> tuple[int, ...]:
    """Invariant factors exceeding 1."""
    factors, _ = smith_normal_form(matrix)
    return tuple(d for d in factors if d > 1)
