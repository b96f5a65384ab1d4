"""Exact integer matrix normal forms over the row lattice.

Hermite form here means: H = U * A with U unimodular, pivots located column by
column left to right, every pivot positive, entries above a pivot reduced into
[0, pivot), zero rows last.  Smith form gives D = U * A * V with D diagonal and
each diagonal entry dividing the next.  Both routines return the transforms and
verify the defining identity exactly before returning; all arithmetic is on
Python ints, so there is no overflow and no tolerance.
"""

from __future__ import annotations

from typing import List, Sequence, Tuple

Matrix = List[List[int]]


def identity_matrix(n: int) -> Matrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]]) -> Matrix:
    if a and b and len(a[0]) != len(b):
        raise ValueError("matrix shape mismatch")
    cols_b = len(b[0]) if b else 0
    out = []
    for row in a:
        acc = [0] * cols_b
        for k, coeff in enumerate(row):
            if coeff:
                brow = b[k]
                for j in range(cols_b):
                    acc[j] += coeff * brow[j]
        out.append(acc)
    return out


def _copy(a: Sequence[Sequence[int]]) -> Matrix:
    return [list(row) for row in a]


def _check_rect(a: Sequence[Sequence[int]]) -> Tuple[int, int]:
    rows = len(a)
    cols = len(a[0]) if rows else 0
    for row in a:
        if len(row) != cols:
            raise ValueError("ragged matrix")
        for x in row:
            if not isinstance(x, int):
                raise TypeError("matrix entries must be ints")
    return rows, cols


def hermite_normal_form(a: Sequence[Sequence[int]]) -> Tuple[Matrix, Matrix]:
    """Return (H, U) with H = U*A in row Hermite form, U unimodular."""
    rows, cols = _check_rect(a)
    h = _copy(a)
    u = identity_matrix(rows)

    def rowop_sub(i: int, j: int, q: int) -> None:
        # row_i -= q * row_j
        if q:
            hi, hj = h[i], h[j]
            for c in range(cols):
                hi[c] -= q * hj[c]
            ui, uj = u[i], u[j]
            for c in range(rows):
                ui[c] -= q * uj[c]

    def rowswap(i: int, j: int) -> None:
        h[i], h[j] = h[j], h[i]
        u[i], u[j] = u[j], u[i]

    def rownegate(i: int) -> None:
        h[i] = [-x for x in h[i]]
        u[i] = [-x for x in u[i]]

    pivot_row = 0
    pivot_cols: List[int] = []
    for col in range(cols):
        # gcd out the column below pivot_row by repeated division
        while True:
            live = [i for i in range(pivot_row, rows) if h[i][col]]
            if not live:
                break
            i_min = min(live, key=lambda i: abs(h[i][col]))
            rowswap(pivot_row, i_min)
            done = True
            for i in range(pivot_row + 1, rows):
                if h[i][col]:
                    q = h[i][col] // h[pivot_row][col]
                    rowop_sub(i, pivot_row, q)
                    if h[i][col]:
                        done = False
            if done:
                break
        if pivot_row < rows and h[pivot_row][col]:
            if h[pivot_row][col] < 0:
                rownegate(pivot_row)
            p = h[pivot_row][col]
            for i in range(pivot_row):
                q = h[i][col] // p  # floor: leaves remainder in [0, p)
                rowop_sub(i, pivot_row, q)
            pivot_cols.append(col)
            pivot_row += 1
            if pivot_row == rows:
                break

    if mat_mul(u, _copy(a)) != h:
        raise AssertionError("Hermite transform verification failed")
    return h, u


def hnf_pivots(h: Sequence[Sequence[int]]) -> List[Tuple[int, int]]:
    """(row, col) of each pivot of a matrix in row Hermite form."""
    out = []
    for i, row in enumerate(h):
        for j, x in enumerate(row):
            if x:
                out.append((i, j))
                break
    return out


def smith_normal_form(
    a: Sequence[Sequence[int]],
) -> Tuple[Matrix, Matrix, Matrix]:
    """Return (D, U, V) with D = U*A*V, D diagonal, d_i | d_{i+1}, d_i >= 0."""
    rows, cols = _check_rect(a)
    d = _copy(a)
    u = identity_matrix(rows)
    v = identity_matrix(cols)

    def row_sub(i: int, j: int, q: int) -> None:
        if q:
            for c in range(cols):
                d[i][c] -= q * d[j][c]
            for c in range(rows):
                u[i][c] -= q * u[j][c]

    def col_sub(i: int, j: int, q: int) -> None:
        # col_i -= q * col_j
        if q:
            for r in range(rows):
                d[r][i] -= q * d[r][j]
            for r in range(cols):
                v[r][i] -= q * v[r][j]

    def row_swap(i: int, j: int) -> None:
        d[i], d[j] = d[j], d[i]
        u[i], u[j] = u[j], u[i]

    def col_swap(i: int, j: int) -> None:
        for r in range(rows):
            d[r][i], d[r][j] = d[r][j], d[r][i]
        for r in range(cols):
            v[r][i], v[r][j] = v[r][j], v[r][i]

    n = min(rows, cols)
    for t in range(n):
        # move a nonzero entry of minimal absolute value to (t, t)
        while True:
            entries = [
                (abs(d[i][j]), i, j)
                for i in range(t, rows)
                for j in range(t, cols)
                if d[i][j]
            ]
            if not entries:
                break
            _, pi, pj = min(entries)
            row_swap(t, pi)
            col_swap(t, pj)
            clean = True
            for i in range(t + 1, rows):
                if d[i][t]:
                    row_sub(i, t, d[i][t] // d[t][t])
                    if d[i][t]:
                        clean = False
            for j in range(t + 1, cols):
                if d[t][j]:
                    col_sub(j, t, d[t][j] // d[t][t])
                    if d[t][j]:
                        clean = False
            if not clean:
                continue
            # divisibility sweep: pivot must divide the rest of the block
            offender = None
            for i in range(t + 1, rows):
                for j in range(t + 1, cols):
                    if d[i][j] % d[t][t]:
                        offender = i
                        break
                if offender is not None:
                    break
            if offender is None:
                break
            row_sub(t, offender, -1)  # row_t += row_offender, retry
        if d[t][t] < 0:
            for c in range(cols):
                d[t][c] = -d[t][c]
            for c in range(rows):
                u[t][c] = -u[t][c]

    if mat_mul(mat_mul(u, _copy(a)), v) != d:
        raise AssertionError("Smith transform verification failed")
    return d, u, v


def invariant_factors(a: Sequence[Sequence[int]], n_cols: int | None = None) -> List[int]:
    """Invariant factors of Z^cols / rowspan(A): torsion (>1) first, then 0s.

    Factors equal to 1 are dropped.  A trailing 0 per free coordinate.
    """
    rows, cols = _check_rect(a)
    if n_cols is None:
        n_cols = cols
    if rows == 0 or cols == 0:
        return [0] * n_cols
    d, _, _ = smith_normal_form(a)
    diag = [d[i][i] for i in range(min(rows, cols))]
    torsion = [x for x in diag if x > 1]
    rank = sum(1 for x in diag if x != 0)
    return torsion + [0] * (n_cols - rank)
