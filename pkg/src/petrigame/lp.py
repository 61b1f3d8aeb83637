"""Exact linear programming: two-phase primal simplex over Fractions.

Small dense tableau implementation used by the game solvers.  Bland's rule
makes it immune to cycling; all arithmetic is rational, so results are
exact.  Problem form: maximize c.x subject to rows of (coeffs, rel, rhs)
with rel one of "<=", "=", ">=" and all variables nonnegative (callers
split free variables themselves).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

_ZERO = Fraction(0)
_ONE = Fraction(1)


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


Row = tuple[Sequence[Fraction], str, Fraction]


def solve_lp(c: Sequence[Fraction], rows: Sequence[Row]) -> tuple[Fraction, list[Fraction]]:
    """Maximize c.x subject to ``rows``, x >= 0.  Returns (optimum, x)."""
    n = len(c)
    m = len(rows)

    # Normalize to rhs >= 0, then attach slack and artificial columns.
    coeffs: list[list[Fraction]] = []
    rels: list[str] = []
    rhs: list[Fraction] = []
    for a, rel, b in rows:
        if len(a) != n:
            raise ValueError("row length does not match objective length")
        a = [Fraction(v) for v in a]
        b = Fraction(b)
        if b < 0:
            a = [-v for v in a]
            b = -b
            rel = {"<=": ">=", ">=": "<=", "=": "="}[rel]
        coeffs.append(a)
        rels.append(rel)
        rhs.append(b)

    n_slack = sum(1 for r in rels if r != "=")
    n_art = sum(1 for r in rels if r != "<=")
    width = n + n_slack + n_art + 1  # final column is the rhs

    tab: list[list[Fraction]] = []
    basis: list[int] = []
    si = n
    ai = n + n_slack
    art_cols: list[int] = []
    for i in range(m):
        row = coeffs[i] + [_ZERO] * (width - n - 1) + [rhs[i]]
        if rels[i] == "<=":
            row[si] = _ONE
            basis.append(si)
            si += 1
        elif rels[i] == ">=":
            row[si] = -_ONE
            row[ai] = _ONE
            basis.append(ai)
            art_cols.append(ai)
            si += 1
            ai += 1
        else:
            row[ai] = _ONE
            basis.append(ai)
            art_cols.append(ai)
            ai += 1
        tab.append(row)

    def pivot(z: list[Fraction], r: int, col: int) -> None:
        prow = tab[r]
        inv = _ONE / prow[col]
        if inv != 1:
            tab[r] = prow = [v * inv for v in prow]
        for other in tab:
            if other is not prow and other[col]:
                f = other[col]
                for j in range(width):
                    if prow[j]:
                        other[j] -= f * prow[j]
        if z[col]:
            f = z[col]
            for j in range(width):
                if prow[j]:
                    z[j] -= f * prow[j]
        basis[r] = col

    def run(z: list[Fraction], allowed: int) -> None:
        # Maximize with reduced costs in z (z[-1] tracks the value, negated).
        while True:
            enter = -1
            for j in range(allowed):
                if z[j] > 0:
                    enter = j
                    break  # Bland: first improving column
            if enter < 0:
                return
            leave = -1
            best: Fraction | None = None
            for i in range(m):
                a = tab[i][enter]
                if a > 0:
                    ratio = tab[i][-1] / a
                    if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                        best = ratio
                        leave = i
            if leave < 0:
                raise Unbounded("improving direction never leaves the feasible cone")
            pivot(z, leave, enter)

    if n_art:
        z1 = [_ZERO] * width
        for col in art_cols:
            z1[col] = -_ONE
        for i in range(m):
            if basis[i] in art_cols:
                for j in range(width):
                    z1[j] += tab[i][j]
        run(z1, n + n_slack)  # artificials may only leave, never re-enter
        if z1[-1] != 0:
            raise Infeasible(f"phase one ends with residual infeasibility {z1[-1]}")
        # Drive leftover artificials out of the basis (they sit at zero).
        i = 0
        while i < m:
            if basis[i] in art_cols:
                col = next((j for j in range(n + n_slack) if tab[i][j]), None)
                if col is None:
                    del tab[i], basis[i]
                    m -= 1
                    continue
                pivot(z1, i, col)
            i += 1

    z = [Fraction(v) for v in c] + [_ZERO] * (width - n)
    for i in range(m):
        if z[basis[i]]:
            f = z[basis[i]]
            prow = tab[i]
            for j in range(width):
                if prow[j]:
                    z[j] -= f * prow[j]
    run(z, n + n_slack)

    x = [_ZERO] * n
    for i in range(m):
        if basis[i] < n:
            x[basis[i]] = tab[i][-1]
    return -z[-1], x
