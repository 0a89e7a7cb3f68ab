"""Exact two-phase simplex over rationals.

Minimizes c.x subject to linear rows with senses in {<=, =, >=} and
x >= 0.  Input and output are `Fraction`s; internally the tableau uses
fraction-free integer pivoting on sparse rows: entries are integers
sharing one positive denominator (the previous pivot element), every
pivot performs an exact integer division, and any inexact division raises
immediately.  No floating point is involved anywhere.

The entering variable is the most negative reduced cost (ties by lowest
column index); after a streak of degenerate pivots the selection switches
to Bland's smallest-index rule, which guarantees escape from any cycle,
and switches back once the objective strictly improves.  The pivot
sequence, hence the returned vertex, is deterministic.

On request the solution is re-checked against every original constraint
and the final reduced costs are asserted nonnegative, i.e. both primal and
dual feasibility hold exactly.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"

_BLAND_TRIGGER = 12  # consecutive degenerate pivots before anti-cycling kicks in


class SimplexError(AssertionError):
    """Internal consistency failure (should never fire on valid input)."""


def _sparse_update(row: dict, row_r: dict, c: int, piv: int, d: int) -> None:
    """row := (row*piv - row[c]*row_r) / d elementwise, exactly (Bareiss)."""
    f = row.get(c, 0)
    if f:
        for j, b in row_r.items():
            a = row.get(j, 0)
            q, rem = divmod(a * piv - f * b, d)
            if rem:
                raise SimplexError("inexact fraction-free division")
            if q:
                row[j] = q
            elif a:
                del row[j]
        if piv != d:
            for j in list(row):
                if j not in row_r:
                    q, rem = divmod(row[j] * piv, d)
                    if rem:
                        raise SimplexError("inexact fraction-free division")
                    row[j] = q
    elif piv != d:
        for j in list(row):
            q, rem = divmod(row[j] * piv, d)
            if rem:
                raise SimplexError("inexact fraction-free division")
            row[j] = q


class _Tableau:
    """Sparse integer tableau T = rows/denom with basis bookkeeping.

    Each row is a dict {column: integer}; entries represent value * denom.
    Column `rhs_col` holds the right-hand side.  Pivot elements are always
    positive, so `denom` stays positive and sign tests on entries are sign
    tests on tableau values.
    """

    __slots__ = ("rows", "costs", "basis", "denom", "rhs_col")

    def __init__(self, rows, costs, basis, rhs_col):
        self.rows = rows
        self.costs = costs
        self.basis = basis
        self.denom = 1
        self.rhs_col = rhs_col

    def pivot(self, r: int, c: int) -> None:
        row_r = self.rows[r]
        piv = row_r.get(c, 0)
        if piv <= 0:
            raise SimplexError("pivot element must be positive")
        d = self.denom
        for i, row in enumerate(self.rows):
            if i != r:
                _sparse_update(row, row_r, c, piv, d)
        for row in self.costs:
            _sparse_update(row, row_r, c, piv, d)
        self.basis[r] = c
        self.denom = piv

    def negate_row(self, r: int) -> None:
        self.rows[r] = {j: -v for j, v in self.rows[r].items()}

    def drop_columns(self, cols: set) -> None:
        for row in self.rows:
            for j in cols:
                row.pop(j, None)
        for row in self.costs:
            for j in cols:
                row.pop(j, None)

    def run_phase(self, cost: dict, allowed: list) -> str:
        rhs_col = self.rhs_col
        degenerate_streak = 0
        while True:
            enter = -1
            if degenerate_streak >= _BLAND_TRIGGER:
                for j in allowed:
                    if cost.get(j, 0) < 0:
                        enter = j
                        break
            else:
                best = 0
                for j in allowed:
                    cj = cost.get(j, 0)
                    if cj < best:
                        best = cj
                        enter = j
            if enter < 0:
                return OPTIMAL
            leave = -1
            best_num = best_den = None
            basis = self.basis
            for i, row in enumerate(self.rows):
                a = row.get(enter, 0)
                if a > 0:
                    num = row.get(rhs_col, 0)
                    if leave < 0:
                        better = True
                    else:
                        diff = num * best_den - best_num * a
                        better = diff < 0 or (diff == 0 and basis[i] < basis[leave])
                    if better:
                        leave, best_num, best_den = i, num, a
            if leave < 0:
                return UNBOUNDED
            degenerate_streak = degenerate_streak + 1 if best_num == 0 else 0
            self.pivot(leave, enter)


def _scale_to_int(values: list) -> list:
    factor = lcm(*(v.denominator for v in values)) if values else 1
    return [int(v * factor) for v in values]


def solve_lp(num_vars: int, rows: list, senses: list, rhs: list, objective: list,
             check: bool = True):
    """Solve min objective.x, rows_i.x (sense_i) rhs_i, x >= 0.

    Returns (status, objective_value, x) where x is a list of Fractions
    (empty unless status is "optimal").
    """
    m = len(rows)
    frac_rows = [[Fraction(v) for v in row] for row in rows]
    frac_rhs = [Fraction(v) for v in rhs]
    frac_obj = [Fraction(v) for v in objective]
    senses_orig = list(senses)
    senses = list(senses)

    int_rows = []
    int_rhs = []
    for i in range(m):
        scaled = _scale_to_int(frac_rows[i] + [frac_rhs[i]])
        row, b = scaled[:-1], scaled[-1]
        # make every right-hand side nonnegative; zero-rhs >= rows flip too,
        # letting their surplus start basic instead of wasting an artificial
        if b < 0 or (b == 0 and senses[i] == ">="):
            row = [-v for v in row]
            b = -b
            senses[i] = {"<=": ">=", ">=": "<=", "=": "="}[senses[i]]
        int_rows.append(row)
        int_rhs.append(b)

    num_slack = sum(1 for s in senses if s != "=")
    num_art = sum(1 for s in senses if s != "<=")
    ncols = num_vars + num_slack + num_art
    rhs_col = ncols

    tab_rows = []
    basis = [-1] * m
    slack_at = num_vars
    art_at = num_vars + num_slack
    art_cols = []
    for i in range(m):
        row = {j: v for j, v in enumerate(int_rows[i]) if v}
        if int_rhs[i]:
            row[rhs_col] = int_rhs[i]
        if senses[i] == "<=":
            row[slack_at] = 1
            basis[i] = slack_at
            slack_at += 1
        elif senses[i] == ">=":
            row[slack_at] = -1
            slack_at += 1
            row[art_at] = 1
            basis[i] = art_at
            art_cols.append(art_at)
            art_at += 1
        else:
            row[art_at] = 1
            basis[i] = art_at
            art_cols.append(art_at)
            art_at += 1
        tab_rows.append(row)
    art_set = set(art_cols)

    # the objective cost row is carried through every pivot from the start,
    # so it always holds the current reduced costs (times denom)
    obj_scaled = _scale_to_int(frac_obj)
    cost2 = {j: v for j, v in enumerate(obj_scaled) if v}

    if art_cols:
        cost1: dict = {}
        for c in art_cols:
            cost1[c] = 1
        for i in range(m):
            if basis[i] in art_set:
                for j, v in tab_rows[i].items():
                    acc = cost1.get(j, 0) - v
                    if acc:
                        cost1[j] = acc
                    elif j in cost1:
                        del cost1[j]
        tab = _Tableau(tab_rows, [cost1, cost2], basis, rhs_col)
        status = tab.run_phase(cost1, list(range(ncols)))
        if status != OPTIMAL:
            raise SimplexError("phase 1 cannot be unbounded")
        if cost1.get(rhs_col, 0) < 0:  # phase-1 optimum is -cost1[rhs]/denom > 0
            return INFEASIBLE, None, []
        # pivot leftover artificials out of the basis, or drop empty rows
        drop = []
        for i in range(len(tab.rows)):
            if tab.basis[i] in art_set:
                piv_col = -1
                for j in sorted(tab.rows[i]):
                    if j < num_vars + num_slack and tab.rows[i][j] != 0:
                        piv_col = j
                        break
                if piv_col < 0:
                    drop.append(i)
                else:
                    if tab.rows[i][piv_col] < 0:
                        tab.negate_row(i)
                    tab.pivot(i, piv_col)
        for i in reversed(drop):
            del tab.rows[i]
            del tab.basis[i]
        tab.costs = [cost2]
        tab.drop_columns(art_set)  # dead weight from here on
    else:
        tab = _Tableau(tab_rows, [cost2], basis, rhs_col)

    allowed = [j for j in range(ncols) if j not in art_set]
    status = tab.run_phase(cost2, allowed)
    if status == UNBOUNDED:
        return UNBOUNDED, None, []

    x = [Fraction(0)] * num_vars
    for i, row in enumerate(tab.rows):
        if tab.basis[i] < num_vars:
            x[tab.basis[i]] = Fraction(row.get(rhs_col, 0), tab.denom)
    value = sum((frac_obj[j] * x[j] for j in range(num_vars) if x[j]), Fraction(0))

    if check:
        _certify(num_vars, frac_rows, senses_orig, frac_rhs, x, cost2, art_set, ncols)
    return OPTIMAL, value, x


def _certify(num_vars, frac_rows, senses, frac_rhs, x, cost2, art_set, ncols) -> None:
    """Exact post-solve audit: primal feasibility of x against the original
    data and dual feasibility (nonnegative reduced costs) of the final
    basis."""
    zero = Fraction(0)
    if any(v < 0 for v in x):
        raise SimplexError("negative variable value")
    for i, row in enumerate(frac_rows):
        lhs = sum((row[j] * x[j] for j in range(num_vars) if row[j] and x[j]), zero)
        ok = (lhs <= frac_rhs[i] if senses[i] == "<=" else
              lhs >= frac_rhs[i] if senses[i] == ">=" else lhs == frac_rhs[i])
        if not ok:
            raise SimplexError(f"primal feasibility violated on row {i}")
    for j, cj in cost2.items():
        if j != ncols and j not in art_set and cj < 0:
            raise SimplexError(f"dual feasibility violated at column {j}")
