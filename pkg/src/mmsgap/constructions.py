"""Generators for the concrete negative-example instances and instance
families handled by this package.

All constructors return validated `Instance` values (or a
`BaseMatrixLayout` for the raw square-grid design).  Values are exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .model import GOODS, CHORES, Instance


def theorem1_instance() -> Instance:
    """The 3-agent, 9-item goods instance with MMS vector (40, 40, 40) and
    gap exactly 1/40: no allocation gives every agent more than 39.

    Items are arranged as a 3x3 grid in row-major order.  Agent 0 ("R") has
    rows as her MMS partition, agent 1 ("C") columns, and agent 2 ("U") the
    pair {e2, e4}, the diagonal {e3, e5, e7}, and the remaining quadruple
    (1-based grid naming).
    """
    return Instance.create([
        [1, 16, 23, 26, 4, 10, 12, 19, 9],
        [1, 16, 22, 26, 4, 9, 13, 20, 9],
        [1, 15, 23, 25, 4, 10, 13, 20, 9],
    ], mode=GOODS)


def chores_instance() -> Instance:
    """The 3-agent, 9-chore instance with MMS vector (43, 43, 43) and gap
    exactly 1/43: every allocation gives some agent dis-utility at least 44.

    Same 3x3 grid structure as `theorem1_instance`, with dis-utilities.
    """
    return Instance.create([
        [6, 15, 22, 26, 10, 7, 12, 19, 12],
        [6, 15, 23, 26, 10, 8, 11, 18, 12],
        [6, 16, 22, 27, 10, 7, 11, 18, 12],
    ], mode=CHORES)


@dataclass(frozen=True)
class BaseMatrixLayout:
    """Items placed on an n-by-n grid: the perimeter minus the top-left
    corner, plus the main diagonal excluding corners (5n-7 items total).

    Positions are 1-indexed (row, col) pairs in row-major order.  Every row
    sum and every column sum over the placed items equals the target
    t = n(n-2)^2 + 1, and exactly the bottom-row and right-column items
    (bottom-right corner excluded) are congruent to 1 mod (n-2); these are
    the "special" items.
    """

    n: int
    item_positions: tuple
    values: tuple

    @property
    def target_sum(self) -> Fraction:
        n = self.n
        return Fraction(n * (n - 2) ** 2 + 1)

    def dense(self) -> list:
        """n x n grid of values with 0 at cells that carry no item."""
        grid = [[Fraction(0)] * self.n for _ in range(self.n)]
        for (r, c), v in zip(self.item_positions, self.values):
            grid[r - 1][c - 1] = v
        return grid

    def special_indices(self) -> list:
        """Item indices of the special items: bottom row and right column,
        excluding the bottom-right corner."""
        out = []
        for idx, (r, c) in enumerate(self.item_positions):
            if (r, c) == (self.n, self.n):
                continue
            if r == self.n or c == self.n:
                out.append(idx)
        return out

    def row_bundles(self) -> list:
        rows = [[] for _ in range(self.n)]
        for idx, (r, _) in enumerate(self.item_positions):
            rows[r - 1].append(idx)
        return [frozenset(b) for b in rows]

    def column_bundles(self) -> list:
        cols = [[] for _ in range(self.n)]
        for idx, (_, c) in enumerate(self.item_positions):
            cols[c - 1].append(idx)
        return [frozenset(b) for b in cols]


def _grid_positions(n: int) -> list:
    positions = []
    for c in range(2, n + 1):          # top row, minus the missing corner
        positions.append((1, c))
    for r in range(2, n):              # middle rows: left edge, diagonal, right edge
        positions.append((r, 1))
        positions.append((r, r))
        positions.append((r, n))
    for c in range(1, n + 1):          # bottom row
        positions.append((n, c))
    return positions


def _base_value(n: int, r: int, c: int) -> int:
    if r == 1:
        return 1 if c == n else (n - 2) * n
    if r == n:
        return (n - 2) * (n - 3) if c == n else (n - 2) ** 2 + 1
    if c == 1:
        return (n - 2) * (n - 1)
    if c == n:
        return (n - 2) * (n - 1) + 1
    return (n - 2) * (n * n - 4 * n + 2)  # interior diagonal


def base_matrix(n: int) -> BaseMatrixLayout:
    """The square-grid base design with 5n-7 items and seven distinct values.

    Group values: top row (n-2)n, top-right corner 1, left column
    (n-2)(n-1), interior diagonal (n-2)(n^2-4n+2), right column
    (n-2)(n-1)+1, bottom row (n-2)^2+1, bottom-right corner (n-2)(n-3).
    """
    if n < 4:
        raise ValueError(f"base matrix needs n >= 4, got {n}")
    positions = _grid_positions(n)
    values = tuple(Fraction(_base_value(n, r, c)) for r, c in positions)
    return BaseMatrixLayout(n=n, item_positions=tuple(positions), values=values)


def _row_agent_values(layout: BaseMatrixLayout) -> list:
    """Scale the base design by n, take 1 from every bottom-row special item,
    and give n-1 to the bottom-right corner."""
    n = layout.n
    out = []
    for (r, c), v in zip(layout.item_positions, layout.values):
        w = v * n
        if r == n and c < n:
            w -= 1
        if (r, c) == (n, n):
            w += n - 1
        out.append(w)
    return out


def _column_agent_values(layout: BaseMatrixLayout) -> list:
    """Scale by n, take 1 from every right-column special item, and give
    n-1 to the bottom-right corner."""
    n = layout.n
    out = []
    for (r, c), v in zip(layout.item_positions, layout.values):
        w = v * n
        if c == n and r < n:
            w -= 1
        if (r, c) == (n, n):
            w += n - 1
        out.append(w)
    return out


def target_mms(n: int) -> Fraction:
    """Every agent's MMS in the scaled family: n^2 (n-2)^2 + n."""
    return Fraction(n * n * (n - 2) ** 2 + n)


def vr_vc_instance(n: int, num_row_agents: int, num_col_agents: int) -> Instance:
    """The n-agent instance built on the scaled base design, with the given
    multiplicities of row-type and column-type agents.

    Every agent's MMS is n^2(n-2)^2 + n (rows for row agents, columns for
    column agents, both exact by the averaging bound), yet with at least
    two agents of each type every allocation leaves someone at most one
    short of it.
    """
    if n < 4:
        raise ValueError(f"need n >= 4, got {n}")
    if num_row_agents < 2 or num_col_agents < 2:
        raise ValueError("need at least two row agents and two column agents "
                         f"(got {num_row_agents} and {num_col_agents})")
    if num_row_agents + num_col_agents != n:
        raise ValueError(f"agent multiplicities {num_row_agents}+{num_col_agents} != n={n}")
    layout = base_matrix(n)
    vr = _row_agent_values(layout)
    vc = _column_agent_values(layout)
    rows = [tuple(vr)] * num_row_agents + [tuple(vc)] * num_col_agents
    return Instance(n=n, m=len(layout.item_positions), values=tuple(rows), mode=GOODS)


def extended_instance(N: int) -> Instance:
    """The N-agent family obtained by padding the core design with auxiliary
    items.

    For N <= 5 this is vr_vc_instance(N, floor(N/2), ceil(N/2)).  For
    N >= 6 the core uses n = ceil((N+4)/2) grid size; N - n auxiliary items
    worth the target MMS to everyone are appended, for N + 4n - 7 items in
    total.  The first floor(N/2) agents are row agents.  Every agent's MMS
    equals the core target (rows or columns plus one auxiliary item each).
    """
    if N < 4:
        raise ValueError(f"need N >= 4, got {N}")
    if N <= 5:
        return vr_vc_instance(N, N // 2, N - N // 2)
    n = (N + 4 + 1) // 2  # ceil((N + 4) / 2)
    layout = base_matrix(n)
    vr = _row_agent_values(layout)
    vc = _column_agent_values(layout)
    aux = [target_mms(n)] * (N - n)
    num_row = N // 2
    rows = []
    for i in range(N):
        core = vr if i < num_row else vc
        rows.append(tuple(core + aux))
    return Instance(n=N, m=len(layout.item_positions) + len(aux),
                    values=tuple(rows), mode=GOODS)
