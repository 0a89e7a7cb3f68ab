"""Structural analysis of 3-agent, 9-item goods instances and of good
partitions of the square-grid base design.

A negative example on nine items must, up to renaming items and agents,
look like: one agent whose MMS partition is the three rows of a 3x3 grid,
one whose partition is the three columns, and one ("unbalanced") whose
partition is a pair P = {e2, e4}, a main diagonal D, and the remaining
quadruple Q -- with a fixed pattern of which bundles are good for whom.
`detect_structure` searches for such a witness; the checkers below verify
the side conditions a maximal-gap instance must satisfy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations
from typing import Optional

from .constructions import BaseMatrixLayout
from .model import Bundle, GOODS, Instance, bundle_value, fraction_to_str
from .mms import mms, verify_negative

PARALLEL_DIAGONALS = "parallel-diagonals"
CROSSING_DIAGONALS = "crossing-diagonals"

# canonical 0-based grid positions (position p holds grid item number p+1)
_PAIR = frozenset({1, 3})
_DIAG_PARALLEL = frozenset({2, 4, 6})   # runs parallel to the pair
_DIAG_CROSSING = frozenset({0, 4, 8})   # crosses the pair
_ROWS = [frozenset({0, 1, 2}), frozenset({3, 4, 5}), frozenset({6, 7, 8})]
_COLS = [frozenset({0, 3, 6}), frozenset({1, 4, 7}), frozenset({2, 5, 8})]

# separation-clause exception pairs, canonical 0-based positions
PD_SEPARATION_EXCEPTIONS = (frozenset({5, 8}), frozenset({7, 8}))
CD_SEPARATION_EXCEPTIONS = (frozenset({2, 5}), frozenset({6, 7}))
# partial exceptions: (role, high_position, low_position); the pair is
# exempt only when the role agent values `high` at least as much as `low`
PARTIAL_EXCEPTIONS = (("R", 7, 1), ("C", 5, 3))


def classify_bundle(instance: Instance, agent: int, bundle, mms_value=None) -> str:
    """"good" when the agent values the bundle at least at her MMS, else "bad"."""
    if mms_value is None:
        mms_value = mms(instance, agent).value
    return "good" if bundle_value(instance, agent, bundle) >= mms_value else "bad"


@dataclass(frozen=True)
class StructureClass:
    """A detected canonical structure, or None-kind with an explanation.

    `item_relabeling[p]` is the original item sitting at canonical grid
    position p (0-based, row-major).  `role_assignment` maps the roles
    (row agent, column agent, unbalanced agent) to original agent indices.
    `mms_partitions` holds the witnessing partitions in original item
    labels: rows (in row order), columns (in column order), and (P, D, Q).
    """

    kind: Optional[str]
    item_relabeling: Optional[tuple]
    role_assignment: Optional[tuple]
    mms_partitions: Optional[tuple]
    explanation: Optional[str] = None

    def to_json_dict(self) -> dict:
        if self.kind is None:
            return {"kind": None, "explanation": self.explanation}
        rows, cols, pdq = self.mms_partitions
        return {
            "kind": self.kind,
            "item_relabeling": list(self.item_relabeling),
            "role_assignment": {"row": self.role_assignment[0],
                                "column": self.role_assignment[1],
                                "unbalanced": self.role_assignment[2]},
            "row_partition": [sorted(b) for b in rows],
            "column_partition": [sorted(b) for b in cols],
            "pair_diagonal_quad": [sorted(b) for b in pdq],
        }


def _three_partitions(m: int) -> list:
    """All partitions of {0..m-1} into exactly three nonempty blocks."""
    out = []

    def rec(item: int, blocks: list):
        if item == m:
            if len(blocks) == 3:
                out.append(tuple(frozenset(b) for b in blocks))
            return
        if len(blocks) + (m - item) < 3:
            return
        for b in blocks:
            b.append(item)
            rec(item + 1, blocks)
            b.pop()
        if len(blocks) < 3:
            blocks.append([item])
            rec(item + 1, blocks)
            blocks.pop()

    rec(0, [])
    return out


def _optimal_partitions(instance: Instance, agent: int, value, partitions: list) -> list:
    row = instance.values[agent]
    out = []
    for part in partitions:
        if min(sum(row[j] for j in bundle) for bundle in part) == value:
            out.append(part)
    return out


def _grid_from(row_bundles, col_bundles) -> Optional[list]:
    """Positions e1..e9 (0-based) from ordered row and column bundles, or
    None unless every row/column intersection has exactly one item."""
    grid = []
    for r in row_bundles:
        for c in col_bundles:
            inter = r & c
            if len(inter) != 1:
                return None
            grid.append(next(iter(inter)))
    return grid


def _pattern_holds(instance: Instance, labels: list, roles: tuple, values: list,
                   diag: frozenset) -> bool:
    """Good/bad pattern: P and the row/column avoiding P are good for all
    agents; the other rows/columns are good only for their owner; D and Q
    are bad for the two balanced agents."""
    r_agent, c_agent, u_agent = roles

    def val(agent, positions):
        return sum(instance.values[agent][labels[p]] for p in positions)

    def good(agent, positions):
        return val(agent, positions) >= values[agent]

    quad = frozenset(range(9)) - _PAIR - diag
    checks = [
        good(r_agent, _PAIR), good(c_agent, _PAIR), good(u_agent, _PAIR),
        good(r_agent, _ROWS[2]), good(c_agent, _ROWS[2]), good(u_agent, _ROWS[2]),
        good(r_agent, _COLS[2]), good(c_agent, _COLS[2]), good(u_agent, _COLS[2]),
        not good(c_agent, _ROWS[0]), not good(u_agent, _ROWS[0]),
        not good(c_agent, _ROWS[1]), not good(u_agent, _ROWS[1]),
        not good(r_agent, _COLS[0]), not good(u_agent, _COLS[0]),
        not good(r_agent, _COLS[1]), not good(u_agent, _COLS[1]),
        not good(r_agent, diag), not good(c_agent, diag),
        not good(r_agent, quad), not good(c_agent, quad),
    ]
    return all(checks)


def _failure_explanation(instance: Instance, certs: list) -> str:
    """Best-effort reason why no canonical structure witness exists, phrased
    after the structural exclusion arguments."""
    partitions = [cert.partition for cert in certs]
    for i in range(3):
        for j in range(3):
            if i == j:
                continue
            for a in partitions[i]:
                for b in partitions[j]:
                    if a and a <= b:
                        return ("bundle-containment: a witness bundle of agent "
                                f"{i} lies inside one of agent {j}, which yields a "
                                "complete allocation at everyone's threshold")
                    if len(a - b) == 1 and len(b - a) == 1:
                        return ("single-item-swap: witness bundles of agents "
                                f"{i} and {j} differ in one item, which yields a "
                                "complete allocation at everyone's threshold")
    sizes = [sorted(len(b) for b in part) for part in partitions]
    if all(s == [3, 3, 3] for s in sizes):
        return "all-bundles-size-three: every witness bundle has three items"
    two_bundle_agents = sum(1 for s in sizes if s[0] == 2)
    if two_bundle_agents >= 2:
        return ("two-agents-with-two-item-bundles: at least two agents have a "
                "two-item witness bundle")
    return ("no-canonical-relabeling: no relabeling realizes the required "
            "partition shapes and good/bad pattern")


def detect_structure(instance: Instance) -> StructureClass:
    """Search for a canonical-structure witness of a 3x9 goods instance.

    Tries every assignment of agents to the three roles, every pair of
    optimal partitions with the required shapes, and every ordering of row
    and column bundles; the pair bundle is pinned to positions {e2, e4} and
    the diagonal to one of the two main diagonals.  Returns the None kind
    with an explanation when no witness exists.
    """
    if instance.n != 3 or instance.m != 9:
        raise ValueError(f"structure detection needs 3 agents and 9 items, "
                         f"got {instance.n} and {instance.m}")
    if instance.mode != GOODS:
        raise ValueError("structure detection applies to goods instances only")
    certs = [mms(instance, i) for i in range(3)]
    values = [cert.value for cert in certs]
    all_parts = _three_partitions(9)
    opt = [_optimal_partitions(instance, i, values[i], all_parts) for i in range(3)]
    opt_333 = [[p for p in opt[i] if sorted(len(b) for b in p) == [3, 3, 3]]
               for i in range(3)]
    opt_234 = [[p for p in opt[i] if sorted(len(b) for b in p) == [2, 3, 4]]
               for i in range(3)]

    for r_agent, c_agent, u_agent in permutations(range(3)):
        for pr in opt_333[r_agent]:
            for pc in opt_333[c_agent]:
                for pu in opt_234[u_agent]:
                    pair = next(b for b in pu if len(b) == 2)
                    trip = next(b for b in pu if len(b) == 3)
                    for row_bundles in permutations(pr):
                        for col_bundles in permutations(pc):
                            grid = _grid_from(row_bundles, col_bundles)
                            if grid is None:
                                break  # no ordering fixes intersection sizes
                            if frozenset((grid[p] for p in _PAIR)) != pair:
                                continue
                            for diag, kind in ((_DIAG_PARALLEL, PARALLEL_DIAGONALS),
                                               (_DIAG_CROSSING, CROSSING_DIAGONALS)):
                                if frozenset(grid[p] for p in diag) != trip:
                                    continue
                                if not _pattern_holds(instance, grid,
                                                      (r_agent, c_agent, u_agent),
                                                      values, diag):
                                    continue
                                quad = frozenset(range(9)) - _PAIR - diag
                                pdq = (frozenset(grid[p] for p in _PAIR),
                                       frozenset(grid[p] for p in diag),
                                       frozenset(grid[p] for p in quad))
                                return StructureClass(
                                    kind=kind,
                                    item_relabeling=tuple(grid),
                                    role_assignment=(r_agent, c_agent, u_agent),
                                    mms_partitions=(tuple(row_bundles),
                                                    tuple(col_bundles), pdq),
                                )
    return StructureClass(kind=None, item_relabeling=None, role_assignment=None,
                          mms_partitions=None,
                          explanation=_failure_explanation(instance, certs))


@dataclass(frozen=True)
class SplitLemmaReport:
    """Exhaustive check that every exact-target partition of the base design
    splits the bottom row, splits the right column, or has a corner-free
    bundle mixing both."""

    n: int
    target_sum: Fraction
    partition_count: int
    condition_counts: tuple
    violations: tuple

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "target_sum": fraction_to_str(self.target_sum),
            "partition_count": self.partition_count,
            "condition_counts": list(self.condition_counts),
            "violations": [[sorted(b) for b in part] for part in self.violations],
            "passed": self.passed,
        }


def enumerate_exact_partitions(values: list, bundles: int, target=None,
                               max_nodes: Optional[int] = None) -> list:
    """All partitions of items 0..len(values)-1 into at most `bundles`
    nonempty unlabeled bundles; with a `target`, only partitions where
    every bundle sums exactly to it (then "at most" is "exactly", since no
    bundle may be empty).

    Backtracking assigns items in decreasing value order; a new bundle is
    opened only as the first empty slot, which makes each unordered
    partition appear exactly once.  With a target, a bundle is pruned
    unless its missing amount is a reachable subset sum of the remaining
    items.
    """
    m = len(values)
    order = sorted(range(m), key=lambda j: (-values[j], j))
    vals = [values[j] for j in order]

    reach = None
    if target is not None:
        if any(v != int(v) for v in vals) or target != int(target):
            raise ValueError("exact-sum enumeration expects integer values")
        vals = [int(v) for v in vals]
        target = int(target)
        # reach[d]: bitset of sums attainable from items d.. (bit s => sum s)
        reach = [1] * (m + 1)
        for d in range(m - 1, -1, -1):
            reach[d] = reach[d + 1] | (reach[d + 1] << vals[d])

    out = []
    sums = [0] * bundles
    members = [[] for _ in range(bundles)]
    used = 0
    nodes = 0

    def rec(d: int):
        nonlocal used, nodes
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise RuntimeError(f"partition enumeration exceeded {max_nodes} nodes")
        if d == m:
            if target is None or all(sums[k] == target for k in range(used)):
                out.append(tuple(frozenset(order[j] for j in members[k])
                                 for k in range(used)))
            return
        if target is not None:
            for k in range(used):
                missing = target - sums[k]
                if missing < 0 or not (reach[d] >> missing) & 1:
                    return
        limit = min(used + 1, bundles)
        for k in range(limit):
            if target is not None and sums[k] + vals[d] > target:
                continue
            opened = k == used
            sums[k] += vals[d]
            members[k].append(d)
            if opened:
                used += 1
            rec(d + 1)
            if opened:
                used -= 1
            members[k].pop()
            sums[k] -= vals[d]

    rec(0)
    return out


def check_split_lemma(layout: BaseMatrixLayout, max_nodes: Optional[int] = None,
                      max_bundles: int = 6) -> SplitLemmaReport:
    """Enumerate every partition of the layout's items into n bundles each
    summing exactly to the row/column target, and verify the trichotomy:
    bottom row split one-per-bundle, or right column split one-per-bundle,
    or some bundle mixes bottom-row and right-column items without the
    corner."""
    n = layout.n
    if n > max_bundles:
        raise ValueError(f"exact-partition enumeration is capped at n <= {max_bundles}")
    target = layout.target_sum
    values = [int(v) for v in layout.values]
    bottom = {i for i, (r, c) in enumerate(layout.item_positions) if r == n}
    right = {i for i, (r, c) in enumerate(layout.item_positions) if c == n}
    corner = next(i for i, (r, c) in enumerate(layout.item_positions)
                  if (r, c) == (n, n))

    partitions = enumerate_exact_partitions(values, n, target=int(target),
                                            max_nodes=max_nodes)
    counts = [0, 0, 0]
    violations = []
    for part in partitions:
        c1 = all(len(bundle & bottom) == 1 for bundle in part)
        c2 = all(len(bundle & right) == 1 for bundle in part)
        c3 = any(corner not in bundle and bundle & (bottom - {corner})
                 and bundle & (right - {corner}) for bundle in part)
        if c1:
            counts[0] += 1
        if c2:
            counts[1] += 1
        if c3:
            counts[2] += 1
        if not (c1 or c2 or c3):
            violations.append(part)
    return SplitLemmaReport(n=n, target_sum=target, partition_count=len(partitions),
                            condition_counts=tuple(counts), violations=tuple(violations))


@dataclass(frozen=True)
class ClauseReport:
    name: str
    passed: bool
    details: str = ""


@dataclass(frozen=True)
class MaxGapConditionsReport:
    """Clause-by-clause verdict of the necessary conditions a maximal-gap
    instance with the detected structure must satisfy."""

    bound: Fraction
    kind: str
    clauses: tuple
    ambiguous: tuple = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.clauses)

    def clause(self, name: str) -> ClauseReport:
        for c in self.clauses:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json_dict(self) -> dict:
        return {
            "bound": fraction_to_str(self.bound),
            "kind": self.kind,
            "passed": self.passed,
            "clauses": [{"name": c.name, "passed": c.passed, "details": c.details}
                        for c in self.clauses],
            "ambiguous": list(self.ambiguous),
        }


def check_max_gap_necessary_conditions(instance: Instance, b,
                                       structure: StructureClass) -> MaxGapConditionsReport:
    """Verify the six necessary properties of a maximal-gap instance at
    bound `b` under the detected structure:

    1. every bundle of every role partition is worth exactly b to its owner;
    2. every allocation leaves some agent at or below b-1 (exhaustive);
    3. foreign bad bundles are worth at most b-1;
    4. every item is worth at least 1 to every agent;
    5. items not sharing a bundle in an agent's partition differ in value
       by at least 1, modulo the structure's exception pairs and the two
       one-sided partial exceptions (a partial-exception pair that fails its
       stated inequality and still violates the separation is reported as
       ambiguous rather than silently excused);
    6. a single item order consistent with all three valuations exists.
    """
    if structure.kind is None:
        raise ValueError("instance has no detected structure to check against")
    b = Fraction(b)
    labels = structure.item_relabeling
    r_agent, c_agent, u_agent = structure.role_assignment
    diag = _DIAG_PARALLEL if structure.kind == PARALLEL_DIAGONALS else _DIAG_CROSSING
    quad = frozenset(range(9)) - _PAIR - diag
    role_partitions = {
        "R": (r_agent, [frozenset(p) for p in _ROWS]),
        "C": (c_agent, [frozenset(p) for p in _COLS]),
        "U": (u_agent, [_PAIR, diag, quad]),
    }

    def val(agent: int, positions) -> Fraction:
        return sum((instance.values[agent][labels[p]] for p in positions), Fraction(0))

    clauses = []

    bad1 = [f"{role}:{sorted(part)}" for role, (agent, parts) in role_partitions.items()
            for part in parts if val(agent, part) != b]
    clauses.append(ClauseReport("partition-bundles-exact", not bad1,
                                "; ".join(bad1)))

    check = verify_negative(instance, [mms(instance, i).value for i in range(3)], b - 1)
    detail2 = "" if check.confirmed else (
        f"allocation {[sorted(x) for x in check.counterexample]} gives everyone more")
    clauses.append(ClauseReport("no-satisfying-allocation", check.confirmed, detail2))

    foreign_bad = (
        [(c_agent, p) for p in (_ROWS[0], _ROWS[1])] +
        [(u_agent, p) for p in (_ROWS[0], _ROWS[1])] +
        [(r_agent, p) for p in (_COLS[0], _COLS[1])] +
        [(u_agent, p) for p in (_COLS[0], _COLS[1])] +
        [(r_agent, diag), (c_agent, diag), (r_agent, quad), (c_agent, quad)]
    )
    bad3 = [f"agent {agent} on {sorted(p)}: {fraction_to_str(val(agent, p))}"
            for agent, p in foreign_bad if val(agent, p) > b - 1]
    clauses.append(ClauseReport("foreign-bad-bundles", not bad3, "; ".join(bad3)))

    bad4 = [f"agent {i}, grid position {p + 1}"
            for i in range(3) for p in range(9)
            if instance.values[i][labels[p]] < 1]
    clauses.append(ClauseReport("item-values-at-least-one", not bad4, "; ".join(bad4)))

    exceptions = (PD_SEPARATION_EXCEPTIONS if structure.kind == PARALLEL_DIAGONALS
                  else CD_SEPARATION_EXCEPTIONS)
    partial_by_role = {role: (hi, lo) for role, hi, lo in PARTIAL_EXCEPTIONS}
    bad5 = []
    ambiguous = []
    for role, (agent, parts) in role_partitions.items():
        partial = partial_by_role.get(role)
        for p in range(9):
            for q in range(p + 1, 9):
                if any(p in part and q in part for part in parts):
                    continue
                if frozenset({p, q}) in exceptions:
                    continue
                vp, vq = val(agent, [p]), val(agent, [q])
                if partial is not None and frozenset({p, q}) == frozenset(partial):
                    hi, lo = partial
                    if val(agent, [hi]) >= val(agent, [lo]):
                        continue  # the stated inequality holds: exempt
                    if abs(vp - vq) < 1:
                        ambiguous.append(
                            f"{role}: grid items {p + 1},{q + 1} fall under a partial "
                            "exception whose inequality fails, and their values are "
                            "closer than 1")
                        continue
                    continue
                if abs(vp - vq) < 1:
                    bad5.append(f"{role}: grid items {p + 1},{q + 1} differ by "
                                f"{fraction_to_str(abs(vp - vq))}")
    clauses.append(ClauseReport("value-separation", not bad5, "; ".join(bad5)))

    bad6 = []
    for p in range(9):
        for q in range(p + 1, 9):
            above = any(instance.values[i][labels[p]] > instance.values[i][labels[q]]
                        for i in range(3))
            below = any(instance.values[i][labels[p]] < instance.values[i][labels[q]]
                        for i in range(3))
            if above and below:
                bad6.append(f"grid items {p + 1},{q + 1} are ordered oppositely "
                            "by different agents")
    clauses.append(ClauseReport("consistent-item-order", not bad6, "; ".join(bad6)))

    return MaxGapConditionsReport(bound=b, kind=structure.kind,
                                  clauses=tuple(clauses), ambiguous=tuple(ambiguous))
