"""Best-first branch-and-bound for MixedModel over the exact simplex.

LP relaxations treat free binaries as continuous in [0, 1]; a node with an
integral relaxation optimum is accepted directly.  Branching picks the most
fractional binary (ties by declaration order) and children inherit the
parent's LP bound for best-first ordering, with ties broken by insertion
order, so the search is deterministic.  An optional propagator callback can
extend a node's fixings (or signal conflict) before the node is queued; an
optional `integral_continuous` mode additionally branches continuous
variables on floor/ceiling bounds until the witness is integer-valued.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .linear import MixedModel
from .simplex import INFEASIBLE, OPTIMAL, UNBOUNDED, solve_lp

STATUS_OPTIMAL = "optimal"
STATUS_INFEASIBLE = "infeasible"
STATUS_UNBOUNDED = "unbounded"
STATUS_BUDGET = "budget"


@dataclass
class SolveBudget:
    """Node and wall-clock limits for one branch-and-bound run."""

    max_nodes: int = 200_000
    time_limit: Optional[float] = None


@dataclass
class SolveResult:
    status: str
    objective: Optional[Fraction]
    assignment: dict
    node_count: int
    lazy_rounds: int = 0
    best_bound: Optional[Fraction] = None

    def to_json_dict(self) -> dict:
        from .model import fraction_to_str
        out = {
            "status": self.status,
            "node_count": self.node_count,
            "lazy_rounds": self.lazy_rounds,
        }
        if self.objective is not None:
            out["objective"] = fraction_to_str(self.objective)
        if self.best_bound is not None:
            out["best_bound"] = fraction_to_str(self.best_bound)
        out["assignment"] = {k: fraction_to_str(v) for k, v in sorted(self.assignment.items())}
        return out


def _solve_node_lp(model: MixedModel, fixed: dict, extra_rows: tuple):
    """LP relaxation with the given binaries fixed and extra single-variable
    bound rows.  Single-variable lower-bound rows are turned into variable
    shifts first, which removes most phase-1 artificials.

    Returns (status, objective, assignment-over-all-vars).
    """
    cont = model.continuous_vars
    free = [v for v in model.binary_vars if v not in fixed]
    names = list(cont) + list(free)
    index = {v: k for k, v in enumerate(names)}
    nv = len(names)
    zero = Fraction(0)

    rows, senses, rhs = [], [], []
    for con in model.constraints:
        row = [zero] * nv
        shift = zero
        for var, coef in con.coeffs:
            if var in fixed:
                shift += coef * fixed[var]
            else:
                row[index[var]] += coef
        rows.append(row)
        senses.append(con.sense)
        rhs.append(con.rhs - shift)
    for v in free:
        row = [zero] * nv
        row[index[v]] = Fraction(1)
        rows.append(row)
        senses.append("<=")
        rhs.append(Fraction(1))
    for var, sense, value in extra_rows:
        if var in fixed:
            ok = fixed[var] <= value if sense == "<=" else fixed[var] >= value
            if not ok:
                return INFEASIBLE, None, {}
            continue
        row = [zero] * nv
        row[index[var]] = Fraction(1)
        rows.append(row)
        senses.append(sense)
        rhs.append(Fraction(value))

    # lift single-variable lower bounds into shifts x = lb + x'
    lbs = [zero] * nv
    singles = []
    for idx, row in enumerate(rows):
        nz = [(j, a) for j, a in enumerate(row) if a]
        if len(nz) == 1:
            j, a = nz[0]
            singles.append((idx, j, a))
            if (senses[idx] == ">=" and a > 0) or (senses[idx] == "<=" and a < 0):
                cand = rhs[idx] / a
                if cand > lbs[j]:
                    lbs[j] = cand
    if any(lbs):
        for idx, row in enumerate(rows):
            adj = sum((a * lbs[j] for j, a in enumerate(row) if a and lbs[j]), zero)
            if adj:
                rhs[idx] -= adj
    drop = set()
    for idx, j, a in singles:
        if (senses[idx] == ">=" and a > 0 and rhs[idx] <= 0) or (
                senses[idx] == "<=" and a < 0 and rhs[idx] >= 0):
            drop.add(idx)
    if drop:
        rows = [r for i, r in enumerate(rows) if i not in drop]
        senses = [s for i, s in enumerate(senses) if i not in drop]
        rhs = [r for i, r in enumerate(rhs) if i not in drop]

    objective = [Fraction(model.objective.get(v, 0)) for v in names]
    status, _, x = solve_lp(nv, rows, senses, rhs, objective)
    if status != OPTIMAL:
        return status, None, {}
    assignment = {}
    for k, v in enumerate(names):
        assignment[v] = x[k] + lbs[k]
    for v, val in fixed.items():
        assignment[v] = Fraction(val)
    obj = sum((Fraction(c) * assignment[v] for v, c in model.objective.items()), zero)
    return OPTIMAL, obj, assignment


def _most_fractional(names: list, assignment: dict) -> Optional[str]:
    best = None
    best_score = None
    for v in names:
        val = assignment[v]
        frac = val - math.floor(val)
        if frac == 0:
            continue
        score = min(frac, 1 - frac)
        if best_score is None or score > best_score:
            best, best_score = v, score
    return best


def _dive(model: MixedModel, propagator, root_fixed: dict, max_lp: int):
    """Greedy plunge for an early incumbent: repeatedly fix the most
    fractional binary to its rounded value (trying the opposite value when
    that kills feasibility) until the relaxation is integral or stuck.
    Deterministic; returns (lp_solves_used, incumbent_or_None)."""
    nodes = 1
    fixed = dict(root_fixed)
    status, obj, assignment = _solve_node_lp(model, fixed, ())
    if status != OPTIMAL:
        return nodes, None
    while True:
        free = [v for v in model.binary_vars if v not in fixed]
        var = _most_fractional(free, assignment)
        if var is None:
            rounded = dict(assignment)
            for v in model.binary_vars:
                rounded[v] = Fraction(int(rounded[v]))
            return nodes, (obj, rounded)
        prefer = 1 if 2 * assignment[var] >= 1 else 0
        advanced = False
        for val in (prefer, 1 - prefer):
            if nodes >= max_lp:
                return nodes, None
            child = dict(fixed)
            child[var] = val
            if propagator is not None:
                child = propagator(child)
                if child is None:
                    continue
            status, obj2, assignment2 = _solve_node_lp(model, child, ())
            nodes += 1
            if status == OPTIMAL:
                fixed, obj, assignment = child, obj2, assignment2
                advanced = True
                break
        if not advanced:
            return nodes, None


def solve(
    model: MixedModel,
    budget: Optional[SolveBudget] = None,
    *,
    propagator: Optional[Callable[[dict], Optional[dict]]] = None,
    integral_continuous: bool = False,
    dive: bool = True,
    log: Optional[Callable[[dict], None]] = None,
) -> SolveResult:
    """Minimize the model objective over its mixed feasible set.

    A greedy dive runs first (unless disabled or in integral-witness mode)
    to seed the incumbent, then the best-first search proves optimality.
    Returns an exact rational objective and assignment.  On node or time
    budget exhaustion the best incumbent (if any) is returned with status
    "budget" and the tightest open lower bound in `best_bound`.
    """
    model.validate()
    budget = budget or SolveBudget()

    def emit(event: dict) -> None:
        if log is not None:
            log(event)

    counter = [0]

    def push(heap, fixed, extra, bound):
        counter[0] += 1
        key = (bound is not None, bound if bound is not None else Fraction(0), counter[0])
        heapq.heappush(heap, (key, fixed, extra, bound))

    root_fixed: dict = {}
    if propagator is not None:
        propagated = propagator(root_fixed)
        if propagated is None:
            return SolveResult(status=STATUS_INFEASIBLE, objective=None, assignment={},
                               node_count=0)
        root_fixed = propagated

    heap: list = []
    push(heap, root_fixed, (), None)
    incumbent: Optional[tuple] = None
    nodes = 0
    started = time.monotonic()
    exhausted = False

    if dive and model.binary_vars and not integral_continuous:
        dive_lp_limit = min(4 * len(model.binary_vars) + 2, budget.max_nodes)
        dive_nodes, found = _dive(model, propagator, root_fixed, dive_lp_limit)
        nodes += dive_nodes
        if found is not None:
            incumbent = found
            emit({"event": "incumbent", "objective": str(found[0]), "source": "dive"})

    while heap:
        if nodes >= budget.max_nodes or (
                budget.time_limit is not None
                and time.monotonic() - started > budget.time_limit):
            exhausted = True
            break
        key, fixed, extra, bound = heapq.heappop(heap)
        if incumbent is not None and bound is not None and bound >= incumbent[0]:
            continue
        nodes += 1
        status, obj, assignment = _solve_node_lp(model, fixed, extra)
        emit({"event": "node", "id": nodes, "status": status,
              "bound": None if obj is None else str(obj), "fixed": len(fixed)})
        if status == INFEASIBLE:
            continue
        if status == UNBOUNDED:
            free = [v for v in model.binary_vars if v not in fixed]
            if not free:
                return SolveResult(status=STATUS_UNBOUNDED, objective=None,
                                   assignment={}, node_count=nodes)
            for val in (0, 1):
                child = dict(fixed)
                child[free[0]] = val
                if propagator is not None:
                    child = propagator(child)
                    if child is None:
                        continue
                push(heap, child, extra, None)
            continue
        if incumbent is not None and obj >= incumbent[0]:
            continue
        free = [v for v in model.binary_vars if v not in fixed]
        branch_var = _most_fractional(free, assignment)
        if branch_var is not None:
            for val in (0, 1):
                child = dict(fixed)
                child[branch_var] = val
                if propagator is not None:
                    child = propagator(child)
                    if child is None:
                        continue
                push(heap, child, extra, obj)
            continue
        if integral_continuous:
            cont_var = _most_fractional(model.continuous_vars, assignment)
            if cont_var is not None:
                val = assignment[cont_var]
                lo, hi = Fraction(math.floor(val)), Fraction(math.ceil(val))
                push(heap, fixed, extra + ((cont_var, "<=", lo),), obj)
                push(heap, fixed, extra + ((cont_var, ">=", hi),), obj)
                continue
        # integral relaxation optimum: accept as a candidate
        rounded = {v: assignment[v] for v in model.all_vars()}
        for v in model.binary_vars:
            rounded[v] = Fraction(int(rounded[v]))
        if incumbent is None or obj < incumbent[0]:
            incumbent = (obj, rounded)
            emit({"event": "incumbent", "objective": str(obj)})

    if exhausted:
        open_bounds = [entry[3] for entry in heap if entry[3] is not None]
        has_unknown = any(entry[3] is None for entry in heap)
        best_bound = None if has_unknown or not open_bounds else min(open_bounds)
        if incumbent is not None and best_bound is not None:
            best_bound = min(best_bound, incumbent[0])
        return SolveResult(
            status=STATUS_BUDGET,
            objective=incumbent[0] if incumbent else None,
            assignment=incumbent[1] if incumbent else {},
            node_count=nodes,
            best_bound=best_bound,
        )
    if incumbent is None:
        return SolveResult(status=STATUS_INFEASIBLE, objective=None, assignment={},
                           node_count=nodes)
    emit({"event": "done", "status": STATUS_OPTIMAL, "objective": str(incumbent[0])})
    return SolveResult(status=STATUS_OPTIMAL, objective=incumbent[0],
                       assignment=incumbent[1], node_count=nodes)
