"""Root LP / MIP builders for the two canonical 3x9 structures and the
verification-driven max-gap search.

The decision variables are the 27 item values (r1..r9 for the row agent,
c1..c9 for the column agent, u1..u9 for the unbalanced agent) plus the
common share size b, minimized.  The root LP carries the positivity, share
(partition-bundle), foreign-bad-bundle, base order, and base allocation
blocks.  The MIP adds selected order constraints (one binary plus six
big-M rows per item pair whose relative order is not already decided) and
selected allocation constraints (binaries choosing which agent falls short
in a covered allocation).  Allocation coverage is generated lazily: a
candidate optimum is extracted as a concrete instance, verified by
exhaustive search, and every violating allocation found becomes a new
selected-allocation constraint for the next round.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Callable, Optional

from .linear import MixedModel, emit_lp_file
from .model import CHORES, GOODS, Instance, fraction_to_str
from .mms import enumerate_allocations, mms
from .solver import (
    STATUS_OPTIMAL,
    SolveBudget,
    SolveResult,
    solve,
)

PD = "pd"
CD = "cd"

_ROWS = ((0, 1, 2), (3, 4, 5), (6, 7, 8))
_COLS = ((0, 3, 6), (1, 4, 7), (2, 5, 8))
_PAIR = (1, 3)
_PDQ = {
    PD: (_PAIR, (2, 4, 6), (0, 5, 7, 8)),
    CD: (_PAIR, (0, 4, 8), (2, 5, 6, 7)),
}
# base order facts (first item precedes second): e4>=e2, e3>=e7, e8>=e6
_BASE_FACTS = ((3, 1), (2, 6), (7, 5))
# appendix-derived preload for the crossing structure: e4 >= e9 + 1
_CD_PRELOAD = ((3, 8),)
_SEPARATION_EXCEPTIONS = {
    PD: (frozenset({5, 8}), frozenset({7, 8})),
    CD: (frozenset({2, 5}), frozenset({6, 7})),
}
# one-sided partial exceptions: (role, first, second) with delta 0 only in
# the direction "first precedes second"
_PARTIAL_EXCEPTIONS = (("r", 7, 1), ("c", 5, 3))

_ROLE_PARTITIONS = {
    PD: {"r": _ROWS, "c": _COLS, "u": _PDQ[PD]},
    CD: {"r": _ROWS, "c": _COLS, "u": _PDQ[CD]},
}


class ModelBuildError(RuntimeError):
    """Raised when a requested model cannot be soundly constructed."""


class BigMValidationError(RuntimeError):
    """Raised when a solved instance contradicts the big-M magnitude
    assumptions baked into the model."""


@dataclass(frozen=True)
class MaxGapConfig:
    """Selection policy and constants for MIP construction and search."""

    mode: str = GOODS
    big_m_order: int = 40
    big_m_alloc: int = 100
    derive_order_facts: bool = True
    covered_allocations: tuple = ()
    max_cuts_per_round: int = 12
    max_rounds: int = 64
    lp_exemptions: bool = True   # prove agents unshortable per covered allocation
    bound_floor: Optional[Fraction] = None  # valid lower bound on b between rounds


def _var(role: str, position: int) -> str:
    return f"{role}{position + 1}"


def _structure_key(structure: str) -> str:
    key = structure.lower()
    if key not in (PD, CD):
        raise ValueError(f"structure must be 'pd' or 'cd', got {structure!r}")
    return key


def _declare_vars(model: MixedModel) -> None:
    for role in ("r", "c", "u"):
        for p in range(9):
            model.add_continuous(_var(role, p))
    model.add_continuous("b")
    model.set_objective({"b": 1})


def _order_delta(structure: str, role: str, first: int, second: int,
                 mode: str = GOODS) -> int:
    """Required value margin for `first precedes second` seen by `role`.

    Zero when the two items share a bundle of the role's partition, for the
    structure's exception pairs, and in the stated direction of the two
    partial exceptions; one otherwise.  Chores mode drops the margin
    entirely (no ordering theory is used there)."""
    if mode != GOODS:
        return 0
    for bundle in _ROLE_PARTITIONS[structure][role]:
        if first in bundle and second in bundle:
            return 0
    if frozenset({first, second}) in _SEPARATION_EXCEPTIONS[structure]:
        return 0
    for p_role, p_first, p_second in _PARTIAL_EXCEPTIONS:
        if role == p_role and (first, second) == (p_first, p_second):
            return 0
    return 1


def _add_order_fact(model: MixedModel, structure: str, first: int, second: int,
                    tag: str) -> None:
    for role in ("r", "c", "u"):
        delta = _order_delta(structure, role, first, second)
        model.add_constraint(
            f"{tag}_{role}{first + 1}{second + 1}",
            {_var(role, first): 1, _var(role, second): -1},
            ">=", delta)


def build_root_lp(structure: str,
                  blocks: tuple = ("positivity", "mms", "bad", "order", "allocation"),
                  mode: str = GOODS) -> MixedModel:
    """The structured root LP: 27 positivity rows, 9 share equalities, 12
    foreign-bad-bundle rows, 9 base order rows, and 3 base allocation rows
    (60 constraints in total with all blocks enabled).

    `blocks` restricts construction to a prefix of that list, which is how
    the staged optima (positivity+mms+bad, +order, +allocation) are
    reproduced.  Chores mode mirrors the inequalities that have a chores
    meaning and omits the order and allocation blocks, whose derivations
    are goods-specific.
    """
    structure = _structure_key(structure)
    chores = mode != GOODS
    model = MixedModel(name=f"{structure}-root-{mode}")
    _declare_vars(model)
    partitions = _ROLE_PARTITIONS[structure]

    if "positivity" in blocks:
        for role in ("r", "c", "u"):
            for p in range(9):
                model.add_constraint(f"pos_{_var(role, p)}", {_var(role, p): 1}, ">=", 1)
    if "mms" in blocks:
        for role in ("r", "c", "u"):
            for k, bundle in enumerate(partitions[role], start=1):
                coeffs = {_var(role, p): 1 for p in bundle}
                coeffs["b"] = -1
                model.add_constraint(f"mms_{role}{k}", coeffs, "=", 0)
    if "bad" in blocks:
        foreign = (
            [("c", _ROWS[0], "r1"), ("u", _ROWS[0], "r1"),
             ("c", _ROWS[1], "r2"), ("u", _ROWS[1], "r2"),
             ("r", _COLS[0], "c1"), ("u", _COLS[0], "c1"),
             ("r", _COLS[1], "c2"), ("u", _COLS[1], "c2"),
             ("r", partitions["u"][1], "d"), ("c", partitions["u"][1], "d"),
             ("r", partitions["u"][2], "q"), ("c", partitions["u"][2], "q")]
        )
        for viewer, bundle, owner_tag in foreign:
            coeffs = {_var(viewer, p): 1 for p in bundle}
            coeffs["b"] = -1
            if chores:
                model.add_constraint(f"bad_{viewer}_{owner_tag}", coeffs, ">=", 1)
            else:
                model.add_constraint(f"bad_{viewer}_{owner_tag}", coeffs, "<=", -1)
    if "order" in blocks and not chores:
        for first, second in _BASE_FACTS:
            _add_order_fact(model, structure, first, second, "ord")
    if "allocation" in blocks and not chores:
        base_allocs = [
            ("alloc_u679", "u", (5, 6, 8)),
            ("alloc_u39", "u", (2, 8)),
            ("alloc_r39", "r", (2, 8)),
        ]
        for name, role, positions in base_allocs:
            coeffs = {_var(role, p): 1 for p in positions}
            coeffs["b"] = -1
            model.add_constraint(name, coeffs, "<=", -1)
    return model


def _transitive_closure(edges: set) -> set:
    """Transitive closure over the nine grid positions, as a pair set.
    Mutually ordered pairs (a cycle) survive into the output and are the
    caller's conflict signal."""
    adj = [0] * 9
    for a, b in edges:
        adj[a] |= 1 << b
    changed = True
    while changed:
        changed = False
        for a in range(9):
            cur = adj[a]
            new = cur
            mask = cur
            while mask:
                low = mask & -mask
                new |= adj[low.bit_length() - 1]
                mask ^= low
            if new != cur:
                adj[a] = new
                changed = True
    return {(a, b) for a in range(9) for b in range(9)
            if a != b and (adj[a] >> b) & 1}


def _implied_direction(model: MixedModel, first: int, second: int,
                       witnesses: list) -> bool:
    """True when every feasible point has v_role(first) > v_role(second) for
    some role, i.e. `first precedes second` is forced.  Feasible points
    seen earlier serve as cheap counterexample witnesses before any LP is
    solved."""
    for role in ("r", "c", "u"):
        va, vb = _var(role, first), _var(role, second)
        if any(w[va] <= w[vb] for w in witnesses):
            continue
        probe = MixedModel(name="probe", continuous_vars=list(model.continuous_vars),
                           binary_vars=[], constraints=list(model.constraints),
                           objective={})
        probe.set_objective({va: 1, vb: -1})
        res = solve(probe)
        if res.status == STATUS_OPTIMAL:
            if res.objective > 0:
                return True
            witnesses.append(res.assignment)
        # unbounded below also means "not forced" for this role
    return False


def _derive_order_facts(model: MixedModel, structure: str, facts: set) -> set:
    """Close the known order facts under transitivity and LP implication.

    Every decided pair contributes its margin rows to the model, which can
    force further pairs; iterate to a fixpoint.  Returns the closure."""
    added = set()

    def sync(closure: set) -> None:
        for first, second in sorted(closure):
            if (first, second) not in added:
                added.add((first, second))
                _add_order_fact(model, structure, first, second, "ordx")

    added.update(_BASE_FACTS)  # their rows are already in the root LP
    if structure == CD:
        added.update(_CD_PRELOAD)  # preloaded by the MIP builder
    closure = _transitive_closure(set(facts))
    sync(closure)
    witnesses: list = []
    changed = True
    while changed:
        changed = False
        undecided = [
            (p, q) for p, q in combinations(range(9), 2)
            if (p, q) not in closure and (q, p) not in closure
        ]
        for p, q in undecided:
            if _implied_direction(model, p, q, witnesses):
                closure.add((p, q))
                changed = True
            elif _implied_direction(model, q, p, witnesses):
                closure.add((q, p))
                changed = True
        if changed:
            closure = _transitive_closure(closure)
            sync(closure)
    return closure


_CLOSURE_CACHE: dict = {}


def _order_closure(structure: str, config: MaxGapConfig) -> frozenset:
    """Decided order pairs for the structure: base facts, preloads, and
    whatever LP implication can force, closed transitively.  Cached: the
    result depends only on the structure and mode, not on covered
    allocations."""
    key = (structure, config.mode, config.derive_order_facts)
    cached = _CLOSURE_CACHE.get(key)
    if cached is not None:
        return cached
    if config.mode != GOODS:
        closure = frozenset()
    else:
        scratch = build_root_lp(structure, mode=config.mode)
        facts = set(_BASE_FACTS)
        if structure == CD:
            for first, second in _CD_PRELOAD:
                facts.add((first, second))
                _add_order_fact(scratch, structure, first, second, "ordx")
        if config.derive_order_facts:
            closure = frozenset(_derive_order_facts(scratch, structure, facts))
        else:
            closure = frozenset(_transitive_closure(facts))
    _CLOSURE_CACHE[key] = closure
    return closure


def _short_candidates(structure: str, allocation: tuple, mode: str) -> list:
    """Roles that could be the short agent in `allocation` (R, C, U order).

    Goods: a role whose bundle contains one of her own partition bundles is
    provably at her share or above, so she is exempt.  Chores: a role whose
    bundle is contained in one of her partition bundles is provably at her
    share or below."""
    roles = ("r", "c", "u")
    out = []
    for role, bundle in zip(roles, allocation):
        items = set(bundle)
        exempt = False
        for part in _ROLE_PARTITIONS[structure][role]:
            if mode == GOODS and set(part) <= items:
                exempt = True
                break
            if mode != GOODS and items <= set(part):
                exempt = True
                break
        if not exempt:
            out.append((role, tuple(sorted(items))))
    return out


# exemptions proved by LP stay valid forever: later models only shrink the
# relaxation, so cache them across rounds
_EXEMPTION_CACHE: set = set()


def _lp_exempt(model: MixedModel, structure: str, mode: str, role: str,
               items: tuple, stash: list) -> bool:
    """Prove that `role` can never be the short agent of this bundle: the
    minimum of her bundle value minus b over the current relaxation is
    nonnegative (goods; nonpositive for chores).  Feasible points seen
    earlier refute most non-exemptions without an LP solve."""
    key = (structure, mode, role, items)
    if key in _EXEMPTION_CACHE:
        return True
    sign = 1 if mode == GOODS else -1
    for point in stash:
        margin = sum(point[_var(role, p)] for p in items) - point["b"]
        if sign * margin < 0:
            return False
    coeffs = {_var(role, p): sign for p in items}
    coeffs["b"] = coeffs.get("b", 0) - sign
    probe = MixedModel(name="probe", continuous_vars=list(model.continuous_vars),
                       binary_vars=list(model.binary_vars),
                       constraints=list(model.constraints), objective={})
    probe.set_objective(coeffs)
    res = solve_lp_relaxation(probe)
    if res.status != STATUS_OPTIMAL:
        return False  # unbounded below: certainly not exempt
    if res.objective >= 0:
        _EXEMPTION_CACHE.add(key)
        return True
    stash.append(res.assignment)
    return False


def solve_lp_relaxation(model: MixedModel) -> SolveResult:
    """One LP solve of the model with every binary relaxed into [0, 1]."""
    from .solver import _solve_node_lp
    from .simplex import OPTIMAL as LP_OPTIMAL
    status, obj, assignment = _solve_node_lp(model, {}, ())
    mapped = STATUS_OPTIMAL if status == LP_OPTIMAL else status
    return SolveResult(status=mapped, objective=obj, assignment=assignment,
                       node_count=1)


def _allocation_signature(allocation: tuple) -> str:
    return "_".join("".join(str(p + 1) for p in sorted(bundle))
                    for bundle in allocation)


def _add_selected_allocation(model: MixedModel, structure: str, allocation: tuple,
                             config: MaxGapConfig, stash: Optional[list] = None) -> None:
    """Selected allocation constraint: some potentially-short agent gets at
    most b-1 (goods) / at least b+1 (chores) in this allocation.

    Candidates that provably meet their share in every point of the current
    relaxation (structural superset test, then an LP probe) are left out of
    the disjunction; with one candidate left the constraint needs no binary
    at all."""
    chores = config.mode != GOODS
    sig = _allocation_signature(allocation)
    shorts = _short_candidates(structure, allocation, config.mode)
    if config.lp_exemptions and stash is not None and len(shorts) > 1:
        kept = [(role, items) for role, items in shorts
                if not _lp_exempt(model, structure, config.mode, role, items, stash)]
        if kept:
            shorts = kept
    big_m = Fraction(config.big_m_alloc)
    if not shorts:
        raise ModelBuildError(
            f"allocation {sig}: every agent provably meets her share, so the "
            "structure class admits no negative example")

    def bundle_coeffs(role: str, items: tuple) -> dict:
        coeffs = {_var(role, p): 1 for p in items}
        coeffs["b"] = -1
        return coeffs

    def add_row(name: str, role: str, items: tuple, selector: Optional[str],
                selector_coef: Fraction, shift: Fraction) -> None:
        coeffs = bundle_coeffs(role, items)
        if selector is not None:
            coeffs[selector] = selector_coef
        if chores:
            model.add_constraint(name, coeffs, ">=", 1 - shift)
        else:
            model.add_constraint(name, coeffs, "<=", -1 + shift)

    if len(shorts) == 1:
        role, items = shorts[0]
        add_row(f"cut_{sig}", role, items, None, Fraction(0), Fraction(0))
        return
    if len(shorts) == 2:
        # one selection binary: 0 picks the first candidate, 1 the second
        s = model.add_binary(f"sel_{sig}")
        (role_a, items_a), (role_b, items_b) = shorts
        sign = -1 if chores else 1
        add_row(f"cut_{sig}_{role_a}", role_a, items_a, s, sign * big_m, big_m)
        add_row(f"cut_{sig}_{role_b}", role_b, items_b, s, -sign * big_m, Fraction(0))
        return
    cover = {}
    sign = -1 if chores else 1
    for role, items in shorts:
        y = model.add_binary(f"y_{sig}_{role}")
        cover[y] = 1
        add_row(f"cut_{sig}_{role}", role, items, y, sign * big_m, big_m)
    model.add_constraint(f"cover_{sig}", cover, ">=", 1)


@dataclass(frozen=True)
class MipMetadata:
    """Derived facts and binary bookkeeping attached to a built MIP."""

    structure: str
    order_facts: frozenset         # decided (first, second) pairs
    order_binaries: dict           # binary name -> (first, second); 1 = first precedes
    covered_allocations: tuple


def _build_mip(structure: str, config: MaxGapConfig):
    structure = _structure_key(structure)
    chores = config.mode != GOODS
    model = build_root_lp(structure, mode=config.mode)
    model.name = f"{structure}-mip-{config.mode}"

    closure = _order_closure(structure, config)
    order_binaries = {}
    if not chores:
        already = set(_BASE_FACTS)
        for first, second in sorted(closure):
            if (first, second) not in already:
                _add_order_fact(model, structure, first, second, "ordx")
        big_m = Fraction(config.big_m_order)
        for p, q in combinations(range(9), 2):
            if (p, q) in closure or (q, p) in closure:
                continue
            s = model.add_binary(f"ord_{p + 1}_{q + 1}")
            order_binaries[s] = (p, q)
            for role in ("r", "c", "u"):
                vp, vq = _var(role, p), _var(role, q)
                d_pq = _order_delta(structure, role, p, q)
                d_qp = _order_delta(structure, role, q, p)
                # s = 1: v(p) >= v(q) + d_pq;  s = 0: v(q) >= v(p) + d_qp
                model.add_constraint(f"sord_{role}{p + 1}{q + 1}_a",
                                     {vp: 1, vq: -1, s: -big_m}, ">=", d_pq - big_m)
                model.add_constraint(f"sord_{role}{p + 1}{q + 1}_b",
                                     {vq: 1, vp: -1, s: big_m}, ">=", d_qp)

    if config.bound_floor is not None:
        # sound across lazy rounds: adding rows can only raise the optimum
        model.add_constraint("bound_floor", {"b": 1}, ">=", config.bound_floor)

    stash: list = []
    for allocation in config.covered_allocations:
        _add_selected_allocation(model, structure, allocation, config, stash)
    meta = MipMetadata(structure=structure, order_facts=frozenset(closure),
                       order_binaries=dict(order_binaries),
                       covered_allocations=tuple(config.covered_allocations))
    return model, meta


def build_mip(structure: str, config: Optional[MaxGapConfig] = None) -> MixedModel:
    """The structured MIP: root LP plus selected order constraints for every
    undecided item pair and selected allocation constraints for every
    covered allocation in the config."""
    model, _ = _build_mip(structure, config or MaxGapConfig())
    return model


def order_propagator(meta: MipMetadata) -> Callable[[dict], Optional[dict]]:
    """Node-fixing propagator: closes fixed order binaries and decided facts
    under transitivity, fixing implied binaries and rejecting cyclic (hence
    unrealizable) orderings."""
    pair_of = meta.order_binaries
    name_of = {}
    for name, (p, q) in pair_of.items():
        name_of[(p, q)] = (name, 1)
        name_of[(q, p)] = (name, 0)
    base = frozenset(meta.order_facts)

    def propagate(fixed: dict) -> Optional[dict]:
        edges = set(base)
        for name, val in fixed.items():
            pq = pair_of.get(name)
            if pq is None:
                continue
            p, q = pq
            edges.add((p, q) if val == 1 else (q, p))
        closure = _transitive_closure(edges)
        if any((q, p) in closure for p, q in closure):
            return None  # cyclic ordering: no permutation realizes it
        out = dict(fixed)
        for pair, (name, val) in name_of.items():
            if pair in closure:
                existing = out.get(name)
                if existing is not None and existing != val:
                    return None
                out[name] = val
        return out

    return propagate


@dataclass(frozen=True)
class SearchResult:
    structure: str
    status: str                  # "verified" | "budget" | "failed"
    bound: Optional[Fraction]
    instance: Optional[Instance]
    rounds: int
    node_count: int
    covered_allocations: tuple
    message: str = ""

    def to_json_dict(self) -> dict:
        out = {
            "structure": self.structure,
            "status": self.status,
            "rounds": self.rounds,
            "node_count": self.node_count,
            "covered_allocations": [
                [list(b) for b in alloc] for alloc in self.covered_allocations
            ],
            "message": self.message,
        }
        if self.bound is not None:
            out["bound"] = fraction_to_str(self.bound)
        if self.instance is not None:
            from .model import emit_instance
            import json as _json
            out["instance"] = _json.loads(emit_instance(self.instance))
        return out


def _extract_instance(assignment: dict, mode: str) -> Instance:
    rows = []
    for role in ("r", "c", "u"):
        rows.append([assignment[_var(role, p)] for p in range(9)])
    return Instance.create(rows, mode=mode)


def _validate_big_m(instance: Instance, bound: Fraction, config: MaxGapConfig) -> None:
    values = [v for row in instance.values for v in row]
    spread = max(values) - min(values)
    if spread + 1 > config.big_m_order:
        raise BigMValidationError(
            f"item value spread {fraction_to_str(spread)} defeats the order "
            f"big-M of {config.big_m_order}")
    for i in range(instance.n):
        total = instance.agent_total(i)
        if total - (bound - 1) > config.big_m_alloc:
            raise BigMValidationError(
                f"agent {i} total {fraction_to_str(total)} defeats the allocation "
                f"big-M of {config.big_m_alloc} at b={fraction_to_str(bound)}")


def _find_violations(instance: Instance, bound: Fraction, mode: str, cap: int) -> list:
    """Allocations in which every agent strictly beats `bound` (goods) or
    strictly stays below it (chores).  All violations are enumerated; the
    `cap` strongest (largest margin past the bound, then lexicographic) are
    returned.  An empty list is an exhaustive confirmation."""
    from .model import bundle_value
    collected = []
    chores = mode != GOODS

    def visitor(allocation):
        values = [bundle_value(instance, i, allocation[i]) for i in range(instance.n)]
        margin = (bound - max(values)) if chores else (min(values) - bound)
        collected.append((margin, tuple(tuple(sorted(b)) for b in allocation)))
        return False

    enumerate_allocations(instance, visitor, thresholds=[bound] * instance.n,
                          strict=True)
    collected.sort(key=lambda entry: (-entry[0], entry[1]))
    return [alloc for _, alloc in collected[:cap]]


def search_max_gap(
    structure: str,
    budget: Optional[SolveBudget] = None,
    config: Optional[MaxGapConfig] = None,
    log: Optional[Callable[[dict], None]] = None,
):
    """Lazy loop: solve the structured MIP, extract the candidate instance,
    verify it exhaustively, and turn every violating allocation into a new
    selected allocation constraint until the candidate verifies.

    Returns a SearchResult whose instance (when status is "verified") is a
    checked negative example where every share equals the returned bound
    and every allocation leaves some agent a full unit short of it.
    """
    structure = _structure_key(structure)
    config = config or MaxGapConfig()
    budget = budget or SolveBudget()
    covered = list(config.covered_allocations)
    total_nodes = 0
    bound_hint = 1 if config.mode == GOODS else -1
    floor = config.bound_floor

    for rounds in range(1, config.max_rounds + 1):
        round_config = replace(config, covered_allocations=tuple(covered),
                               bound_floor=floor)
        model, meta = _build_mip(structure, round_config)
        result = solve(model, budget, propagator=order_propagator(meta), log=log)
        total_nodes += result.node_count
        if result.status != STATUS_OPTIMAL:
            return SearchResult(
                structure=structure, status="budget" if result.status == "budget" else "failed",
                bound=result.best_bound if result.best_bound is not None else result.objective,
                instance=None, rounds=rounds, node_count=total_nodes,
                covered_allocations=tuple(covered),
                message=f"solver returned {result.status}")
        b = result.objective
        assignment = result.assignment
        values_integral = all(
            assignment[v].denominator == 1
            for v in model.continuous_vars
        )
        if not values_integral:
            result = solve(model, budget, propagator=order_propagator(meta),
                           integral_continuous=True, log=log)
            total_nodes += result.node_count
            if result.status != STATUS_OPTIMAL or result.objective != b:
                return SearchResult(
                    structure=structure, status="failed", bound=b, instance=None,
                    rounds=rounds, node_count=total_nodes,
                    covered_allocations=tuple(covered),
                    message="no integer-valued witness at the fractional optimum")
            assignment = result.assignment
        instance = _extract_instance(assignment, config.mode)
        _validate_big_m(instance, b, round_config)
        verify_bound = b - bound_hint
        violations = _find_violations(instance, verify_bound, config.mode,
                                      round_config.max_cuts_per_round)
        if log is not None:
            log({"event": "round", "round": rounds, "objective": str(b),
                 "violations": len(violations)})
        if not violations:
            shares = [mms(instance, i).value for i in range(3)]
            if any(share != b for share in shares):
                return SearchResult(
                    structure=structure, status="failed", bound=b, instance=instance,
                    rounds=rounds, node_count=total_nodes,
                    covered_allocations=tuple(covered),
                    message="candidate shares "
                            f"{[fraction_to_str(s) for s in shares]} differ from "
                            f"objective {fraction_to_str(b)}")
            return SearchResult(
                structure=structure, status="verified", bound=b, instance=instance,
                rounds=rounds, node_count=total_nodes,
                covered_allocations=tuple(covered))
        floor = b if floor is None else max(floor, b)
        known = set(covered)
        for violation in violations:
            if violation not in known:
                known.add(violation)
                covered.append(violation)
                if log is not None:
                    log({"event": "cut", "allocation": _allocation_signature(violation)})
    return SearchResult(
        structure=structure, status="failed", bound=None, instance=None,
        rounds=config.max_rounds, node_count=total_nodes,
        covered_allocations=tuple(covered),
        message="round limit reached before verification succeeded")


__all__ = [
    "PD", "CD", "MaxGapConfig", "MipMetadata", "SearchResult",
    "build_root_lp", "build_mip", "order_propagator", "search_max_gap",
    "solve", "SolveBudget", "SolveResult", "emit_lp_file",
    "ModelBuildError", "BigMValidationError",
]
