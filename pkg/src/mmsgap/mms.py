"""Exact MMS computation, allocation enumeration, gap computation, and
negative-example verification for goods and chores.

The maximin share of an agent is computed by a subset dynamic program over
item bitmasks: f(S, k) is the best value achievable by splitting the item
set S into k bundles (max of min bundle value for goods, min of max bundle
dis-utility for chores).  Integer-valued instances run on an int64 numpy
backend (min/max/add only, overflow-checked, hence still exact); everything
else falls back to the same recursion over `Fraction` values.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Optional

import numpy as np

from .model import (
    Allocation,
    Bundle,
    CapacityError,
    CertificateError,
    GOODS,
    Instance,
    MMSCertificate,
    fraction_to_str,
)

DEFAULT_MAX_ITEMS = 24
DEFAULT_ENUM_BUDGET = 10_000_000

# numpy backend limits: the (S, T, S\T) triple table is cached per item
# count; 3^m/2 entries make m = 13 the practical ceiling (about 10 MB).
_NUMPY_MAX_M = 13
_INT64_SAFE_TOTAL = 1 << 60

_TRIPLES_CACHE: dict = {}


def _triples(m: int):
    """All (S, T, S^T) with T a submask of S containing S's lowest set bit.

    Restricting T to contain the lowest bit of S makes every k-partition of
    S correspond to exactly one recursion path (the bundle of the lowest
    item is chosen first).
    """
    cached = _TRIPLES_CACHE.get(m)
    if cached is not None:
        return cached
    s_list, t_list, c_list = [], [], []
    for S in range(1, 1 << m):
        low = S & -S
        rest = S ^ low
        U = 0
        while True:
            T = low | U
            s_list.append(S)
            t_list.append(T)
            c_list.append(S ^ T)
            if U == rest:
                break
            U = (U - rest) & rest
    out = (
        np.array(s_list, dtype=np.int32),
        np.array(t_list, dtype=np.int32),
        np.array(c_list, dtype=np.int32),
    )
    _TRIPLES_CACHE[m] = out
    return out


def _subset_sums_int(values: list, m: int) -> np.ndarray:
    sums = np.zeros(1 << m, dtype=np.int64)
    for b in range(m):
        step = 1 << b
        view = sums.reshape(-1, 2 * step)
        view[:, step:] = view[:, :step] + values[b]
    return sums


def _subset_sums_frac(values: list, m: int) -> list:
    sums = [Fraction(0)] * (1 << m)
    for S in range(1, 1 << m):
        low = S & -S
        sums[S] = sums[S ^ low] + values[low.bit_length() - 1]
    return sums


def _dp_layers_int(values: list, n: int, m: int, chores: bool):
    """f_1 .. f_{n-1} tables plus the optimum f_n(full), on int64 arrays."""
    sums = _subset_sums_int(values, m)
    Sa, Ta, Ca = _triples(m)
    sentinel = np.iinfo(np.int64).max // 4
    layers = [None, sums]
    prev = sums
    for _ in range(2, n):
        combined = (
            np.maximum(sums[Ta], prev[Ca]) if chores else np.minimum(sums[Ta], prev[Ca])
        )
        if chores:
            cur = np.full(1 << m, sentinel, dtype=np.int64)
            np.minimum.at(cur, Sa, combined)
            cur[0] = 0
        else:
            cur = np.zeros(1 << m, dtype=np.int64)
            np.maximum.at(cur, Sa, combined)
        layers.append(cur)
        prev = cur
    full = (1 << m) - 1
    if n == 1:
        top = int(sums[full])
    else:
        odd = np.arange(1, 1 << m, 2, dtype=np.int64)  # masks containing item 0
        comp = full ^ odd
        if chores:
            top = int(np.maximum(sums[odd], prev[comp]).min())
        else:
            top = int(np.minimum(sums[odd], prev[comp]).max())
    return [layer if layer is None else layer.tolist() for layer in layers], top


def _dp_layers_frac(values: list, n: int, m: int, chores: bool):
    sums = _subset_sums_frac(values, m)
    layers = [None, sums]
    prev = sums
    for _ in range(2, n):
        cur = [None] * (1 << m)
        cur[0] = Fraction(0)
        for S in range(1, 1 << m):
            low = S & -S
            rest = S ^ low
            best = None
            U = 0
            while True:
                T = low | U
                a, b = sums[T], prev[S ^ T]
                x = max(a, b) if chores else min(a, b)
                if best is None or (x < best if chores else x > best):
                    best = x
                if U == rest:
                    break
                U = (U - rest) & rest
            cur[S] = best
        layers.append(cur)
        prev = cur
    full = (1 << m) - 1
    if n == 1:
        top = sums[full]
    else:
        best = None
        for T in range(1, full + 1, 2):
            a, b = sums[T], prev[full ^ T]
            x = max(a, b) if chores else min(a, b)
            if best is None or (x < best if chores else x > best):
                best = x
        top = best
    return layers, top


def _extract_witness(sums, layers, n: int, m: int, target, chores: bool) -> list:
    """Greedy bundle-by-bundle extraction of an optimal partition.

    Bundles are chosen for the lowest unassigned item, trying candidate
    bitmasks in ascending numeric order; a candidate is kept only if the DP
    tables certify the remainder can still be completed.  Deterministic for
    a given instance.
    """

    def bundle_ok(val) -> bool:
        return val <= target if chores else val >= target

    masks = []
    S = (1 << m) - 1
    for k in range(n, 1, -1):
        if S == 0:
            masks.append(0)
            continue
        rest_table = layers[k - 1]
        low = S & -S
        rest = S ^ low
        chosen = None
        U = 0
        while True:
            B = low | U
            if bundle_ok(sums[B]) and bundle_ok(rest_table[S ^ B]):
                chosen = B
                break
            if U == rest:
                break
            U = (U - rest) & rest
        if chosen is None:  # cannot happen when target == f_n(full)
            raise AssertionError("witness extraction failed; DP tables inconsistent")
        masks.append(chosen)
        S ^= chosen
    masks.append(S)
    return sorted(masks)


def _mask_to_bundle(mask: int) -> Bundle:
    items = []
    while mask:
        low = mask & -mask
        items.append(low.bit_length() - 1)
        mask ^= low
    return frozenset(items)


def mms(instance: Instance, agent: int, max_items: int = DEFAULT_MAX_ITEMS) -> MMSCertificate:
    """Maximin share of `agent`, with a witnessing n-partition.

    Goods: max over n-partitions of the min bundle value.  Chores: min over
    n-partitions of the max bundle dis-utility.  The witness partition is
    returned with bundles sorted by bitmask, chosen deterministically.

    The subset DP touches all 2^m item subsets, so m is capped (default 24;
    beyond ~14 items expect long runtimes).  For larger instances use
    `enumerate_allocations` with pruning thresholds instead.
    """
    if not (0 <= agent < instance.n):
        raise ValueError(f"agent index {agent} out of range 0..{instance.n - 1}")
    n, m = instance.n, instance.m
    if m > max_items:
        raise CapacityError(
            f"m={m} exceeds the subset-DP bound of {max_items} items; "
            "use enumerate_allocations with pruning thresholds for large instances")
    chores = instance.mode != GOODS
    if m == 0:
        empty = tuple(frozenset() for _ in range(n))
        return MMSCertificate(agent=agent, value=Fraction(0), partition=empty)
    row = instance.values[agent]
    total = sum(row, Fraction(0))
    use_int = (
        m <= _NUMPY_MAX_M
        and all(v.denominator == 1 for v in row)
        and total < _INT64_SAFE_TOTAL
    )
    if use_int:
        layers, top = _dp_layers_int([int(v) for v in row], n, m, chores)
        value = Fraction(top)
    else:
        layers, top = _dp_layers_frac(list(row), n, m, chores)
        value = top
    masks = _extract_witness(layers[1], layers, n, m, top, chores)
    partition = tuple(_mask_to_bundle(mask) for mask in masks)
    return MMSCertificate(agent=agent, value=value, partition=partition)


def mms_values(instance: Instance, max_items: int = DEFAULT_MAX_ITEMS) -> list:
    return [mms(instance, i, max_items=max_items).value for i in range(instance.n)]


def identical_agent_groups(instance: Instance) -> list:
    """Groups of agent indices sharing a valuation row, in index order."""
    seen: dict = {}
    for i, row in enumerate(instance.values):
        seen.setdefault(row, []).append(i)
    return list(seen.values())


def _dfs_order(instance: Instance) -> list:
    """Items ordered by decreasing maximum value across agents (stronger
    early pruning bounds), ties by index."""
    return sorted(
        range(instance.m),
        key=lambda j: (-max(instance.values[i][j] for i in range(instance.n)), j),
    )


def _numeric_rows(instance: Instance, order: list) -> list:
    """Per-agent value lists in DFS order, as native ints when possible."""
    if instance.is_integral():
        return [[int(instance.values[i][j]) for j in order] for i in range(instance.n)]
    return [[instance.values[i][j] for j in order] for i in range(instance.n)]


def enumerate_allocations(
    instance: Instance,
    visitor: Optional[Callable[[Allocation], object]] = None,
    *,
    thresholds: Optional[list] = None,
    strict: bool = False,
    symmetry: bool = False,
    max_leaves: int = DEFAULT_ENUM_BUDGET,
    max_nodes: Optional[int] = None,
) -> int:
    """Visit complete allocations of `instance`, returning the visit count.

    Without thresholds every one of the n^m assignments is visited (guarded
    by `max_leaves`).  With per-agent `thresholds`, branch-and-bound pruning
    applies and only allocations meeting every agent's threshold are
    visited: goods mode requires v_i(A_i) >= t_i (or > t_i when `strict`),
    chores mode requires v_i(A_i) <= t_i (or < t_i when `strict`).

    A partial assignment is cut when some agent can no longer meet her
    threshold (goods: current value plus all unassigned items falls short;
    chores: current dis-utility already exceeds), plus an aggregate bound:
    the total outstanding deficit must be coverable by the remaining items,
    each counted at its most favourable agent value.

    `symmetry=True` skips permutations of agents with identical valuation
    rows: within such a group, an agent may receive her first item only
    after the previous group member has received one.

    The visitor may return a truthy value to stop the enumeration early.
    """
    n, m = instance.n, instance.m
    if thresholds is None:
        if n ** m > max_leaves:
            raise CapacityError(
                f"{n}^{m} allocations exceed the enumeration budget of {max_leaves}; "
                "supply pruning thresholds")
    elif len(thresholds) != n:
        raise ValueError(f"expected {n} thresholds, got {len(thresholds)}")

    order = _dfs_order(instance)
    chores = instance.mode != GOODS
    vals = _numeric_rows(instance, order)
    if thresholds is not None:
        thresholds = [Fraction(t) for t in thresholds]
        if instance.is_integral() and all(t.denominator == 1 for t in thresholds):
            thresholds = [int(t) for t in thresholds]

    zero = 0
    suffix_sums = [[zero] * (m + 1) for _ in range(n)]
    for i in range(n):
        acc = zero
        for d in range(m - 1, -1, -1):
            acc = acc + vals[i][d]
            suffix_sums[i][d] = acc
    env = [zero] * (m + 1)       # goods: max-envelope of remaining items
    floor_env = [zero] * (m + 1)  # chores: min-envelope of remaining items
    for d in range(m - 1, -1, -1):
        env[d] = env[d + 1] + max(vals[i][d] for i in range(n))
        floor_env[d] = floor_env[d + 1] + min(vals[i][d] for i in range(n))

    group_prev = [None] * n  # predecessor agent within an identical group
    if symmetry:
        for group in identical_agent_groups(instance):
            for a, b in zip(group, group[1:]):
                group_prev[b] = a

    cur = [zero] * n
    bundles = [[] for _ in range(n)]
    count = 0
    nodes = 0

    def visit_leaf() -> bool:
        nonlocal count
        if thresholds is not None:
            for i in range(n):
                v, t = cur[i], thresholds[i]
                if chores:
                    if (v >= t) if strict else (v > t):
                        return False
                else:
                    if (v <= t) if strict else (v < t):
                        return False
        count += 1
        if visitor is not None:
            allocation = tuple(frozenset(b) for b in bundles)
            if visitor(allocation):
                return True
        return False

    def prune(d: int) -> bool:
        if chores:
            headroom = zero
            for i in range(n):
                c, t = cur[i], thresholds[i]
                if (c >= t) if strict else (c > t):
                    return True
                headroom = headroom + (t - c)
            floor = floor_env[d]
            if (headroom <= floor) if strict else (headroom < floor):
                return True
        else:
            deficit = zero
            for i in range(n):
                reach = cur[i] + suffix_sums[i][d]
                t = thresholds[i]
                if (reach <= t) if strict else (reach < t):
                    return True
                need = t - cur[i]
                if need > 0:
                    deficit = deficit + need
            e = env[d]
            if e < deficit or (strict and deficit > 0 and e == deficit):
                return True
        return False

    def rec(d: int) -> bool:
        nonlocal nodes
        nodes += 1
        if max_nodes is not None and nodes > max_nodes:
            raise CapacityError(f"enumeration exceeded the node budget of {max_nodes}")
        if d == m:
            return visit_leaf()
        if thresholds is not None and prune(d):
            return False
        for agent in range(n):
            prev = group_prev[agent]
            if prev is not None and not bundles[prev]:
                continue  # canonical representative under agent symmetry
            cur[agent] = cur[agent] + vals[agent][d]
            bundles[agent].append(order[d])
            stop = rec(d + 1)
            bundles[agent].pop()
            cur[agent] = cur[agent] - vals[agent][d]
            if stop:
                return True
        return False

    rec(0)
    return count


@dataclass(frozen=True)
class GapReport:
    """Result of an exhaustive gap computation.

    Goods: `best_min_fraction` is the max over allocations of the min over
    agents of v_i(A_i)/MMS_i and gap = max(0, 1 - best_min_fraction).
    Chores: `worst_max_fraction` is the min over allocations of the max
    agent dis-utility fraction and gap = max(0, worst_max_fraction - 1).
    Agents with MMS = 0 contribute a fraction of exactly 1.
    """

    mode: str
    per_agent_mms: tuple
    best_allocation: Allocation
    best_min_fraction: Optional[Fraction]
    worst_max_fraction: Optional[Fraction]
    gap: Fraction

    def to_json_dict(self) -> dict:
        out = {
            "mode": self.mode,
            "per_agent_mms": [fraction_to_str(v) for v in self.per_agent_mms],
            "best_allocation": [sorted(b) for b in self.best_allocation],
            "gap": fraction_to_str(self.gap),
        }
        if self.best_min_fraction is not None:
            out["best_min_fraction"] = fraction_to_str(self.best_min_fraction)
        if self.worst_max_fraction is not None:
            out["worst_max_fraction"] = fraction_to_str(self.worst_max_fraction)
        return out


def gap(instance: Instance, *, max_leaves: int = DEFAULT_ENUM_BUDGET,
        max_items: int = DEFAULT_MAX_ITEMS) -> GapReport:
    """Exact MMS gap of an instance by exhaustive allocation search.

    Enumerates allocations depth-first with branch-and-bound pruning on the
    extremal fraction; ties are broken by keeping the first optimum in the
    (deterministic) enumeration order, so output is bit-stable across runs.
    Fractions are compared by cross-multiplication, never evaluated in
    floating point.
    """
    n, m = instance.n, instance.m
    if n ** m > max_leaves:
        raise CapacityError(
            f"{n}^{m} allocations exceed the enumeration budget of {max_leaves}")
    mms_list = [mms(instance, i, max_items=max_items).value for i in range(n)]
    chores = instance.mode != GOODS

    order = _dfs_order(instance)
    vals = _numeric_rows(instance, order)
    integral = instance.is_integral() and all(v.denominator == 1 for v in mms_list)
    mms_cmp = [int(v) if integral else v for v in mms_list]

    zero = 0
    suffix = [[zero] * (m + 1) for _ in range(n)]
    for i in range(n):
        acc = zero
        for d in range(m - 1, -1, -1):
            acc = acc + vals[i][d]
            suffix[i][d] = acc

    nz = [i for i in range(n) if mms_cmp[i] != 0]
    has_zero = len(nz) < n

    cur = [zero] * n
    bundles = [[] for _ in range(n)]
    best = [None, None]  # (numerator, denominator) of the incumbent fraction
    best_alloc = [None]

    def leaf_fraction():
        num = den = None
        for i in nz:
            c_num, c_den = cur[i], mms_cmp[i]
            if num is None:
                num, den = c_num, c_den
            elif chores:
                if c_num * den > num * c_den:   # new max
                    num, den = c_num, c_den
            else:
                if c_num * den < num * c_den:   # new min
                    num, den = c_num, c_den
        if num is None:
            return 1, 1
        if has_zero:
            if chores and num < den:       # max with the constant fraction 1
                return 1, 1
            if not chores and num > den:   # min with the constant fraction 1
                return 1, 1
        return num, den

    def rec(d: int):
        if d == m:
            num, den = leaf_fraction()
            if best[0] is None or (
                num * best[1] < best[0] * den if chores else num * best[1] > best[0] * den
            ):
                best[0], best[1] = num, den
                best_alloc[0] = tuple(frozenset(b) for b in bundles)
            return
        if best[0] is not None:
            if chores:
                # each agent's fraction only grows, so the max is bounded below
                for i in nz:
                    if cur[i] * best[1] >= best[0] * mms_cmp[i]:
                        return
            else:
                b_num, b_den = None, None
                for i in nz:
                    u_num = cur[i] + suffix[i][d]
                    u_den = mms_cmp[i]
                    if b_num is None or u_num * b_den < b_num * u_den:
                        b_num, b_den = u_num, u_den
                if b_num is not None and b_num * best[1] <= best[0] * b_den:
                    return
        for agent in range(n):
            cur[agent] = cur[agent] + vals[agent][d]
            bundles[agent].append(order[d])
            rec(d + 1)
            bundles[agent].pop()
            cur[agent] = cur[agent] - vals[agent][d]

    rec(0)
    extremal = Fraction(best[0]) / Fraction(best[1])
    if chores:
        gap_value = max(Fraction(0), extremal - 1)
        return GapReport(mode=instance.mode, per_agent_mms=tuple(mms_list),
                         best_allocation=best_alloc[0], best_min_fraction=None,
                         worst_max_fraction=extremal, gap=gap_value)
    gap_value = max(Fraction(0), Fraction(1) - extremal)
    return GapReport(mode=instance.mode, per_agent_mms=tuple(mms_list),
                     best_allocation=best_alloc[0], best_min_fraction=extremal,
                     worst_max_fraction=None, gap=gap_value)


@dataclass(frozen=True)
class NegativeCheck:
    """Outcome of verify_negative: either a confirmation that the bound holds
    in every allocation, or a violating allocation."""

    confirmed: bool
    bound: Fraction
    counterexample: Optional[Allocation]
    checked: int

    def to_json_dict(self) -> dict:
        out = {"confirmed": self.confirmed, "bound": fraction_to_str(self.bound),
               "checked": self.checked}
        if self.counterexample is not None:
            out["counterexample"] = [sorted(b) for b in self.counterexample]
        return out


def verify_negative(
    instance: Instance,
    claimed_mms: Iterable,
    bound,
    *,
    symmetry: bool = False,
    max_nodes: Optional[int] = None,
    max_items: int = DEFAULT_MAX_ITEMS,
) -> NegativeCheck:
    """Check the negative-example property against an exhaustive search.

    Goods: confirms that every allocation leaves some agent with value at
    most `bound`, or returns an allocation in which every agent gets
    strictly more.  Chores: confirms every allocation gives some agent
    dis-utility at least `bound`, or returns an allocation where everyone
    stays strictly below.

    `claimed_mms` must match the recomputed MMS of every agent; a mismatch
    raises CertificateError naming the offending agent.
    """
    claimed = [Fraction(v) for v in claimed_mms]
    if len(claimed) != instance.n:
        raise CertificateError(f"expected {instance.n} claimed MMS values, got {len(claimed)}")
    for i in range(instance.n):
        actual = mms(instance, i, max_items=max_items).value
        if actual != claimed[i]:
            raise CertificateError(
                f"agent {i}: claimed MMS {fraction_to_str(claimed[i])} "
                f"but computed {fraction_to_str(actual)}")
    bound = Fraction(bound)
    found = []

    def visitor(allocation):
        found.append(allocation)
        return True  # stop at the first counterexample

    checked = enumerate_allocations(
        instance,
        visitor,
        thresholds=[bound] * instance.n,
        strict=True,
        symmetry=symmetry,
        max_nodes=max_nodes,
    )
    if found:
        return NegativeCheck(confirmed=False, bound=bound,
                             counterexample=found[0], checked=checked)
    return NegativeCheck(confirmed=True, bound=bound, counterexample=None, checked=checked)
