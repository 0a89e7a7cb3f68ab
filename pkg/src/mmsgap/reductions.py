"""Instance-simplification machinery: ordered versions, allocation
lift-back, item/agent removal steps, and a verified searcher for complete
MMS allocations on small instances.

The removal steps never decrease a remaining agent's MMS (item+agent
removal unconditionally; pair+agent removal under the documented
hypotheses), which is what makes the preprocessing in
`find_mms_allocation_small` sound.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .model import Allocation, Bundle, GOODS, Instance, bundle_value
from .mms import enumerate_allocations, mms


@dataclass(frozen=True)
class OrderedInstance:
    """An instance whose per-agent values are non-increasing in item index,
    together with the original instance and, per agent, the permutation
    mapping ordered positions back to original items."""

    instance: Instance
    original: Instance
    per_agent_permutation: tuple

    def original_value(self, agent: int, original_item: int) -> Fraction:
        return self.original.values[agent][original_item]


def ordered_version(instance: Instance) -> OrderedInstance:
    """Sort each agent's item values into non-increasing order.

    The sort is stable (ties keep ascending original index), so an
    already-ordered instance gets identity permutations.  Each agent's MMS
    is unchanged: her value multiset is.
    """
    if instance.mode != GOODS:
        raise ValueError("ordered versions are defined for goods instances only")
    perms = []
    rows = []
    for i in range(instance.n):
        row = instance.values[i]
        perm = sorted(range(instance.m), key=lambda j: (-row[j], j))
        perms.append(tuple(perm))
        rows.append(tuple(row[j] for j in perm))
    ordered = Instance(n=instance.n, m=instance.m, values=tuple(rows), mode=GOODS)
    return OrderedInstance(instance=ordered, original=instance,
                           per_agent_permutation=tuple(perms))


def lift_allocation(ordered: OrderedInstance, allocation_on_ordered: Allocation) -> Allocation:
    """Transform an allocation of the ordered instance into one of the
    original instance via a choosing sequence.

    Ordered items are handed out from most valuable to least; at each step
    the agent holding that ordered item picks her highest-valued original
    item still available (ties: lowest original index).  Every agent ends
    up with at least the utility her ordered bundle gave her.
    """
    inst = ordered.original
    n, m = inst.n, inst.m
    if len(allocation_on_ordered) != n:
        raise ValueError(f"allocation has {len(allocation_on_ordered)} bundles for {n} agents")
    owner = [None] * m
    for agent, bundle in enumerate(allocation_on_ordered):
        for pos in bundle:
            if not (0 <= pos < m):
                raise ValueError(f"ordered item index {pos} out of range")
            if owner[pos] is not None:
                raise ValueError(f"ordered item {pos} assigned twice")
            owner[pos] = agent
    if any(o is None for o in owner):
        raise ValueError("allocation does not cover all ordered items")

    remaining = set(range(m))
    lifted = [[] for _ in range(n)]
    for pos in range(m):  # ordered index = global rank, most valuable first
        agent = owner[pos]
        row = inst.values[agent]
        pick = min(remaining, key=lambda e: (-row[e], e))
        remaining.remove(pick)
        lifted[agent].append(pick)
    return tuple(frozenset(b) for b in lifted)


def _drop_agent_items(instance: Instance, agent: int, items: set) -> Instance:
    keep_items = [j for j in range(instance.m) if j not in items]
    rows = tuple(
        tuple(instance.values[i][j] for j in keep_items)
        for i in range(instance.n) if i != agent
    )
    return Instance(n=instance.n - 1, m=len(keep_items), values=rows, mode=instance.mode)


def reduce_item_agent(instance: Instance, agent: int, item: int) -> Instance:
    """Remove one item and one agent.  Every remaining agent's MMS does not
    decrease (merge the removed item's bundle with any other)."""
    if instance.n <= 1:
        raise ValueError("cannot remove an agent from a single-agent instance")
    if not (0 <= agent < instance.n):
        raise ValueError(f"agent index {agent} out of range")
    if not (0 <= item < instance.m):
        raise ValueError(f"item index {item} out of range")
    return _drop_agent_items(instance, agent, {item})


def reduce_pair_agent(instance: Instance, agent: int, item_a: int, item_b: int) -> Instance:
    """Remove two items and one agent.

    MMS monotonicity for a remaining agent q is guaranteed when either both
    items share a bundle of an MMS_q partition or v_q(a) + v_q(b) <= MMS_q;
    the hypothesis is the caller's responsibility and is not checked here.
    """
    if instance.n <= 1:
        raise ValueError("cannot remove an agent from a single-agent instance")
    if item_a == item_b:
        raise ValueError("the two removed items must be distinct")
    for item in (item_a, item_b):
        if not (0 <= item < instance.m):
            raise ValueError(f"item index {item} out of range")
    if not (0 <= agent < instance.n):
        raise ValueError(f"agent index {agent} out of range")
    return _drop_agent_items(instance, agent, {item_a, item_b})


def _pair_reduction_applies(instance: Instance, certs: list, q: int, pair: tuple) -> bool:
    """Check the bundle-dominance conditions for removing `pair` with agent q:
    every other agent must see the pair as small, directly dominated, or
    indirectly dominated relative to her witness MMS partition."""
    a, b = pair
    for j in range(instance.n):
        if j == q:
            continue
        v_pair = instance.values[j][a] + instance.values[j][b]
        if v_pair <= certs[j].value:
            continue  # small
        partition = certs[j].partition
        if any(a in bundle and b in bundle for bundle in partition):
            continue  # directly dominated
        indirect = False
        for bundle in partition:
            inter = (a in bundle) + (b in bundle)
            if inter == 1 and bundle_value(instance, j, bundle) >= v_pair:
                indirect = True
                break
        if indirect:
            continue
        return False
    return True


def _exhaustive_mms_allocation(instance: Instance, thresholds: list,
                               max_nodes: Optional[int]) -> Optional[Allocation]:
    found = []

    def visitor(allocation):
        found.append(allocation)
        return True

    enumerate_allocations(instance, visitor, thresholds=thresholds,
                          strict=False, max_nodes=max_nodes)
    return found[0] if found else None


def find_mms_allocation_small(instance: Instance,
                              max_nodes: Optional[int] = None) -> Optional[Allocation]:
    """Search for an allocation giving every agent at least her MMS (goods).

    Preprocessing first strips an (agent, item) pair when some agent values
    a single item at or above her MMS, then an (agent, item-pair) when the
    dominance conditions let both removals preserve the remaining MMS
    values; the reduced instance is solved recursively and the removed
    bundle glued back.  If no reduction applies (or a recursive search
    comes back empty), an exhaustive threshold search over the original
    instance decides; None is returned only after that search confirms no
    complete MMS allocation exists.
    """
    if instance.mode != GOODS:
        raise ValueError("the MMS-allocation search handles goods instances only")
    n, m = instance.n, instance.m
    if n == 1:
        return (instance.all_items(),)
    certs = [mms(instance, i) for i in range(n)]
    if n == 2:
        # cut and choose: split by agent 0's witness, let agent 1 pick
        b0, b1 = certs[0].partition
        if bundle_value(instance, 1, b1) >= bundle_value(instance, 1, b0):
            return (b0, b1)
        return (b1, b0)

    glue = _try_reductions(instance, certs, max_nodes)
    if glue is not None:
        return glue
    thresholds = [cert.value for cert in certs]
    return _exhaustive_mms_allocation(instance, thresholds, max_nodes)


def _glue(instance: Instance, agent: int, items: set,
          sub_allocation: Allocation) -> Allocation:
    keep_items = [j for j in range(instance.m) if j not in items]
    keep_agents = [i for i in range(instance.n) if i != agent]
    bundles = [None] * instance.n
    bundles[agent] = frozenset(items)
    for k, i in enumerate(keep_agents):
        bundles[i] = frozenset(keep_items[j] for j in sub_allocation[k])
    return tuple(bundles)


def _try_reductions(instance: Instance, certs: list,
                    max_nodes: Optional[int]) -> Optional[Allocation]:
    n, m = instance.n, instance.m
    # single item worth a full share to someone
    for i in range(n):
        for e in range(m):
            if instance.values[i][e] >= certs[i].value:
                sub = reduce_item_agent(instance, i, e)
                sub_alloc = find_mms_allocation_small(sub, max_nodes=max_nodes)
                if sub_alloc is None:
                    return None  # fall back to exhaustive search on the original
                return _glue(instance, i, {e}, sub_alloc)
    # dominated two-item bundle
    for q in range(n):
        row = instance.values[q]
        for a in range(m):
            for b in range(a + 1, m):
                if row[a] + row[b] < certs[q].value:
                    continue
                if _pair_reduction_applies(instance, certs, q, (a, b)):
                    sub = reduce_pair_agent(instance, q, a, b)
                    sub_alloc = find_mms_allocation_small(sub, max_nodes=max_nodes)
                    if sub_alloc is None:
                        return None
                    return _glue(instance, q, {a, b}, sub_alloc)
    return None
