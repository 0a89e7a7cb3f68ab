"""Core domain types for fair-division instances with exact rational arithmetic.

Everything downstream (MMS computation, gap search, LP/MIP solving) works on
the types defined here.  All numeric values are `fractions.Fraction`; no
floating point appears anywhere in the computation path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Union

# All values, MMS results and LP coefficients share one scalar type: the
# stdlib arbitrary-precision rational, which is always kept in lowest terms
# with a positive denominator.
ExactNumber = Fraction

GOODS = "goods"
CHORES = "chores"

#: An item subset, as a frozenset of 0-based item indices.
Bundle = frozenset

#: An ordered n-tuple of pairwise disjoint bundles covering all items.
Allocation = tuple


class ParseError(ValueError):
    """Raised when an instance document is malformed."""


class CapacityError(RuntimeError):
    """Raised when an exact computation would exceed its configured budget."""


class CertificateError(ValueError):
    """Raised when a claimed certificate (e.g. an MMS vector) does not check out."""


def _to_exact(x: Union[int, str, Fraction]) -> Fraction:
    """Convert an int, Fraction, or "p/q" string to an ExactNumber.

    Floats are rejected: they would silently break exactness.
    """
    if isinstance(x, bool):
        raise ParseError(f"boolean is not a valid value: {x!r}")
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    if isinstance(x, str):
        try:
            return Fraction(x)
        except (ValueError, ZeroDivisionError) as exc:
            raise ParseError(f"cannot parse exact value from {x!r}: {exc}") from exc
    raise ParseError(f"unsupported value type {type(x).__name__}: {x!r} "
                     "(use integers or 'p/q' strings; floats are not exact)")


@dataclass(frozen=True)
class Instance:
    """An additive-valuation allocation instance.

    `values[i][j]` is agent i's value (goods) or dis-utility (chores) for
    item j.  Both modes store non-negative numbers; the mode flag decides
    the interpretation.
    """

    n: int
    m: int
    values: tuple
    mode: str = GOODS

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one agent, got n={self.n}")
        if self.m < 0:
            raise ValueError(f"negative item count m={self.m}")
        if self.mode not in (GOODS, CHORES):
            raise ValueError(f"mode must be {GOODS!r} or {CHORES!r}, got {self.mode!r}")
        if len(self.values) != self.n:
            raise ValueError(f"expected {self.n} valuation rows, got {len(self.values)}")
        for i, row in enumerate(self.values):
            if len(row) != self.m:
                raise ValueError(f"agent {i}: expected {self.m} values, got {len(row)}")
            for j, v in enumerate(row):
                if not isinstance(v, Fraction):
                    raise ValueError(f"agent {i}, item {j}: value {v!r} is not exact")
                if v < 0:
                    raise ValueError(f"agent {i}, item {j}: negative value {v}")

    @staticmethod
    def create(values: Iterable[Iterable], mode: str = GOODS) -> "Instance":
        """Build an Instance from any nested iterable of ints/Fractions/"p/q" strings."""
        rows = tuple(tuple(_to_exact(v) for v in row) for row in values)
        n = len(rows)
        m = len(rows[0]) if rows else 0
        return Instance(n=n, m=m, values=rows, mode=mode)

    def value(self, agent: int, item: int) -> Fraction:
        return self.values[agent][item]

    def all_items(self) -> Bundle:
        return frozenset(range(self.m))

    def agent_total(self, agent: int) -> Fraction:
        return sum(self.values[agent], Fraction(0))

    def is_integral(self) -> bool:
        """True when every value is an integer (enables integer fast paths)."""
        return all(v.denominator == 1 for row in self.values for v in row)


@dataclass(frozen=True)
class MMSCertificate:
    """An agent's maximin share together with a witnessing n-partition.

    Goods mode: every bundle of `partition` is worth at least `value` to the
    agent.  Chores mode: every bundle costs her at most `value`.
    """

    agent: int
    value: Fraction
    partition: Allocation


def check_allocation(instance: Instance, allocation: Allocation) -> None:
    """Validate that `allocation` is a complete allocation for `instance`."""
    if len(allocation) != instance.n:
        raise ValueError(f"allocation has {len(allocation)} bundles for {instance.n} agents")
    seen = set()
    for bundle in allocation:
        for item in bundle:
            if not (0 <= item < instance.m):
                raise ValueError(f"item index {item} out of range 0..{instance.m - 1}")
            if item in seen:
                raise ValueError(f"item {item} assigned twice")
            seen.add(item)
    if len(seen) != instance.m:
        missing = sorted(set(range(instance.m)) - seen)
        raise ValueError(f"allocation is incomplete; unassigned items: {missing}")


def bundle_value(instance: Instance, agent: int, bundle: Iterable[int]) -> Fraction:
    """Exact sum of the agent's item values over `bundle`.

    Additivity is the modelling assumption everything else relies on, so
    this is the single place where bundle values are computed.
    """
    if not (0 <= agent < instance.n):
        raise ValueError(f"agent index {agent} out of range 0..{instance.n - 1}")
    row = instance.values[agent]
    total = Fraction(0)
    for item in bundle:
        if not (0 <= item < instance.m):
            raise ValueError(f"item index {item} out of range 0..{instance.m - 1}")
        total += row[item]
    return total


def _value_to_json(v: Fraction):
    if v.denominator == 1:
        return int(v)
    return f"{v.numerator}/{v.denominator}"


def fraction_to_str(v: Fraction) -> str:
    """Render an exact value as an integer string or "p/q"."""
    if v.denominator == 1:
        return str(v.numerator)
    return f"{v.numerator}/{v.denominator}"


def parse_instance(text: Union[str, bytes]) -> Instance:
    """Parse an instance JSON document.

    Schema: {"mode": "goods"|"chores", "agents": n, "items": m,
             "values": [[... one row per agent ...]]}
    with each entry an integer or exact "p/q" string.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("top-level JSON value must be an object")
    for key in ("mode", "agents", "items", "values"):
        if key not in doc:
            raise ParseError(f"missing required field {key!r}")
    mode = doc["mode"]
    if mode not in (GOODS, CHORES):
        raise ParseError(f"field 'mode': expected 'goods' or 'chores', got {mode!r}")
    n, m = doc["agents"], doc["items"]
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ParseError(f"field 'agents': expected a positive integer, got {n!r}")
    if not isinstance(m, int) or isinstance(m, bool) or m < 0:
        raise ParseError(f"field 'items': expected a non-negative integer, got {m!r}")
    raw = doc["values"]
    if not isinstance(raw, list) or len(raw) != n:
        raise ParseError(f"field 'values': expected {n} rows, got "
                         f"{len(raw) if isinstance(raw, list) else type(raw).__name__}")
    rows = []
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != m:
            raise ParseError(f"field 'values[{i}]': expected {m} entries (ragged matrix?)")
        parsed = []
        for j, v in enumerate(row):
            if isinstance(v, float):
                raise ParseError(f"field 'values[{i}][{j}]': float {v!r} is not exact; "
                                 "use an integer or a 'p/q' string")
            try:
                x = _to_exact(v)
            except ParseError as exc:
                raise ParseError(f"field 'values[{i}][{j}]': {exc}") from exc
            if x < 0:
                raise ParseError(f"field 'values[{i}][{j}]': negative value {v!r}")
            parsed.append(x)
        rows.append(tuple(parsed))
    return Instance(n=n, m=m, values=tuple(rows), mode=mode)


def emit_instance(instance: Instance) -> str:
    """Serialize to canonical JSON: sorted keys, compact separators,
    integers emitted without a denominator.  parse_instance(emit_instance(x)) == x.
    """
    doc = {
        "mode": instance.mode,
        "agents": instance.n,
        "items": instance.m,
        "values": [[_value_to_json(v) for v in row] for row in instance.values],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=False)
