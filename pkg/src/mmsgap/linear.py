"""Mixed linear model container and LP-file text emission.

A `MixedModel` holds named nonnegative continuous variables, named binary
variables, linear constraints, and a linear objective to minimize.  All
coefficients are exact rationals.  The same container serves plain LPs
(no binaries) and mixed integer programs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from typing import Optional

SENSES = ("<=", "=", ">=")


@dataclass(frozen=True)
class Constraint:
    name: str
    coeffs: tuple          # ((var, Fraction), ...) in insertion order
    sense: str
    rhs: Fraction

    def coeff_dict(self) -> dict:
        return dict(self.coeffs)


@dataclass
class MixedModel:
    """Named variables, linear constraints, and a minimize objective.

    Continuous variables are nonnegative (the LP-file default); binaries
    take values in {0, 1}.  Constraints may only reference declared
    variables.
    """

    name: str = "model"
    continuous_vars: list = field(default_factory=list)
    binary_vars: list = field(default_factory=list)
    constraints: list = field(default_factory=list)
    objective: dict = field(default_factory=dict)

    def add_continuous(self, name: str) -> str:
        self._check_fresh(name)
        self.continuous_vars.append(name)
        return name

    def add_binary(self, name: str) -> str:
        self._check_fresh(name)
        self.binary_vars.append(name)
        return name

    def _check_fresh(self, name: str) -> None:
        if name in self.continuous_vars or name in self.binary_vars:
            raise ValueError(f"variable {name!r} declared twice")

    def add_constraint(self, name: str, coeffs: dict, sense: str, rhs) -> None:
        if sense not in SENSES:
            raise ValueError(f"sense must be one of {SENSES}, got {sense!r}")
        declared = set(self.continuous_vars) | set(self.binary_vars)
        for var in coeffs:
            if var not in declared:
                raise ValueError(f"constraint {name!r} references undeclared variable {var!r}")
        if any(c.name == name for c in self.constraints):
            raise ValueError(f"constraint {name!r} declared twice")
        items = tuple((var, Fraction(v)) for var, v in coeffs.items() if Fraction(v) != 0)
        self.constraints.append(Constraint(name=name, coeffs=items, sense=sense,
                                           rhs=Fraction(rhs)))

    def set_objective(self, coeffs: dict) -> None:
        declared = set(self.continuous_vars) | set(self.binary_vars)
        for var in coeffs:
            if var not in declared:
                raise ValueError(f"objective references undeclared variable {var!r}")
        self.objective = {var: Fraction(v) for var, v in coeffs.items()}

    def all_vars(self) -> list:
        return list(self.continuous_vars) + list(self.binary_vars)

    def validate(self) -> None:
        declared = set(self.all_vars())
        if len(declared) != len(self.continuous_vars) + len(self.binary_vars):
            raise ValueError("duplicate variable names across kinds")
        for con in self.constraints:
            for var, _ in con.coeffs:
                if var not in declared:
                    raise ValueError(f"constraint {con.name!r} references {var!r}")
        for var in self.objective:
            if var not in declared:
                raise ValueError(f"objective references {var!r}")


def _is_terminating(f: Fraction) -> bool:
    d = f.denominator
    while d % 2 == 0:
        d //= 2
    while d % 5 == 0:
        d //= 5
    return d == 1


def _decimal_str(f: Fraction) -> str:
    if f.denominator == 1:
        return str(f.numerator)
    # terminating decimal expansion
    num, den = f.numerator, f.denominator
    digits = 0
    while den % 2 == 0:
        den //= 2
        digits += 1
    while den % 5 == 0:
        den //= 5
        digits += 1
    scaled = abs(num) * 10 ** digits // f.denominator
    text = str(scaled).rjust(digits + 1, "0")
    out = f"{text[:-digits]}.{text[-digits:]}" if digits else text
    return f"-{out}" if num < 0 else out


def _term_strings(coeffs, scale: int = 1) -> str:
    parts = []
    for var, coef in coeffs:
        coef = coef * scale
        mag = abs(coef)
        mag_s = "" if mag == 1 else f"{_decimal_str(mag)} "
        if not parts:
            sign = "- " if coef < 0 else ""
            parts.append(f"{sign}{mag_s}{var}")
        else:
            sign = "-" if coef < 0 else "+"
            parts.append(f"{sign} {mag_s}{var}")
    return " ".join(parts) if parts else "0 " + "__zero__"


def emit_lp_file(model: MixedModel) -> str:
    """Render the model in the human-readable LP file format.

    Coefficients with terminating decimal expansions are written as exact
    decimals; a constraint with any non-terminating coefficient is scaled
    to integers by the least common denominator, documented in a comment
    line above it.  Output is deterministic: variables keep declaration
    order and constraints keep insertion order.
    """
    model.validate()
    lines = [f"\\ {model.name}"]
    lines.append("Minimize")
    obj_items = tuple((v, model.objective[v]) for v in model.all_vars()
                      if model.objective.get(v))
    lines.append(f" obj: {_term_strings(obj_items)}")
    lines.append("Subject To")
    op = {"<=": "<=", "=": "=", ">=": ">="}
    for con in model.constraints:
        scale = 1
        values = [coef for _, coef in con.coeffs] + [con.rhs]
        if any(not _is_terminating(v) for v in values):
            scale = lcm(*(v.denominator for v in values))
            lines.append(f"\\ {con.name}: scaled by the common denominator {scale}")
        rhs = _decimal_str(con.rhs * scale)
        lines.append(f" {con.name}: {_term_strings(con.coeffs, scale)} {op[con.sense]} {rhs}")
    lines.append("Bounds")
    for var in model.continuous_vars:
        lines.append(f" 0 <= {var}")
    if model.binary_vars:
        lines.append("Binaries")
        for var in model.binary_vars:
            lines.append(f" {var}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_lp_file(text: str) -> MixedModel:
    """Parse LP files produced by `emit_lp_file` (used to feed external
    solvers in cross-checks).  This is not a general LP-format reader: it
    supports the subset the emitter writes, honoring scale comments."""
    model = MixedModel()
    section = None
    pending_scale: Optional[int] = None
    declared: set = set()

    def ensure_var(name: str):
        if name not in declared:
            declared.add(name)
            model.continuous_vars.append(name)

    def parse_terms(tokens):
        coeffs = {}
        sign = 1
        coef: Optional[Fraction] = None
        for tok in tokens:
            if tok == "+":
                sign, coef = 1, None
            elif tok == "-":
                sign, coef = -1, None
            elif tok.replace(".", "").replace("-", "").isdigit():
                coef = Fraction(tok)
            else:
                value = sign * (coef if coef is not None else Fraction(1))
                coeffs[tok] = coeffs.get(tok, Fraction(0)) + value
                sign, coef = 1, None
        return coeffs

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            if "scaled by the common denominator" in line:
                pending_scale = int(line.rsplit(None, 1)[1])
            continue
        lowered = line.lower()
        if lowered in ("minimize", "subject to", "bounds", "binaries", "binary", "end"):
            section = lowered
            continue
        if section == "minimize":
            _, _, rest = line.partition(":")
            coeffs = parse_terms(rest.split())
            for var in coeffs:
                ensure_var(var)
            model.objective = {k: v for k, v in coeffs.items() if v != 0}
        elif section == "subject to":
            name, _, rest = line.partition(":")
            tokens = rest.split()
            sense_idx = next(i for i, t in enumerate(tokens) if t in ("<=", ">=", "="))
            coeffs = parse_terms(tokens[:sense_idx])
            rhs = Fraction(tokens[sense_idx + 1])
            scale = pending_scale or 1
            pending_scale = None
            for var in coeffs:
                ensure_var(var)
            model.add_constraint(name.strip(),
                                 {k: v / scale for k, v in coeffs.items()},
                                 tokens[sense_idx], rhs / scale)
        elif section in ("binaries", "binary"):
            for var in line.split():
                if var in model.continuous_vars:
                    model.continuous_vars.remove(var)
                declared.add(var)
                if var not in model.binary_vars:
                    model.binary_vars.append(var)
        # bounds lines are the default 0 <= x; nothing to record
    model.validate()
    return model
