"""Prioritized default rules and proper-scenario computation.

A reason theory is a set of default rules (premise => conclusion, each a
propositional formula), a strict partial priority order between rules, and
fixed background knowledge.  Given hard facts W, a scenario S (a subset of
the rules) classifies each rule as triggered, conflicted or defeated:

- triggered:   W ∪ Conc(S) entails the premise
- conflicted:  W ∪ Conc(S) entails the negated conclusion
- defeated:    some triggered rule with strictly higher priority has a
               conclusion that, with W, entails the negated conclusion

The binding rules are the triggered ones that are neither conflicted nor
defeated.  A scenario is *proper* when it equals its own binding set;
proper scenarios are found by subset enumeration, so theories should stay
small (tens of rules at most).

Feedback learning inserts a new rule grounding an obligation in a labelled
fact and raises it above every rule of the scenario that produced the
criticized action, keeping the order transitively closed and acyclic.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .formulas import (
    And,
    Atom,
    Formula,
    Not,
    atoms_of,
    build_atom_index,
    format_formula,
    models_mask,
    parse_formula,
)

GOAL = "goal"
CONSTRAINT = "constraint"


class InconsistentFeedbackError(ValueError):
    """Raised when feedback would introduce a priority cycle."""


@dataclass(frozen=True)
class DefaultRule:
    id: str
    premise: Formula
    conclusion: Formula
    kind: str  # GOAL or CONSTRAINT

    def __post_init__(self) -> None:
        if self.kind not in (GOAL, CONSTRAINT):
            raise ValueError(f"unknown rule kind {self.kind!r}")


@dataclass
class ReasonTheory:
    rules: list[DefaultRule] = field(default_factory=list)
    # Strict priority edges (lower, higher), kept transitively closed.
    order: set[tuple[str, str]] = field(default_factory=set)
    knowledge: list[Formula] = field(default_factory=list)

    def rule_by_id(self, rule_id: str) -> DefaultRule:
        for rule in self.rules:
            if rule.id == rule_id:
                return rule
        raise KeyError(rule_id)

    def has_rule(self, rule_id: str) -> bool:
        return any(r.id == rule_id for r in self.rules)

    def add_rule(self, rule: DefaultRule) -> None:
        if self.has_rule(rule.id):
            raise ValueError(f"duplicate rule id {rule.id!r}")
        self.rules.append(rule)
        self.rules.sort(key=lambda r: r.id)

    def outranks(self, higher: str, lower: str) -> bool:
        return (lower, higher) in self.order

    def add_priority(self, lower: str, higher: str) -> None:
        """Add lower < higher and close transitively; reject cycles."""
        closed = _closure(self.order | {(lower, higher)})
        for a, b in closed:
            if (b, a) in closed or a == b:
                raise InconsistentFeedbackError(
                    f"priority {lower} < {higher} creates a cycle"
                )
        self.order = closed

    def copy(self) -> "ReasonTheory":
        return ReasonTheory(list(self.rules), set(self.order), list(self.knowledge))

    # --- serialization -------------------------------------------------

    def to_json(self) -> dict:
        return {
            "rules": [
                {
                    "id": r.id,
                    "premise": format_formula(r.premise),
                    "conclusion": format_formula(r.conclusion),
                    "kind": r.kind,
                }
                for r in self.rules
            ],
            "order": sorted([list(edge) for edge in self.order]),
            "knowledge": [format_formula(k) for k in self.knowledge],
        }

    @classmethod
    def from_json(cls, data: dict) -> "ReasonTheory":
        theory = cls()
        for entry in data.get("rules", []):
            theory.add_rule(
                DefaultRule(
                    id=entry["id"],
                    premise=parse_formula(entry["premise"]),
                    conclusion=parse_formula(entry["conclusion"]),
                    kind=entry["kind"],
                )
            )
        edges = {(low, high) for low, high in data.get("order", [])}
        closed = _closure(edges)
        for a, b in closed:
            if (b, a) in closed or a == b:
                raise InconsistentFeedbackError("priority order contains a cycle")
        theory.order = closed
        theory.knowledge = [parse_formula(k) for k in data.get("knowledge", [])]
        return theory

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "ReasonTheory":
        return cls.from_json(json.loads(Path(path).read_text()))


def _closure(edges: set[tuple[str, str]]) -> set[tuple[str, str]]:
    closed = set(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(closed):
            for c, d in list(closed):
                if b == c and (a, d) not in closed:
                    closed.add((a, d))
                    changed = True
    return closed


class _Tables:
    """Per-(theory, W) truth-table masks for fast set computations."""

    def __init__(self, theory: ReasonTheory, world: Sequence[Formula]):
        formulas: list[Formula] = list(world)
        for rule in theory.rules:
            formulas.extend((rule.premise, rule.conclusion))
        self.index = build_atom_index(formulas)
        self.full = (1 << (1 << len(self.index))) - 1
        self.w_mask = self.full
        for f in world:
            self.w_mask &= models_mask(f, self.index)
        self.premise = {
            r.id: models_mask(r.premise, self.index) for r in theory.rules
        }
        self.conclusion = {
            r.id: models_mask(r.conclusion, self.index) for r in theory.rules
        }


def _context_mask(tables: _Tables, scenario: Iterable[DefaultRule]) -> int:
    mask = tables.w_mask
    for rule in scenario:
        mask &= tables.conclusion[rule.id]
    return mask


def triggered(
    theory: ReasonTheory,
    world: Sequence[Formula],
    scenario: Iterable[DefaultRule],
    tables: _Tables | None = None,
) -> set[DefaultRule]:
    tables = tables or _Tables(theory, world)
    context = _context_mask(tables, scenario)
    return {r for r in theory.rules if context & ~tables.premise[r.id] == 0}


def conflicted(
    theory: ReasonTheory,
    world: Sequence[Formula],
    scenario: Iterable[DefaultRule],
    tables: _Tables | None = None,
) -> set[DefaultRule]:
    tables = tables or _Tables(theory, world)
    context = _context_mask(tables, scenario)
    return {r for r in theory.rules if context & tables.conclusion[r.id] == 0}


def defeated(
    theory: ReasonTheory,
    world: Sequence[Formula],
    scenario: Iterable[DefaultRule],
    tables: _Tables | None = None,
) -> set[DefaultRule]:
    tables = tables or _Tables(theory, world)
    trig = triggered(theory, world, scenario, tables)
    out: set[DefaultRule] = set()
    for rule in theory.rules:
        for other in trig:
            if not theory.outranks(other.id, rule.id):
                continue
            attack = tables.w_mask & tables.conclusion[other.id]
            if attack & tables.conclusion[rule.id] == 0:
                out.add(rule)
                break
    return out


def binding(
    theory: ReasonTheory,
    world: Sequence[Formula],
    scenario: Iterable[DefaultRule],
    tables: _Tables | None = None,
) -> set[DefaultRule]:
    tables = tables or _Tables(theory, world)
    return (
        triggered(theory, world, scenario, tables)
        - conflicted(theory, world, scenario, tables)
        - defeated(theory, world, scenario, tables)
    )


def proper_scenarios(
    theory: ReasonTheory, world: Sequence[Formula]
) -> list[frozenset[DefaultRule]]:
    """All scenarios that equal their own binding set, by subset enumeration.

    Deterministic order: subsets of the id-sorted rule list in binary
    counting order (the empty scenario first).
    """
    tables = _Tables(theory, world)
    rules = sorted(theory.rules, key=lambda r: r.id)
    out: list[frozenset[DefaultRule]] = []
    for size_mask in range(1 << len(rules)):
        scenario = frozenset(
            rules[i] for i in range(len(rules)) if size_mask >> i & 1
        )
        if binding(theory, world, scenario, tables) == scenario:
            out.append(scenario)
    return out


def build_world(
    labels: Iterable[str],
    knowledge: Sequence[Formula] = (),
    conflicts: Iterable[tuple[Formula, Formula]] = (),
    conflict_mode: str = "pairwise",
) -> list[Formula]:
    """Hard facts for a decision step: labels, knowledge, conflict records.

    ``pairwise`` records one (not (and a b)) per conflicting pair;
    ``aggregate`` records a single negated conjunction over every formula
    involved in some conflict.
    """
    world: list[Formula] = [Atom(name) for name in sorted(set(labels))]
    world.extend(knowledge)
    pairs = list(conflicts)
    if conflict_mode == "pairwise":
        for a, b in pairs:
            world.append(Not(And((a, b))))
    elif conflict_mode == "aggregate":
        if pairs:
            seen: list[Formula] = []
            for a, b in pairs:
                for f in (a, b):
                    if f not in seen:
                        seen.append(f)
            world.append(Not(And(tuple(seen))))
    else:
        raise ValueError(f"unknown conflict mode {conflict_mode!r}")
    return world


def feedback_rule_id(premise: Formula, conclusion: Formula) -> str:
    base = f"d_{format_formula(premise)}"
    return base


def apply_feedback(
    theory: ReasonTheory,
    chosen_scenario: Iterable[DefaultRule],
    obligation: Formula,
    ground: Formula,
    kind: str,
) -> DefaultRule:
    """Insert (or find) the rule ground => obligation and raise it above
    every rule of the chosen scenario.  The theory is only modified if the
    resulting order stays acyclic; otherwise InconsistentFeedbackError is
    raised and the theory is left untouched.  Re-applying identical
    feedback is a no-op.
    """
    rule_id = feedback_rule_id(ground, obligation)
    existing = None
    if theory.has_rule(rule_id):
        existing = theory.rule_by_id(rule_id)
        if existing.conclusion != obligation:
            rule_id = f"{rule_id}_{format_formula(obligation)}"
            existing = theory.rule_by_id(rule_id) if theory.has_rule(rule_id) else None
    rule = existing or DefaultRule(rule_id, ground, obligation, kind)

    new_edges = {
        (lower.id, rule.id)
        for lower in chosen_scenario
        if lower.id != rule.id
    }
    candidate = _closure(theory.order | new_edges)
    for a, b in candidate:
        if (b, a) in candidate or a == b:
            raise InconsistentFeedbackError(
                f"feedback for {format_formula(obligation)} would create a "
                "priority cycle"
            )
    if existing is None:
        theory.add_rule(rule)
    theory.order = candidate
    return rule


def theory_to_dot(
    theory: ReasonTheory, active_labels: Iterable[str] = ()
) -> str:
    """DOT digraph of the rule network: nodes are rules (box = constraint,
    ellipse = goal), edges point from lower to higher priority.  Rules whose
    premise atoms are all active are highlighted.
    """
    active = set(active_labels)
    lines = ["digraph reasons {", "  rankdir=BT;"]
    for rule in sorted(theory.rules, key=lambda r: r.id):
        label = f"{format_formula(rule.premise)} => {format_formula(rule.conclusion)}"
        shape = "ellipse" if rule.kind == GOAL else "box"
        attrs = [f'label="{rule.id}: {label}"', f"shape={shape}"]
        if active and atoms_of(rule.premise) <= active:
            attrs.append('style=filled fillcolor="lightblue"')
        lines.append(f'  "{rule.id}" [{" ".join(attrs)}];')
    direct = _transitive_reduction(theory.order)
    for low, high in sorted(direct):
        lines.append(f'  "{low}" -> "{high}" [label="<"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def _transitive_reduction(edges: set[tuple[str, str]]) -> set[tuple[str, str]]:
    out = set(edges)
    for a, b in edges:
        for c in {x for _, x in edges}:
            if (a, c) in edges and (c, b) in edges and a != c and c != b:
                out.discard((a, b))
    return out
