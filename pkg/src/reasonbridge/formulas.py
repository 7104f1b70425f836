"""Propositional formulas with s-expression syntax and truth-table entailment.

Formulas are built from atoms, ``not``, ``and``, ``or`` and ``imp``.  The
text form is an s-expression, e.g. ``(and B D)`` or ``(not (and phi_C
phi_R))``; a bare symbol is an atom.

Entailment works by truth tables over the finite atom universe of the
query.  Each formula is compiled to a bitmask over the 2^n assignments
(bit j set iff assignment j satisfies the formula), so connectives become
single big-integer operations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence, Tuple

MAX_ENTAILMENT_ATOMS = 24


class FormulaError(ValueError):
    """Raised for malformed formula text or oversized entailment queries."""


@dataclass(frozen=True)
class Atom:
    name: str


@dataclass(frozen=True)
class Not:
    operand: "Formula"


@dataclass(frozen=True)
class And:
    operands: Tuple["Formula", ...]


@dataclass(frozen=True)
class Or:
    operands: Tuple["Formula", ...]


@dataclass(frozen=True)
class Imp:
    antecedent: "Formula"
    consequent: "Formula"


Formula = Atom | Not | And | Or | Imp


def _tokenize(text: str) -> list[str]:
    return text.replace("(", " ( ").replace(")", " ) ").split()


def _read(tokens: list[str], pos: int) -> tuple[object, int]:
    if pos >= len(tokens):
        raise FormulaError("unexpected end of formula")
    tok = tokens[pos]
    if tok == "(":
        items = []
        pos += 1
        while pos < len(tokens) and tokens[pos] != ")":
            item, pos = _read(tokens, pos)
            items.append(item)
        if pos >= len(tokens):
            raise FormulaError("unbalanced parentheses")
        return items, pos + 1
    if tok == ")":
        raise FormulaError("unexpected ')'")
    return tok, pos + 1


def _build(sexpr: object) -> Formula:
    if isinstance(sexpr, str):
        return Atom(sexpr)
    assert isinstance(sexpr, list)
    if not sexpr or not isinstance(sexpr[0], str):
        raise FormulaError(f"bad operator in {sexpr!r}")
    op = sexpr[0].lower()
    args = [_build(a) for a in sexpr[1:]]
    if op == "not":
        if len(args) != 1:
            raise FormulaError("'not' takes exactly one operand")
        return Not(args[0])
    if op == "and":
        if not args:
            raise FormulaError("'and' needs operands")
        return And(tuple(args))
    if op == "or":
        if not args:
            raise FormulaError("'or' needs operands")
        return Or(tuple(args))
    if op in ("imp", "implies", "->"):
        if len(args) != 2:
            raise FormulaError("'imp' takes exactly two operands")
        return Imp(args[0], args[1])
    raise FormulaError(f"unknown operator {op!r}")


def parse_formula(text: str) -> Formula:
    """Parse an s-expression formula string."""
    tokens = _tokenize(text)
    if not tokens:
        raise FormulaError("empty formula")
    sexpr, pos = _read(tokens, 0)
    if pos != len(tokens):
        raise FormulaError(f"trailing tokens in {text!r}")
    return _build(sexpr)


def format_formula(f: Formula) -> str:
    """Inverse of :func:`parse_formula` (canonical s-expression text)."""
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Not):
        return f"(not {format_formula(f.operand)})"
    if isinstance(f, And):
        return "(and " + " ".join(format_formula(o) for o in f.operands) + ")"
    if isinstance(f, Or):
        return "(or " + " ".join(format_formula(o) for o in f.operands) + ")"
    return f"(imp {format_formula(f.antecedent)} {format_formula(f.consequent)})"


def atoms_of(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset((f.name,))
    if isinstance(f, Not):
        return atoms_of(f.operand)
    if isinstance(f, (And, Or)):
        out: frozenset[str] = frozenset()
        for o in f.operands:
            out |= atoms_of(o)
        return out
    return atoms_of(f.antecedent) | atoms_of(f.consequent)


def _atom_mask(index: int, n_atoms: int) -> int:
    """Bitmask of assignments (over n_atoms) where atom ``index`` is true."""
    block = (1 << (1 << index)) - 1
    pattern = block << (1 << index)
    period = 1 << (index + 1)
    mask = 0
    for start in range(0, 1 << n_atoms, period):
        mask |= pattern << start
    return mask


def models_mask(f: Formula, atom_index: dict[str, int]) -> int:
    """Bitmask of satisfying assignments over the given atom ordering."""
    n = len(atom_index)
    full = (1 << (1 << n)) - 1
    if isinstance(f, Atom):
        return _atom_mask(atom_index[f.name], n)
    if isinstance(f, Not):
        return full & ~models_mask(f.operand, atom_index)
    if isinstance(f, And):
        mask = full
        for o in f.operands:
            mask &= models_mask(o, atom_index)
        return mask
    if isinstance(f, Or):
        mask = 0
        for o in f.operands:
            mask |= models_mask(o, atom_index)
        return mask
    return (full & ~models_mask(f.antecedent, atom_index)) | models_mask(
        f.consequent, atom_index
    )


def build_atom_index(formulas: Iterable[Formula]) -> dict[str, int]:
    names: set[str] = set()
    for f in formulas:
        names |= atoms_of(f)
    if len(names) > MAX_ENTAILMENT_ATOMS:
        raise FormulaError(
            f"entailment query over {len(names)} atoms exceeds the "
            f"{MAX_ENTAILMENT_ATOMS}-atom cap"
        )
    return {name: i for i, name in enumerate(sorted(names))}


def entails(premises: Sequence[Formula], goal: Formula) -> bool:
    """Classical entailment: every model of all premises satisfies goal."""
    index = build_atom_index(list(premises) + [goal])
    full = (1 << (1 << len(index))) - 1
    base = full
    for p in premises:
        base &= models_mask(p, index)
    return base & ~models_mask(goal, index) == 0


def satisfiable(formulas: Sequence[Formula]) -> bool:
    index = build_atom_index(formulas)
    full = (1 << (1 << len(index))) - 1
    base = full
    for f in formulas:
        base &= models_mask(f, index)
    return base != 0
