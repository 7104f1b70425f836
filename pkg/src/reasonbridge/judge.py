"""Moral judges: map a state and executed action to optional feedback.

A judge holds its own reason theory (totally ordered) and a translator
that turns an obligation into the set of acceptable actions in a state:

- rescue obligation: first moves of the shortest paths to any tile
  adjacent to the earliest-fallen person in the water (pullOut when
  already adjacent);
- no-push obligation: every action except those entering a bridge tile
  occupied by a person; an agent standing on a bridge some other tile of
  which holds a person is expected to idle.

Feedback is the highest-priority derived obligation whose acceptable set
excludes the executed action, together with the label grounding it.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Optional

from .env import (
    IDLE,
    LABEL_BRIDGE,
    LABEL_WATER,
    MOVE_DELTAS,
    N_ACTIONS,
    PULL_OUT,
    ACTION_NAMES,
    BridgeEnv,
)
from .formulas import Atom, format_formula
from .reasons import (
    CONSTRAINT,
    GOAL,
    DefaultRule,
    ReasonTheory,
    build_world,
    proper_scenarios,
    triggered,
)

RESCUE = "phi_R"
NO_PUSH = "phi_C"


@dataclass(frozen=True)
class Feedback:
    obligation: str  # conclusion atom, e.g. phi_R
    ground: str  # label atom grounding it, e.g. D
    kind: str  # goal or constraint


def rescue_first_theory() -> ReasonTheory:
    """The shipped judge: rescuing outranks not pushing."""
    theory = ReasonTheory()
    theory.add_rule(DefaultRule("j_B", Atom("B"), Atom(NO_PUSH), CONSTRAINT))
    theory.add_rule(DefaultRule("j_D", Atom("D"), Atom(RESCUE), GOAL))
    theory.add_priority("j_B", "j_D")
    return theory


def expected_rescue_actions(env: BridgeEnv) -> set[int]:
    """First moves of all shortest paths to a tile adjacent to the
    earliest-fallen water person; pullOut when already adjacent.  Paths run
    over tiles the agent can walk on (land and bridges)."""
    water = env.water_persons()
    if not water:
        return set(range(N_ACTIONS))
    water.sort(key=lambda p: (-p.in_water_since, p.id))
    target = water[0].pos
    ax, ay = env.agent_pos
    if abs(ax - target[0]) + abs(ay - target[1]) == 1:
        return {PULL_OUT}
    goals = {
        (target[0] + dx, target[1] + dy)
        for dx, dy in MOVE_DELTAS.values()
        if (target[0] + dx, target[1] + dy) in env.layout.walkable
    }
    dist = _bfs_distances(env, goals)
    best = min(
        (dist.get((ax + dx, ay + dy), float("inf")) for dx, dy in MOVE_DELTAS.values()),
        default=float("inf"),
    )
    out = set()
    for action, (dx, dy) in MOVE_DELTAS.items():
        if dist.get((ax + dx, ay + dy), float("inf")) == best:
            out.add(action)
    return out


def _bfs_distances(env: BridgeEnv, goals: set) -> dict:
    dist = {pos: 0 for pos in goals}
    queue = deque(goals)
    while queue:
        pos = queue.popleft()
        for dx, dy in MOVE_DELTAS.values():
            nxt = (pos[0] + dx, pos[1] + dy)
            if nxt in env.layout.walkable and nxt not in dist:
                dist[nxt] = dist[pos] + 1
                queue.append(nxt)
    return dist


def expected_no_push_actions(env: BridgeEnv) -> set[int]:
    occupied = {
        p.pos
        for p in env.persons
        if p.pos is not None and not p.in_water and p.pos in env.layout.bridges
    }
    agent_col = env.layout.bridge_column_of(env.agent_pos)
    if agent_col is not None and any(
        pos[0] == agent_col and pos != env.agent_pos for pos in occupied
    ):
        return {IDLE}
    out = set(range(N_ACTIONS))
    for action, (dx, dy) in MOVE_DELTAS.items():
        nxt = (env.agent_pos[0] + dx, env.agent_pos[1] + dy)
        if nxt in occupied:
            out.discard(action)
    return out


TRANSLATORS: dict[str, Callable[[BridgeEnv], set[int]]] = {
    RESCUE: expected_rescue_actions,
    NO_PUSH: expected_no_push_actions,
}


class RuleBasedJudge:
    """Judges actions against the judge's own (totally ordered) theory."""

    def __init__(self, theory: Optional[ReasonTheory] = None):
        self.theory = theory or rescue_first_theory()

    def expected_actions(self, obligation: str, env: BridgeEnv) -> set[int]:
        translator = TRANSLATORS.get(obligation)
        if translator is None:
            raise KeyError(f"no translator for obligation {obligation!r}")
        return translator(env)

    def judge(self, env: BridgeEnv, action: int) -> Optional[Feedback]:
        labels = env.labels()
        if not labels:
            return None
        world0 = build_world(labels, self.theory.knowledge)
        trig = triggered(self.theory, world0, ())
        conflicts = []
        trig_list = sorted(trig, key=lambda r: r.id)
        for i, a in enumerate(trig_list):
            for b in trig_list[i + 1 :]:
                sa = self.expected_actions(_atom(a.conclusion), env)
                sb = self.expected_actions(_atom(b.conclusion), env)
                if not sa & sb:
                    conflicts.append((a.conclusion, b.conclusion))
        world = build_world(labels, self.theory.knowledge, conflicts)
        scenarios = proper_scenarios(self.theory, world)
        scenario = max(scenarios, key=len) if scenarios else frozenset()
        ranked = sorted(
            scenario,
            key=lambda r: (-sum(self.theory.outranks(r.id, o.id) for o in scenario), r.id),
        )
        for rule in ranked:
            obligation = _atom(rule.conclusion)
            if action not in self.expected_actions(obligation, env):
                return Feedback(
                    obligation=obligation,
                    ground=_atom(rule.premise),
                    kind=rule.kind,
                )
        return None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(
            json.dumps({"theory": self.theory.to_json()}, indent=2) + "\n"
        )

    @classmethod
    def load(cls, path: str | Path) -> "RuleBasedJudge":
        data = json.loads(Path(path).read_text())
        return cls(ReasonTheory.from_json(data["theory"]))


def _atom(formula) -> str:
    if not isinstance(formula, Atom):
        raise ValueError(
            f"judge rules need atomic formulas, got {format_formula(formula)}"
        )
    return formula.name


class InteractiveJudge:
    """Prompts a human for feedback after rendering the state and action.

    Input syntax per prompt: empty line for no feedback, otherwise
    ``obligation,ground,kind`` such as ``phi_R,D,goal``.
    """

    def __init__(self, read=input, write=print):
        self.read = read
        self.write = write

    def judge(self, env: BridgeEnv, action: int) -> Optional[Feedback]:
        self.write(env.render_text())
        self.write(f"action: {ACTION_NAMES[action]}")
        line = self.read("feedback (obligation,ground,kind or empty): ").strip()
        if not line:
            return None
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3 or parts[2] not in (GOAL, CONSTRAINT):
            self.write("malformed feedback, ignored")
            return None
        return Feedback(obligation=parts[0], ground=parts[1], kind=parts[2])
