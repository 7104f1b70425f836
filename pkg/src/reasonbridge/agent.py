"""Reason-guided agent: normative reasoning wrapped around learned policies.

Each decision step: read the state labels, detect conflicts between
triggered obligations (their conformance sets are disjoint), record the
conflicts as hard facts, compute the proper scenarios of the agent's
reason theory and pick one at random.  If the scenario concludes a moral
goal the corresponding moral policy acts; otherwise the instrumental
policy acts through the intersection of the scenario's constraint shields.

A conformance set is the set of actions a rule tolerates: the singleton
greedy action for a goal, the shield-safe set for a constraint.  Executed
goal actions are asserted to lie in every scenario rule's conformance set
(conflict recording makes this hold by construction); a violation raises
ObligationConsistencyError.

Judge feedback (obligation, grounding label) inserts the grounded rule and
raises it above the scenario that produced the criticized action.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .env import BridgeEnv, EnvConfig
from .formulas import Atom, format_formula
from .learning import (
    QModel,
    RiskModel,
    load_model,
    save_model,
    shield_filter,
)
from .reasons import (
    CONSTRAINT,
    GOAL,
    DefaultRule,
    InconsistentFeedbackError,
    ReasonTheory,
    apply_feedback,
    build_world,
    proper_scenarios,
    triggered,
)


class ObligationConsistencyError(RuntimeError):
    """An executed action broke a scenario rule's conformance set."""


@dataclass
class DecisionTrace:
    step: int
    labels: frozenset[str]
    conflicts: list[tuple[str, str]]
    scenarios: list[frozenset[str]]
    chosen: frozenset[str]
    obligation: Optional[str]
    action: int
    shielded: bool


@dataclass
class EpisodeResult:
    steps: int
    rewards: dict[str, float]
    fall_or_push: bool
    conflict_steps: int
    rescues: int
    pushes: int
    drownings: int
    feedback: list[dict]
    traces: list[DecisionTrace] = field(default_factory=list)


class AgentBundle:
    """Reason theory plus the learned components it needs to act."""

    def __init__(
        self,
        theory: Optional[ReasonTheory] = None,
        instrumental: Optional[QModel] = None,
        moral: Optional[dict[str, QModel]] = None,
        risk: Optional[dict[str, RiskModel]] = None,
        seed: Optional[int] = None,
        conflict_mode: str = "pairwise",
    ):
        self.theory = theory if theory is not None else ReasonTheory()
        self.instrumental = instrumental
        self.moral = moral or {}
        self.risk = risk or {}
        self.rng = np.random.default_rng(seed)
        self.conflict_mode = conflict_mode
        self._check_components()

    def _check_components(self) -> None:
        for rule in self.theory.rules:
            atom = _conclusion_atom(rule)
            if rule.kind == GOAL and atom not in self.moral:
                raise ValueError(f"no moral policy for goal {atom!r}")
            if rule.kind == CONSTRAINT and atom not in self.risk:
                raise ValueError(f"no risk model for constraint {atom!r}")

    # --- reasoning ------------------------------------------------------

    def conformance(self, rule: DefaultRule, obs: tuple) -> set[int]:
        atom = _conclusion_atom(rule)
        if rule.kind == GOAL:
            return {self.moral[atom].greedy(obs)}
        return self.risk[atom].safe_set(obs)

    def select_action(self, env: BridgeEnv) -> tuple[int, DecisionTrace]:
        obs = env.observe()
        labels = env.labels()
        world0 = build_world(labels, self.theory.knowledge)
        trig = sorted(
            triggered(self.theory, world0, ()), key=lambda r: r.id
        )
        conflicts: list[tuple] = []
        conflict_names: list[tuple[str, str]] = []
        for i, a in enumerate(trig):
            for b in trig[i + 1 :]:
                if a.conclusion == b.conclusion:
                    continue
                if not self.conformance(a, obs) & self.conformance(b, obs):
                    conflicts.append((a.conclusion, b.conclusion))
                    conflict_names.append(
                        (format_formula(a.conclusion), format_formula(b.conclusion))
                    )
        world = build_world(
            labels, self.theory.knowledge, conflicts, self.conflict_mode
        )
        scenarios = proper_scenarios(self.theory, world)
        chosen = scenarios[int(self.rng.integers(len(scenarios)))]

        goals = sorted(
            [r for r in chosen if r.kind == GOAL],
            key=lambda r: (
                -sum(self.theory.outranks(r.id, o.id) for o in chosen),
                r.id,
            ),
        )
        constraints = [r for r in chosen if r.kind == CONSTRAINT]
        if goals:
            actions = {self.moral[_conclusion_atom(r)].greedy(obs) for r in goals}
            if len(actions) > 1:
                raise ObligationConsistencyError(
                    "co-binding goals disagree on the action"
                )
            action = self.moral[_conclusion_atom(goals[0])].greedy(obs)
            for rule in chosen:
                if action not in self.conformance(rule, obs):
                    raise ObligationConsistencyError(
                        f"action {action} violates {rule.id}"
                    )
            shielded = False
        else:
            ranked = self.instrumental.ranking(obs)
            shields = [self.risk[_conclusion_atom(r)] for r in constraints]
            action = shield_filter(ranked, shields, obs)
            shielded = bool(shields)
        trace = DecisionTrace(
            step=env.t,
            labels=labels,
            conflicts=conflict_names,
            scenarios=[frozenset(r.id for r in s) for s in scenarios],
            chosen=frozenset(r.id for r in chosen),
            obligation=_conclusion_atom(goals[0]) if goals else None,
            action=int(action),
            shielded=shielded,
        )
        return int(action), trace

    def learn_feedback(self, feedback, chosen_ids: frozenset[str]) -> DefaultRule:
        chosen_rules = [self.theory.rule_by_id(rid) for rid in chosen_ids]
        rule = apply_feedback(
            self.theory,
            chosen_rules,
            Atom(feedback.obligation),
            Atom(feedback.ground),
            feedback.kind,
        )
        self._check_components()
        return rule

    # --- persistence ------------------------------------------------------

    def save(self, agent_dir: str | Path, config: EnvConfig) -> None:
        path = Path(agent_dir)
        path.mkdir(parents=True, exist_ok=True)
        self.theory.save(path / "theory.json")
        meta = {
            "config_name": config.name,
            "config_hash": config_hash(config),
            "moral": sorted(self.moral),
            "risk": sorted(self.risk),
            "conflict_mode": self.conflict_mode,
        }
        if self.instrumental is not None:
            save_model(self.instrumental, path / "instrumental.model")
        for atom, model in self.moral.items():
            save_model(model, path / f"moral_{atom}.model")
        for atom, risk in self.risk.items():
            risk.save(path / f"risk_{atom}.model")
        (path / "meta.json").write_text(json.dumps(meta, indent=2) + "\n")

    @classmethod
    def load(cls, agent_dir: str | Path, seed: Optional[int] = None) -> "AgentBundle":
        path = Path(agent_dir)
        meta = json.loads((path / "meta.json").read_text())
        theory = ReasonTheory.load(path / "theory.json")
        instrumental = None
        if (path / "instrumental.model").exists():
            instrumental = load_model(path / "instrumental.model")
        moral = {
            atom: load_model(path / f"moral_{atom}.model")
            for atom in meta.get("moral", [])
        }
        risk = {
            atom: RiskModel.load(path / f"risk_{atom}.model")
            for atom in meta.get("risk", [])
        }
        return cls(
            theory=theory,
            instrumental=instrumental,
            moral=moral,
            risk=risk,
            seed=seed,
            conflict_mode=meta.get("conflict_mode", "pairwise"),
        )


def _conclusion_atom(rule: DefaultRule) -> str:
    if not isinstance(rule.conclusion, Atom):
        raise ValueError("agent rules need atomic obligations")
    return rule.conclusion.name


def config_hash(config: EnvConfig) -> str:
    blob = json.dumps(
        {k: str(v) for k, v in sorted(config.__dict__.items())}, sort_keys=True
    )
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def run_episode(
    bundle: AgentBundle,
    env: BridgeEnv,
    judge=None,
    learn_reasons: bool = False,
    reset_mode: str = "random",
    reset_state: Optional[dict] = None,
    collect_traces: bool = False,
) -> EpisodeResult:
    env.reset(mode=reset_mode, state=reset_state)
    rewards = {"instr": 0.0, "resc": 0.0, "push": 0.0}
    steps = conflict_steps = rescues = pushes = drownings = 0
    fall_or_push = False
    feedback_log: list[dict] = []
    traces: list[DecisionTrace] = []
    while True:
        action, trace = bundle.select_action(env)
        if trace.conflicts:
            conflict_steps += 1
        if judge is not None:
            fb = judge.judge(env, action)
            if fb is not None:
                feedback_log.append(
                    {
                        "step": steps,
                        "obligation": fb.obligation,
                        "ground": fb.ground,
                        "kind": fb.kind,
                        "chosen": sorted(trace.chosen),
                    }
                )
                if learn_reasons:
                    bundle.learn_feedback(fb, trace.chosen)
        transition = env.step(action)
        for key in rewards:
            rewards[key] += transition.rewards[key]
        if transition.events["fell"] or transition.events["pushed"]:
            fall_or_push = True
        rescues += len(transition.events["rescued"])
        pushes += len(transition.events["pushed"])
        drownings += len(transition.events["drowned"])
        if collect_traces:
            traces.append(trace)
        steps += 1
        if transition.terminated or transition.truncated:
            break
    return EpisodeResult(
        steps=steps,
        rewards=rewards,
        fall_or_push=fall_or_push,
        conflict_steps=conflict_steps,
        rescues=rescues,
        pushes=pushes,
        drownings=drownings,
        feedback=feedback_log,
        traces=traces,
    )


@dataclass
class EvalReport:
    episodes: int
    r_instr: float
    r_resc: float
    r_push: float
    count_resc: int
    count_conflict: int
    conflict_steps: int
    rescues: int
    pushes: int
    drownings: int
    seed: Optional[int]
    config_hash: str

    def to_json(self) -> dict:
        return dict(self.__dict__)


def evaluate(
    bundle: AgentBundle,
    env: BridgeEnv,
    episodes: int,
    reset_mode: str = "random",
    reset_state: Optional[dict] = None,
    seed: Optional[int] = None,
) -> EvalReport:
    totals = {"instr": 0.0, "resc": 0.0, "push": 0.0}
    count_resc = count_conflict = conflict_steps = 0
    rescues = pushes = drownings = 0
    for _ in range(episodes):
        result = run_episode(
            bundle, env, reset_mode=reset_mode, reset_state=reset_state
        )
        for key in totals:
            totals[key] += result.rewards[key]
        count_resc += int(result.fall_or_push)
        count_conflict += int(result.conflict_steps > 0)
        conflict_steps += result.conflict_steps
        rescues += result.rescues
        pushes += result.pushes
        drownings += result.drownings
    return EvalReport(
        episodes=episodes,
        r_instr=totals["instr"],
        r_resc=totals["resc"],
        r_push=totals["push"],
        count_resc=count_resc,
        count_conflict=count_conflict,
        conflict_steps=conflict_steps,
        rescues=rescues,
        pushes=pushes,
        drownings=drownings,
        seed=seed,
        config_hash=config_hash(env.config),
    )
