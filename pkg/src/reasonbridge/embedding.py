"""Ethical embedding: minimal weight that aligns a scalarized objective.

The environment induces a multi-objective MDP with an individual reward
(goal delivery) and an ethical reward (push penalty plus rescue reward).
The embedding finds the smallest weight w such that every optimal policy
of the scalarized MDP  r_individual + w * r_ethical  is ethically optimal:
a grid scan over w where each candidate is checked by value iteration
followed by an adversarial (min over greedy ties) ethical policy
evaluation against the ethically optimal value.

Only deterministic configurations are supported; the MDP is the exact
breadth-first closure of the environment dynamics over the reset states,
with goal entry terminal and departed persons absorbing.
"""
from __future__ import annotations

import dataclasses
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .env import N_ACTIONS, BridgeEnv, ConfigError, EnvConfig


class EmbeddingTimeout(TimeoutError):
    """Raised when MDP construction or the weight search exceeds its budget."""


@dataclass
class TabularMDP:
    keys: list
    index: dict
    successors: np.ndarray  # [S, A] int32, terminal sink = S
    r_individual: np.ndarray  # [S, A]
    r_ethical: np.ndarray  # [S, A]
    s0: int


def _model_env(config: EnvConfig, seed: Optional[int] = None) -> BridgeEnv:
    if not config.is_deterministic():
        raise ConfigError(
            "ethical embedding needs a deterministic configuration "
            "(p_fall, p_push in {0, 1}; fixed or disabled drowning)"
        )
    # Departed persons are absorbing within the horizon; drop reappearance
    # so the state space stays finite.
    cfg = dataclasses.replace(config, t_reappear=None, truncation=10**9)
    return BridgeEnv(cfg, seed=seed, termination="goal")


def _reset_snapshots(env: BridgeEnv) -> list[dict]:
    """All random-reset states plus s0: agent over land, movers over
    their waypoints, statics in place."""
    snaps = []
    env.reset(mode="s0")
    snaps.append(env.snapshot())
    movers = [p for p in env.persons if p.kind == "mover"]
    ranges = [range(len(p.traj)) for p in movers]
    for agent in sorted(env.layout.land):
        for combo in _product(ranges):
            env.reset(mode="s0")
            env.agent_pos = agent
            for person, idx in zip(
                [p for p in env.persons if p.kind == "mover"], combo
            ):
                person.traj_idx = idx
                person.pos = person.traj[idx]
            snaps.append(env.snapshot())
    return snaps


def _product(ranges):
    if not ranges:
        yield ()
        return
    for head in ranges[0]:
        for tail in _product(ranges[1:]):
            yield (head,) + tail


def estimate_state_space(
    config: EnvConfig,
    budget: int = 20000,
    seed: Optional[int] = None,
    deadline: Optional[float] = None,
) -> int:
    """Sampled state-count estimate: random resets followed by random
    rollouts, deduplicated on canonical state keys."""
    env = _model_env(config, seed=seed)
    rng = np.random.default_rng(seed)
    seen = set()
    while budget > 0:
        env.reset(mode="random")
        seen.add(env.state_key())
        budget -= 1
        for _ in range(50):
            if budget <= 0:
                break
            if deadline is not None and time.monotonic() > deadline:
                raise EmbeddingTimeout("state-space estimation timed out")
            transition = env.step(int(rng.integers(N_ACTIONS)))
            seen.add(env.state_key())
            budget -= 1
            if transition.terminated:
                break
    return len(seen)


def build_mdp(config: EnvConfig, deadline: Optional[float] = None) -> TabularMDP:
    env = _model_env(config)
    keys: list = []
    index: dict = {}
    snapshots: list[dict] = []

    def intern(snap: dict, key: tuple) -> int:
        if key not in index:
            index[key] = len(keys)
            keys.append(key)
            snapshots.append(snap)
        return index[key]

    env.reset(mode="s0")
    s0 = intern(env.snapshot(), env.state_key())
    for snap in _reset_snapshots(env):
        env.restore(snap)
        intern(snap, env.state_key())

    successors: list[list[int]] = []
    r_ind: list[list[float]] = []
    r_eth: list[list[float]] = []
    frontier = 0
    while frontier < len(keys):
        if deadline is not None and time.monotonic() > deadline:
            raise EmbeddingTimeout("MDP construction timed out")
        snap = snapshots[frontier]
        succ_row, ind_row, eth_row = [], [], []
        terminal = snap["agent"] == config.goal
        for action in range(N_ACTIONS):
            if terminal:
                succ_row.append(-1)
                ind_row.append(0.0)
                eth_row.append(0.0)
                continue
            env.restore(snap)
            env.goal_entered = False
            transition = env.step(action)
            ind_row.append(transition.rewards["instr"])
            eth_row.append(
                transition.rewards["push"] + transition.rewards["resc"]
            )
            if transition.terminated:
                succ_row.append(-1)
            else:
                succ_row.append(intern(env.snapshot(), env.state_key()))
        successors.append(succ_row)
        r_ind.append(ind_row)
        r_eth.append(eth_row)
        frontier += 1

    n = len(keys)
    succ = np.asarray(successors, dtype=np.int64)
    succ[succ == -1] = n  # terminal sink
    return TabularMDP(
        keys=keys,
        index=index,
        successors=succ,
        r_individual=np.asarray(r_ind),
        r_ethical=np.asarray(r_eth),
        s0=s0,
    )


def value_iteration(
    mdp: TabularMDP,
    rewards: np.ndarray,
    gamma: float = 0.9,
    tol: float = 1e-8,
    v0: Optional[np.ndarray] = None,
    max_iter: int = 10000,
) -> np.ndarray:
    v = np.zeros(len(mdp.keys)) if v0 is None else v0.copy()
    padded = np.empty(len(mdp.keys) + 1)
    for _ in range(max_iter):
        padded[:-1] = v
        padded[-1] = 0.0
        q = rewards + gamma * padded[mdp.successors]
        new = q.max(axis=1)
        if np.max(np.abs(new - v)) < tol:
            return new
        v = new
    return v


def q_from_v(
    mdp: TabularMDP, rewards: np.ndarray, v: np.ndarray, gamma: float
) -> np.ndarray:
    padded = np.append(v, 0.0)
    return rewards + gamma * padded[mdp.successors]


def adversarial_ethical_value(
    mdp: TabularMDP,
    greedy_mask: np.ndarray,
    gamma: float = 0.9,
    tol: float = 1e-8,
    max_iter: int = 10000,
) -> np.ndarray:
    """Fixpoint of the *worst* ethical return achievable while tie-breaking
    arbitrarily among scalarized-greedy actions."""
    v = np.zeros(len(mdp.keys))
    padded = np.empty(len(mdp.keys) + 1)
    big = np.inf
    for _ in range(max_iter):
        padded[:-1] = v
        padded[-1] = 0.0
        q = mdp.r_ethical + gamma * padded[mdp.successors]
        q = np.where(greedy_mask, q, big)
        new = q.min(axis=1)
        if np.max(np.abs(new - v)) < tol:
            return new
        v = new
    return v


@dataclass
class EmbeddingReport:
    weight: Optional[float]
    scope: str
    step: float
    gamma: float
    states: int
    estimated_states: int
    checked: int
    seconds: float

    def to_json(self) -> dict:
        return dict(self.__dict__)


def compute_ethical_weight(
    config: EnvConfig,
    scope: str = "full",
    step: float = 0.01,
    gamma: float = 0.9,
    w_max: float = 10.0,
    tie_tol: float = 1e-6,
    check_tol: float = 1e-6,
    timeout: Optional[float] = None,
    seed: Optional[int] = None,
) -> EmbeddingReport:
    """Smallest grid weight whose scalarized optimal policies are all
    ethically optimal (at s0 for scope ``from_s0``, everywhere for
    ``full``)."""
    if scope not in ("full", "from_s0"):
        raise ConfigError(f"unknown embedding scope {scope!r}")
    start = time.monotonic()
    deadline = None if timeout is None else start + timeout
    estimated = estimate_state_space(config, seed=seed, deadline=deadline)
    mdp = build_mdp(config, deadline=deadline)
    v_eth_star = value_iteration(mdp, mdp.r_ethical, gamma)
    checked = (
        np.arange(len(mdp.keys)) if scope == "full" else np.array([mdp.s0])
    )
    weight = None
    v_warm = None
    n_checked = 0
    w = 0.0
    while w <= w_max + 1e-12:
        if deadline is not None and time.monotonic() > deadline:
            raise EmbeddingTimeout("weight search timed out")
        rewards = mdp.r_individual + w * mdp.r_ethical
        v = value_iteration(mdp, rewards, gamma, v0=v_warm)
        v_warm = v
        q = q_from_v(mdp, rewards, v, gamma)
        greedy = q >= q.max(axis=1, keepdims=True) - tie_tol
        v_adv = adversarial_ethical_value(mdp, greedy, gamma)
        n_checked += 1
        if np.all(v_adv[checked] >= v_eth_star[checked] - check_tol):
            weight = round(w, 10)
            break
        w = round(w + step, 10)
    return EmbeddingReport(
        weight=weight,
        scope=scope,
        step=step,
        gamma=gamma,
        states=len(mdp.keys),
        estimated_states=estimated,
        checked=n_checked,
        seconds=time.monotonic() - start,
    )


class ScalarizedEnv:
    """Environment view with the single reward r_individual + w * r_ethical
    (used to train the embedded baseline agent)."""

    def __init__(self, env: BridgeEnv, weight: float):
        self.env = env
        self.weight = weight

    def reset(self, **kwargs):
        return self.env.reset(**kwargs)

    def observe(self):
        return self.env.observe()

    def step(self, action: int):
        transition = self.env.step(action)
        scalar = transition.rewards["instr"] + self.weight * (
            transition.rewards["push"] + transition.rewards["resc"]
        )
        transition.rewards = dict(transition.rewards, scalar=scalar)
        return transition
