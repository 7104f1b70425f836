"""Value-based learners, risk estimation and action shielding.

Two interchangeable backends implement the Q-function: a tabular
dictionary and a small feedforward network trained with an experience
replay buffer and a periodically synchronized target network.  Both expose
a fit/predict style surface: ``q_values(obs)``, ``greedy(obs)``,
``update(...)`` plus ``get_params()`` and JSON round-trip save/load.

The risk model is a contextual bandit over the same observation space:
trained adversarially on single-step episodes, it regresses the immediate
push cost of each action and induces a shield that filters actions whose
estimated risk exceeds a threshold.
"""
from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .env import N_ACTIONS, BridgeEnv, DrowningRule


@dataclass
class Hyperparams:
    alpha: float = 0.5  # tabular step size
    lr: float = 0.001  # network learning rate
    gamma: float = 0.9
    epsilon_start: float = 1.0
    epsilon_end: float = 0.05
    epsilon_fraction: float = 0.8  # fraction of episodes spent decaying
    replay_size: int = 1000
    batch_size: int = 32
    target_sync: int = 1000  # steps between target network syncs
    hidden: int = 64

    def epsilon(self, episode: int, episodes: int) -> float:
        horizon = max(1, int(self.epsilon_fraction * episodes))
        frac = min(1.0, episode / horizon)
        return float(
            self.epsilon_start
            * (self.epsilon_end / self.epsilon_start) ** frac
        )

    def get_params(self) -> dict:
        return dict(self.__dict__)


class TabularQ:
    """Dictionary Q-function over flat observations."""

    backend = "tabular"

    def __init__(self, hp: Optional[Hyperparams] = None, initial: float = 0.0):
        self.hp = hp or Hyperparams()
        self.initial = initial
        self.table: dict[tuple, np.ndarray] = {}

    def q_values(self, obs: tuple) -> np.ndarray:
        row = self.table.get(tuple(obs))
        if row is None:
            return np.full(N_ACTIONS, self.initial)
        return row

    def greedy(self, obs: tuple) -> int:
        return int(np.argmax(self.q_values(obs)))

    def ranking(self, obs: tuple) -> list[int]:
        q = self.q_values(obs)
        return sorted(range(N_ACTIONS), key=lambda a: (-q[a], a))

    def update(
        self, obs: tuple, action: int, reward: float, next_obs: tuple, done: bool
    ) -> None:
        row = self.table.setdefault(
            tuple(obs), np.full(N_ACTIONS, self.initial)
        )
        target = reward
        if not done:
            target += self.hp.gamma * float(np.max(self.q_values(next_obs)))
        row[action] += self.hp.alpha * (target - row[action])

    def end_episode(self) -> None:
        pass

    def get_params(self) -> dict:
        return {"backend": self.backend, **self.hp.get_params()}

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "hyperparams": self.hp.get_params(),
            "initial": self.initial,
            "q": {
                ",".join(map(str, key)): row.tolist()
                for key, row in self.table.items()
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "TabularQ":
        model = cls(Hyperparams(**data["hyperparams"]), data.get("initial", 0.0))
        for key, row in data["q"].items():
            obs = tuple(int(v) for v in key.split(",")) if key else ()
            model.table[obs] = np.asarray(row, dtype=float)
        return model


class MlpQ:
    """One-hidden-layer network Q-function with replay and target weights."""

    backend = "mlp"

    def __init__(
        self,
        obs_dim: int,
        scale: float,
        hp: Optional[Hyperparams] = None,
        seed: Optional[int] = None,
    ):
        self.hp = hp or Hyperparams()
        self.obs_dim = obs_dim
        self.scale = float(scale)
        rng = np.random.default_rng(seed)
        h = self.hp.hidden
        self.w1 = rng.normal(0, 1.0 / np.sqrt(obs_dim), (obs_dim, h))
        self.b1 = np.zeros(h)
        self.w2 = rng.normal(0, 1.0 / np.sqrt(h), (h, N_ACTIONS))
        self.b2 = np.zeros(N_ACTIONS)
        self._sync_target()
        self.replay: list[tuple] = []
        self._replay_pos = 0
        self._steps = 0
        self.rng = rng

    def _sync_target(self) -> None:
        self.t_w1, self.t_b1 = self.w1.copy(), self.b1.copy()
        self.t_w2, self.t_b2 = self.w2.copy(), self.b2.copy()

    def _encode(self, obs: Sequence[float]) -> np.ndarray:
        return np.asarray(obs, dtype=float) / self.scale

    def _forward(self, x: np.ndarray, target: bool = False):
        w1, b1 = (self.t_w1, self.t_b1) if target else (self.w1, self.b1)
        w2, b2 = (self.t_w2, self.t_b2) if target else (self.w2, self.b2)
        hidden = np.maximum(x @ w1 + b1, 0.0)
        return hidden @ w2 + b2, hidden

    def q_values(self, obs: tuple) -> np.ndarray:
        q, _ = self._forward(self._encode(obs)[None, :])
        return q[0]

    def greedy(self, obs: tuple) -> int:
        return int(np.argmax(self.q_values(obs)))

    def ranking(self, obs: tuple) -> list[int]:
        q = self.q_values(obs)
        return sorted(range(N_ACTIONS), key=lambda a: (-q[a], a))

    def update(
        self, obs: tuple, action: int, reward: float, next_obs: tuple, done: bool
    ) -> None:
        item = (tuple(obs), action, reward, tuple(next_obs), done)
        if len(self.replay) < self.hp.replay_size:
            self.replay.append(item)
        else:
            self.replay[self._replay_pos] = item
            self._replay_pos = (self._replay_pos + 1) % self.hp.replay_size
        self._steps += 1
        if len(self.replay) >= self.hp.batch_size:
            self._train_batch()
        if self._steps % self.hp.target_sync == 0:
            self._sync_target()

    def _train_batch(self) -> None:
        idx = self.rng.integers(len(self.replay), size=self.hp.batch_size)
        batch = [self.replay[i] for i in idx]
        x = np.stack([self._encode(b[0]) for b in batch])
        nx = np.stack([self._encode(b[3]) for b in batch])
        actions = np.array([b[1] for b in batch])
        rewards = np.array([b[2] for b in batch], dtype=float)
        done = np.array([b[4] for b in batch])
        target_q, _ = self._forward(nx, target=True)
        targets = rewards + np.where(
            done, 0.0, self.hp.gamma * target_q.max(axis=1)
        )
        q, hidden = self._forward(x)
        grad_q = np.zeros_like(q)
        rows = np.arange(len(batch))
        grad_q[rows, actions] = (q[rows, actions] - targets) / len(batch)
        grad_w2 = hidden.T @ grad_q
        grad_b2 = grad_q.sum(axis=0)
        grad_h = (grad_q @ self.w2.T) * (hidden > 0)
        grad_w1 = x.T @ grad_h
        grad_b1 = grad_h.sum(axis=0)
        self.w2 -= self.hp.lr * grad_w2
        self.b2 -= self.hp.lr * grad_b2
        self.w1 -= self.hp.lr * grad_w1
        self.b1 -= self.hp.lr * grad_b1

    def end_episode(self) -> None:
        pass

    def get_params(self) -> dict:
        return {
            "backend": self.backend,
            "obs_dim": self.obs_dim,
            "scale": self.scale,
            **self.hp.get_params(),
        }

    def to_json(self) -> dict:
        return {
            "backend": self.backend,
            "hyperparams": self.hp.get_params(),
            "obs_dim": self.obs_dim,
            "scale": self.scale,
            "weights": {
                "w1": self.w1.tolist(),
                "b1": self.b1.tolist(),
                "w2": self.w2.tolist(),
                "b2": self.b2.tolist(),
            },
        }

    @classmethod
    def from_json(cls, data: dict) -> "MlpQ":
        model = cls(
            data["obs_dim"], data["scale"], Hyperparams(**data["hyperparams"])
        )
        weights = data["weights"]
        model.w1 = np.asarray(weights["w1"])
        model.b1 = np.asarray(weights["b1"])
        model.w2 = np.asarray(weights["w2"])
        model.b2 = np.asarray(weights["b2"])
        model._sync_target()
        return model


QModel = TabularQ | MlpQ


class WaterFocusQ:
    """Wraps a Q-model with a rescue-relevant observation view: person
    entries whose tile is not a water tile are masked to the absent code,
    so the policy conditions only on the agent and the persons in the
    water.  The wrapped model sees the masked observation everywhere."""

    def __init__(self, inner: QModel, water_codes: set[int], absent: int):
        self.inner = inner
        self.water_codes = set(int(c) for c in water_codes)
        self.absent = int(absent)
        self.hp = inner.hp

    @property
    def backend(self) -> str:
        return f"water_focus:{self.inner.backend}"

    def view(self, obs: tuple) -> tuple:
        masked = [int(obs[0])]
        for code in obs[1:]:
            code = int(code)
            masked.append(code if code in self.water_codes else self.absent)
        return tuple(masked)

    def q_values(self, obs: tuple) -> np.ndarray:
        return self.inner.q_values(self.view(obs))

    def greedy(self, obs: tuple) -> int:
        return self.inner.greedy(self.view(obs))

    def ranking(self, obs: tuple) -> list[int]:
        return self.inner.ranking(self.view(obs))

    def update(
        self, obs: tuple, action: int, reward: float, next_obs: tuple,
        terminal: bool,
    ) -> None:
        self.inner.update(
            self.view(obs), action, reward, self.view(next_obs), terminal
        )

    def end_episode(self) -> None:
        self.inner.end_episode()

    def to_json(self) -> dict:
        return {
            "backend": "water_focus",
            "water_codes": sorted(self.water_codes),
            "absent": self.absent,
            "inner": self.inner.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "WaterFocusQ":
        inner = _model_from_json(data["inner"])
        return cls(inner, set(data["water_codes"]), data["absent"])

    @classmethod
    def for_env(cls, inner: QModel, env: BridgeEnv) -> "WaterFocusQ":
        codes = {env.layout.flat(pos) for pos in env.layout.water}
        return cls(inner, codes, env.absent_code)


def save_model(model: QModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_json()) + "\n")


def _model_from_json(data: dict) -> QModel:
    if data["backend"] == "tabular":
        return TabularQ.from_json(data)
    if data["backend"] == "mlp":
        return MlpQ.from_json(data)
    if data["backend"] == "water_focus":
        return WaterFocusQ.from_json(data)
    raise ValueError(f"unknown model backend {data['backend']!r}")


def load_model(path: str | Path) -> QModel:
    return _model_from_json(json.loads(Path(path).read_text()))


@dataclass
class RiskModel:
    """Per-action push-risk estimates with a safety threshold."""

    model: QModel
    threshold: float = 0.8

    def risk(self, obs: tuple) -> np.ndarray:
        return self.model.q_values(obs)

    def safe_set(self, obs: tuple) -> set[int]:
        risk = self.risk(obs)
        return {a for a in range(N_ACTIONS) if risk[a] <= self.threshold}

    def to_json(self) -> dict:
        return {"threshold": self.threshold, "model": self.model.to_json()}

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> "RiskModel":
        data = json.loads(Path(path).read_text())
        model_data = data["model"]
        if model_data["backend"] == "tabular":
            model = TabularQ.from_json(model_data)
        else:
            model = MlpQ.from_json(model_data)
        return cls(model=model, threshold=data["threshold"])


def shield_filter(
    ranked_actions: Sequence[int], shields: Sequence[RiskModel], obs: tuple
) -> int:
    """Highest-ranked action that every shield considers safe; when no
    action is safe, the action minimizing the worst-case risk."""
    if not shields:
        return ranked_actions[0]
    safe = set(range(N_ACTIONS))
    for shield in shields:
        safe &= shield.safe_set(obs)
    for action in ranked_actions:
        if action in safe:
            return action
    worst = np.max(np.stack([s.risk(obs) for s in shields]), axis=0)
    return min(ranked_actions, key=lambda a: (worst[a], ranked_actions.index(a)))


@dataclass
class TrainingCurve:
    episodes: list[dict] = field(default_factory=list)

    def add(self, episode: int, ret: float, epsilon: float, steps: int) -> None:
        self.episodes.append(
            {
                "episode": episode,
                "return": ret,
                "epsilon": epsilon,
                "steps": steps,
            }
        )

    def to_csv(self) -> str:
        lines = ["episode,return,epsilon,steps"]
        for row in self.episodes:
            lines.append(
                f"{row['episode']},{row['return']},{row['epsilon']},{row['steps']}"
            )
        return "\n".join(lines) + "\n"


def _make_model(
    backend: str, env: BridgeEnv, hp: Hyperparams, seed: Optional[int]
) -> QModel:
    if backend == "tabular":
        return TabularQ(hp)
    if backend == "mlp":
        obs_dim = len(env.observe())
        return MlpQ(obs_dim, scale=float(env.absent_code), hp=hp, seed=seed)
    raise ValueError(f"unknown backend {backend!r}")


def _reward_of(transition, objective: str, weight: float) -> float:
    r = transition.rewards
    if objective == "instr":
        return r["instr"]
    if objective == "resc":
        return r["resc"]
    if objective == "scalar":
        return r["instr"] + weight * (r["push"] + r["resc"])
    raise ValueError(f"unknown objective {objective!r}")


def rescue_training_env(config, seed: Optional[int] = None) -> BridgeEnv:
    """Environment variant used to train rescue policies: drowning and
    reappearance are disabled so the default observation (positions only,
    no timers) is Markov and tabular learning converges to the
    shortest-path rescue values.  Rescue-profile termination."""
    cfg = dataclasses.replace(
        config, drowning=DrowningRule("disabled"), t_reappear=None
    )
    return BridgeEnv(cfg, seed=seed, termination="rescue")


def train_value_policy(
    env: BridgeEnv,
    objective: str,
    episodes: int,
    backend: str = "tabular",
    hp: Optional[Hyperparams] = None,
    shield: Optional[RiskModel] = None,
    weight: float = 0.0,
    seed: Optional[int] = None,
    reset_mode: str = "random",
    water_focus: bool = False,
) -> tuple[QModel, TrainingCurve]:
    """Epsilon-greedy Q-learning of one reward channel.  With a shield,
    both explored and greedy actions are filtered before execution, so
    training never executes an action the shield flags unsafe.  With
    water_focus, the learner conditions on the rescue-relevant view of the
    observation (agent position plus persons in the water)."""
    hp = hp or Hyperparams()
    rng = np.random.default_rng(seed)
    model = _make_model(backend, env, hp, seed)
    if water_focus:
        model = WaterFocusQ.for_env(model, env)
    curve = TrainingCurve()
    for episode in range(episodes):
        obs = env.reset(mode=reset_mode)
        epsilon = hp.epsilon(episode, episodes)
        ret, steps = 0.0, 0
        while True:
            if rng.random() < epsilon:
                ranked = list(rng.permutation(N_ACTIONS))
            else:
                ranked = model.ranking(obs)
            if shield is not None:
                action = shield_filter(ranked, [shield], obs)
            else:
                action = ranked[0]
            transition = env.step(action)
            next_obs = env.observe()
            reward = _reward_of(transition, objective, weight)
            model.update(
                obs, action, reward, next_obs, transition.terminated
            )
            ret += reward
            steps += 1
            obs = next_obs
            if transition.terminated or transition.truncated:
                break
        model.end_episode()
        curve.add(episode, ret, epsilon, steps)
    return model, curve


def train_risk_model(
    env: BridgeEnv,
    resets: int,
    backend: str = "tabular",
    hp: Optional[Hyperparams] = None,
    threshold: float = 0.8,
    epsilon: float = 0.5,
    seed: Optional[int] = None,
) -> tuple[RiskModel, TrainingCurve]:
    """Adversarial contextual bandit: single-step episodes from randomized
    states (agent anywhere walkable, persons anywhere on their reachable
    supports), the adversary picks the estimated-riskiest action and the
    model regresses the observed push cost (discount plays no role)."""
    hp = hp or Hyperparams(alpha=0.7)
    rng = np.random.default_rng(seed)
    model = _make_model(backend, env, hp, seed)
    curve = TrainingCurve()
    supports = person_supports(env)
    for reset in range(resets):
        obs = _random_risk_state(env, supports, rng)
        if rng.random() < epsilon:
            action = int(rng.integers(N_ACTIONS))
        else:
            risk = model.q_values(obs)
            best = np.flatnonzero(risk == risk.max())
            action = int(rng.choice(best))
        transition = env.step(action)
        model.update(obs, action, transition.cost, env.observe(), True)
        curve.add(reset, transition.cost, epsilon, 1)
    return RiskModel(model=model, threshold=threshold), curve


def person_supports(env: BridgeEnv) -> dict[int, list[Optional[dict]]]:
    """Reachable single-person configurations: every trajectory waypoint,
    every fall/push water tile, and absence."""
    supports: dict[int, list[Optional[dict]]] = {}
    layout = env.layout
    for person in env._fresh_persons():
        states: list[Optional[dict]] = []
        if person.kind == "static":
            states.append({"pos": list(person.pos)})
        else:
            for idx, pos in enumerate(person.traj):
                states.append({"pos": list(pos), "traj_idx": idx})
            water: set = set()
            for idx, pos in enumerate(person.traj):
                if pos in env._spots:
                    water.add((layout.nearest(pos, layout.water), idx))
                if pos in layout.bridges:
                    water.add((env._push_target(pos), idx))
            for pos, idx in sorted(water):
                states.append(
                    {
                        "pos": list(pos),
                        "in_water": True,
                        "in_water_since": 0,
                        "fall_idx": idx,
                        "traj_idx": idx,
                    }
                )
            states.append(None)  # absent
        supports[person.id] = states
    return supports


def _random_risk_state(
    env: BridgeEnv, supports: dict[int, list[Optional[dict]]], rng
) -> tuple:
    tiles = sorted(env.layout.walkable)
    agent = tiles[rng.integers(len(tiles))]
    persons = []
    for pid, states in supports.items():
        state = states[rng.integers(len(states))]
        if state is None:
            persons.append({"id": pid, "gone": True})
        else:
            persons.append({"id": pid, **state})
    return env.reset(state={"agent": list(agent), "persons": persons})
