"""Bridge-world grid environment.

Two land masses separated by a horizontal water band, connected by
one-tile-wide vertical bridges.  An agent delivers to a goal tile on the
lower shore while persons cross bridges or stroll along the shore; persons
standing on a dangerous spot may fall into the water and eventually drown,
and an agent stepping onto an occupied bridge tile may push its occupant
into the water.

Actions (fixed serialization order): right, down, left, up, pullOut, idle.
Reward channels: instr (first goal entry), resc (water emptied by a
rescue), push (per displacement).  A cost channel mirrors pushes for risk
training.
"""
from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

RIGHT, DOWN, LEFT, UP, PULL_OUT, IDLE = range(6)
ACTION_NAMES = ("right", "down", "left", "up", "pullOut", "idle")
MOVE_DELTAS = {RIGHT: (1, 0), DOWN: (0, 1), LEFT: (-1, 0), UP: (0, -1)}
N_ACTIONS = 6

LABEL_BRIDGE = "B"  # some person stands on a bridge tile
LABEL_WATER = "D"  # some person is in the water

STROLLER_ID = 4

TERMINATION_PROFILES = ("goal", "rescue", "single", "none", "eval")
RESET_MODES = ("s0", "random", "random_walkable")


class ConfigError(ValueError):
    """Raised for invalid environment configuration."""


@dataclass(frozen=True)
class DrowningRule:
    mode: str = "fixed"  # fixed | stochastic | disabled
    t_d: int = 15
    p_drown: float = 0.0

    def __post_init__(self) -> None:
        if self.mode not in ("fixed", "stochastic", "disabled"):
            raise ConfigError(f"unknown drowning mode {self.mode!r}")


@dataclass(frozen=True)
class EnvConfig:
    name: str
    width: int
    height: int
    n_bridges: int
    start: tuple[int, int]
    goal: tuple[int, int]
    movers: tuple[int, ...] = ()
    static_persons: tuple[tuple[int, int], ...] = ()
    dangerous_spots: tuple[tuple[int, int], ...] = ()
    p_fall: float = 1.0
    p_push: float = 1.0
    drowning: DrowningRule = field(default_factory=DrowningRule)
    t_reappear: Optional[int] = 100
    cost_push: float = 1.0
    r_resc: float = 1.0
    r_push: float = -1.0
    truncation: int = 100

    @classmethod
    def from_json(cls, data: dict) -> "EnvConfig":
        try:
            drowning = DrowningRule(**data.get("drowning", {}))
            cfg = cls(
                name=data.get("name", "unnamed"),
                width=int(data["width"]),
                height=int(data["height"]),
                n_bridges=int(data["n_bridges"]),
                start=tuple(data["start"]),
                goal=tuple(data["goal"]),
                movers=tuple(data.get("movers", [])),
                static_persons=tuple(tuple(p) for p in data.get("static_persons", [])),
                dangerous_spots=tuple(
                    tuple(p) for p in data.get("dangerous_spots", [])
                ),
                p_fall=float(data.get("p_fall", 1.0)),
                p_push=float(data.get("p_push", 1.0)),
                drowning=drowning,
                t_reappear=data.get("t_reappear", 100),
                cost_push=float(data.get("cost_push", 1.0)),
                r_resc=float(data.get("rewards", {}).get("r_resc", 1.0)),
                r_push=float(data.get("rewards", {}).get("r_push", -1.0)),
                truncation=int(data.get("truncation", 100)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad environment config: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path: str | Path) -> "EnvConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_json(data)

    def validate(self) -> None:
        if self.width < 3 or self.height < 3:
            raise ConfigError("grid must be at least 3x3")
        if self.n_bridges < 1 or self.n_bridges > self.width:
            raise ConfigError("need between 1 and width bridges")
        layout = Layout(self)
        for pos in (self.start, self.goal):
            if not layout.in_grid(pos):
                raise ConfigError(f"position {pos} outside the grid")
        if self.start in layout.water or self.goal in layout.water:
            raise ConfigError("start and goal must not be water tiles")
        if self.goal[1] not in layout.lower_rows or self.goal in layout.bridges:
            raise ConfigError("goal must lie on the lower shore")
        for mover in self.movers:
            if mover != STROLLER_ID and not 1 <= mover <= self.n_bridges:
                raise ConfigError(
                    f"mover {mover} has no bridge (only {self.n_bridges} bridges)"
                )
        for pos in self.static_persons:
            if not layout.in_grid(pos):
                raise ConfigError(f"static person {pos} outside the grid")
        for pos in self.dangerous_spots:
            if not layout.in_grid(pos):
                raise ConfigError(f"dangerous spot {pos} outside the grid")
            if pos in layout.water:
                raise ConfigError(f"dangerous spot {pos} must be walkable")
        if not 0.0 <= self.p_fall <= 1.0 or not 0.0 <= self.p_push <= 1.0:
            raise ConfigError("probabilities must lie in [0, 1]")

    def is_deterministic(self) -> bool:
        return (
            self.p_fall in (0.0, 1.0)
            and self.p_push in (0.0, 1.0)
            and self.drowning.mode in ("fixed", "disabled")
        )


class Layout:
    """Static tile geometry derived from a config."""

    def __init__(self, config: "EnvConfig"):
        w, h = config.width, config.height
        band = math.ceil(h / 3)
        land_rows = h - band
        upper = land_rows - land_rows // 2
        self.water_top = upper
        self.water_bottom = upper + band - 1
        self.upper_rows = range(0, upper)
        self.lower_rows = range(self.water_bottom + 1, h)
        self.width, self.height = w, h
        self.bridge_cols = tuple(
            (2 * i + 1) * w // (2 * config.n_bridges)
            for i in range(config.n_bridges)
        )
        self.bridges: set[tuple[int, int]] = set()
        self.water: set[tuple[int, int]] = set()
        for y in range(self.water_top, self.water_bottom + 1):
            for x in range(w):
                if x in self.bridge_cols:
                    self.bridges.add((x, y))
                else:
                    self.water.add((x, y))
        self.land: set[tuple[int, int]] = {
            (x, y)
            for y in list(self.upper_rows) + list(self.lower_rows)
            for x in range(w)
        }
        self.walkable = self.land | self.bridges

    def in_grid(self, pos: Sequence[int]) -> bool:
        x, y = pos
        return 0 <= x < self.width and 0 <= y < self.height

    def bridge_column_of(self, pos: tuple[int, int]) -> Optional[int]:
        return pos[0] if pos in self.bridges else None

    def flat(self, pos: tuple[int, int]) -> int:
        return pos[1] * self.width + pos[0]

    def unflat(self, idx: int) -> tuple[int, int]:
        return idx % self.width, idx // self.width

    def nearest(
        self, origin: tuple[int, int], candidates: Iterable[tuple[int, int]]
    ) -> Optional[tuple[int, int]]:
        """Nearest candidate by Manhattan distance, ties west then north."""
        best = None
        for pos in candidates:
            d = abs(pos[0] - origin[0]) + abs(pos[1] - origin[1])
            key = (d, pos[0], pos[1])
            if best is None or key < best[0]:
                best = (key, pos)
        return best[1] if best else None


def mover_trajectory(config: EnvConfig, layout: Layout, mover_id: int) -> tuple:
    """Waypoints for a mover: bridge crossers walk straight down from the
    land tile above their bridge to the bottom edge; the stroller walks
    left to right along the lower-shore row holding a dangerous spot (the
    first lower-shore row when none does)."""
    if mover_id == STROLLER_ID:
        rows = [
            y
            for y in layout.lower_rows
            if any(s[1] == y for s in config.dangerous_spots)
        ]
        row = rows[0] if rows else list(layout.lower_rows)[0]
        return tuple((x, row) for x in range(layout.width))
    col = layout.bridge_cols[mover_id - 1]
    return tuple((col, y) for y in range(layout.water_top - 1, layout.height))


@dataclass
class Person:
    id: int
    kind: str  # mover | static
    traj: Optional[tuple] = None
    traj_idx: int = 0
    pos: Optional[tuple[int, int]] = None
    in_water: bool = False
    in_water_since: int = 0
    fall_idx: int = -1
    gone: bool = False
    drowned: bool = False
    reappear_at: Optional[int] = None
    rejoin_idx: Optional[int] = None

    def key(self) -> tuple:
        return (
            self.id,
            self.pos,
            self.traj_idx,
            self.in_water,
            self.in_water_since if self.in_water else 0,
            self.gone,
            self.drowned,
            self.rejoin_idx,
        )


@dataclass
class Transition:
    action: int
    rewards: dict[str, float]
    cost: float
    terminated: bool
    truncated: bool
    events: dict[str, list[int]]
    labels: frozenset[str]


class BridgeEnv:
    """Mutable simulator; ``reset`` then ``step`` through an episode."""

    def __init__(
        self,
        config: EnvConfig,
        seed: Optional[int] = None,
        termination: str = "goal",
        include_drowning_timer: bool = False,
        view_window: Optional[int] = None,
    ):
        if termination not in TERMINATION_PROFILES:
            raise ConfigError(f"unknown termination profile {termination!r}")
        self.config = config
        self.layout = Layout(config)
        self.termination = termination
        self.include_drowning_timer = include_drowning_timer
        self.view_window = view_window
        self.rng = np.random.default_rng(seed)
        self.persons: list[Person] = []
        self.agent_pos = config.start
        self.t = 0
        self.goal_entered = False
        self._spots = set(config.dangerous_spots)
        self.reset()

    # --- resets ---------------------------------------------------------

    def _fresh_persons(self) -> list[Person]:
        persons = []
        for mover in sorted(self.config.movers):
            traj = mover_trajectory(self.config, self.layout, mover)
            persons.append(Person(mover, "mover", traj=traj, pos=traj[0]))
        next_id = max(list(self.config.movers) + [STROLLER_ID]) + 1
        for pos in self.config.static_persons:
            in_water = pos in self.layout.water
            persons.append(
                Person(next_id, "static", pos=pos, in_water=in_water)
            )
            next_id += 1
        return persons

    def reset(
        self, mode: str = "s0", state: Optional[dict] = None
    ) -> tuple:
        if state is not None:
            return self._reset_explicit(state)
        if mode not in RESET_MODES:
            raise ConfigError(f"unknown reset mode {mode!r}")
        self.persons = self._fresh_persons()
        self.t = 0
        self.goal_entered = False
        if mode == "s0":
            self.agent_pos = self.config.start
        else:
            tiles = sorted(
                self.layout.land if mode == "random" else self.layout.walkable
            )
            self.agent_pos = tiles[self.rng.integers(len(tiles))]
            for person in self.persons:
                if person.kind == "mover":
                    idx = int(self.rng.integers(len(person.traj)))
                    person.traj_idx = idx
                    person.pos = person.traj[idx]
        return self.observe()

    def _reset_explicit(self, state: dict) -> tuple:
        self.persons = self._fresh_persons()
        self.t = int(state.get("t", 0))
        self.goal_entered = bool(state.get("goal_entered", False))
        self.agent_pos = tuple(state["agent"])
        for entry in state.get("persons", []):
            person = self.person_by_id(int(entry["id"]))
            if entry.get("gone"):
                person.gone = True
                person.pos = None
                person.reappear_at = None
                continue
            person.pos = tuple(entry["pos"])
            person.traj_idx = int(entry.get("traj_idx", person.traj_idx))
            rj = entry.get("rejoin_idx")
            person.rejoin_idx = int(rj) if rj is not None else None
            person.in_water = bool(
                entry.get("in_water", person.pos in self.layout.water)
            )
            person.in_water_since = int(entry.get("in_water_since", 0))
            if person.in_water:
                person.fall_idx = int(entry.get("fall_idx", person.traj_idx))
        return self.observe()

    def person_by_id(self, pid: int) -> Person:
        for person in self.persons:
            if person.id == pid:
                return person
        raise KeyError(f"no person with id {pid}")

    # --- state snapshots (for model building) ----------------------------

    def snapshot(self) -> dict:
        return {
            "agent": self.agent_pos,
            "t": self.t,
            "goal_entered": self.goal_entered,
            "persons": copy.deepcopy(self.persons),
        }

    def restore(self, snap: dict) -> None:
        self.agent_pos = snap["agent"]
        self.t = snap["t"]
        self.goal_entered = snap["goal_entered"]
        self.persons = copy.deepcopy(snap["persons"])

    def state_key(self) -> tuple:
        return (self.agent_pos, tuple(p.key() for p in self.persons))

    # --- observations -----------------------------------------------------

    @property
    def absent_code(self) -> int:
        return self.layout.width * self.layout.height

    def observe(self) -> tuple:
        """Flat observation: 1D tile indices, agent first then persons by
        id; absent persons encode as width*height.  Optionally appends
        drowning timers (-1 when not in the water) and masks entities
        outside the agent's view window."""
        out = [self.layout.flat(self.agent_pos)]
        for person in self.persons:
            if person.pos is None:
                out.append(self.absent_code)
            elif self.view_window is not None and (
                max(
                    abs(person.pos[0] - self.agent_pos[0]),
                    abs(person.pos[1] - self.agent_pos[1]),
                )
                > self.view_window
            ):
                out.append(self.absent_code)
            else:
                out.append(self.layout.flat(person.pos))
        if self.include_drowning_timer:
            for person in self.persons:
                out.append(person.in_water_since if person.in_water else -1)
        return tuple(out)

    def decode_observation(self, obs: Sequence[int]) -> dict:
        """Positions back from a flat observation (None for absent)."""
        n = 1 + len(self.persons)
        decoded = {
            "agent": self.layout.unflat(obs[0]),
            "persons": {},
        }
        for person, code in zip(self.persons, obs[1:n]):
            decoded["persons"][person.id] = (
                None if code == self.absent_code else self.layout.unflat(code)
            )
        return decoded

    def observe_grid(self) -> np.ndarray:
        """One-hot channel-per-entity grid: channel 0 agent, then persons."""
        h, w = self.layout.height, self.layout.width
        grid = np.zeros((1 + len(self.persons), h, w), dtype=np.int8)
        grid[0, self.agent_pos[1], self.agent_pos[0]] = 1
        for i, person in enumerate(self.persons, start=1):
            if person.pos is not None:
                grid[i, person.pos[1], person.pos[0]] = 1
        return grid

    # --- labels -----------------------------------------------------------

    def labels(self) -> frozenset[str]:
        out = set()
        for person in self.persons:
            if person.pos is None:
                continue
            if person.in_water:
                out.add(LABEL_WATER)
            elif person.pos in self.layout.bridges:
                out.add(LABEL_BRIDGE)
        return frozenset(out)

    def water_persons(self) -> list[Person]:
        return [p for p in self.persons if p.in_water and p.pos is not None]

    # --- dynamics -----------------------------------------------------------

    def _fall_target(self, pos: tuple[int, int]) -> tuple[int, int]:
        return self.layout.nearest(pos, self.layout.water)

    def _push_target(self, bridge_pos: tuple[int, int]) -> tuple[int, int]:
        west = (bridge_pos[0] - 1, bridge_pos[1])
        if west in self.layout.water:
            return west
        east = (bridge_pos[0] + 1, bridge_pos[1])
        if east in self.layout.water:
            return east
        raise ConfigError(f"bridge tile {bridge_pos} has no adjacent water")

    def _chance(self, p: float) -> bool:
        if p >= 1.0:
            return True
        if p <= 0.0:
            return False
        return bool(self.rng.random() < p)

    def _rescue(self, rescuer_pos: tuple[int, int]) -> Optional[Person]:
        adjacent = [
            p
            for p in self.water_persons()
            if abs(p.pos[0] - rescuer_pos[0]) + abs(p.pos[1] - rescuer_pos[1]) == 1
        ]
        if not adjacent:
            return None
        # Earliest fallen first: longest time in the water, ties by id.
        adjacent.sort(key=lambda p: (-p.in_water_since, p.id))
        person = adjacent[0]
        water_pos = person.pos
        person.in_water = False
        person.in_water_since = 0
        if person.kind == "static":
            person.pos = self.layout.nearest(water_pos, self.layout.land)
        else:
            remaining = [
                person.traj[i]
                for i in range(person.fall_idx + 1, len(person.traj))
            ]
            if not remaining:
                self._exit_person(person)
            else:
                # Placed on the nearest land tile; the person then walks
                # back to the nearest remaining waypoint and resumes the
                # trajectory from there.
                land_pos = self.layout.nearest(water_pos, self.layout.land)
                person.pos = land_pos
                target = self.layout.nearest(land_pos, remaining)
                person.rejoin_idx = person.traj.index(
                    target, person.fall_idx + 1
                )
        return person

    def _rejoin_step(self, person: Person) -> None:
        """One walking step toward the trajectory waypoint the person is
        rejoining; horizontal first, swapping axes when the preferred step
        is not walkable."""
        target = person.traj[person.rejoin_idx]
        if person.pos == target:
            person.traj_idx = person.rejoin_idx
            person.rejoin_idx = None
            return
        x, y = person.pos
        dx = (target[0] > x) - (target[0] < x)
        dy = (target[1] > y) - (target[1] < y)
        steps = []
        if dx:
            steps.append((x + dx, y))
        if dy:
            steps.append((x, y + dy))
        for nxt in steps:
            if nxt in self.layout.walkable:
                person.pos = nxt
                break
        if person.pos == target:
            person.traj_idx = person.rejoin_idx
            person.rejoin_idx = None

    def _exit_person(self, person: Person) -> None:
        person.pos = None
        person.gone = True
        person.rejoin_idx = None
        if person.kind == "mover" and self.config.t_reappear is not None:
            person.reappear_at = self.t + self.config.t_reappear
        else:
            person.reappear_at = None

    def step(self, action: int) -> Transition:
        if not 0 <= action < N_ACTIONS:
            raise ValueError(f"bad action {action}")
        labels_before = self.labels()
        events: dict[str, list[int]] = {
            "pushed": [],
            "fell": [],
            "drowned": [],
            "rescued": [],
        }
        rewards = {"instr": 0.0, "resc": 0.0, "push": 0.0}
        cost = 0.0
        prev_pos = self.agent_pos

        # Phase 1: agent action.  Water tiles are not walkable for the agent;
        # a collision with a person on a bridge either pushes the person into
        # the water (probability p_push) or blocks the move entirely, so each
        # collision is a single push attempt.
        if action in MOVE_DELTAS:
            dx, dy = MOVE_DELTAS[action]
            new = (self.agent_pos[0] + dx, self.agent_pos[1] + dy)
            if new in self.layout.walkable:
                occupant = None
                if new != prev_pos and new in self.layout.bridges:
                    occupant = next(
                        (
                            p
                            for p in self.persons
                            if p.pos == new and not p.in_water
                        ),
                        None,
                    )
                if occupant is None:
                    self.agent_pos = new
                elif self._chance(self.config.p_push):
                    occupant.pos = self._push_target(new)
                    occupant.in_water = True
                    occupant.in_water_since = 0
                    occupant.fall_idx = (
                        occupant.traj_idx
                        if occupant.rejoin_idx is None
                        else occupant.rejoin_idx - 1
                    )
                    occupant.rejoin_idx = None
                    events["pushed"].append(occupant.id)
                    rewards["push"] += self.config.r_push
                    cost += self.config.cost_push
                    self.agent_pos = new
        elif action == PULL_OUT:
            had_water = bool(self.water_persons())
            rescued = self._rescue(self.agent_pos)
            if rescued is not None:
                events["rescued"].append(rescued.id)
                if had_water and not self.water_persons():
                    rewards["resc"] += self.config.r_resc

        # Phase 2: movers advance; a person on a dangerous spot falls in.
        for person in self.persons:
            if (
                person.kind != "mover"
                or person.pos is None
                or person.in_water
            ):
                continue
            if person.pos in self._spots and self._chance(self.config.p_fall):
                person.fall_idx = (
                    person.traj_idx
                    if person.rejoin_idx is None
                    else person.rejoin_idx - 1
                )
                person.rejoin_idx = None
                person.pos = self._fall_target(person.pos)
                person.in_water = True
                person.in_water_since = 0
                events["fell"].append(person.id)
                continue
            if person.rejoin_idx is not None:
                self._rejoin_step(person)
                continue
            if person.traj_idx + 1 >= len(person.traj):
                self._exit_person(person)
            else:
                person.traj_idx += 1
                person.pos = person.traj[person.traj_idx]

        # Phase 3: drowning.
        rule = self.config.drowning
        for person in self.water_persons():
            person.in_water_since += 1
            drowns = False
            if rule.mode == "fixed":
                drowns = person.in_water_since >= rule.t_d
            elif rule.mode == "stochastic":
                drowns = self._chance(rule.p_drown)
            if drowns:
                person.pos = None
                person.in_water = False
                person.gone = True
                person.drowned = True
                person.reappear_at = None
                events["drowned"].append(person.id)

        # Phase 4: reappearance.
        for person in self.persons:
            if (
                person.gone
                and not person.drowned
                and person.reappear_at is not None
                and self.t + 1 >= person.reappear_at
            ):
                person.gone = False
                person.reappear_at = None
                person.traj_idx = 0
                person.pos = person.traj[0]
                person.in_water = False
                person.rejoin_idx = None

        # Phase 5: instrumental reward on first goal entry.
        entered_goal = (
            self.agent_pos == self.config.goal and prev_pos != self.config.goal
        )
        if entered_goal and not self.goal_entered:
            rewards["instr"] = 1.0
            self.goal_entered = True

        self.t += 1
        terminated = self._terminated(labels_before, events)
        truncated = not terminated and self.t >= self.config.truncation
        return Transition(
            action=action,
            rewards=rewards,
            cost=cost,
            terminated=terminated,
            truncated=truncated,
            events=events,
            labels=labels_before,
        )

    def _terminated(
        self, labels_before: frozenset[str], events: dict[str, list[int]]
    ) -> bool:
        if self.termination == "goal":
            return self.agent_pos == self.config.goal
        if self.termination == "rescue":
            return LABEL_WATER in labels_before and not self.water_persons()
        if self.termination == "single":
            return True
        if self.termination == "eval":
            return self.goal_entered and not self.water_persons()
        return False

    # --- rendering ---------------------------------------------------------

    def render_text(self) -> str:
        """Text grid: L land, W water, = bridge, A agent, p person,
        d person in the water, G goal; active labels printed top-left."""
        h, w = self.layout.height, self.layout.width
        grid = [["L"] * w for _ in range(h)]
        for x, y in self.layout.water:
            grid[y][x] = "W"
        for x, y in self.layout.bridges:
            grid[y][x] = "="
        gx, gy = self.config.goal
        grid[gy][gx] = "G"
        for person in self.persons:
            if person.pos is None:
                continue
            x, y = person.pos
            grid[y][x] = "d" if person.in_water else "p"
        ax, ay = self.agent_pos
        grid[ay][ax] = "A"
        header = "labels: " + (",".join(sorted(self.labels())) or "-")
        return header + "\n" + "\n".join("".join(row) for row in grid) + "\n"

    def render_raster(self):  # pragma: no cover - optional dependency
        """H x W x 3 uint8 raster of the current state (for image export)."""
        colors = {
            "L": (120, 190, 90),
            "W": (60, 110, 220),
            "=": (160, 120, 70),
            "G": (250, 220, 60),
            "p": (240, 240, 240),
            "d": (230, 60, 60),
            "A": (20, 20, 20),
        }
        text = self.render_text().splitlines()[1:]
        h, w = self.layout.height, self.layout.width
        img = np.zeros((h, w, 3), dtype=np.uint8)
        for y in range(h):
            for x in range(w):
                img[y, x] = colors[text[y][x]]
        return img


def conflict_state(config: EnvConfig) -> dict:
    """Explicit reset dict for the canonical two-obligation state: the
    agent directly above a person on the first bridge's top tile while the
    stroller is in the water at its fall target."""
    layout = Layout(config)
    col = layout.bridge_cols[0]
    crossers = [m for m in config.movers if m != STROLLER_ID]
    if not crossers or STROLLER_ID not in config.movers:
        raise ConfigError("conflict state needs a bridge crosser and a stroller")
    crosser = min(crossers)
    traj = mover_trajectory(config, layout, crosser)
    bridge_top = (layout.bridge_cols[crosser - 1], layout.water_top)
    stroller_traj = mover_trajectory(config, layout, STROLLER_ID)
    spot = next(s for s in config.dangerous_spots if s in stroller_traj)
    target = Layout(config).nearest(spot, layout.water)
    return {
        "agent": [bridge_top[0], layout.water_top - 1],
        "persons": [
            {
                "id": crosser,
                "pos": list(bridge_top),
                "traj_idx": traj.index(bridge_top),
            },
            {
                "id": STROLLER_ID,
                "pos": list(target),
                "in_water": True,
                "in_water_since": 0,
                "fall_idx": stroller_traj.index(spot),
            },
        ],
    }
