"""Command-line workbench.

Verbs: train, teach, eval, embed, render, graph, risk-csv, replay-feedback.
Global flags: --seed, --config (fixture name or JSON path), --out, --jobs,
--format {json,table}.

Exit codes: 0 success, 2 configuration/usage error, 3 timeout,
4 inconsistent reasoning state.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .agent import AgentBundle, ObligationConsistencyError, evaluate, run_episode
from .embedding import EmbeddingTimeout, compute_ethical_weight
from .env import ACTION_NAMES, BridgeEnv, ConfigError, N_ACTIONS, conflict_state
from .fixtures import default_judge_path, load_config
from .formulas import FormulaError
from .judge import NO_PUSH, RESCUE, InteractiveJudge, RuleBasedJudge
from .learning import (
    Hyperparams,
    RiskModel,
    load_model,
    save_model,
    train_risk_model,
    train_value_policy,
)
from .reasons import (
    InconsistentFeedbackError,
    ReasonTheory,
    apply_feedback,
    theory_to_dot,
)
from .formulas import Atom

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TIMEOUT = 3
EXIT_INCONSISTENT = 4

TRAIN_KINDS = ("instrumental", "rescue", "risk", "scalar")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reasonbridge",
        description="bridge-world workbench for reason-guided agents",
    )
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--config", default="moral_dilemma")
    parser.add_argument("--out", default=None)
    parser.add_argument("--jobs", type=int, default=1)
    parser.add_argument("--format", choices=("json", "table"), default="json")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("train", help="train a value policy or risk model")
    p.add_argument("--kind", choices=TRAIN_KINDS, required=True)
    p.add_argument("--episodes", type=int, default=3000)
    p.add_argument("--resets", type=int, default=60000)
    p.add_argument("--backend", choices=("tabular", "mlp"), default="tabular")
    p.add_argument("--weight", type=float, default=0.0)
    p.add_argument("--shielded", action="store_true",
                   help="filter training actions through the stored risk model")
    p.add_argument("--agent-dir", required=True)
    p.add_argument("--curve", default=None, help="write the training curve CSV here")

    p = sub.add_parser("teach", help="run teaching episodes with a judge")
    p.add_argument("--agent-dir", required=True)
    p.add_argument("--judge", default="default",
                   help="default | interactive | rules:PATH")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--reset", choices=("random", "s0", "conflict"), default="random")
    p.add_argument("--transcript", default=None)

    p = sub.add_parser("eval", help="evaluate a stored agent")
    p.add_argument("--agent-dir", required=True)
    p.add_argument("--episodes", type=int, default=1000)
    p.add_argument("--reset", choices=("random", "s0", "conflict"), default="random")

    p = sub.add_parser("embed", help="compute the minimal ethical weight")
    p.add_argument("--scope", choices=("full", "from_s0"), default="full")
    p.add_argument("--step", type=float, default=0.01)
    p.add_argument("--gamma", type=float, default=0.9)
    p.add_argument("--w-max", type=float, default=10.0)
    p.add_argument("--timeout", type=float, default=7200.0)

    p = sub.add_parser("render", help="print the text rendering of a state")
    p.add_argument("--state", choices=("s0", "conflict"), default="s0")

    p = sub.add_parser("graph", help="export a reason theory as DOT")
    p.add_argument("--theory", default=None, help="theory JSON path")
    p.add_argument("--agent-dir", default=None)
    p.add_argument("--labels", default="", help="comma-separated active labels")

    p = sub.add_parser("risk-csv", help="dump above-threshold risk entries")
    p.add_argument("--agent-dir", required=True)

    p = sub.add_parser("replay-feedback", help="apply a feedback transcript")
    p.add_argument("--theory", default=None, help="initial theory JSON path")
    p.add_argument("--transcript", required=True)
    return parser


def _emit(args, payload: dict) -> None:
    if args.format == "json":
        text = json.dumps(payload, indent=2, default=str)
    else:
        text = "\n".join(f"{key}: {value}" for key, value in payload.items())
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        print(text)


def _load_or_init_bundle(agent_dir: str, seed) -> AgentBundle:
    path = Path(agent_dir)
    if (path / "meta.json").exists():
        return AgentBundle.load(path, seed=seed)
    return AgentBundle(seed=seed)


def cmd_train(args) -> int:
    config = load_config(args.config)
    bundle = _load_or_init_bundle(args.agent_dir, args.seed)
    hp = Hyperparams()
    shield = bundle.risk.get(NO_PUSH) if args.shielded else None
    if args.shielded and shield is None:
        raise ConfigError("--shielded needs a trained risk model in the agent dir")
    curve = None
    if args.kind == "risk":
        env = BridgeEnv(config, seed=args.seed, termination="single")
        risk, curve = train_risk_model(
            env, resets=args.resets, backend=args.backend, hp=hp, seed=args.seed
        )
        bundle.risk[NO_PUSH] = risk
    else:
        termination = "rescue" if args.kind == "rescue" else "goal"
        objective = {"instrumental": "instr", "rescue": "resc", "scalar": "scalar"}[
            args.kind
        ]
        env = BridgeEnv(config, seed=args.seed, termination=termination)
        model, curve = train_value_policy(
            env,
            objective=objective,
            episodes=args.episodes,
            backend=args.backend,
            hp=hp,
            shield=shield,
            weight=args.weight,
            seed=args.seed,
        )
        if args.kind == "rescue":
            bundle.moral[RESCUE] = model
        else:
            bundle.instrumental = model
    bundle.save(args.agent_dir, config)
    if args.curve:
        Path(args.curve).write_text(curve.to_csv())
    _emit(args, {"trained": args.kind, "agent_dir": args.agent_dir})
    return EXIT_OK


def _make_judge(spec: str):
    if spec == "default":
        return RuleBasedJudge.load(default_judge_path())
    if spec == "interactive":
        return InteractiveJudge()
    if spec.startswith("rules:"):
        return RuleBasedJudge.load(spec.split(":", 1)[1])
    raise ConfigError(f"unknown judge {spec!r}")


def cmd_teach(args) -> int:
    config = load_config(args.config)
    bundle = AgentBundle.load(args.agent_dir, seed=args.seed)
    judge = _make_judge(args.judge)
    env = BridgeEnv(config, seed=args.seed, termination="eval")
    transcript = []
    for episode in range(args.episodes):
        reset_state = conflict_state(config) if args.reset == "conflict" else None
        mode = args.reset if args.reset != "conflict" else "s0"
        result = run_episode(
            bundle,
            env,
            judge=judge,
            learn_reasons=True,
            reset_mode=mode,
            reset_state=reset_state,
        )
        for entry in result.feedback:
            transcript.append({"episode": episode, **entry})
    bundle.save(args.agent_dir, config)
    if args.transcript:
        Path(args.transcript).write_text(
            json.dumps({"feedback": transcript}, indent=2) + "\n"
        )
    _emit(
        args,
        {
            "episodes": args.episodes,
            "feedback_events": len(transcript),
            "theory": bundle.theory.to_json(),
        },
    )
    return EXIT_OK


def _eval_chunk(agent_dir, config_name, episodes, reset, seed):
    config = load_config(config_name)
    bundle = AgentBundle.load(agent_dir, seed=seed)
    env = BridgeEnv(config, seed=seed, termination="eval")
    reset_state = conflict_state(config) if reset == "conflict" else None
    mode = reset if reset != "conflict" else "s0"
    return evaluate(
        bundle, env, episodes, reset_mode=mode, reset_state=reset_state, seed=seed
    )


def cmd_eval(args) -> int:
    jobs = max(1, args.jobs)
    if jobs == 1:
        report = _eval_chunk(
            args.agent_dir, args.config, args.episodes, args.reset, args.seed
        )
        _emit(args, report.to_json())
        return EXIT_OK
    base = args.seed if args.seed is not None else 0
    counts = [args.episodes // jobs] * jobs
    for i in range(args.episodes % jobs):
        counts[i] += 1
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(
                _eval_chunk, args.agent_dir, args.config, count, args.reset, base + i
            )
            for i, count in enumerate(counts)
            if count
        ]
        reports = [f.result() for f in futures]
    merged = reports[0].to_json()
    for report in reports[1:]:
        data = report.to_json()
        for key in (
            "episodes", "r_instr", "r_resc", "r_push", "count_resc",
            "count_conflict", "conflict_steps", "rescues", "pushes", "drownings",
        ):
            merged[key] += data[key]
    merged["seed"] = args.seed
    _emit(args, merged)
    return EXIT_OK


def cmd_embed(args) -> int:
    config = load_config(args.config)
    report = compute_ethical_weight(
        config,
        scope=args.scope,
        step=args.step,
        gamma=args.gamma,
        w_max=args.w_max,
        timeout=args.timeout,
        seed=args.seed,
    )
    _emit(args, report.to_json())
    return EXIT_OK


def cmd_render(args) -> int:
    config = load_config(args.config)
    env = BridgeEnv(config, seed=args.seed)
    if args.state == "conflict":
        env.reset(state=conflict_state(config))
    text = env.render_text()
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_graph(args) -> int:
    if args.theory:
        theory = ReasonTheory.load(args.theory)
    elif args.agent_dir:
        theory = ReasonTheory.load(Path(args.agent_dir) / "theory.json")
    else:
        raise ConfigError("graph needs --theory or --agent-dir")
    labels = [l for l in args.labels.split(",") if l]
    dot = theory_to_dot(theory, labels)
    if args.out:
        Path(args.out).write_text(dot)
    else:
        print(dot, end="")
    return EXIT_OK


def cmd_risk_csv(args) -> int:
    bundle = AgentBundle.load(args.agent_dir)
    risk = bundle.risk.get(NO_PUSH)
    if risk is None:
        raise ConfigError("agent has no stored risk model")
    if risk.model.backend != "tabular":
        raise ConfigError("risk CSV export needs the tabular backend")
    lines = [
        "action,state," + ",".join(f"risk_{name}" for name in ACTION_NAMES)
    ]
    for obs in sorted(risk.model.table):
        values = risk.model.table[obs]
        for action in range(N_ACTIONS):
            if values[action] > risk.threshold:
                state = " ".join(str(v) for v in obs)
                risks = ",".join(f"{values[a]:.4f}" for a in range(N_ACTIONS))
                lines.append(f"{ACTION_NAMES[action]},{state},{risks}")
    text = "\n".join(lines) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text, end="")
    return EXIT_OK


def cmd_replay_feedback(args) -> int:
    theory = (
        ReasonTheory.load(args.theory) if args.theory else ReasonTheory()
    )
    transcript = json.loads(Path(args.transcript).read_text())
    for entry in transcript["feedback"]:
        chosen = [
            theory.rule_by_id(rid)
            for rid in entry.get("chosen", [])
            if theory.has_rule(rid)
        ]
        apply_feedback(
            theory,
            chosen,
            Atom(entry["obligation"]),
            Atom(entry["ground"]),
            entry["kind"],
        )
    _emit(args, theory.to_json())
    return EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "teach": cmd_teach,
    "eval": cmd_eval,
    "embed": cmd_embed,
    "render": cmd_render,
    "graph": cmd_graph,
    "risk-csv": cmd_risk_csv,
    "replay-feedback": cmd_replay_feedback,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.verb](args)
    except (ConfigError, FormulaError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmbeddingTimeout as exc:
        print(f"timeout: {exc}", file=sys.stderr)
        return EXIT_TIMEOUT
    except (InconsistentFeedbackError, ObligationConsistencyError) as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return EXIT_INCONSISTENT


if __name__ == "__main__":
    sys.exit(main())
