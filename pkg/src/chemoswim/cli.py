"""Command-line front end: train, evaluate, and compare.

Configuration comes from built-in defaults, overridden by an optional
key = value config file, overridden by command-line flags.  All outputs are
plain CSV with numbers at 17 significant digits, so reruns with the same
seed reproduce every file byte for byte.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 training or
evaluation fault.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .environment import ConcentrationField, FlowFieldSpec, NO_FLOW
from .episodes import (CircleSpawn, EpisodeConfig, RectSpawn, TrainingSchedule,
                       evaluate_cohort, train_agent)
from .errors import ConfigurationError, TrainingFault
from .geometry import ActionSet
from .qnet import (WeightFormatError, format_float, load_weights, save_weights)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_FAULT = 4

# spawn regions (see episodes module): linear training/tests, one full
# Taylor-Green cell, and the radial-field start circle
LINEAR_SPAWN = RectSpawn(-10.0, 10.0, -10.0, 10.0)
TG_SPAWN = RectSpawn(0.0, 20.0, 0.0, 20.0)
RADIAL_SPAWN_RADIUS = 20.0
RADIAL_T_CAP = 1000.0


@dataclass
class RunConfig:
    """Every tunable parameter with its default.

    t_life, epochs, n_nodes, and epsilon_decay default to None and resolve
    per command and flow mode (see resolve_* helpers).
    """

    # simulation parameters
    v: float = 1.0
    kappa1: float = 3.0
    kappa2: float = 5.0
    v1: float = 1.1
    v2: float = 0.9
    dt: float = 0.02
    t_life: float | None = None
    ck_linear: float = 1.0
    c0_linear: float = 20.0
    ck_radial: float = 1.0
    c0_radial: float = 100.0
    u0: float = 0.1
    k: float = math.pi / 10.0
    # training parameters
    alpha: float = 0.01
    lr_decay: float = 0.1
    gamma: float = 0.98
    epsilon: float = 0.1        # exploration floor
    epsilon_start: float = 1.0
    n_hidden: int = 3
    n_nodes: int | None = None
    epochs: int | None = None
    epsilon_decay: float | None = None
    # run selection
    n_t: int = 4
    field: str = "linear"
    flow: str = "none"
    flow_aware: bool = False
    adaptive_speed: bool = False
    policy: str = "qnet"
    cells: int = 40
    seed: int = 0
    out_dir: str = "out"
    weights: str | None = None


def _parse_bool(value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


_CASTERS = {float: float, int: int, bool: _parse_bool, str: str}


def _field_types() -> dict[str, type]:
    types = {}
    for f in fields(RunConfig):
        base = f.type.replace(" | None", "")
        types[f.name] = {"float": float, "int": int, "bool": bool, "str": str}[base]
    return types


_FIELD_TYPES = _field_types()


def parse_config_file(path: str) -> dict:
    """Read a flat key = value document; '#' starts a comment."""
    values: dict = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigurationError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = body.partition("=")
        key = key.strip()
        raw = raw.strip()
        if key not in _FIELD_TYPES:
            raise ConfigurationError(f"{path}:{lineno}: unknown configuration key '{key}'")
        if key in values:
            raise ConfigurationError(f"{path}:{lineno}: duplicate key '{key}'")
        try:
            values[key] = _CASTERS[_FIELD_TYPES[key]](raw)
        except ValueError as exc:
            raise ConfigurationError(f"{path}:{lineno}: bad value for '{key}': {exc}") from exc
    return values


def parse_config(file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults, file values, and flags (flags win), then validate."""
    cfg = RunConfig()
    for source in (file_values, flag_values):
        for key, value in source.items():
            if value is None:
                continue
            if key not in _FIELD_TYPES:
                raise ConfigurationError(f"unknown configuration key '{key}'")
            setattr(cfg, key, value)
    validate_config(cfg)
    return cfg


def validate_config(cfg: RunConfig) -> None:
    if cfg.n_t not in (2, 4, 8):
        raise ConfigurationError(f"n_t must be one of 2, 4, 8 (got {cfg.n_t})")
    for key in ("v", "kappa1", "kappa2", "v1", "v2", "dt", "ck_linear", "ck_radial",
                "alpha", "k"):
        if getattr(cfg, key) <= 0:
            raise ConfigurationError(f"'{key}' must be positive (got {getattr(cfg, key)})")
    if not cfg.kappa1 < cfg.kappa2:
        raise ConfigurationError(
            f"kappa1 must be smaller than kappa2 (got {cfg.kappa1}, {cfg.kappa2})")
    if cfg.u0 < 0:
        raise ConfigurationError(f"'u0' must be non-negative (got {cfg.u0})")
    if cfg.t_life is not None and cfg.t_life <= 0:
        raise ConfigurationError(f"'t_life' must be positive (got {cfg.t_life})")
    if not 0.0 <= cfg.gamma < 1.0:
        raise ConfigurationError(f"'gamma' must lie in [0, 1) (got {cfg.gamma})")
    if not 0.0 <= cfg.epsilon <= cfg.epsilon_start <= 1.0:
        raise ConfigurationError("need 0 <= epsilon <= epsilon_start <= 1")
    if cfg.epsilon_decay is not None and not 0.0 < cfg.epsilon_decay < 1.0:
        raise ConfigurationError(f"'epsilon_decay' must lie in (0, 1) (got {cfg.epsilon_decay})")
    if not 0.0 < cfg.lr_decay <= 1.0:
        raise ConfigurationError(f"'lr_decay' must lie in (0, 1] (got {cfg.lr_decay})")
    if cfg.n_hidden < 1 or (cfg.n_nodes is not None and cfg.n_nodes < 1):
        raise ConfigurationError("network size parameters must be at least 1")
    if cfg.epochs is not None and cfg.epochs < 1:
        raise ConfigurationError("nothing to train: epochs must be at least 1")
    if cfg.cells < 1:
        raise ConfigurationError(f"'cells' must be at least 1 (got {cfg.cells})")
    if cfg.seed < 0:
        raise ConfigurationError(f"'seed' must be non-negative (got {cfg.seed})")
    if cfg.field not in ("linear", "radial"):
        raise ConfigurationError(f"'field' must be linear or radial (got {cfg.field!r})")
    if cfg.flow not in ("none", "tg"):
        raise ConfigurationError(f"'flow' must be none or tg (got {cfg.flow!r})")
    if cfg.policy not in ("qnet", "greedy", "swinging"):
        raise ConfigurationError(f"'policy' must be qnet, greedy, or swinging (got {cfg.policy!r})")
    if cfg.flow_aware and cfg.flow != "tg":
        raise ConfigurationError("flow_aware requires flow = tg")


# defaults that depend on the flow mode (larger network, longer anneal with TG)
def resolve_epochs(cfg: RunConfig) -> int:
    if cfg.epochs is not None:
        return cfg.epochs
    return 6000 if cfg.flow == "tg" else 1600


def resolve_nodes(cfg: RunConfig) -> int:
    if cfg.n_nodes is not None:
        return cfg.n_nodes
    return 36 if cfg.flow == "tg" else 24


def resolve_epsilon_decay(cfg: RunConfig) -> float:
    if cfg.epsilon_decay is not None:
        return cfg.epsilon_decay
    return 0.9996 if cfg.flow == "tg" else 0.998


def resolve_t_life(cfg: RunConfig, command: str) -> float:
    if cfg.t_life is not None:
        return cfg.t_life
    if command == "train":
        return 80.0
    if cfg.field == "radial":
        return RADIAL_T_CAP
    return 400.0 if cfg.flow == "tg" else 200.0


def build_actions(cfg: RunConfig) -> ActionSet:
    if cfg.adaptive_speed:
        return ActionSet(cfg.kappa1, cfg.kappa2, cfg.v1, cfg.v2, adaptive_speed=True)
    return ActionSet.constant_speed(cfg.kappa1, cfg.kappa2, cfg.v)


def build_field(cfg: RunConfig) -> ConcentrationField:
    if cfg.field == "linear":
        return ConcentrationField("linear", cfg.ck_linear, cfg.c0_linear)
    return ConcentrationField("radial", cfg.ck_radial, cfg.c0_radial)


def build_flow(cfg: RunConfig) -> FlowFieldSpec:
    if cfg.flow == "none":
        return NO_FLOW
    return FlowFieldSpec("taylor_green", cfg.u0, cfg.k)


def build_spawn(cfg: RunConfig):
    if cfg.field == "radial":
        return CircleSpawn(RADIAL_SPAWN_RADIUS)
    if cfg.flow == "tg":
        return TG_SPAWN
    return LINEAR_SPAWN


def build_episode_config(cfg: RunConfig, command: str) -> EpisodeConfig:
    # normalization always uses the training field's gradient
    return EpisodeConfig(
        n_t=cfg.n_t,
        dt=cfg.dt,
        t_life=resolve_t_life(cfg, command),
        field=build_field(cfg),
        flow=build_flow(cfg),
        flow_aware=cfg.flow_aware,
        actions=build_actions(cfg),
        spawn=build_spawn(cfg),
        seed=cfg.seed,
        c_k_norm=cfg.ck_linear,
    )


def _write_csv(path: Path, header: str, rows) -> None:
    lines = [header]
    lines.extend(rows)
    path.write_text("\n".join(lines) + "\n")


def _load_net_for(cfg: RunConfig):
    if cfg.weights is None:
        raise ConfigurationError("policy 'qnet' needs --weights")
    net = load_weights(cfg.weights)
    expected = (5 if cfg.flow_aware else 2) * cfg.n_t
    if net.input_dim != expected:
        raise ConfigurationError(
            f"weight file input dimension {net.input_dim} does not match the "
            f"configured input dimension {expected}")
    return net


def cmd_train(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = build_episode_config(cfg, "train")
    schedule = TrainingSchedule(
        epochs=resolve_epochs(cfg),
        epsilon_start=cfg.epsilon_start,
        epsilon_floor=cfg.epsilon,
        epsilon_decay=resolve_epsilon_decay(cfg),
        lr_base=cfg.alpha,
        lr_decay_factor=cfg.lr_decay,
        gamma=cfg.gamma,
        hidden_layers=cfg.n_hidden,
        hidden_nodes=resolve_nodes(cfg),
    )
    net, curve = train_agent(schedule, config, seed=cfg.seed)

    weights_path = out / "qnet_weights.txt"
    save_weights(net, weights_path)
    curve_path = out / "training_curve.csv"
    _write_csv(curve_path, "epoch,gain,mean_loss,epsilon",
               (f"{s.epoch},{format_float(s.gain)},{format_float(s.mean_loss)},"
                f"{format_float(s.epsilon)}" for s in curve))

    gains = np.array([s.gain for s in curve])
    window = min(100, len(gains))
    print(f"trained {schedule.epochs} epochs (n_t={cfg.n_t}, "
          f"input_dim={config.input_dim}, seed={cfg.seed})")
    print(f"mean gain: first {window} epochs {gains[:window].mean():.3f}, "
          f"last {window} epochs {gains[-window:].mean():.3f}")
    print(f"wrote {weights_path}")
    print(f"wrote {curve_path}")
    return EXIT_OK


def _write_cohort_files(out: Path, cohort) -> None:
    for i, result in enumerate(cohort.results):
        rows = (f"{format_float(t)},{format_float(x)},{format_float(y)},"
                f"{format_float(kappa)},{format_float(v)},{format_float(c)},{int(a)}"
                for t, x, y, kappa, v, c, a in result.trajectory)
        _write_csv(out / f"trajectory_cell{i:02d}.csv", "t,x,y,kappa,v,c,action_index", rows)
        _write_csv(out / f"centerline_cell{i:02d}.csv", "x,y",
                   (f"{format_float(x)},{format_float(y)}" for x, y in result.centerline))
    rows = [f"{i},{format_float(g)}" for i, g in enumerate(cohort.gains)]
    rows.append(f"mean,{format_float(cohort.mean)}")
    rows.append(f"variance,{format_float(cohort.variance)}")
    _write_csv(out / "cohort_summary.csv", "cell,gain", rows)


def cmd_evaluate(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = build_episode_config(cfg, "evaluate")
    net = _load_net_for(cfg) if cfg.policy == "qnet" else None
    cohort = evaluate_cohort(config, cfg.policy, cfg.cells, net=net,
                             seed=cfg.seed, record=True)
    _write_cohort_files(out, cohort)
    reached = sum(r.terminated == "reached_source" for r in cohort.results)
    print(f"evaluated {cfg.cells} cells with policy {cfg.policy} "
          f"(field={cfg.field}, flow={cfg.flow}, t_life={config.t_life})")
    print(f"gain mean {cohort.mean:.3f}, variance {cohort.variance:.3f}"
          + (f", reached source: {reached}/{cfg.cells}" if cfg.field == "radial" else ""))
    print(f"wrote {out}/cohort_summary.csv and per-cell trajectory/centerline files")
    return EXIT_OK


def cmd_compare(cfg: RunConfig) -> int:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    config = build_episode_config(cfg, "evaluate")
    net = _load_net_for(cfg)
    cohorts = {
        "qnet": evaluate_cohort(config, "qnet", cfg.cells, net=net,
                                seed=cfg.seed, record=False),
        "greedy": evaluate_cohort(config, "greedy", cfg.cells,
                                  seed=cfg.seed, record=False),
        "swinging": evaluate_cohort(config, "swinging", cfg.cells,
                                    seed=cfg.seed, record=False),
    }
    rows = []
    for i in range(cfg.cells):
        rows.append(f"{i}," + ",".join(format_float(cohorts[p].gains[i])
                                       for p in ("qnet", "greedy", "swinging")))
    rows.append("mean," + ",".join(format_float(cohorts[p].mean)
                                   for p in ("qnet", "greedy", "swinging")))
    rows.append("variance," + ",".join(format_float(cohorts[p].variance)
                                       for p in ("qnet", "greedy", "swinging")))
    _write_csv(out / "comparison.csv", "cell,gain_qnet,gain_greedy,gain_swinging", rows)

    print(f"paired comparison over {cfg.cells} cells (seed={cfg.seed}, "
          f"t_life={config.t_life}):")
    print(f"{'policy':>10} {'mean':>12} {'variance':>12}")
    for p in ("qnet", "greedy", "swinging"):
        print(f"{p:>10} {cohorts[p].mean:>12.4f} {cohorts[p].variance:>12.4f}")
    print(f"wrote {out}/comparison.csv")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemoswim",
        description="Train and evaluate a curvature-steered swimmer that "
                    "learns chemotaxis with a deep Q-network.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="key = value configuration file")
        p.add_argument("--seed", type=int)
        p.add_argument("--out-dir", dest="out_dir")
        p.add_argument("--n-t", dest="n_t", type=int, help="history length (2, 4, or 8)")
        p.add_argument("--t-life", dest="t_life", type=float)
        p.add_argument("--flow", choices=["none", "tg"])
        p.add_argument("--flow-aware", dest="flow_aware", action="store_true", default=None)
        p.add_argument("--adaptive-speed", dest="adaptive_speed", action="store_true",
                       default=None)
        p.add_argument("--field", choices=["linear", "radial"])

    train = sub.add_parser("train", help="train a network and write weights + curve")
    add_common(train)
    train.add_argument("--epochs", type=int)

    evaluate = sub.add_parser("evaluate", help="run an evaluation cohort")
    add_common(evaluate)
    evaluate.add_argument("--policy", choices=["qnet", "greedy", "swinging"])
    evaluate.add_argument("--cells", type=int)
    evaluate.add_argument("--weights")

    compare = sub.add_parser("compare", help="paired qnet/greedy/swinging cohorts")
    add_common(compare)
    compare.add_argument("--cells", type=int)
    compare.add_argument("--weights")

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    flag_values = {k: v for k, v in vars(args).items()
                   if k not in ("command", "config") and v is not None}
    try:
        file_values = parse_config_file(args.config) if args.config else {}
        cfg = parse_config(file_values, flag_values)
        if args.command == "train":
            return cmd_train(cfg)
        if args.command == "evaluate":
            if cfg.policy == "qnet" and cfg.weights is None:
                raise ConfigurationError("evaluate with policy 'qnet' needs --weights")
            return cmd_evaluate(cfg)
        if cfg.weights is None:
            raise ConfigurationError("compare needs --weights")
        return cmd_compare(cfg)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except WeightFormatError as exc:
        print(f"weight file error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except TrainingFault as exc:
        print(f"fault: {exc}", file=sys.stderr)
        return EXIT_FAULT


def main_entry() -> None:
    raise SystemExit(main(sys.argv[1:]))
