"""Experiment runner and utility commands.

Subcommands:
  run        one scenario; writes an event log and a one-row CSV report
  run-suite  three visibility graphs at low and high load; combined CSV
  qr-size    physical beacon size for given camera geometry
  keygen     deterministic keypair + beacon payload

Scenario configuration is flat key=value text with CLI-flag overrides;
all randomness flows from the single scenario seed. The default output
directory comes from $VABNET_OUT_DIR, falling back to the working
directory. Exit codes: 0 success, 1 runtime failure, 2 bad config.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, fields as dc_fields

from . import crypto, metrics, vab
from .confirmation import ConfidenceFunction
from .graphs import make_graph
from .sim import LoadProfile, PropagationModel, ProtocolConfig, run_simulation


class ConfigError(Exception):
    pass


@dataclass
class ScenarioConfig:
    graph: str = "triangular"
    nodes: int = 21
    load: str = "low"
    window_ms: float = 60_000.0
    propagation: str = "global"
    flood_ttl: int = 2
    base_latency_ms: float = 5.0
    jitter_ms: float = 5.0
    loss: float = 0.0
    seed: int = 0
    confidence: str = "harmonic"
    threshold: float = 1.0
    max_depth: int | None = None
    # Nested re-confirmations make confirmation traffic quadratic in node
    # count on dense graphs; experiment runs default them off and measure
    # depth-1 confirmation spread. Enable with confirm_confirmations=true.
    confirm_confirmations: bool = False
    out_dir: str | None = None

    def packets_per_node(self) -> int:
        if self.load == "low":
            return 5
        if self.load == "high":
            return 60
        try:
            count = int(self.load)
        except ValueError:
            raise ConfigError(f"load must be 'low', 'high', or a count, got {self.load!r}")
        if count < 1:
            raise ConfigError("load count must be positive")
        return count


_PARSERS = {
    "graph": str, "nodes": int, "load": str, "window_ms": float,
    "propagation": str, "flood_ttl": int, "base_latency_ms": float,
    "jitter_ms": float, "loss": float, "seed": int, "confidence": str,
    "threshold": float,
    "max_depth": lambda s: None if s in ("none", "") else int(s),
    "confirm_confirmations": lambda s: s.lower() in ("1", "true", "yes", "on"),
    "out_dir": str,
}


def parse_config_file(path: str) -> ScenarioConfig:
    cfg = ScenarioConfig()
    try:
        lines = open(path).read().splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}")
    for lineno, raw in enumerate(lines, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in _PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            setattr(cfg, key, _PARSERS[key](value))
        except ConfigError:
            raise
        except ValueError:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}")
    return cfg


def _apply_overrides(cfg: ScenarioConfig, args: argparse.Namespace) -> None:
    for f in dc_fields(ScenarioConfig):
        value = getattr(args, f.name, None)
        if value is not None:
            setattr(cfg, f.name, value)


def _scenario_pieces(cfg: ScenarioConfig):
    graph = make_graph(cfg.graph, cfg.nodes)
    propagation = PropagationModel(
        kind=cfg.propagation, flood_ttl=cfg.flood_ttl if cfg.propagation == "flooding" else 0,
        base_latency_ms=cfg.base_latency_ms, jitter_ms=cfg.jitter_ms, loss=cfg.loss)
    load = LoadProfile(cfg.packets_per_node(), cfg.window_ms)
    try:
        confidence = ConfidenceFunction(cfg.confidence)
    except ValueError:
        raise ConfigError(f"unknown confidence function {cfg.confidence!r}")
    proto = ProtocolConfig(
        confidence_function=confidence, acceptance_threshold=cfg.threshold,
        max_confirmation_depth=cfg.max_depth,
        confirm_confirmations=cfg.confirm_confirmations)
    return graph, propagation, load, proto


def _out_dir(cfg: ScenarioConfig) -> str:
    out = cfg.out_dir or os.environ.get("VABNET_OUT_DIR") or "."
    os.makedirs(out, exist_ok=True)
    return out


def cmd_run(args: argparse.Namespace) -> int:
    cfg = parse_config_file(args.config) if args.config else ScenarioConfig()
    _apply_overrides(cfg, args)
    graph, propagation, load, proto = _scenario_pieces(cfg)
    log = run_simulation(graph, propagation, load, proto, cfg.seed)
    report = metrics.compute_metrics(log)
    out = _out_dir(cfg)
    events_path = os.path.join(out, f"events_{cfg.graph}_{cfg.load}.log")
    csv_path = os.path.join(out, f"report_{cfg.graph}_{cfg.load}.csv")
    log.write(events_path)
    metrics.write_csv([report], csv_path)
    print(metrics.format_table([report]))
    print(f"events: {events_path}")
    print(f"report: {csv_path}")
    return 0


SUITE_GRAPHS = ("triangular", "line", "complete")
SUITE_LOADS = ("low", "high")


def cmd_run_suite(args: argparse.Namespace) -> int:
    cfg = parse_config_file(args.config) if args.config else ScenarioConfig()
    _apply_overrides(cfg, args)
    out = _out_dir(cfg)
    reports = []
    for load_name in SUITE_LOADS:
        for graph_name in SUITE_GRAPHS:
            run_cfg = ScenarioConfig(**{**cfg.__dict__,
                                        "graph": graph_name, "load": load_name})
            graph, propagation, load, proto = _scenario_pieces(run_cfg)
            log = run_simulation(graph, propagation, load, proto, run_cfg.seed)
            log.write(os.path.join(out, f"events_{graph_name}_{load_name}.log"))
            reports.append(metrics.compute_metrics(log))
    metrics.normalize_relative_reachability(reports)
    csv_path = os.path.join(out, "suite.csv")
    metrics.write_csv(reports, csv_path)
    print(metrics.format_table(reports))
    print(f"report: {csv_path}")
    return 0


def cmd_qr_size(args: argparse.Namespace) -> int:
    try:
        geometry = vab.QrGeometry(
            fov_deg=args.fov, distance_m=args.distance,
            resolution_px=args.resolution, aspect_ratio=args.aspect,
            modules=args.modules, px_per_module=args.px_per_module)
    except ValueError as exc:
        raise ConfigError(str(exc))
    size_m = vab.qr_physical_size(geometry)
    print(f"size: {size_m:.4g} m ({size_m * 1000:.4g} mm)")
    return 0


def cmd_keygen(args: argparse.Namespace) -> int:
    if args.seed is not None:
        try:
            seed = bytes.fromhex(args.seed)
        except ValueError:
            raise ConfigError("seed must be hex")
        if len(seed) != 32:
            raise ConfigError("seed must be 32 bytes of hex")
    else:
        seed = os.urandom(32)
    keypair = crypto.generate_keypair(seed)
    payload = vab.encode_vab(keypair.public_key)
    print(payload)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(f"private={keypair.private_key.hex()}\n")
            fh.write(f"public={keypair.public_key.hex()}\n")
            fh.write(f"vab={payload}\n")
        print(f"keypair: {args.out}")
    return 0


def _add_scenario_flags(p: argparse.ArgumentParser, with_graph: bool = True) -> None:
    p.add_argument("--config", help="scenario config file (key=value lines)")
    if with_graph:
        p.add_argument("--graph", choices=("triangular", "line", "complete"))
        p.add_argument("--load", help="low, high, or a packet count")
        p.add_argument("--propagation", choices=("adjacency", "global", "flooding"))
        p.add_argument("--flood-ttl", dest="flood_ttl", type=int)
    p.add_argument("--nodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--window-ms", dest="window_ms", type=float)
    p.add_argument("--base-latency-ms", dest="base_latency_ms", type=float)
    p.add_argument("--jitter-ms", dest="jitter_ms", type=float)
    p.add_argument("--loss", type=float)
    p.add_argument("--confidence", choices=("harmonic", "geometric"))
    p.add_argument("--threshold", type=float)
    p.add_argument("--max-depth", dest="max_depth", type=int)
    p.add_argument("--confirm-confirmations", dest="confirm_confirmations",
                   action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--out-dir", dest="out_dir")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vabnet",
        description="Location-aware VANET authentication protocol simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario")
    _add_scenario_flags(p_run)
    p_run.set_defaults(func=cmd_run)

    p_suite = sub.add_parser("run-suite",
                             help="run all graphs at both loads")
    _add_scenario_flags(p_suite, with_graph=False)
    p_suite.set_defaults(func=cmd_run_suite)

    p_qr = sub.add_parser("qr-size", help="physical beacon size calculator")
    p_qr.add_argument("--fov", type=float, required=True, help="degrees")
    p_qr.add_argument("--distance", type=float, required=True, help="meters")
    p_qr.add_argument("--resolution", type=float, required=True,
                      help="total pixel count")
    p_qr.add_argument("--aspect", type=float, default=0.75,
                      help="image aspect ratio")
    p_qr.add_argument("--modules", type=int, default=33)
    p_qr.add_argument("--px-per-module", dest="px_per_module", type=int, default=3)
    p_qr.set_defaults(func=cmd_qr_size)

    p_key = sub.add_parser("keygen", help="generate a keypair and beacon payload")
    p_key.add_argument("--seed", help="32 bytes of hex for deterministic output")
    p_key.add_argument("--out", help="write the keypair to this file")
    p_key.set_defaults(func=cmd_keygen)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
