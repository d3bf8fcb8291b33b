# app.py
# Roteador de linha de comando do toolkit de contextualidade

import argparse
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np
import pandas as pd

import reports
from attacks import TARGETS, deterministic_context_attack, target_arrangement, verify_nd_realization
from config import FORMATS, SOLVER_TOL, RunConfig, load_run_config
from epsmodels import MIN_SAMPLES
from errors import ContextualityError, InvalidParameterError
from graphs import EpsilonGraph, build_gd, build_odd_cycle, dump_graph, epsilon_expand, load_graph
from randomness import (
    LEVELS,
    ProtocolConfig,
    classical_device_behavior,
    gd_scenario,
    honest_device_behavior,
    min_entropy_curve,
    min_tradeoff_family,
    raw_bits,
    simulate_protocol,
    toeplitz_extract,
)

logger = logging.getLogger("app")


# ─────────────────────────────────────────────────────────────
# Parsing de valores
# ─────────────────────────────────────────────────────────────
def parse_number(token: str) -> float:
    """Aceita '0.5', 'pi', 'pi/3', '2*pi/5'."""
    tok = token.strip().lower()
    if "pi" not in tok:
        return float(tok)
    num, _, den = tok.partition("/")
    coef = num.replace("pi", "").rstrip("*").strip() or "1"
    value = float(coef) * math.pi
    return value / float(den) if den else value


def parse_grid(text: str) -> list[float]:
    """'a:b:n' (linspace) ou lista separada por vírgulas."""
    text = text.strip()
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise InvalidParameterError(f"Grid 'a:b:n' malformado: {text!r}")
        a, b, n = parse_number(parts[0]), parse_number(parts[1]), int(parts[2])
        if n < 1:
            raise InvalidParameterError(f"Grid com {n} pontos")
        return [float(x) for x in np.linspace(a, b, n)]
    return [parse_number(tok) for tok in text.split(",") if tok.strip()]


# ─────────────────────────────────────────────────────────────
# Comandos: cada um devolve (tabelas, checagens)
# ─────────────────────────────────────────────────────────────
def cmd_table1(cfg: RunConfig):
    d_min, d_max = cfg.get("d_min", 3), cfg.get("d_max", 9)
    df = reports.table1_frame(range(d_min, d_max + 1))
    return {"theta_table": df}, reports.table1_checks(df)


def cmd_curve(cfg: RunConfig):
    d = cfg.get("d", 3)
    level = cfg.get("level", "1+AB")
    scenario = gd_scenario(d)
    grid = parse_grid(cfg["grid"]) if cfg.get("grid") else list(
        np.linspace(scenario.alpha, scenario.theta.value, 11)
    )
    anchors = parse_grid(cfg.get("anchors", "7.2,7.5,7.6"))
    curve = reports.curve_frame(min_entropy_curve(scenario, grid, level, cfg.get("tol", SOLVER_TOL), cfg.get("jobs", 1)))
    family = min_tradeoff_family(scenario, anchors, level, cfg.get("tol", SOLVER_TOL))
    tradeoff = reports.tradeoff_frame(family, curve)
    checks = {
        "monotone": bool(curve["monotone"].all()),
        "tangent": bool(tradeoff["tangent"].all()),
        "dominates": bool(tradeoff["dominates"].all()),
    }
    return {"min_entropy_curve": curve, "tradeoff": tradeoff}, checks


def cmd_thresholds(cfg: RunConfig):
    n_max = cfg.get("n_max", 15)
    thr = reports.thresholds_frame(n_max)
    gaps = reports.qubit_gap_frame(n_max)
    checks = {
        "threshold_equality": bool(
            ((thr["theta"] - thr["alpha_eps_at_threshold"]).abs() <= 1e-9).all()
        ),
        "qubit_gap_positive": bool((gaps["gap"] > 0).all()),
    }
    return {"thresholds": thr, "qubit_gap": gaps}, checks


def cmd_qubit(cfg: RunConfig):
    n_max = cfg.get("n_max", 10)
    gaps = reports.qubit_gap_frame(n_max)
    relax = reports.qubit_relaxation_frame(range(3, min(n_max, 5) + 1))
    checks = {"qubit_gap_positive": bool((gaps["gap"] > 0).all())}
    if len(relax):
        checks["relaxation_sandwich"] = bool(relax["sandwich_ok"].all())
    return {"qubit_gap": gaps, "qubit_relaxation": relax}, checks


def _device(name: str, d: int):
    if name == "honest":
        return honest_device_behavior(d)
    if name == "classical":
        return classical_device_behavior(d)
    raise InvalidParameterError(f"Dispositivo desconhecido: {name!r} (use honest, classical)")


def cmd_protocol(cfg: RunConfig):
    d = cfg.get("d", 3)
    scenario = gd_scenario(d)
    device = _device(cfg.get("device", "honest"), d)
    omega_exp = cfg.get("omega_exp", 7.67)
    delta = cfg.get("delta", 0.1)
    f_min = min_tradeoff_family(scenario, [omega_exp - delta], cfg.get("level", "1+AB"))[0]
    runs = cfg.get("runs", 1)
    seeds = [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(cfg["seed"]).spawn(runs)]

    def one(seed: int):
        pc = ProtocolConfig(
            n_rounds=cfg.get("rounds", 100_000),
            gamma=cfg.get("gamma", 0.5),
            omega_exp=omega_exp,
            delta=delta,
            seed=seed,
            f_min=f_min,
            l_ext=int(cfg.get("l_ext", 0)),
        )
        return seed, simulate_protocol(pc, device)

    jobs = cfg.get("jobs", 1)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(one, seeds))
    else:
        results = [one(s) for s in seeds]

    summary = reports.transcript_frame(results)
    first_seed, first = results[0]
    raw = raw_bits(first)
    out_len = min(first.certified_length, len(raw))
    extracted = 0
    if out_len > 0:
        seed_bits = np.random.default_rng([first_seed, 1]).integers(0, 2, len(raw) + out_len - 1)
        extracted = int(toeplitz_extract(raw, seed_bits, out_len, first.certified_length).size)
    summary["raw_bits"] = [len(raw_bits(t)) for _, t in results]
    summary["extracted_bits"] = 0
    summary.loc[0, "extracted_bits"] = extracted

    replay = one(first_seed)[1]
    checks = {"replay": replay.rounds.equals(first.rounds)}
    rounds = first.rounds[["round", "T", "input", "outputs", "score"]]
    return {"protocol_runs": summary, "transcript": rounds}, checks


def cmd_attack(cfg: RunConfig):
    target = cfg.get("target", "magic-square")
    if target not in TARGETS:
        raise InvalidParameterError(f"Alvo desconhecido: {target!r} (use {', '.join(TARGETS)})")
    arr = target_arrangement(target)
    contexts = [cfg["context"]] if cfg.get("context") is not None else list(range(arr.n_hyperedges))
    tables, preds, checks = [], [], {}
    for c in contexts:
        result = deterministic_context_attack(arr, c)
        valid, report = verify_nd_realization(arr, result.realization)
        if not valid:
            logger.warning("[cmd_attack] contexto %d: %s", c, report)
        parity = math.prod(result.predictions.values()) == arr.labels[c]
        checks[f"context_{c}"] = valid and parity
        table, pred = reports.attack_frames(result)
        tables.append(table)
        preds.append(pred)
    name = target.replace("-", "_")
    return (
        {f"attack_{name}": pd.concat(tables, ignore_index=True), f"predictions_{name}": pd.concat(preds, ignore_index=True)},
        checks,
    )


def cmd_hvmodels(cfg: RunConfig):
    grid = parse_grid(cfg.get("theta_c", "pi/6,pi/4,pi/3"))
    samples = cfg.get("samples", 1_000_000)
    if samples and samples < MIN_SAMPLES:
        raise InvalidParameterError(f"samples deve ser >= {MIN_SAMPLES}")
    df = reports.hv_frame(grid, samples, cfg["seed"], cfg.get("jobs", 1))
    checks = {"ks_exceeds": bool(df["ks_exceeds"].all()), "bm_exceeds": bool(df["bm_exceeds"].all())}
    if "ks_mc_ok" in df:
        checks["monte_carlo"] = bool(df["ks_mc_ok"].all() and df["bm_mc_ok"].all())
    return {"hvmodels": df}, checks


def cmd_graph(cfg: RunConfig):
    action = cfg.get("action", "dump")
    if action == "dump":
        family = cfg.get("family", "gd")
        if family == "gd":
            g = build_gd(cfg.get("d", 3))
        elif family == "cycle":
            g = build_odd_cycle(cfg.get("n", 5))
        else:
            raise InvalidParameterError(f"Família desconhecida: {family!r} (use gd, cycle)")
        if cfg.get("epsilon") is not None:
            g = epsilon_expand(g, cfg["epsilon"])
        text = dump_graph(g)
        path = Path(cfg.output) / f"graph_{family}.txt"
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text, encoding="utf-8")
        logger.info("[cmd_graph] %s", path)
        sys.stdout.write(text)
        return {}, {}
    if action == "load":
        if not cfg.get("file"):
            raise InvalidParameterError("graph load exige --file")
        g = load_graph(Path(cfg["file"]).read_text(encoding="utf-8"))
        summary = reports.combinatorial_summary(g)
        reports.write_json(summary, Path(cfg.output) / "combinatorial_summary.json")
        row = {"n_vertices": g.n_vertices}
        if isinstance(g, EpsilonGraph):
            row.update(
                n_strict=len(g.strict_edges),
                n_eps=len(g.eps_edges),
                epsilon=float(g.epsilon),
                eps_bound=summary["eps_bound"],
            )
        else:
            row.update(n_edges=len(g.edges), alpha=summary["alpha"], alpha_star=summary["alpha_star"])
        return {"graph_summary": pd.DataFrame([row])}, {}
    raise InvalidParameterError(f"Ação desconhecida: {action!r} (use dump, load)")


COMMAND_HANDLERS = {
    "table1": cmd_table1,
    "curve": cmd_curve,
    "thresholds": cmd_thresholds,
    "qubit": cmd_qubit,
    "protocol": cmd_protocol,
    "attack": cmd_attack,
    "hvmodels": cmd_hvmodels,
    "graph": cmd_graph,
}


# ─────────────────────────────────────────────────────────────
# argparse
# ─────────────────────────────────────────────────────────────
def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="arquivo key=value; flags sobrescrevem")
    common.add_argument("--out", help="diretório de saída (padrão: $CTXRAND_OUTPUT_DIR)")
    common.add_argument("--format", choices=FORMATS, dest="fmt")
    common.add_argument("--verbose", action="store_true")
    common.add_argument("--log-file")
    common.add_argument("--jobs", type=int)
    common.add_argument("--seed", type=int)
    common.add_argument("--tol", type=float)

    parser = argparse.ArgumentParser(prog="ctxrand", description="Contextualidade, ε-ONC e aleatoriedade certificada")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("table1", parents=[common], help="α, θ e α* de 𝒢_d")
    p.add_argument("--d-min", type=int)
    p.add_argument("--d-max", type=int)

    p = sub.add_parser("curve", parents=[common], help="min-entropia × score e funções de tradeoff")
    p.add_argument("--d", type=int)
    p.add_argument("--grid")
    p.add_argument("--level", choices=LEVELS)
    p.add_argument("--anchors")

    p = sub.add_parser("thresholds", parents=[common], help="limiares de ciclos ímpares e gaps do leque")
    p.add_argument("--n-max", type=int)

    p = sub.add_parser("qubit", parents=[common], help="leque de qubits e relaxação θ'_ε")
    p.add_argument("--n-max", type=int)

    p = sub.add_parser("protocol", parents=[common], help="simulação do protocolo de spot-checking")
    p.add_argument("--d", type=int)
    p.add_argument("--device", choices=("honest", "classical"))
    p.add_argument("--rounds", type=int)
    p.add_argument("--gamma", type=float)
    p.add_argument("--omega-exp", type=float)
    p.add_argument("--delta", type=float)
    p.add_argument("--l-ext", type=float)
    p.add_argument("--runs", type=int)
    p.add_argument("--level", choices=LEVELS)

    p = sub.add_parser("attack", parents=[common], help="ataque de contexto determinístico")
    p.add_argument("--target", choices=TARGETS)
    p.add_argument("--context", type=int)
    p.add_argument("--emit", choices=("json",), help="atalho para --format json")

    p = sub.add_parser("hvmodels", parents=[common], help="modelos KS e Bell-Mermin")
    p.add_argument("--theta-c")
    p.add_argument("--samples", type=int)

    p = sub.add_parser("graph", parents=[common], help="dump/load no formato texto")
    p.add_argument("action", choices=("dump", "load"))
    p.add_argument("--family", choices=("gd", "cycle"))
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--file")
    return parser


_GLOBAL_KEYS = {"command", "config", "out", "fmt", "verbose", "log_file", "emit"}


def setup_logging(verbose: bool, log_file: str | None) -> None:
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if log_file:
        handlers.append(logging.FileHandler(log_file, encoding="utf-8"))
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


def config_from_args(args: argparse.Namespace) -> RunConfig:
    overrides = {k: v for k, v in vars(args).items() if k not in _GLOBAL_KEYS and v is not None}
    fmt = "json" if getattr(args, "emit", None) == "json" else args.fmt
    return load_run_config(args.command, args.config, overrides, args.out, fmt)


def emit(frames: dict, cfg: RunConfig) -> list[Path]:
    written = []
    for name, df in frames.items():
        written.append(reports.write_table(df, reports.output_path(cfg.output, name, cfg.fmt)))
        if cfg.fmt in ("text", "json"):
            sys.stdout.write(reports.render_table(df, cfg.fmt))
    return written


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose, args.log_file)
    try:
        cfg = config_from_args(args)
        frames, checks = COMMAND_HANDLERS[cfg.command](cfg)
        written = emit(frames, cfg)
    except ContextualityError as e:
        report = {"status": "error", "command": args.command, "kind": type(e).__name__, "message": str(e)}
        sys.stderr.write(json.dumps(report, ensure_ascii=False) + "\n")
        return 2

    failed = sorted(k for k, ok in checks.items() if not ok)
    if checks:
        written.append(reports.write_check_report(cfg.output, cfg.command, checks))
    for path in written:
        logger.info("[main] escrito %s", path)
    if failed:
        report = {"status": "failed", "command": cfg.command, "failed_checks": failed}
        sys.stderr.write(json.dumps(report, ensure_ascii=False) + "\n")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
