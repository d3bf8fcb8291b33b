# reports.py
# Tabelas de saída (DataFrames) e escrita em CSV / XLSX / JSON / texto

import io
import json
import logging
from pathlib import Path

import numpy as np
import pandas as pd

from attacks import AttackResult
from combinat import epsilon_independence_bound, fractional_packing_number, weighted_independence_number
from epsmodels import hv_table, qubit_fan_relaxation, qubit_gap_table, threshold_table
from errors import InvalidParameterError
from graphs import EpsilonGraph, WeightedGraph, build_gd, strict_and_full_views
from randomness import ProtocolTranscript, TradeoffFunction, verify_tradeoff
from theta import lovasz_theta, theta_gd_analytic

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.10g"
SUFFIXES = {"csv": ".csv", "json": ".json", "text": ".txt", "xlsx": ".xlsx"}

# θ(𝒢_d) de referência, 4 casas
REFERENCE_THETA = {3: 7.6753, 4: 9.8030, 5: 11.8869, 6: 13.9419, 7: 15.9762, 8: 17.9944}
THETA_TABLE_COLUMNS = ["d", "alpha", "theta_sdp", "theta_analytic", "alpha_star"]


# ---------------------------------------------------------------------------
# Tabelas
# ---------------------------------------------------------------------------

def table1_frame(d_values) -> pd.DataFrame:
    """α exato, θ (SDP e analítico) e α* (LP) para cada d."""
    rows = []
    for d in d_values:
        g = build_gd(d)
        rows.append(
            {
                "d": d,
                "alpha": int(weighted_independence_number(g).value),
                "theta_sdp": lovasz_theta(g).value,
                "theta_analytic": theta_gd_analytic(d),
                "alpha_star": fractional_packing_number(g).value,
            }
        )
    return pd.DataFrame(rows, columns=THETA_TABLE_COLUMNS)


def table1_checks(df: pd.DataFrame) -> dict[str, bool]:
    """Uma checagem por linha: α = 2d+1, α* = 2d+2, θ contra a referência e contra a forma analítica."""
    checks = {}
    for row in df.itertuples(index=False):
        d = int(row.d)
        if d in REFERENCE_THETA:
            expected, tol = REFERENCE_THETA[d], 1e-3
        else:
            expected, tol = 2.0 * d + 2.0, 1e-4
        ok = (
            row.alpha == 2 * d + 1
            and abs(row.alpha_star - (2 * d + 2)) <= 1e-6
            and abs(row.theta_sdp - expected) <= tol
            and abs(row.theta_sdp - row.theta_analytic) <= 1e-4
        )
        if not ok:
            logger.warning("[table1_checks] d=%d fora da tolerância: α=%s α*=%.8f θ=%.8f (esperado %.4f)",
                           d, row.alpha, row.alpha_star, row.theta_sdp, expected)
        checks[f"d{d}"] = bool(ok)
    return checks


def curve_frame(curve: pd.DataFrame) -> pd.DataFrame:
    df = curve.copy()
    df["monotone"] = df["h_min"].diff().fillna(0.0) >= -1e-5
    return df


def tradeoff_frame(family: list[TradeoffFunction], curve: pd.DataFrame) -> pd.DataFrame:
    rows = []
    for fn in family:
        rows.append(
            {
                "anchor": fn.anchor,
                "lambda0": fn.lambda_score,
                "intercept": fn.intercept,
                "p_guess_anchor": fn.p_guess_anchor,
                "f_anchor": float(fn.entropy(fn.anchor)),
                "tangent": abs(float(fn.g(fn.anchor)) - fn.p_guess_anchor) <= 1e-5,
                "dominates": verify_tradeoff(fn, curve["omega"], curve["p_guess"]),
            }
        )
    return pd.DataFrame(rows)


def thresholds_frame(n_max: int) -> pd.DataFrame:
    return pd.DataFrame(threshold_table(n_max))


def qubit_gap_frame(n_max: int) -> pd.DataFrame:
    df = pd.DataFrame(qubit_gap_table(n_max))
    df["gap"] = df["quantum"] - df["classical_bound"]
    return df


def qubit_relaxation_frame(n_values) -> pd.DataFrame:
    return pd.DataFrame([qubit_fan_relaxation(n) for n in n_values])


def hv_frame(theta_grid, samples: int | None = None, seed: int | None = None, jobs: int = 1) -> pd.DataFrame:
    df = pd.DataFrame(hv_table(theta_grid, samples, seed, jobs))
    interior = df["theta_c"] < np.pi / 2
    df["ks_exceeds"] = (df["ks_model"] > df["ks_overlap"]) | ~interior
    df["bm_exceeds"] = (df["bm_model"] > df["bm_overlap"]) | ~interior
    if "ks_mc" in df:
        df["ks_mc_ok"] = (df["ks_mc"] - df["ks_model"]).abs() <= 4 * df["ks_mc_se"].clip(lower=1e-12)
        df["bm_mc_ok"] = (df["bm_mc"] - df["bm_model"]).abs() <= 4 * df["bm_mc_se"].clip(lower=1e-12)
    return df


def transcript_frame(runs: list[tuple[int, ProtocolTranscript]]) -> pd.DataFrame:
    """Resumo por execução: (seed, transcrito)."""
    rows = []
    for k, (seed, t) in enumerate(runs):
        rows.append(
            {
                "run": k,
                "seed": seed,
                "omega_obs": t.omega_obs,
                "aborted": t.aborted,
                "certified_length": t.certified_length,
                "n_test": t.n_test,
                "n_rounds": len(t.rounds),
            }
        )
    return pd.DataFrame(rows)


def attack_frames(result: AttackResult) -> tuple[pd.DataFrame, pd.DataFrame]:
    """(tabela da realização, previsões no contexto)."""
    arr = result.target
    rows = []
    for e, (verts, table) in enumerate(zip(arr.hyperedges, result.realization.tables)):
        for key, p in sorted(table.items(), reverse=True):
            rows.append(
                {
                    "context": result.context,
                    "hyperedge": e,
                    "label": arr.labels[e],
                    "vertices": " ".join(str(v) for v in verts),
                    "outcomes": " ".join(f"{o:+d}" for o in key),
                    "probability": str(p),
                }
            )
    preds = pd.DataFrame(
        [{"context": result.context, "vertex": v, "prediction": o} for v, o in sorted(result.predictions.items())]
    )
    return pd.DataFrame(rows), preds


# ---------------------------------------------------------------------------
# Escrita
# ---------------------------------------------------------------------------

def build_xlsx_bytes(df: pd.DataFrame, sheet_name: str = "Tabela") -> bytes:
    """XLSX em memória com colunas dimensionadas pelo conteúdo."""
    buffer = io.BytesIO()
    with pd.ExcelWriter(buffer, engine="xlsxwriter") as writer:
        df.to_excel(writer, index=False, sheet_name=sheet_name)
        ws = writer.sheets[sheet_name]
        for i, col in enumerate(df.columns):
            width = max(df[col].astype(str).map(len).max() if len(df) else 0, len(str(col))) + 2
            ws.set_column(i, i, min(width, 40))
    buffer.seek(0)
    return buffer.getvalue()


def render_table(df: pd.DataFrame, fmt: str) -> str:
    if fmt == "csv":
        return df.to_csv(index=False, float_format=FLOAT_FORMAT)
    if fmt == "json":
        return json.dumps(json.loads(df.to_json(orient="records", double_precision=10)), ensure_ascii=False, indent=1)
    if fmt == "text":
        return df.to_string(index=False, float_format=lambda x: f"{x:.10g}") + "\n"
    raise InvalidParameterError(f"Formato sem renderização em texto: {fmt!r}")


def write_table(df: pd.DataFrame, path: str | Path) -> Path:
    """Formato escolhido pelo sufixo: .csv, .xlsx, .json ou .txt."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    suffix = path.suffix.lower()
    if suffix == ".xlsx":
        path.write_bytes(build_xlsx_bytes(df, sheet_name=path.stem[:31] or "Tabela"))
    elif suffix == ".csv":
        path.write_text(render_table(df, "csv"), encoding="utf-8")
    elif suffix == ".json":
        path.write_text(render_table(df, "json"), encoding="utf-8")
    elif suffix == ".txt":
        path.write_text(render_table(df, "text"), encoding="utf-8")
    else:
        raise InvalidParameterError(f"Sufixo de saída não suportado: {path.suffix!r}")
    logger.info("[write_table] %s (%d linhas)", path, len(df))
    return path


def output_path(out_dir: str | Path, name: str, fmt: str) -> Path:
    if fmt not in SUFFIXES:
        raise InvalidParameterError(f"Formato inválido: {fmt!r}")
    return Path(out_dir) / f"{name}{SUFFIXES[fmt]}"


# ---------------------------------------------------------------------------
# Resumos em JSON
# ---------------------------------------------------------------------------

def combinatorial_summary(g: WeightedGraph | EpsilonGraph) -> dict:
    """{alpha, witness, alpha_star, assignment}; para grafos ε, um resumo por visão mais a cota."""
    if isinstance(g, EpsilonGraph):
        strict, full = strict_and_full_views(g)
        return {
            "epsilon": str(g.epsilon),
            "eps_bound": float(epsilon_independence_bound(g)),
            "strict": combinatorial_summary(strict),
            "full": combinatorial_summary(full),
        }
    alpha = weighted_independence_number(g)
    packing = fractional_packing_number(g)
    return {
        "alpha": float(alpha.value),
        "alpha_exact": str(alpha.value),
        "witness": list(alpha.witness),
        "alpha_star": packing.value,
        "assignment": list(packing.assignment),
    }


def write_json(obj, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
    logger.info("[write_json] %s", path)
    return path


def write_check_report(out_dir: str | Path, command: str, checks: dict[str, bool]) -> Path:
    """checks_<comando>.json com o status geral e cada checagem."""
    report = {
        "command": command,
        "status": "ok" if all(checks.values()) else "failed",
        "checks": {k: bool(v) for k, v in checks.items()},
    }
    return write_json(report, Path(out_dir) / f"checks_{command}.json")
