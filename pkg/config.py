# config.py
# Configuração: variáveis de ambiente, arquivo key=value e RunConfig validado

import os
from dataclasses import dataclass, field, replace
from pathlib import Path

from errors import InvalidParameterError

# ---------------------------------------------------------------------------
# Defaults vindos do ambiente
# ---------------------------------------------------------------------------
OUTPUT_DIR = Path(os.environ.get("CTXRAND_OUTPUT_DIR", "out"))
SOLVER_TOL = float(os.environ.get("CTXRAND_SOLVER_TOL", "1e-8"))
MAX_ITER = int(os.environ.get("CTXRAND_MAX_ITER", "200"))

COMMANDS = ("table1", "curve", "thresholds", "qubit", "protocol", "attack", "hvmodels", "graph")
FORMATS = ("csv", "json", "text", "xlsx")
STOCHASTIC_COMMANDS = ("protocol", "hvmodels")

# chave -> conversor
_PARAM_TYPES = {
    "d": int,
    "n": int,
    "n_max": int,
    "d_min": int,
    "d_max": int,
    "epsilon": float,
    "level": str,
    "grid": str,
    "anchors": str,
    "seed": int,
    "tol": float,
    "rounds": int,
    "gamma": float,
    "omega_exp": float,
    "delta": float,
    "l_ext": float,
    "runs": int,
    "samples": int,
    "target": str,
    "context": int,
    "device": str,
    "theta_c": str,
    "family": str,
    "jobs": int,
    "action": str,
    "file": str,
}


@dataclass(frozen=True)
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: Path = OUTPUT_DIR
    fmt: str = "csv"

    def get(self, key: str, default=None):
        return self.params.get(key, default)

    def __getitem__(self, key: str):
        if key not in self.params:
            raise InvalidParameterError(f"Parâmetro obrigatório ausente: {key!r}")
        return self.params[key]

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise InvalidParameterError(f"Comando desconhecido: {self.command!r}")
        if self.fmt not in FORMATS:
            raise InvalidParameterError(f"Formato inválido: {self.fmt!r} (use {', '.join(FORMATS)})")
        for key in self.params:
            if key not in _PARAM_TYPES:
                raise InvalidParameterError(f"Parâmetro desconhecido: {key!r}")
        if self.command in STOCHASTIC_COMMANDS and self.params.get("seed") is None:
            raise InvalidParameterError(f"--seed é obrigatório para '{self.command}'")
        tol = self.params.get("tol")
        if tol is not None and tol <= 0:
            raise InvalidParameterError(f"tol deve ser > 0 (recebido {tol})")
        jobs = self.params.get("jobs")
        if jobs is not None and jobs < 1:
            raise InvalidParameterError(f"jobs deve ser >= 1 (recebido {jobs})")
        return self


# ---------------------------------------------------------------------------
# Arquivo key=value
# ---------------------------------------------------------------------------

def parse_config_text(text: str) -> dict:
    """Lê linhas key=value; '#' inicia comentário."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InvalidParameterError(f"Linha {lineno} sem '=': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key] = value
    return values


def coerce_params(raw: dict) -> dict:
    out = {}
    for key, value in raw.items():
        if value is None:
            continue
        conv = _PARAM_TYPES.get(key)
        if conv is None:
            raise InvalidParameterError(f"Parâmetro desconhecido: {key!r}")
        try:
            out[key] = conv(value)
        except (TypeError, ValueError) as e:
            raise InvalidParameterError(f"Valor inválido para {key}: {value!r} ({e})") from e
    return out


def load_run_config(
    command: str,
    config_path: str | Path | None = None,
    overrides: dict | None = None,
    output: str | Path | None = None,
    fmt: str | None = None,
) -> RunConfig:
    """
    Monta o RunConfig: arquivo de config primeiro, flags da linha de comando
    por cima. Só valores não-nulos das flags sobrescrevem.
    """
    file_values: dict = {}
    if config_path is not None:
        path = Path(config_path)
        if not path.exists():
            raise InvalidParameterError(f"Arquivo de config não encontrado: {path}")
        file_values = parse_config_text(path.read_text(encoding="utf-8"))

    file_output = file_values.pop("output", None)
    file_fmt = file_values.pop("format", None)

    params = coerce_params(file_values)
    params.update(coerce_params(overrides or {}))

    cfg = RunConfig(
        command=command,
        params=params,
        output=Path(output or file_output or OUTPUT_DIR),
        fmt=fmt or file_fmt or "csv",
    )
    return cfg.validate()


def with_params(cfg: RunConfig, **updates) -> RunConfig:
    params = dict(cfg.params)
    params.update({k: v for k, v in updates.items() if v is not None})
    return replace(cfg, params=params).validate()
