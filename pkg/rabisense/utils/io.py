"""Plain-text outputs: CSV tables and the TOML run manifest."""
import csv
import os
from dataclasses import dataclass, field
from typing import Any, Dict, List, Sequence

import toml

from rabisense.logger import init_logger
from rabisense.utils.errors import ConfigError
from rabisense.utils.utils import format_float

logger = init_logger(__name__)

RECORD_HEADER = ("t_s", "n_mean")
RESULT_HEADER = (
    "delta_est_persec",
    "delta_err_persec",
    "k",
    "m",
    "xi2",
    "sigma_res",
    "gamma",
    "seed",
)


def _cell(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format_float(value)
    if value is None:
        return ""
    return str(value)


def ensure_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as e:
        raise ConfigError(f"cannot create output directory: {e}", key="output_dir")
    if not os.access(path, os.W_OK):
        raise ConfigError(f"{path} is not writable", key="output_dir")
    return path


def write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"Row {row} does not match header {header}.")
            writer.writerow([_cell(v) for v in row])
    logger.info("Wrote %d rows to %s", len(rows), path)
    return path


def read_csv(path: str) -> List[Dict[str, str]]:
    with open(path, newline="") as f:
        reader = csv.DictReader(f, skipinitialspace=True)
        return [dict(row) for row in reader]


def read_record_csv(path: str) -> List[tuple]:
    """(t_s, n_mean) pairs from a record file."""
    rows = read_csv(path)
    if not rows or set(RECORD_HEADER) - set(rows[0]):
        raise ConfigError(f"{path} is not a record file with columns {RECORD_HEADER}.")
    return [(float(r["t_s"]), float(r["n_mean"])) for r in rows]


def _plain(value: Any) -> Any:
    """Turn enums and tuples into TOML-friendly values."""
    if hasattr(value, "value") and hasattr(value, "name"):
        return value.value if isinstance(value.value, str) else value.name.lower()
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items() if v is not None}
    return value


@dataclass
class RunManifest:
    """Everything needed to rerun a subcommand: its resolved parameters, seed and outputs.

    The `[params]` table is itself a valid config file.
    """

    subcommand: str
    params: Dict[str, Any]
    seed: int
    outputs: List[str] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)
    version: str = ""

    def to_toml(self) -> str:
        doc = {
            "run": {
                "subcommand": self.subcommand,
                "seed": self.seed,
                "version": self.version,
                "outputs": list(self.outputs),
            },
            "params": _plain(self.params),
        }
        if self.metadata:
            doc["metadata"] = _plain(self.metadata)
        return toml.dumps(doc)

    def write(self, path: str) -> str:
        with open(path, "w") as f:
            f.write(self.to_toml())
        logger.info("Wrote manifest %s", path)
        return path
