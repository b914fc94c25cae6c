"""Result files (CSV or JSON tables stamped with the config hash) and run manifests."""

import hashlib
import json
import logging
import math
import os
import tempfile
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd

from . import __version__
from .config import settings
from .models import RunConfig, RunManifest, SweepResult

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"
SWEEP_COLUMNS = ["param", "lambda", "measure", "norm", "ratio", "flag", "label", "kind"]


def config_sha256(config: RunConfig) -> str:
    """SHA-256 of the canonical (sorted-key) JSON form of the run configuration."""
    canonical = json.dumps(config.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def default_output(config: RunConfig) -> Path:
    if config.output:
        return Path(config.output)
    name = config.command.replace(" ", "-")
    return Path(settings.output_dir) / f"{name}.{config.format}"


def manifest_path(output: Path) -> Path:
    return output.with_name(output.name + ".manifest.json")


def atomic_write(path: Path, text: str) -> None:
    """Write through a temporary file in the target directory and rename it into place."""
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def sweep_rows(result: SweepResult) -> List[Dict[str, Any]]:
    return [
        {
            "param": r.param, "lambda": r.lam, "measure": r.measure, "norm": r.norm,
            "ratio": r.ratio, "flag": r.flag, "label": r.label, "kind": r.kind,
        }
        for r in result.rows
    ]


def sweep_meta(result: SweepResult) -> Dict[str, Any]:
    return json.loads(result.model_dump_json(exclude={"rows"}))


def _jsonable(value: Any) -> Any:
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, complex):
        return [_jsonable(value.real), _jsonable(value.imag)]
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "item"):
        return _jsonable(value.item())
    return value


def render_csv(rows: List[Dict[str, Any]], digest: str, columns: Optional[List[str]] = None) -> str:
    frame = pd.DataFrame(rows, columns=columns)
    body = frame.to_csv(index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    return f"# config_sha256: {digest}\n{body}"


def render_json(rows: List[Dict[str, Any]], digest: str, meta: Optional[Dict[str, Any]] = None) -> str:
    payload = {"config_sha256": digest, "rows": rows, "meta": meta or {}}
    return json.dumps(_jsonable(payload), sort_keys=True, indent=2) + "\n"


def write_result(
    config: RunConfig,
    rows: List[Dict[str, Any]],
    meta: Optional[Dict[str, Any]] = None,
    columns: Optional[List[str]] = None,
) -> Path:
    """Write the table for ``config`` and return its path."""
    digest = config_sha256(config)
    output = default_output(config)
    if config.format == "json":
        text = render_json(rows, digest, meta)
    else:
        text = render_csv(rows, digest, columns)
    atomic_write(output, text)
    logger.info("wrote %s (%d rows)", output, len(rows))
    return output


def write_manifest(
    config: RunConfig, output: Path, flagged_rows: int = 0, timings: Optional[Dict[str, float]] = None
) -> Path:
    manifest = RunManifest(
        command=config.command,
        config=config,
        config_sha256=config_sha256(config),
        version=__version__,
        output=str(output),
        flagged_rows=flagged_rows,
        timings=timings or {},
    )
    path = manifest_path(output)
    atomic_write(path, manifest.model_dump_json(indent=2) + "\n")
    return path
