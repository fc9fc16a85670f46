"""Report documents for finished experiments.

JSON layout (schema_version 1):

    {
      "meta":      {"version", "schema_version", "seed", "config"},
      "claims":    [ClaimReport, ...],
      "series":    {run key -> {snapshot label -> {"q<i>" -> {purity, entropy, rank}}}},
      "ledgers":   {run key -> QueryLedger},
      "points":    [per-run success probabilities and query counts],
      "precision": [PrecisionReport, ...]
    }

With claims_only set, only meta and claims are written. CSV carries the
claims table alone; text renders claims and points as aligned tables.
"""
import hashlib
import json
import logging
import math
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from qsearch.errors import UsageError
from qsearch.experiment import ExperimentResult

SCHEMA_VERSION = 1
CSV_COLUMNS = ["claim_id", "anchor", "measured", "expected", "verdict", "runtime_ms"]
FORMATS = ("json", "csv", "text")
# Fields that vary between identical runs and are left out of the digest
RUNTIME_FIELDS = {"runtime_ms"}


def _plain(value):
    """numpy scalars and arrays to JSON-native values."""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        # JSON has no infinity; saturated precision figures become null
        return None
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def build_document(result: ExperimentResult) -> dict:
    config = result.config
    document = {
        "meta": {
            "version": result.version,
            "schema_version": SCHEMA_VERSION,
            "seed": config.seed,
            "config": config.model_dump(mode="json"),
        },
        "claims": [claim.model_dump() for claim in result.claims],
    }
    if not config.claims_only:
        document["series"] = result.series
        document["ledgers"] = result.ledgers
        document["points"] = result.points
        document["precision"] = result.precision
    return _plain(document)


def _strip_runtime(value):
    if isinstance(value, dict):
        return {k: _strip_runtime(v) for k, v in value.items() if k not in RUNTIME_FIELDS}
    if isinstance(value, list):
        return [_strip_runtime(v) for v in value]
    return value


def report_digest(document: dict) -> str:
    """SHA-256 over the canonical JSON of a document, runtime fields excluded."""
    canonical = json.dumps(_strip_runtime(document), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def claims_frame(result: ExperimentResult) -> pd.DataFrame:
    rows = [claim.model_dump() for claim in result.claims]
    return pd.DataFrame(rows, columns=CSV_COLUMNS)


def render_report(result: ExperimentResult, fmt: str = "json") -> str:
    if fmt not in FORMATS:
        raise UsageError(f"Unknown report format {fmt!r}; expected one of {', '.join(FORMATS)}")
    if not result.claims:
        raise UsageError("No claims to report")

    if fmt == "json":
        return json.dumps(build_document(result), indent=2) + "\n"
    if fmt == "csv":
        return claims_frame(result).to_csv(index=False)

    config = result.config
    widths = f"n={config.n}" if config.n_max is None else f"n={config.n}..{config.n_max}"
    sections = [
        f"qsearch {result.version}  algorithm={config.algorithm}  {widths}  "
        f"answer={config.answer}  seed={config.seed}",
        "",
        claims_frame(result).to_string(index=False),
    ]
    if result.points and not config.claims_only:
        sections += ["", pd.DataFrame(result.points).to_string(index=False)]
    if result.precision and not config.claims_only:
        precision = pd.DataFrame(result.precision).drop(columns=["unmodeled_resources"])
        sections += ["", precision.to_string(index=False),
                     "unmodeled resources: energy"]
    return "\n".join(sections) + "\n"


def emit_report(result: ExperimentResult, fmt: str = "json", path: Optional[Path] = None) -> str:
    """Render the report and write it to `path`, or return it for stdout when path is None."""
    text = render_report(result, fmt)
    if path is not None:
        path = Path(path)
        # OSError propagates to the caller
        path.write_text(text, encoding="utf-8")
        logging.info(f"Wrote {fmt} report to {path}")
    return text
