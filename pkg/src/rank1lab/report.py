"""Machine-readable run reports: JSON serialization against a versioned
schema, atomic file writes, and bit-stable CSV exports.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
import tempfile
from importlib import resources

import jsonschema
import numpy as np

SCHEMA_VERSION = "1"

#: Serialized violation / certificate lists are truncated at this length;
#: the full lists go to CSV (ellipticity) or stay in the Python objects.
MAX_LISTED = 64


def jsonable(x):
    """Recursively convert results to JSON-safe structures.

    numpy scalars/arrays become floats/nested lists; non-finite floats
    become None so the output is strict JSON.
    """
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, float):
        return x if math.isfinite(x) else None
    if isinstance(x, (np.floating, np.integer)):
        return jsonable(x.item())
    if isinstance(x, np.ndarray):
        return [jsonable(v) for v in x.tolist()]
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return {f.name: jsonable(getattr(x, f.name)) for f in dataclasses.fields(x)}
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if hasattr(x, "xi") and hasattr(x, "eta"):  # RankOnePerturbation
        return {"xi": jsonable(x.xi), "eta": jsonable(x.eta)}
    raise TypeError(f"cannot serialize {type(x).__name__}")


def identity_suite_json(res):
    return {
        "seed": res.seed,
        "samples": res.samples,
        "violations": res.violations,
        "checks": {
            name: {
                "max_scaled_error": jsonable(stat.max_scaled_error),
                "tolerance": stat.tolerance,
                "failures": stat.failures,
            }
            for name, stat in res.checks.items()
        },
    }


def gradient_suite_json(res):
    return {
        "seed": res.seed,
        "violations": res.violations,
        "models": {
            m.model: {
                "n_F": m.n_F,
                "max_rel_error": jsonable(m.max_rel_error),
                "tolerance": m.tolerance,
                "richardson_ratio": jsonable(m.richardson_ratio),
                "failures": m.failures,
            }
            for m in res.models
        },
    }


def theorem_suite_json(res):
    return {
        "seed": res.seed,
        "samples": res.samples,
        "tolerance": res.tolerance,
        "max_scaled_gap": jsonable(res.max_scaled_gap),
        "per_model_max": jsonable(res.per_model_max),
        "violations": res.violations,
    }


def twin_suite_json(res):
    return {
        "seed": res.seed,
        "twin_samples": res.twin_samples,
        "det_samples": res.det_samples,
        "min_gap_ratio": jsonable(res.min_gap_ratio),
        "max_det_rel_error": jsonable(res.max_det_rel_error),
        "violations": res.violations,
    }


def ellipticity_json(rep):
    return {
        "model": rep.model,
        "seed": rep.seed,
        "samples_tested": rep.samples_tested,
        "min_second_derivative": jsonable(rep.min_second_derivative),
        "argmin": None
        if rep.argmin is None
        else {
            "F": jsonable(rep.argmin[0]),
            "xi": jsonable(rep.argmin[1]),
            "eta": jsonable(rep.argmin[2]),
        },
        "violations_total": len(rep.violations),
        "violations": [jsonable(v) for v in rep.violations[:MAX_LISTED]],
        "indeterminate": rep.indeterminate,
    }


def injectivity_json(model_name, res):
    return {
        "model": model_name,
        "seed": res.seed,
        "starts": res.starts,
        "min_residual_found": jsonable(res.min_residual_found),
        "certificates_total": len(res.certificates),
        "certificates": [jsonable(c) for c in res.certificates[:MAX_LISTED]],
    }


def blatzko_scan_json(records, summary):
    return {
        "n": len(records),
        "alpha_min": records[0].alpha if records else None,
        "alpha_max": records[-1].alpha if records else None,
        "is_monotone": summary.is_monotone,
        "argmax_alpha": jsonable(summary.argmax_alpha),
        "max_spherical": jsonable(summary.max_spherical),
        "collision": jsonable(summary.collision),
    }


def pc_check_json(model_name, res):
    return {
        "model": model_name,
        "points": [jsonable(pt) for pt in res.points],
        "verdict": res.verdict,
        "spherical_monotone": res.spherical_monotone,
        "spherical_argmax": jsonable(res.spherical_argmax),
        "violations": sum(1 for pt in res.points if not pt.skipped and pt.product <= 0.0),
    }


def load_schema() -> dict:
    with resources.files("rank1lab.schemas").joinpath("report.schema.json").open() as fh:
        return json.load(fh)


def validate_report(report: dict):
    """Raise jsonschema.ValidationError if the report violates the schema."""
    jsonschema.validate(report, load_schema())


def stable_dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False)


def _atomic_write_text(text: str, path: str):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_report(report: dict, path: str):
    """Validate and write report JSON (temp file + rename, never partial)."""
    validate_report(report)
    _atomic_write_text(stable_dumps(report) + "\n", path)


def write_csv(path: str, header: list[str], rows):
    """CSV with 17-significant-digit numbers, '.' decimals, LF endings."""
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_csv_cell(v) for v in row))
    _atomic_write_text("\n".join(lines) + "\n", path)


def _csv_cell(v) -> str:
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")
