"""Per-check reports: bounded-ratio bookkeeping, verdicts, serialization.

Every "there exists a constant C" claim is operationalized as a sample
family of LHS/RHS ratios: the fitted constant is the maximum ratio, and a
stability ratio (max over median) certifies non-blow-up across the sampled
range.  Reports serialize deterministically; timestamps live in a separate
metadata block excluded from byte-level comparisons.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

VERDICT_PASS = "pass"
VERDICT_WARN = "warn"
VERDICT_FAIL = "fail"

DEFAULT_STABILITY_CEILING = 3.0

_LHS_FLOOR = 1e-13


@dataclass(frozen=True)
class CheckReport:
    check_name: str
    parameters: dict
    samples: tuple
    fitted_constant: float
    stability_ratio: float
    verdict: str
    notes: tuple

    def to_json_dict(self) -> dict:
        return _to_py({
            "check": self.check_name,
            "parameters": self.parameters,
            "samples": list(self.samples),
            "fitted_constant": self.fitted_constant,
            "stability_ratio": self.stability_ratio,
            "verdict": self.verdict,
            "notes": list(self.notes),
        })

    @property
    def failed(self) -> bool:
        return self.verdict == VERDICT_FAIL


def _to_py(obj):
    """Recursively convert numpy scalars/arrays for deterministic JSON."""
    if isinstance(obj, dict):
        return {str(k): _to_py(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_to_py(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_to_py(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    return obj


def build_report(check_name: str, parameters: dict, samples, *,
                 ceiling: float = DEFAULT_STABILITY_CEILING,
                 max_allowed: float | None = None,
                 notes=(), warn_notes=(), fail_notes=()) -> CheckReport:
    """Assemble a CheckReport from ratio samples.

    Samples are dicts; those carrying a finite "ratio" are usable.  The
    verdict fails on: explicit fail notes, a positive LHS against a
    nonpositive RHS, stability above the ceiling, or (when max_allowed is
    set) a fitted constant above that bound.  A report without usable
    samples can only pass as explicitly vacuous.
    """
    samples = [dict(s) for s in samples]
    notes = list(notes)
    warn_notes = list(warn_notes)
    fail_notes = list(fail_notes)

    ratios = []
    for s in samples:
        lhs = s.get("lhs")
        rhs = s.get("rhs")
        if lhs is not None and rhs is not None and lhs > _LHS_FLOOR and rhs <= 0.0:
            fail_notes.append(
                f"positive LHS {lhs!r} against nonpositive RHS {rhs!r}")
        r = s.get("ratio")
        if r is None:
            continue
        if not np.isfinite(r):
            fail_notes.append(f"non-finite ratio in sample {s}")
            continue
        ratios.append(float(r))

    if ratios:
        fitted = max(ratios)
        median = float(np.median(ratios))
        if fitted == 0.0:
            stability = 1.0
        elif median <= 0.0:
            stability = float("inf")
        else:
            stability = fitted / median
    else:
        fitted = 0.0
        stability = 1.0
        notes.append("vacuous: no usable samples")

    if ratios and stability > ceiling:
        fail_notes.append(
            f"stability ratio {stability:.6g} exceeds ceiling {ceiling:g}")
    if max_allowed is not None and fitted > max_allowed:
        fail_notes.append(
            f"fitted constant {fitted:.6g} exceeds bound {max_allowed:g}")

    if fail_notes:
        verdict = VERDICT_FAIL
    elif warn_notes:
        verdict = VERDICT_WARN
    else:
        verdict = VERDICT_PASS

    return CheckReport(
        check_name=check_name,
        parameters=_to_py(parameters),
        samples=tuple(_to_py(samples)),
        fitted_constant=float(fitted),
        stability_ratio=float(stability),
        verdict=verdict,
        notes=tuple(notes + warn_notes + fail_notes),
    )


def report_json_text(report: CheckReport, meta: dict | None = None) -> str:
    """Deterministic JSON: the `report` block is byte-stable across runs;
    run-specific facts (timestamps, versions) go into `meta`."""
    doc = {"meta": _to_py(meta or {}), "report": report.to_json_dict()}
    return json.dumps(doc, sort_keys=True, indent=1) + "\n"


def summary_csv_text(named_reports) -> str:
    """Suite-level CSV: one row per check in suite order."""
    lines = ["id,check,fitted_constant,stability_ratio,verdict"]
    for name, rep in named_reports:
        lines.append(f"{name},{rep.check_name},{rep.fitted_constant!r},"
                     f"{rep.stability_ratio!r},{rep.verdict}")
    return "\n".join(lines) + "\n"
