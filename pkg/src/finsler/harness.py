"""Reproducible runs: sampling, suite orchestration, and report emission.

The canonical artifact of a run is a JSON report: keys sorted, floats in
shortest round-trip form, no timestamps — two runs with the same
configuration are byte-identical.  Markdown output is a pure projection of
the same data.  Exit-code contract: 0 when nothing failed, 1 when any item
failed or errored, 2 on configuration/schema problems.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import classify as classify_mod
from . import conformal as conformal_mod
from .classify import (HYPOTHESES, PREDICATES, PROPOSITIONS, Verdict,
                       check_hypothesis, classify, default_tolerance)
from .conformal import THEOREM_IDS, lift, verify_theorem
from .errors import ConeTooThinError, SchemaError
from .jets import Point
from .metric import FinslerStructure, parse_metric

TOOL_VERSION = "0.1.0"


def sample_points(F: FinslerStructure, count: int, seed: int) -> list[Point]:
    """Deterministic admissible sample points.

    Positions are uniform in the chart box [-1, 1]^n; directions are drawn
    uniformly on the annulus 0.5 <= |y| <= 2 and rejection-sampled against
    the structure's admissible cone.
    """
    if count < 1:
        raise SchemaError("sample count must be >= 1")
    rng = np.random.default_rng(seed)
    out: list[Point] = []
    attempts = 0
    max_attempts = max(10_000, 500 * count)
    while len(out) < count:
        if attempts >= max_attempts or (
                attempts >= 200 and len(out) < attempts / 100):
            raise ConeTooThinError(
                f"admissible-cone rejection rate above 99%: "
                f"{len(out)}/{attempts} accepted")
        attempts += 1
        x = rng.uniform(-1.0, 1.0, F.n)
        u = rng.standard_normal(F.n)
        norm = float(np.linalg.norm(u))
        if norm < 1e-12:
            continue
        r = rng.uniform(0.5, 2.0)
        y = (r / norm) * u
        if F.admissible(tuple(x), tuple(y)):
            out.append(Point(tuple(x), tuple(y)))
    return out


@dataclass(frozen=True)
class RunConfig:
    command: str                       # verify | classify | invariance
    metric: str                        # path to a metric document, or inline JSON
    sigma: Optional[str] = None
    theorems: tuple = ()
    predicates: tuple = ()
    propositions: tuple = ()
    samples: int = 20
    seed: int = 7
    tol: Optional[float] = None
    out: Optional[str] = None
    format: str = "json"


@dataclass
class VerificationReport:
    version: str
    config: dict
    items: list
    summary: dict

    def to_json(self) -> str:
        doc = {"version": self.version, "config": self.config,
               "items": self.items, "summary": self.summary}
        return json.dumps(_plain(doc), sort_keys=True, indent=2) + "\n"

    def to_markdown(self) -> str:
        lines = [f"# finsler report (v{self.version})", ""]
        cfg = _plain(self.config)
        lines.append("## configuration")
        lines.append("")
        for key in sorted(cfg):
            lines.append(f"- **{key}**: `{cfg[key]}`")
        lines.append("")
        lines.append("## items")
        lines.append("")
        lines.append("| id | status | max residual |")
        lines.append("|----|--------|--------------|")
        for item in self.items:
            res = item.get("max_residual")
            res_s = repr(res) if isinstance(res, float) else "-"
            lines.append(f"| {item['id']} | {item['status']} | {res_s} |")
        lines.append("")
        lines.append("## summary")
        lines.append("")
        for key in sorted(self.summary):
            lines.append(f"- **{key}**: {self.summary[key]}")
        lines.append("")
        return "\n".join(lines)

    @property
    def exit_code(self) -> int:
        return 0 if self.summary.get("fail", 0) == 0 and \
            self.summary.get("error", 0) == 0 else 1


def _plain(obj):
    """Recursively convert to JSON-serializable plain Python types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    return obj


def _verdict_to_item(v: Verdict, item_id: str) -> dict:
    status = {"holds": "pass", "fails": "fail"}.get(v.status, v.status)
    worst = None
    if v.residuals:
        worst = int(np.argmax(v.residuals))
    return {
        "id": item_id,
        "status": status,
        "max_residual": v.max_residual,
        "worst_sample": worst,
        "tolerance": v.tolerance,
        "samples_evaluated": v.samples_evaluated,
        "samples_skipped": v.samples_skipped,
        "reason": v.reason,
        "fitted": v.fitted,
    }


def _load_structure(metric: str) -> FinslerStructure:
    text = metric
    if not metric.lstrip().startswith("{"):
        try:
            with open(metric, "r", encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise SchemaError(f"cannot read metric file: {exc}") from exc
    return parse_metric(text)


def _resolve_ids(requested, universe, what: str) -> tuple:
    if not requested:
        raise SchemaError(f"no {what} requested")
    if len(requested) == 1 and requested[0] == "all":
        return tuple(universe)
    bad = [r for r in requested if r not in universe]
    if bad:
        raise SchemaError(f"unknown {what}: {', '.join(bad)}")
    return tuple(requested)


def _workers() -> int:
    try:
        return max(1, int(os.environ.get("FINSLER_WORKERS", "1")))
    except ValueError:
        return 1


def _map_items(fn, ids):
    w = _workers()
    if w == 1:
        return [fn(i) for i in ids]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, ids))


def _run_verify(config: RunConfig) -> list:
    if config.sigma is None:
        raise SchemaError("verify requires a sigma expression")
    base = _load_structure(config.metric)
    cc = lift(base, config.sigma)
    ids = _resolve_ids(config.theorems, THEOREM_IDS, "theorem ids")
    samples = sample_points(base, config.samples, config.seed)
    tol = config.tol if config.tol is not None else 1e-8
    def one(tid):
        try:
            rec = verify_theorem(tid, cc, samples, tol=tol)
        except Exception as exc:
            return {"id": tid, "status": "error",
                    "detail": f"{type(exc).__name__}: {exc}"}
        return rec
    return sorted(_map_items(one, ids), key=lambda r: r["id"])


def _run_classify(config: RunConfig) -> list:
    F = _load_structure(config.metric)
    names = _resolve_ids(config.predicates, PREDICATES, "predicates")
    samples = sample_points(F, config.samples, config.seed)
    def one(name):
        try:
            v = classify(F, name, samples, tol=config.tol)
        except Exception as exc:
            return {"id": name, "status": "error",
                    "detail": f"{type(exc).__name__}: {exc}"}
        return _verdict_to_item(v, name)
    return sorted(_map_items(one, names), key=lambda r: r["id"])


def _proposition_item(cc, pred: str, hyp: Optional[str],
                      samples: Sequence[Point], tol: Optional[float]) -> dict:
    ptol = tol if tol is not None else default_tolerance(pred)
    item = {"id": pred, "hypothesis": hyp}
    if hyp is not None:
        hv = check_hypothesis(cc, hyp, samples)
        item["hypothesis_status"] = hv.status
        item["hypothesis_residual"] = hv.max_residual
        if hv.status != "holds":
            item["status"] = "inapplicable"
            item["reason"] = f"hypothesis {hyp} does not hold"
            item["max_residual"] = None
            return item
    if pred == "p-reducible":
        sig = max(abs(cc.sigma_value(p)) for p in samples)
        hom = check_hypothesis(cc, "homothety", samples)
        if hom.status == "holds" and sig < 1e-12:
            item["status"] = "inapplicable"
            item["reason"] = ("excluded: scale function identically zero "
                              "(source restricts this case)")
            item["max_residual"] = None
            return item
    v_base = classify(cc.base, pred, samples, tol=ptol)
    v_lift = classify(cc.lifted, pred, samples, tol=ptol)
    item["base_status"] = v_base.status
    item["lifted_status"] = v_lift.status
    residuals = [r for r in (v_base.max_residual, v_lift.max_residual)
                 if r is not None]
    item["max_residual"] = max(residuals) if residuals else None
    item["tolerance"] = ptol
    if v_base.status == "inapplicable" and v_lift.status == "inapplicable":
        item["status"] = "pass"
        item["reason"] = f"both sides inapplicable: {v_base.reason}"
    elif "inapplicable" in (v_base.status, v_lift.status):
        item["status"] = "fail"
        item["reason"] = "applicability differs between base and lifted"
    elif v_base.status == v_lift.status:
        item["status"] = "pass"
    elif hyp is not None:
        # conditional propositions get x10 slack on the disagreeing side
        failing = v_lift if v_lift.status == "fails" else v_base
        if failing.max_residual is not None and \
                failing.max_residual <= 10 * ptol:
            item["status"] = "pass"
            item["reason"] = "agreement within x10 tolerance slack"
        else:
            item["status"] = "fail"
    else:
        item["status"] = "fail"
    return item


def _run_invariance(config: RunConfig) -> list:
    if config.sigma is None:
        raise SchemaError("invariance requires a sigma expression")
    base = _load_structure(config.metric)
    cc = lift(base, config.sigma)
    table = {pred: hyp for pred, hyp in PROPOSITIONS}
    names = _resolve_ids(config.propositions, tuple(table), "propositions")
    samples = sample_points(base, config.samples, config.seed)
    def one(name):
        try:
            return _proposition_item(cc, name, table[name], samples, config.tol)
        except Exception as exc:
            return {"id": name, "status": "error",
                    "detail": f"{type(exc).__name__}: {exc}"}
    return sorted(_map_items(one, names), key=lambda r: r["id"])


def run_suite(config: RunConfig) -> VerificationReport:
    """Execute one configured run and assemble its report."""
    if config.command == "verify":
        items = _run_verify(config)
    elif config.command == "classify":
        items = _run_classify(config)
    elif config.command == "invariance":
        items = _run_invariance(config)
    else:
        raise SchemaError(f"unknown command {config.command!r}")
    summary: dict = {}
    for item in items:
        summary[item["status"]] = summary.get(item["status"], 0) + 1
    summary.setdefault("pass", 0)
    summary.setdefault("fail", 0)
    summary.setdefault("error", 0)
    config_echo = {
        "command": config.command, "metric": config.metric,
        "sigma": config.sigma, "theorems": list(config.theorems),
        "predicates": list(config.predicates),
        "propositions": list(config.propositions),
        "samples": config.samples, "seed": config.seed, "tol": config.tol,
        "format": config.format,
    }
    report = VerificationReport(version=TOOL_VERSION, config=config_echo,
                                items=items, summary=summary)
    if config.out:
        text = report.to_markdown() if config.format == "markdown" \
            else report.to_json()
        with open(config.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    return report
