# service/report.py
from __future__ import annotations

import io
import math
from collections import Counter
from importlib import metadata
from pathlib import Path

from pydantic import BaseModel, Field
from rich.console import Console
from rich.table import Table

from group_pipeline.alexander import AlexanderSummary
from locus_pipeline.orderability import OrderReport, SlopeInterval
from repvar_pipeline.tracking import TrackingResult


def _ext(v: float) -> float | str:
    """JSON has no infinities; write them as strings."""
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return v


class RootEntry(BaseModel):
    argument: float
    real: float
    imag: float
    multiplicity: int
    simple: bool


class AlexanderPointModel(BaseModel):
    x: float
    multiple: bool
    excluded: bool


class AlexanderModel(BaseModel):
    polynomial: str
    coefficients: list[int]
    value_at_one: int
    lspace_form: bool
    roots: list[RootEntry] = Field(default_factory=list)
    points: list[AlexanderPointModel] = Field(default_factory=list)

    @classmethod
    def from_summary(cls, s: AlexanderSummary) -> "AlexanderModel":
        return cls(
            polynomial=str(s.polynomial),
            coefficients=list(s.polynomial.coeffs),
            value_at_one=s.value_at_one,
            lspace_form=s.lspace_form,
            roots=[
                RootEntry(argument=r.argument, real=r.value.real, imag=r.value.imag,
                           multiplicity=r.multiplicity, simple=r.simple)
                for r in s.roots
            ],
            points=[AlexanderPointModel(x=a.x, multiple=a.multiple, excluded=a.excluded)
                    for a in s.points],
        )


class IntervalModel(BaseModel):
    lo: float | str
    hi: float | str
    lo_open: bool
    hi_open: bool
    text: str
    provenance: list[str] = Field(default_factory=list)

    @classmethod
    def from_interval(cls, iv: SlopeInterval) -> "IntervalModel":
        return cls(lo=_ext(iv.lo), hi=_ext(iv.hi), lo_open=iv.lo_open, hi_open=iv.hi_open,
                   text=str(iv), provenance=list(iv.provenance))


class BranchedModel(BaseModel):
    n: int
    status: str
    axis_crossing: bool
    witness: list[float] | None = None
    arc: str | None = None


class TrackingModel(BaseModel):
    n_samples: int
    start_index: int
    n_branches: int
    monodromy: dict[str, int | None] = Field(default_factory=dict)
    monodromy_is_bijection: bool = True
    events: dict[str, int] = Field(default_factory=dict)
    warnings: list[str] = Field(default_factory=list)

    @classmethod
    def from_result(cls, r: TrackingResult) -> "TrackingModel":
        branches = {q.branch_id for f in r.frames for q in f.points if q.branch_id != 0}
        return cls(
            n_samples=len(r.frames),
            start_index=r.start_index,
            n_branches=len(branches | {int(b) for b in r.monodromy}),
            monodromy={str(k): v for k, v in sorted(r.monodromy.items())},
            monodromy_is_bijection=r.monodromy_is_bijection,
            events=dict(sorted(Counter(e.kind.value for e in r.events).items())),
            warnings=list(r.warnings),
        )


class ReportModel(BaseModel):
    name: str
    config_hash: str
    k: int
    torsion: list[int] = Field(default_factory=list)
    alexander: AlexanderModel | None = None
    intervals: list[IntervalModel] = Field(default_factory=list)
    branched: list[BranchedModel] = Field(default_factory=list)
    caveats: list[str] = Field(default_factory=list)
    orphan_alexander_points: list[float] = Field(default_factory=list)
    counts: dict[str, int] = Field(default_factory=dict)
    tracking: TrackingModel | None = None
    metadata: dict = Field(default_factory=dict)


def package_versions() -> dict[str, str]:
    out = {}
    for name in ("elocus", "numpy", "mpmath", "sympy"):
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = "unknown"
    return out


def build_report_model(
    report: OrderReport,
    *,
    config_hash: str,
    torsion: list[int] | tuple[int, ...] = (),
    tracking: TrackingResult | None = None,
    meta: dict | None = None,
) -> ReportModel:
    return ReportModel(
        name=report.name,
        config_hash=config_hash,
        k=report.k,
        torsion=list(torsion),
        alexander=AlexanderModel.from_summary(report.alexander) if report.alexander else None,
        intervals=[IntervalModel.from_interval(iv) for iv in report.intervals],
        branched=[
            BranchedModel(n=v.n, status=v.status.value, axis_crossing=v.axis_crossing,
                          witness=list(v.witness) if v.witness else None, arc=v.arc)
            for _, v in sorted(report.branched.items())
        ],
        caveats=[c.value for c in report.caveats],
        orphan_alexander_points=[a.x for a in report.orphan_alexander_points],
        counts=dict(sorted(report.counts.items())),
        tracking=TrackingModel.from_result(tracking) if tracking else None,
        metadata=meta or {},
    )


def write_report(model: ReportModel, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(model.model_dump_json(indent=2) + "\n", encoding="utf-8")
    return path


def _branched_summary(items: list[BranchedModel]) -> str:
    ok = [b.n for b in items if b.status == "orderable"]
    if not items:
        return "-"
    if items[0].status == "not_applicable":
        return "not applicable (k != 1)"
    if not ok:
        return "no witness"
    return f"orderable for n in {ok[0]}..{ok[-1]} ({len(ok)} of {len(items)})"


def render_text(model: ReportModel, width: int = 100) -> str:
    """
    Human-readable report as plain text.
    """
    console = Console(file=io.StringIO(), width=width, record=True, color_system=None)
    console.print(f"[bold]{model.name}[/bold]  k={model.k}  config={model.config_hash[:12]}")
    if model.alexander:
        a = model.alexander
        console.print(f"Δ(t) = {a.polynomial}   |Δ(1)| = {abs(a.value_at_one)}   "
                      f"L-space form: {'yes' if a.lspace_form else 'no'}")
        if a.roots:
            roots = Table(title="unit-circle roots of Δ")
            roots.add_column("arg/2π", justify="right")
            roots.add_column("mult", justify="right")
            for r in a.roots:
                roots.add_row(f"{r.argument / (2 * math.pi):.6f}", str(r.multiplicity))
            console.print(roots)
        if a.points:
            xs = ", ".join(
                f"{p.x:.4f}" + (" (multiple)" if p.multiple else "") + (" (excluded)" if p.excluded else "")
                for p in a.points
            )
            console.print(f"Alexander points: {xs}")

    slopes = Table(title="orderable slopes")
    slopes.add_column("interval")
    slopes.add_column("from arcs")
    for iv in model.intervals:
        slopes.add_row(iv.text, ", ".join(iv.provenance))
    console.print(slopes)
    console.print(f"branched covers: {_branched_summary(model.branched)}")
    if model.caveats:
        console.print("caveats: " + ", ".join(model.caveats))
    if model.orphan_alexander_points:
        xs = ", ".join(f"{x:.4f}" for x in model.orphan_alexander_points)
        console.print(f"Alexander points without a nearby arc: {xs}")

    counts = Table(title="counts")
    counts.add_column("item")
    counts.add_column("n", justify="right")
    for key, n in model.counts.items():
        counts.add_row(key, str(n))
    console.print(counts)
    return console.export_text()
