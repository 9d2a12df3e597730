# locus_pipeline/export.py
from __future__ import annotations

import csv
import io
import logging
import math
from pathlib import Path

from locus_pipeline.locus import Locus, LocusSample, SampleFlag
from repvar_pipeline.system import ABELIAN_BRANCH

logger = logging.getLogger("elocus")

CSV_COLUMNS = ("branch_id", "angle_index", "x", "y", "flags")

# drawing constants, user units per locus unit
UNIT = 120.0
MARGIN = 40.0
TICK = 5.0


def _write_text(path: str | Path, text: str) -> Path:
    path = Path(path)
    if path.parent and not path.parent.exists():
        path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8", newline="\n")
    return path


def locus_to_csv(locus: Locus, config_hash: str = "") -> str:
    buf = io.StringIO()
    buf.write(f"# config_hash={config_hash}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    rows = [(a.branch_id, s) for a in locus.arcs for s in a.samples]
    rows += [(s.branch_id, s) for s in locus.excluded]
    for branch_id, s in rows:
        flags = "|".join(sorted(f.value for f in s.flags))
        writer.writerow((branch_id, s.angle_index, repr(s.x), repr(s.y), flags))
    return buf.getvalue()


def parse_csv(text: str) -> tuple[str, list[LocusSample]]:
    """
    Read back a locus CSV.

    Returns:
        tuple: (config hash, samples in file order).
    """
    lines = text.splitlines()
    config_hash = ""
    if lines and lines[0].startswith("# config_hash="):
        config_hash = lines[0].split("=", 1)[1]
        lines = lines[1:]
    samples = []
    for row in csv.DictReader(lines):
        flags = frozenset(SampleFlag(f) for f in row["flags"].split("|") if f)
        samples.append(LocusSample(
            x=float(row["x"]),
            y=float(row["y"]),
            flags=flags,
            branch_id=int(row["branch_id"]),
            angle_index=int(row["angle_index"]),
        ))
    return config_hash, samples


def export_csv(locus: Locus, path: str | Path, config_hash: str = "") -> Path:
    out = _write_text(path, locus_to_csv(locus, config_hash))
    logger.info("csv written to %s", out)
    return out


def _num(v: float) -> str:
    r = round(v, 3)
    if r == int(r):
        return str(int(r))
    return f"{r:.3f}".rstrip("0")


def _props(props: dict) -> str:
    return " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in props.items())


def _tag(name: str, **props) -> str:
    return f"<{name} {_props(props)}/>"


def locus_to_svg(locus: Locus, config_hash: str = "") -> str:
    """
    Render the strip [0, k] × [-Y, Y] with the axis, integer ticks, arcs as
    polylines, parabolic points as half-disks on the sides and Alexander
    points as disks on the axis.
    """
    k = locus.k
    ys = [abs(s.y) for s in locus.samples(include_axis=False)]
    Y = (max(ys) if ys else 0.0) + 1.0
    Y = float(math.ceil(Y))
    width = k * UNIT + 2 * MARGIN
    height = 2 * Y * UNIT + 2 * MARGIN

    def px(x: float) -> str:
        return _num(MARGIN + x * UNIT)

    def py(y: float) -> str:
        return _num(MARGIN + (Y - y) * UNIT)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_num(width)}" '
        f'height="{_num(height)}" viewBox="0 0 {_num(width)} {_num(height)}">',
        f"<!-- config_hash={config_hash} k={k} -->",
        _tag("rect", x=px(0), y=py(Y), width=_num(k * UNIT), height=_num(2 * Y * UNIT),
             fill="none", stroke="#999999", stroke_width="1"),
    ]
    for i in range(k + 1):
        out.append(_tag("line", x1=px(i), y1=_num(MARGIN + Y * UNIT - TICK),
                        x2=px(i), y2=_num(MARGIN + Y * UNIT + TICK), stroke="#000000"))
    for j in range(-int(Y), int(Y) + 1):
        out.append(_tag("line", x1=_num(MARGIN - TICK), y1=py(j), x2=px(0), y2=py(j),
                        stroke="#000000"))
        out.append(
            f'<text x="{_num(MARGIN - 2 * TICK)}" y="{py(j)}" font-size="10" '
            f'text-anchor="end">{j}</text>'
        )

    for arc in locus.arcs:
        pts = " ".join(f"{px(s.x)},{py(s.y)}" for s in arc.samples)
        if arc.branch_id == ABELIAN_BRANCH:
            style = {"stroke": "#000000", "stroke_width": "1.5"}
        else:
            style = {"stroke": "#1f4e9c", "stroke_width": "1.5"}
        if len(arc.samples) == 1:
            s = arc.samples[0]
            out.append(_tag("circle", cx=px(s.x), cy=py(s.y), r="2", fill=style["stroke"]))
        else:
            out.append(_tag("polyline", points=pts, fill="none", **style))

    r = 5.0
    for s in locus.samples(include_axis=False):
        if SampleFlag.PARABOLIC not in s.flags:
            continue
        # half-disk opening into the strip
        side = 1 if s.x < k / 2 else -1
        x0, y0 = MARGIN + s.x * UNIT, MARGIN + (Y - s.y) * UNIT
        sweep = 1 if side > 0 else 0
        out.append(_tag(
            "path",
            d=f"M {_num(x0)} {_num(y0 - r)} A {_num(r)} {_num(r)} 0 0 {sweep} "
              f"{_num(x0)} {_num(y0 + r)} Z",
            fill="#c0392b",
        ))

    for a in locus.alexander_points:
        if a.multiple:
            out.append(_tag("circle", cx=px(a.x), cy=py(0), r="4", fill="#ffffff",
                            stroke="#2e7d32", stroke_width="2"))
        else:
            out.append(_tag("circle", cx=px(a.x), cy=py(0), r="4", fill="#2e7d32"))
    out.append("</svg>")
    return "\n".join(out) + "\n"


def export_svg(locus: Locus, path: str | Path, config_hash: str = "") -> Path:
    out = _write_text(path, locus_to_svg(locus, config_hash))
    logger.info("svg written to %s", out)
    return out


def export(locus: Locus, fmt: str, path: str | Path, config_hash: str = "") -> Path:
    if fmt == "csv":
        return export_csv(locus, path, config_hash)
    if fmt == "svg":
        return export_svg(locus, path, config_hash)
    raise ValueError(f"unknown export format: {fmt}")
