# repvar_pipeline/frames.py
from __future__ import annotations

import json
import logging
import math
from pathlib import Path

import mpmath as mp
import numpy as np

from errors import TrackingError
from repvar_pipeline.seeding import FiberFrame
from repvar_pipeline.system import Chart, RepPoint, RepSystem, abelian_point
from repvar_pipeline.tracking import TrackingResult

logger = logging.getLogger("elocus")


def _hex(v) -> str:
    """Exact hex of a binary float (double or mpf) as ±0x<mantissa>p<exponent>."""
    if not isinstance(v, mp.mpf):
        v = mp.mpf(float(v))  # doubles convert exactly
    # man_exp drops the sign; the raw tuple keeps it
    negative, man, exp, _bc = v._mpf_
    sign = "-" if negative else ""
    return f"{sign}0x{int(man):x}p{int(exp)}"


def _unhex(text: str, bits: int):
    sign = -1 if text.startswith("-") else 1
    body = text.lstrip("-")
    man_hex, exp = body.split("p")
    man = sign * int(man_hex, 16)
    if bits <= 53:
        return math.ldexp(float(man), int(exp)) if man else 0.0
    return mp.mpf((man, int(exp)))


def _encode_complex(v) -> list[str]:
    c = v if isinstance(v, mp.mpc) else mp.mpc(complex(v))
    return [_hex(c.real), _hex(c.imag)]


def _decode_complex(pair: list[str], bits: int):
    if bits <= 53:
        re, im = (_unhex(s, bits) for s in pair)
        return complex(re, im)
    with mp.workprec(bits):
        re, im = (_unhex(s, bits) for s in pair)
        return mp.mpc(re, im)


def dump_frames(result: TrackingResult, path: str | Path, config_hash: str) -> Path:
    """
    Write a tracking result as JSON lines, one tracked point per line after a
    header line. Abelian points are closed form and are not stored.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        header = {
            "config_hash": config_hash,
            "n_samples": len(result.frames),
            "start_index": result.start_index,
            "monodromy": {str(k): v for k, v in sorted(result.monodromy.items())},
            "monodromy_is_bijection": result.monodromy_is_bijection,
            "warnings": result.warnings,
        }
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for frame in result.frames:
            for q in frame.points:
                if q.chart is Chart.ABELIAN:
                    continue
                line = {
                    "angle_index": frame.angle_index,
                    "branch_id": q.branch_id,
                    "signs": list(q.signs),
                    "precision_bits": q.precision_bits,
                    "residual": q.residual,
                    "target": _encode_complex(q.target),
                    "params": [_encode_complex(v) for v in q.params],
                }
                fh.write(json.dumps(line, sort_keys=True) + "\n")
    logger.info("frames written to %s", path)
    return path


def load_frames(path: str | Path, system: RepSystem) -> tuple[TrackingResult, str]:
    """
    Rebuild a TrackingResult from a frame dump.

    Returns:
        tuple: (result, config hash recorded in the dump).
    """
    path = Path(path)
    if not path.is_file():
        raise TrackingError(f"frame dump not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines:
        raise TrackingError(f"frame dump {path} is empty")
    header = json.loads(lines[0])
    n = int(header["n_samples"])
    frames = [
        FiberFrame(
            angle_index=j,
            target=complex(np.exp(2j * math.pi * j / n)),
            points=[abelian_point(system.homology, 2 * math.pi * j / n, angle_index=j)],
        )
        for j in range(n)
    ]
    for raw in lines[1:]:
        if not raw.strip():
            continue
        rec = json.loads(raw)
        bits = int(rec["precision_bits"])
        params = [_decode_complex(p, bits) for p in rec["params"]]
        x = np.array(params, dtype=object if bits > 53 else complex)
        frames[int(rec["angle_index"])].points.append(RepPoint(
            params=tuple(params),
            matrices=tuple(system.matrices(x)),
            residual=float(rec["residual"]),
            precision_bits=bits,
            branch_id=int(rec["branch_id"]),
            angle_index=int(rec["angle_index"]),
            target=complex(_decode_complex(rec["target"], 53)),
            signs=tuple(rec["signs"]),
        ))
    result = TrackingResult(
        frames=frames,
        start_index=int(header["start_index"]),
        events=[],
        monodromy={int(k): v for k, v in header["monodromy"].items()},
        monodromy_is_bijection=bool(header["monodromy_is_bijection"]),
        warnings=list(header.get("warnings", [])),
    )
    logger.info("resumed %d frames from %s", n, path)
    return result, str(header["config_hash"])
