"""On-disk formats: binary matrices with a text header, line-oriented picks, graymaps.

Gather and spectrum files start with ``key value`` text lines terminated by a
line reading ``end``; the payload that follows is little-endian float64 in C
order. Picks files hold one block per location::

    location <line> <cdp> [seed] [low_confidence]
    <t> <v>
    ...

with blocks separated by blank lines and numbers written with ``repr`` so a
write/read round trip is exact.
"""

from __future__ import annotations

import json
import math
import os
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .model import CmpGather, SpectrumGrid, SurveyIndex, TimeAxis, UelError, VelocityAxis, VelocityFunction

GATHER_MAGIC = "uelpick-gather 1"
SPECTRUM_MAGIC = "uelpick-spectrum 1"
PICKS_MAGIC = "# uelpick-picks 1"
_LE_F8 = np.dtype("<f8")


class IoError(UelError):
    """A file is missing, unreadable or malformed."""


def _write_atomic(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc.strerror or exc}") from exc


def _header(magic: str, fields: Iterable[tuple[str, object]]) -> bytes:
    lines = [magic] + [f"{k} {v!r}" if isinstance(v, float) else f"{k} {v}" for k, v in fields]
    return ("\n".join(lines) + "\nend\n").encode("ascii")


def _split_header(raw: bytes, magic: str, path) -> tuple[dict[str, str], bytes]:
    marker = b"\nend\n"
    cut = raw.find(marker)
    if cut < 0:
        raise IoError(f"{path}: header is not terminated")
    lines = raw[:cut].decode("ascii", errors="replace").split("\n")
    if lines[0] != magic:
        raise IoError(f"{path}: expected {magic!r}, found {lines[0]!r}")
    fields = {}
    for ln in lines[1:]:
        key, _, val = ln.partition(" ")
        fields[key] = val
    return fields, raw[cut + len(marker):]


def _take(fields, key, conv, path):
    try:
        return conv(fields[key])
    except KeyError:
        raise IoError(f"{path}: header lacks {key!r}") from None
    except ValueError as exc:
        raise IoError(f"{path}: bad {key!r}: {exc}") from None


def _payload(buf: bytes, count: int, offset: int, path) -> np.ndarray:
    need = offset + count * 8
    if len(buf) < need:
        raise IoError(f"{path}: payload truncated ({len(buf)} of {need} bytes)")
    return np.frombuffer(buf, dtype=_LE_F8, count=count, offset=offset).astype(np.float64)


def write_gather(path, g: CmpGather) -> None:
    """Header, then offsets (N values), then traces (n x N values)."""
    fields = [
        ("line", g.location.line),
        ("cdp", g.location.cdp),
        ("t0", float(g.taxis.t0)),
        ("dt", float(g.taxis.dt)),
        ("n", g.taxis.n),
        ("traces", len(g.offsets)),
    ]
    body = g.offsets.astype(_LE_F8).tobytes() + np.ascontiguousarray(g.traces, dtype=_LE_F8).tobytes()
    _write_atomic(path, _header(GATHER_MAGIC, fields) + body)


def read_gather(path) -> CmpGather:
    fields, buf = _split_header(_read_bytes(path), GATHER_MAGIC, path)
    taxis = TimeAxis(_take(fields, "t0", float, path), _take(fields, "dt", float, path),
                     _take(fields, "n", int, path))
    k = _take(fields, "traces", int, path)
    offsets = _payload(buf, k, 0, path)
    traces = _payload(buf, taxis.n * k, 8 * k, path).reshape(taxis.n, k)
    loc = SurveyIndex(_take(fields, "line", int, path), _take(fields, "cdp", int, path))
    return CmpGather(taxis, offsets, traces, loc)


def write_spectrum(path, s: SpectrumGrid) -> None:
    fields = [
        ("line", s.location.line),
        ("cdp", s.location.cdp),
        ("t0", float(s.taxis.t0)),
        ("dt", float(s.taxis.dt)),
        ("n", s.taxis.n),
        ("v0", float(s.vaxis.v0)),
        ("dv", float(s.vaxis.dv)),
        ("m", s.vaxis.m),
    ]
    _write_atomic(path, _header(SPECTRUM_MAGIC, fields) + np.ascontiguousarray(s.values, dtype=_LE_F8).tobytes())


def read_spectrum(path) -> SpectrumGrid:
    fields, buf = _split_header(_read_bytes(path), SPECTRUM_MAGIC, path)
    taxis = TimeAxis(_take(fields, "t0", float, path), _take(fields, "dt", float, path),
                     _take(fields, "n", int, path))
    vaxis = VelocityAxis(_take(fields, "v0", float, path), _take(fields, "dv", float, path),
                         _take(fields, "m", int, path))
    values = _payload(buf, taxis.n * vaxis.m, 0, path).reshape(taxis.n, vaxis.m)
    loc = SurveyIndex(_take(fields, "line", int, path), _take(fields, "cdp", int, path))
    return SpectrumGrid(taxis, vaxis, values, loc)


def format_picks(curves: Mapping[SurveyIndex, VelocityFunction], seeds=(), comment: str = "") -> str:
    seeds = set(seeds)
    out = [PICKS_MAGIC + (f" {comment}" if comment else "")]
    for loc in sorted(curves):
        f = curves[loc]
        head = f"location {loc.line} {loc.cdp}"
        if loc in seeds:
            head += " seed"
        if f.low_confidence:
            head += " low_confidence"
        out.append("")
        out.append(head)
        out.extend(f"{t!r} {v!r}" for t, v in f.picks)
    return "\n".join(out) + "\n"


def write_picks(path, curves: Mapping[SurveyIndex, VelocityFunction], seeds=(), comment: str = "") -> None:
    _write_atomic(path, format_picks(curves, seeds, comment).encode("ascii"))


def parse_picks(text: str, source="<picks>") -> tuple[dict[SurveyIndex, VelocityFunction], set[SurveyIndex]]:
    """Inverse of :func:`format_picks`; returns the curves and the seed-flagged locations."""
    curves, seeds = {}, set()
    loc, flags, pairs = None, set(), []

    def flush():
        if loc is None:
            return
        if not pairs:
            raise IoError(f"{source}: location {loc} has no picks")
        if loc in curves:
            raise IoError(f"{source}: location {loc} appears twice")
        try:
            curves[loc] = VelocityFunction.from_pairs(pairs, "low_confidence" in flags)
        except ValueError as exc:
            raise IoError(f"{source}: location {loc}: {exc}") from None
        if "seed" in flags:
            seeds.add(loc)

    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] == "location":
            flush()
            try:
                loc = SurveyIndex(int(parts[1]), int(parts[2]))
            except (IndexError, ValueError):
                raise IoError(f"{source}:{no}: malformed location line") from None
            flags = set(parts[3:])
            unknown = flags - {"seed", "low_confidence"}
            if unknown:
                raise IoError(f"{source}:{no}: unknown flag {sorted(unknown)[0]!r}")
            pairs = []
            continue
        if loc is None or len(parts) != 2:
            raise IoError(f"{source}:{no}: expected 't v'")
        try:
            pairs.append((float(parts[0]), float(parts[1])))
        except ValueError:
            raise IoError(f"{source}:{no}: non-numeric pick") from None
    flush()
    return curves, seeds


def read_picks(path):
    return parse_picks(_read_bytes(path).decode("ascii", errors="replace"), source=str(path))


def write_json(path, obj) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True, allow_nan=False)
    _write_atomic(path, (text + "\n").encode("utf-8"))


def read_json(path):
    try:
        return json.loads(_read_bytes(path))
    except json.JSONDecodeError as exc:
        raise IoError(f"{path}: {exc}") from None


def format_table(rows: Iterable[tuple[str, object]]) -> str:
    """Plain-text metric table; each row is a label and a MetricReport."""
    head = f"{'dataset':<12} {'VMAE':>10} {'VMRE(%)':>10} {'PR(%)':>10} {'MD':>10}"
    lines = [head, "-" * len(head)]
    for label, r in rows:
        pr = "-" if r.pr is None else f"{100 * r.pr:10.3f}"
        md = "-" if r.md is None else f"{r.md:10.3f}"
        lines.append(f"{label:<12} {r.vmae:10.3f} {100 * r.vmre:10.3f} {pr:>10} {md:>10}")
    return "\n".join(lines) + "\n"


def to_gray(values: np.ndarray, lo: float | None = None, hi: float | None = None) -> np.ndarray:
    """Linear map of ``[lo, hi]`` (data range by default) to 8-bit levels."""
    a = np.asarray(values, dtype=np.float64)
    lo = float(a.min()) if lo is None else lo
    hi = float(a.max()) if hi is None else hi
    if not hi > lo:
        return np.zeros(a.shape, dtype=np.uint8)
    return np.round(np.clip((a - lo) / (hi - lo), 0.0, 1.0) * 255).astype(np.uint8)


def write_pgm(path, gray: np.ndarray) -> None:
    """Binary portable graymap (P5), rows top to bottom."""
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise ValueError("graymap needs a 2-D uint8 array")
    h, w = gray.shape
    _write_atomic(path, f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(gray).tobytes())


def read_pgm(path) -> np.ndarray:
    raw = _read_bytes(path)
    parts = raw.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise IoError(f"{path}: not a binary graymap")
    w, h = (int(x) for x in parts[1].split())
    if int(parts[2]) != 255:
        raise IoError(f"{path}: only 8-bit graymaps are supported")
    data = np.frombuffer(parts[3], dtype=np.uint8)
    if data.size != w * h:
        raise IoError(f"{path}: expected {w * h} pixels, found {data.size}")
    return data.reshape(h, w).copy()


def spectrum_image(s: SpectrumGrid, picks: VelocityFunction | None = None) -> np.ndarray:
    """Spectrum as gray levels (time down, velocity across) with picks drawn black."""
    img = to_gray(s.values, 0.0, max(float(s.values.max()), 1e-12))
    if picks is not None:
        for t, v in picks.picks:
            i = int(round((t - s.taxis.t0) / s.taxis.dt))
            j = int(round((v - s.vaxis.v0) / s.vaxis.dv))
            if 0 <= i < s.taxis.n and 0 <= j < s.vaxis.m:
                img[max(i - 1, 0):i + 2, max(j - 1, 0):j + 2] = 0
    return img


def gather_image(traces: np.ndarray) -> np.ndarray:
    """Traces as gray levels, symmetric about zero amplitude."""
    a = float(np.abs(traces).max()) if traces.size else 0.0
    if a == 0 or not math.isfinite(a):
        return np.full(traces.shape, 128, dtype=np.uint8)
    return to_gray(traces, -a, a)
