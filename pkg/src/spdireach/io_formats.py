"""Plain-text formats for partitions, tasks, and witnesses.

All three formats are line-oriented: `#` starts a comment, blank lines are
skipped, and every parse error carries the 1-based line number it was found
on.  Floats are written with 17 significant digits so a parse/serialize
round trip is bytewise exact.
"""

from __future__ import annotations

import math
from typing import Optional, Union

from .explorer import ReachResult, Witness, WitnessCycle, WitnessStep
from .geometry import polygon_area
from .model import EdgeInterval, ModelError, ReachTask, Spdi, build_spdi


class FormatError(ValueError):
    """Malformed document; ``line`` is the 1-based offending line."""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line


def _fmt(x: float) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} cannot be serialized")
    return format(x, ".17g")


def _parse_float(token: str, line: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise FormatError(f"expected a number, got {token!r}", line) from None
    if not math.isfinite(value):
        raise FormatError(f"non-finite number {token!r}", line)
    return value


def _parse_int(token: str, line: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise FormatError(f"expected an integer, got {token!r}", line) from None


def _content_lines(text: str) -> list[tuple[int, str]]:
    out = []
    for i, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.split("#", 1)[0].strip()
        if stripped:
            out.append((i, stripped))
    return out


def _require_header(lines: list[tuple[int, str]], header: str) -> list[tuple[int, str]]:
    if not lines or lines[0][1] != header:
        raise FormatError(f"expected header {header!r}", lines[0][0] if lines else 1)
    return lines[1:]


def parse_spdi(text: str) -> Spdi:
    lines = _require_header(_content_lines(text), "spdi v1")
    vertices: dict[int, tuple[float, float]] = {}
    vertex_lines: dict[int, int] = {}
    regions: list[tuple[str, tuple[int, ...], tuple[float, float], tuple[float, float]]] = []
    region_lines: dict[str, int] = {}
    for line_no, content in lines:
        tokens = content.split()
        if tokens[0] == "vertex":
            if len(tokens) != 4:
                raise FormatError("vertex line needs: vertex <id> <x> <y>", line_no)
            vid = _parse_int(tokens[1], line_no)
            if vid in vertices:
                raise FormatError(f"duplicate vertex id {vid}", line_no)
            vertices[vid] = (
                _parse_float(tokens[2], line_no),
                _parse_float(tokens[3], line_no),
            )
            vertex_lines[vid] = line_no
        elif tokens[0] == "region":
            if len(tokens) < 9 or tokens[2] != "vertices":
                raise FormatError(
                    "region line needs: region <id> vertices <vid...> l <lx> <ly> r <rx> <ry>",
                    line_no,
                )
            rid = tokens[1]
            if rid in region_lines:
                raise FormatError(f"duplicate region id {rid!r}", line_no)
            try:
                l_at = tokens.index("l", 3)
            except ValueError:
                raise FormatError("region line is missing the 'l' vector", line_no) from None
            if tokens[l_at + 3 : l_at + 4] != ["r"] or len(tokens) != l_at + 6:
                raise FormatError("region line must end with: l <lx> <ly> r <rx> <ry>", line_no)
            vids = tuple(_parse_int(t, line_no) for t in tokens[3:l_at])
            if len(vids) < 3:
                raise FormatError("region needs at least 3 vertices", line_no)
            for vid in vids:
                if vid not in vertices:
                    raise FormatError(f"unknown vertex id {vid}", line_no)
            dyn_l = (
                _parse_float(tokens[l_at + 1], line_no),
                _parse_float(tokens[l_at + 2], line_no),
            )
            dyn_r = (
                _parse_float(tokens[l_at + 4], line_no),
                _parse_float(tokens[l_at + 5], line_no),
            )
            regions.append((rid, vids, dyn_l, dyn_r))
            region_lines[rid] = line_no
        else:
            raise FormatError(f"unknown directive {tokens[0]!r}", line_no)
    if not regions:
        raise FormatError("no regions defined", lines[-1][0] if lines else 1)
    try:
        spdi = build_spdi(vertices, regions)
    except ModelError as exc:
        line = min(region_lines.values())
        for rid, rline in region_lines.items():
            if rid in str(exc):
                line = rline
                break
        raise FormatError(str(exc), line) from exc
    for rid, _, _, _ in regions:
        if polygon_area(spdi.region_polygon(rid)) <= 0:
            raise FormatError(f"region {rid!r} vertex loop is not counterclockwise", region_lines[rid])
    return spdi


def write_spdi(spdi: Spdi) -> str:
    out = ["spdi v1"]
    for vid in sorted(spdi.vertices):
        p = spdi.vertices[vid]
        out.append(f"vertex {vid} {_fmt(p.x)} {_fmt(p.y)}")
    for region in spdi.regions:
        vids = " ".join(str(v) for v in region.vertices)
        out.append(
            f"region {region.id} vertices {vids}"
            f" l {_fmt(region.dyn_l.dx)} {_fmt(region.dyn_l.dy)}"
            f" r {_fmt(region.dyn_r.dx)} {_fmt(region.dyn_r.dy)}"
        )
    return "\n".join(out) + "\n"


def parse_tasks(text: str, spdi: Spdi) -> list[ReachTask]:
    """Parse a task file; each `task v1` header starts a new task."""
    lines = _content_lines(text)
    if not lines or lines[0][1] != "task v1":
        raise FormatError("expected header 'task v1'", lines[0][0] if lines else 1)
    tasks: list[ReachTask] = []
    start: list[EdgeInterval] = []
    final: list[EdgeInterval] = []
    header_line = lines[0][0]

    def flush() -> None:
        if not start:
            raise FormatError("task has no start intervals", header_line)
        if not final:
            raise FormatError("task has no final intervals", header_line)
        tasks.append(ReachTask(tuple(start), tuple(final)))
        start.clear()
        final.clear()

    for line_no, content in lines[1:]:
        tokens = content.split()
        if content == "task v1":
            flush()
            header_line = line_no
            continue
        if tokens[0] not in ("start", "final"):
            raise FormatError(f"unknown directive {tokens[0]!r}", line_no)
        if len(tokens) != 4:
            raise FormatError(f"{tokens[0]} line needs: {tokens[0]} <edge-id> <lo> <hi>", line_no)
        edge = tokens[1]
        if edge not in spdi.edges_by_id:
            raise FormatError(f"unknown edge id {edge!r}", line_no)
        lo = _parse_float(tokens[2], line_no)
        hi = _parse_float(tokens[3], line_no)
        if lo >= hi:
            raise FormatError(f"interval [{tokens[2]}, {tokens[3]}] has lo >= hi", line_no)
        try:
            item = EdgeInterval(edge, lo, hi)
        except ModelError as exc:
            raise FormatError(str(exc), line_no) from exc
        (start if tokens[0] == "start" else final).append(item)
    flush()
    return tasks


def parse_task(text: str, spdi: Spdi) -> ReachTask:
    tasks = parse_tasks(text, spdi)
    if len(tasks) != 1:
        raise FormatError(f"expected exactly one task, found {len(tasks)}", 1)
    return tasks[0]


def write_task(task: ReachTask) -> str:
    out = ["task v1"]
    for kind, items in (("start", task.start), ("final", task.final)):
        for item in items:
            out.append(f"{kind} {item.edge} {_fmt(item.lo)} {_fmt(item.hi)}")
    return "\n".join(out) + "\n"


def write_tasks(tasks: list[ReachTask]) -> str:
    return "".join(write_task(t) for t in tasks)


def _fmt_iv(lo: float, hi: float) -> str:
    return f"[{_fmt(lo)},{_fmt(hi)}]"


def _parse_iv(token: str, line: int) -> tuple[float, float]:
    if not (token.startswith("[") and token.endswith("]")) or "," not in token:
        raise FormatError(f"expected [lo,hi], got {token!r}", line)
    lo_s, hi_s = token[1:-1].split(",", 1)
    lo = _parse_float(lo_s.strip(), line)
    hi = _parse_float(hi_s.strip(), line)
    if lo > hi:
        raise FormatError(f"interval {token} has lo > hi", line)
    return lo, hi


def write_witness(result: Union["ReachResult", Witness]) -> str:
    if isinstance(result, ReachResult):
        if result.witness is None:
            raise ValueError("cannot serialize a witness for an UNREACHABLE result")
        witness = result.witness
    else:
        witness = result
    out: list[str] = []
    for step in witness.steps:
        if isinstance(step, WitnessStep):
            out.append(f"edge {step.edge} {_fmt_iv(*step.interval)}")
        else:
            out.append("cycle{")
            for edge, piece in step.swept:
                out.append(f"edge {edge} {_fmt_iv(*piece)}")
            out.append(f"type={step.ctype}")
            out.append("}")
    out.append(f"hit {witness.hit.edge} {_fmt_iv(witness.hit.lo, witness.hit.hi)}")
    return "\n".join(out) + "\n"


def parse_witness(text: str) -> Witness:
    lines = _content_lines(text)
    steps: list[Union[WitnessStep, WitnessCycle]] = []
    hit: Optional[EdgeInterval] = None
    i = 0
    while i < len(lines):
        line_no, content = lines[i]
        tokens = content.split()
        if hit is not None:
            raise FormatError("content after the hit line", line_no)
        if tokens[0] == "edge":
            if len(tokens) != 3:
                raise FormatError("edge line needs: edge <id> [lo,hi]", line_no)
            steps.append(WitnessStep(tokens[1], _parse_iv(tokens[2], line_no)))
        elif content == "cycle{":
            i += 1
            swept: list[tuple[str, tuple[float, float]]] = []
            ctype: Optional[str] = None
            while i < len(lines):
                line_no, content = lines[i]
                if content == "}":
                    break
                tokens = content.split()
                if tokens[0] == "edge" and len(tokens) == 3:
                    swept.append((tokens[1], _parse_iv(tokens[2], line_no)))
                elif content.startswith("type="):
                    ctype = content[len("type=") :]
                else:
                    raise FormatError(f"unexpected cycle content {content!r}", line_no)
                i += 1
            else:
                raise FormatError("unterminated cycle block", line_no)
            if ctype is None:
                raise FormatError("cycle block is missing its type", line_no)
            if not swept:
                raise FormatError("cycle block has no swept edges", line_no)
            edges = tuple(dict.fromkeys(edge for edge, _ in swept))
            steps.append(WitnessCycle(edges, ctype, swept[0][1], tuple(swept)))
        elif tokens[0] == "hit":
            if len(tokens) != 3:
                raise FormatError("hit line needs: hit <edge-id> [lo,hi]", line_no)
            lo, hi = _parse_iv(tokens[2], line_no)
            hit = EdgeInterval(tokens[1], lo, hi)
        else:
            raise FormatError(f"unknown directive {tokens[0]!r}", line_no)
        i += 1
    if hit is None:
        raise FormatError("witness is missing its hit line", lines[-1][0] if lines else 1)
    return Witness(tuple(steps), hit)
