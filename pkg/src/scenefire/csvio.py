"""CSV and JSON file formats shared by the CLI commands.

All text outputs optionally start with a ``# generated_at <iso>`` comment
line; readers skip ``#`` lines, and ``deterministic=True`` suppresses the
comment so identical inputs give bit-identical files.
"""

from __future__ import annotations

import csv
import json
from datetime import datetime, timezone
from pathlib import Path

from .errors import InvalidInputError, InvalidSequenceError
from .metrics import EvalReport, report_to_dict
from .scene import FrameLabel
from .timeline import EventSegment


def parse_timestamp(text: str) -> datetime:
    """ISO-8601 instant; 'Z' accepted, naive values are taken as UTC."""
    try:
        ts = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError as exc:
        raise InvalidInputError(f"bad timestamp {text!r}: {exc}") from exc
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def format_timestamp(ts: datetime) -> str:
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).isoformat()


def _open_rows(path: Path) -> list[tuple[int, list[str]]]:
    """All non-comment CSV rows with their 1-based line numbers."""
    rows = []
    with path.open(newline="", encoding="utf-8") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (row[0].startswith("#")):
                continue
            rows.append((lineno, row))
    return rows


def _writer(path: Path, deterministic: bool):
    fh = path.open("w", newline="", encoding="utf-8")
    if not deterministic:
        fh.write(f"# generated_at {format_timestamp(datetime.now(timezone.utc))}\n")
    return fh


def read_manifest(path: str | Path) -> list[tuple[str, Path, datetime]]:
    """Rows of ``frame_id,path,timestamp``; relative paths resolve against the
    manifest's directory; timestamps must be non-decreasing."""
    path = Path(path)
    rows = _open_rows(path)
    if not rows:
        raise InvalidInputError(f"{path}: empty manifest (missing header)")
    head_line, header = rows[0]
    if header[:3] != ["frame_id", "path", "timestamp"]:
        raise InvalidInputError(
            f"{path} line {head_line}: expected header frame_id,path,timestamp"
        )
    entries: list[tuple[str, Path, datetime]] = []
    previous: datetime | None = None
    for lineno, row in rows[1:]:
        if len(row) != 3:
            raise InvalidInputError(f"{path} line {lineno}: expected 3 fields, got {len(row)}")
        frame_id, raw_path, raw_ts = row
        ts = parse_timestamp(raw_ts)
        if previous is not None and ts < previous:
            raise InvalidSequenceError(
                f"{path} line {lineno}: timestamps must be non-decreasing"
            )
        previous = ts
        frame_path = Path(raw_path)
        if not frame_path.is_absolute():
            frame_path = path.parent / frame_path
        entries.append((frame_id, frame_path, ts))
    return entries


def write_labels(
    path: str | Path,
    labels: list[FrameLabel],
    scene_names: list[str],
    deterministic: bool = False,
) -> None:
    """Header ``frame_id,timestamp,label,<scene>_count,<scene>_max`` per scene."""
    with _writer(Path(path), deterministic) as fh:
        writer = csv.writer(fh)
        header = ["frame_id", "timestamp", "label"]
        for name in scene_names:
            header += [f"{name}_count", f"{name}_max"]
        writer.writerow(header)
        for fl in labels:
            row = [fl.frame_id, format_timestamp(fl.timestamp), fl.label]
            for name in scene_names:
                row.append(str(fl.responses.get(name, 0)))
                row.append(repr(float(fl.max_response.get(name, 0.0))))
            writer.writerow(row)


def read_labels(path: str | Path) -> tuple[list[FrameLabel], list[str]]:
    """Inverse of write_labels; returns the labels and the scene column order."""
    path = Path(path)
    rows = _open_rows(path)
    if not rows:
        raise InvalidInputError(f"{path}: empty labels file (missing header)")
    head_line, header = rows[0]
    if header[:3] != ["frame_id", "timestamp", "label"]:
        raise InvalidInputError(
            f"{path} line {head_line}: expected header starting frame_id,timestamp,label"
        )
    extras = header[3:]
    if len(extras) % 2 != 0:
        raise InvalidInputError(f"{path} line {head_line}: unpaired scene columns")
    scene_names = []
    for i in range(0, len(extras), 2):
        count_col, max_col = extras[i], extras[i + 1]
        if not count_col.endswith("_count") or max_col != f"{count_col[:-6]}_max":
            raise InvalidInputError(
                f"{path} line {head_line}: expected <scene>_count,<scene>_max pairs, "
                f"got {count_col!r},{max_col!r}"
            )
        scene_names.append(count_col[:-6])

    labels = []
    for lineno, row in rows[1:]:
        if len(row) != len(header):
            raise InvalidInputError(
                f"{path} line {lineno}: expected {len(header)} fields, got {len(row)}"
            )
        try:
            responses = {name: int(row[3 + 2 * i]) for i, name in enumerate(scene_names)}
            max_response = {
                name: float(row[4 + 2 * i]) for i, name in enumerate(scene_names)
            }
        except ValueError as exc:
            raise InvalidInputError(f"{path} line {lineno}: {exc}") from exc
        labels.append(
            FrameLabel(
                frame_id=row[0],
                timestamp=parse_timestamp(row[1]),
                label=row[2],
                responses=responses,
                max_response=max_response,
            )
        )
    return labels, scene_names


def write_events(
    path: str | Path,
    events: list[EventSegment],
    deterministic: bool = False,
) -> None:
    """Header ``scene,start,end,duration_seconds,n_frames``."""
    with _writer(Path(path), deterministic) as fh:
        writer = csv.writer(fh)
        writer.writerow(["scene", "start", "end", "duration_seconds", "n_frames"])
        for ev in events:
            writer.writerow([
                ev.scene,
                format_timestamp(ev.start),
                format_timestamp(ev.end),
                repr(ev.duration_seconds),
                str(len(ev.frame_ids)),
            ])


def read_truth(path: str | Path) -> list[tuple[str, str]]:
    """Rows of ``frame_id,label`` ground truth."""
    path = Path(path)
    rows = _open_rows(path)
    if not rows:
        raise InvalidInputError(f"{path}: empty truth file (missing header)")
    head_line, header = rows[0]
    if header[:2] != ["frame_id", "label"]:
        raise InvalidInputError(f"{path} line {head_line}: expected header frame_id,label")
    pairs = []
    for lineno, row in rows[1:]:
        if len(row) != 2:
            raise InvalidInputError(f"{path} line {lineno}: expected 2 fields, got {len(row)}")
        pairs.append((row[0], row[1]))
    return pairs


def write_truth(path: str | Path, pairs: list[tuple[str, str]],
                deterministic: bool = False) -> None:
    with _writer(Path(path), deterministic) as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame_id", "label"])
        writer.writerows(pairs)


def write_report_json(
    path: str | Path,
    report: EvalReport,
    deterministic: bool = False,
) -> None:
    """Full-precision report; carries generated_at unless deterministic."""
    doc = report_to_dict(report)
    if not deterministic:
        doc["generated_at"] = format_timestamp(datetime.now(timezone.utc))
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
