"""Dataset records, parquet/JSONL writers, and the source-file archive."""

from __future__ import annotations

import json
import zipfile
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path, PurePosixPath

import pyarrow as pa
import pyarrow.parquet as pq

from .classify import ClassifiedWarning, Label
from .gitrepo import repo_slug

COLUMNS = [
    "tool",
    "warning_type",
    "warning_msg",
    "parent_sha",
    "parent_date",
    "commit_sha",
    "commit_date",
    "repo",
    "filename",
    "positions",
    "filepath",
    "label",
]

_SCHEMA = pa.schema(
    [pa.field(name, pa.string()) for name in COLUMNS[:-1]] + [pa.field("label", pa.int64())]
)

DATE_FORMAT = "%Y-%m-%dT%H:%M:%SZ"


@dataclass(frozen=True)
class LabeledRecord:
    tool: str
    warning_type: str
    warning_msg: str
    parent_sha: str
    parent_date: str
    commit_sha: str
    commit_date: str
    repo: str
    filename: str
    positions: str
    filepath: str
    label: int

    def to_dict(self) -> dict:
        return asdict(self)


def format_utc(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime(DATE_FORMAT)


def positions_json(start_line, end_line, start_col=None, end_col=None) -> str:
    pos: dict = {"startLine": start_line, "endLine": end_line}
    if start_col is not None:
        pos["startColumn"] = start_col
    if end_col is not None:
        pos["endColumn"] = end_col
    return json.dumps(pos, separators=(",", ":"))


def archive_relpath(repo_url: str, parent_sha: str, filename: str) -> str:
    return f"files/{repo_slug(repo_url)}/{parent_sha}/{filename}"


def to_record(cw: ClassifiedWarning) -> LabeledRecord:
    w = cw.warning
    return LabeledRecord(
        tool=w.tool.value,
        warning_type=w.rule_id,
        warning_msg=w.message,
        parent_sha=cw.pair.parent.sha,
        parent_date=format_utc(cw.pair.parent.commit_date_utc),
        commit_sha=cw.pair.child.sha,
        commit_date=format_utc(cw.pair.child.commit_date_utc),
        repo=cw.pair.repo_url,
        filename=w.file_path,
        positions=positions_json(
            w.span.start_line, w.span.end_line, w.span.start_col, w.span.end_col
        ),
        filepath=archive_relpath(cw.pair.repo_url, cw.pair.parent.sha, w.file_path),
        label=1 if cw.label is Label.ACTIONABLE else 0,
    )


def write_dataset(records: list[dict], out_path: Path, format: str | None = None) -> Path:
    """Write records as parquet (columnar) or JSONL; inferred from the suffix."""
    out_path = Path(out_path)
    fmt = format or ("jsonl" if out_path.suffix == ".jsonl" else "columnar")
    out_path.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "columnar":
        arrays = {
            col: [r[col] for r in records] for col in COLUMNS
        }
        table = pa.Table.from_pydict(arrays, schema=_SCHEMA)
        pq.write_table(table, out_path)
    elif fmt == "jsonl":
        with open(out_path, "w", encoding="utf-8") as f:
            for r in records:
                f.write(json.dumps({col: r[col] for col in COLUMNS}, sort_keys=False))
                f.write("\n")
    else:
        raise ValueError(f"unknown dataset format: {fmt}")
    return out_path


def read_dataset(path: Path) -> list[dict]:
    path = Path(path)
    if path.suffix == ".jsonl":
        with open(path, encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
    table = pq.read_table(path)
    return table.to_pylist()


def archive_source(
    repo_url: str, parent_sha: str, path: str, content: str, archive_root: Path
) -> str:
    """Store one copy of a source file snapshot; repeated writes are no-ops."""
    rel = PurePosixPath(archive_relpath(repo_url, parent_sha, path))
    if ".." in PurePosixPath(path).parts:
        raise ValueError(f"path traversal rejected: {path}")
    target = Path(archive_root) / rel
    if not target.exists():
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(content, encoding="utf-8")
    return str(rel)


def pack_archive(archive_root: Path, zip_path: Path) -> Path:
    """Deterministically zip the archive: sorted entries, fixed timestamps."""
    archive_root = Path(archive_root)
    zip_path = Path(zip_path)
    entries = sorted(
        p.relative_to(archive_root).as_posix()
        for p in archive_root.rglob("*")
        if p.is_file()
    )
    with zipfile.ZipFile(zip_path, "w", zipfile.ZIP_DEFLATED) as zf:
        for rel in entries:
            info = zipfile.ZipInfo(rel, date_time=(1980, 1, 1, 0, 0, 0))
            info.compress_type = zipfile.ZIP_DEFLATED
            info.external_attr = 0o644 << 16
            zf.writestr(info, (archive_root / rel).read_bytes())
    return zip_path


def _parse_record_date(value: str) -> datetime | None:
    try:
        return datetime.strptime(value, DATE_FORMAT).replace(tzinfo=timezone.utc)
    except (TypeError, ValueError):
        return None


def validate_record(record: dict, archive_root: Path | None = None) -> list[str]:
    """Invariant violations for one record; empty list means valid."""
    violations = []
    for col in COLUMNS:
        if col not in record:
            violations.append(f"missing field: {col}")
    if violations:
        return violations

    if record["label"] not in (0, 1):
        violations.append("label: must be 0 or 1")
    for field_name in ("tool", "warning_type", "warning_msg", "repo", "filename"):
        if not isinstance(record[field_name], str) or not record[field_name]:
            violations.append(f"{field_name}: must be a non-empty string")

    parent_date = _parse_record_date(record["parent_date"])
    commit_date = _parse_record_date(record["commit_date"])
    if parent_date is None:
        violations.append("parent_date: not ISO 8601 UTC (YYYY-MM-DDTHH:MM:SSZ)")
    if commit_date is None:
        violations.append("commit_date: not ISO 8601 UTC (YYYY-MM-DDTHH:MM:SSZ)")
    if parent_date and commit_date and parent_date > commit_date:
        violations.append("parent_date: later than commit_date")

    try:
        pos = json.loads(record["positions"])
        start = pos["startLine"]
        end = pos["endLine"]
        if not (isinstance(start, int) and isinstance(end, int) and 1 <= start <= end):
            violations.append("positions: startLine/endLine out of order or < 1")
        for key in ("startColumn", "endColumn"):
            if key in pos and (not isinstance(pos[key], int) or pos[key] < 1):
                violations.append(f"positions: {key} must be an int >= 1")
    except (TypeError, ValueError, KeyError):
        violations.append("positions: not a JSON object with startLine/endLine")

    if archive_root is not None:
        if not isinstance(record["filepath"], str) or not (
            Path(archive_root) / record["filepath"]
        ).is_file():
            violations.append("filepath: does not resolve to an archived file")
    return violations
