"""Near-duplicate elimination over warning contexts via MinHash + LSH."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .analyzers import Span
from .minhash import MinHashSignature, estimate_jaccard, minhash, shingle

LSH_BANDS = 4
LSH_ROWS = 32  # 4 * 32 = 128 signature positions
JACCARD_THRESHOLD = 0.95

CONTEXT_LINES = 3


class StaleSpanError(ValueError):
    """The span points past the end of the stored source file."""


def extract_context(file_text: str, span: Span) -> str:
    """The warning's lines plus up to three lines of context on each side."""
    lines = file_text.split("\n")
    n = len(lines)
    if span.start_line > n or span.end_line > n:
        raise StaleSpanError(
            f"span {span.start_line}..{span.end_line} exceeds {n}-line file"
        )
    lo = max(1, span.start_line - CONTEXT_LINES)
    hi = min(n, span.end_line + CONTEXT_LINES)
    return "\n".join(lines[lo - 1 : hi])


class LshIndex:
    """Banded MinHash index: 4 bands x 32 rows, candidate threshold ~0.958."""

    def __init__(self):
        self._buckets: dict[tuple[int, bytes], list[int]] = {}
        self._signatures: dict[int, MinHashSignature] = {}

    @staticmethod
    def _band_keys(sig: MinHashSignature):
        for band in range(LSH_BANDS):
            rows = sig.values[band * LSH_ROWS : (band + 1) * LSH_ROWS]
            yield band, b"".join(v.to_bytes(8, "little") for v in rows)

    def insert(self, item_id: int, sig: MinHashSignature) -> None:
        self._signatures[item_id] = sig
        for key in self._band_keys(sig):
            self._buckets.setdefault(key, []).append(item_id)

    def query(self, sig: MinHashSignature) -> list[int]:
        """Candidate item ids sharing at least one full band with ``sig``."""
        seen: dict[int, None] = {}
        for key in self._band_keys(sig):
            for item_id in self._buckets.get(key, ()):
                seen[item_id] = None
        return list(seen)

    def signature(self, item_id: int) -> MinHashSignature:
        return self._signatures[item_id]


@dataclass
class DropEntry:
    dropped_index: int
    kept_index: int
    estimated_jaccard: float
    dropped_identity: dict

    def to_json(self) -> str:
        return json.dumps(
            {
                "dropped": self.dropped_index,
                "kept": self.kept_index,
                "estimated_jaccard": self.estimated_jaccard,
                **self.dropped_identity,
            },
            sort_keys=True,
        )


@dataclass
class DedupResult:
    kept: list[dict]
    drops: list[DropEntry] = field(default_factory=list)
    flagged: list[int] = field(default_factory=list)  # kept but source missing

    @property
    def dropped_count(self) -> int:
        return len(self.drops)


def _sort_key(record: dict) -> tuple:
    positions = json.loads(record["positions"])
    return (
        record["repo"],
        record["commit_date"],
        record["filename"],
        positions["startLine"],
        record["warning_type"],
    )


def _identity(record: dict) -> dict:
    return {
        "tool": record["tool"],
        "warning_type": record["warning_type"],
        "parent_sha": record["parent_sha"],
        "filename": record["filename"],
        "positions": record["positions"],
    }


def dedup_dataset(records: list[dict], archive_root: Path) -> DedupResult:
    """Drop records whose context is near-identical to an earlier-kept one.

    Records are scanned in a fixed sort order; comparison is confined to the
    (tool, warning_type, label) partition and confirmed at estimated
    Jaccard >= 0.95. Records with a missing source file are kept and flagged.
    """
    archive_root = Path(archive_root)
    order = sorted(range(len(records)), key=lambda i: _sort_key(records[i]))
    indexes: dict[tuple, LshIndex] = {}
    result = DedupResult(kept=[])

    for scan_pos, rec_idx in enumerate(order):
        record = records[rec_idx]
        source = archive_root / record["filepath"]
        try:
            text = source.read_text("utf-8", errors="replace")
            positions = json.loads(record["positions"])
            span = Span(
                start_line=positions["startLine"], end_line=positions["endLine"]
            )
            context = extract_context(text, span)
        except (OSError, StaleSpanError):
            result.kept.append(record)
            result.flagged.append(scan_pos)
            continue

        sig = minhash(shingle(context))
        partition = (record["tool"], record["warning_type"], record["label"])
        index = indexes.setdefault(partition, LshIndex())

        duplicate_of = None
        best = 0.0
        for cand in index.query(sig):
            est = estimate_jaccard(sig, index.signature(cand))
            if est >= JACCARD_THRESHOLD and est > best:
                best = est
                duplicate_of = cand
        if duplicate_of is not None:
            result.drops.append(
                DropEntry(
                    dropped_index=scan_pos,
                    kept_index=duplicate_of,
                    estimated_jaccard=best,
                    dropped_identity=_identity(record),
                )
            )
        else:
            index.insert(scan_pos, sig)
            result.kept.append(record)
    return result
