"""Differential labeling of warnings as actionable or non-actionable."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable

from .analyzers import Report, Tool, Warning
from .gitrepo import CommitPair, FileDiff, Hunk


class Label(enum.Enum):
    ACTIONABLE = "ACTIONABLE"
    NON_ACTIONABLE = "NON_ACTIONABLE"


@dataclass(frozen=True)
class WarningKey:
    """Line-insensitive warning identity; survives edits that shift code."""

    tool: Tool
    rule_id: str
    message: str
    file_path: str


def key_of(w: Warning) -> WarningKey:
    return WarningKey(w.tool, w.rule_id, w.message, w.file_path)


@dataclass(frozen=True)
class ClassifiedWarning:
    warning: Warning
    label: Label
    pair: CommitPair
    observed_at_sha: str  # parent commit, where the warning was reported


def _old_range_hits(hunk: Hunk, start: int, end: int) -> bool:
    if hunk.old_len == 0:
        # Pure insertion: old_start is the line the new code follows.
        return start <= hunk.old_start + 1 and hunk.old_start <= end
    lo = hunk.old_start
    hi = hunk.old_start + hunk.old_len - 1
    return lo <= end and start <= hi


def _new_ranges(diff: FileDiff) -> list[tuple[int, int]]:
    ranges = []
    for h in diff.hunks:
        if h.new_len == 0:
            # Pure deletion: the adjacent lines in the child file.
            ranges.append((h.new_start, h.new_start + 1))
        else:
            ranges.append((h.new_start, h.new_start + h.new_len - 1))
    return ranges


def affected_by_diff(w: Warning, diffs: Iterable[FileDiff]) -> bool:
    """True iff the warning's span is touched by an insertion or deletion."""
    for d in diffs:
        if d.old_path != w.file_path:
            continue
        if d.new_path is None:
            return True  # whole file deleted
        for h in d.hunks:
            if _old_range_hits(h, w.span.start_line, w.span.end_line):
                return True
    return False


def classify_pair(
    r_p: Report,
    r_c: Report,
    diffs: list[FileDiff],
    pair: CommitPair,
) -> tuple[list[ClassifiedWarning], list[ClassifiedWarning]]:
    """Label each parent-report warning against the child report and diff.

    A warning is actionable when its context was changed and no same-key
    warning remains inside the changed regions of the child file. It is
    non-actionable when a same-key warning exists anywhere in the child
    report. A key flagged both ways stays actionable only.
    """
    if not diffs:
        raise ValueError("pairs without Java changes must be skipped upstream")

    child_keys = {key_of(w) for w in r_c.warnings}
    child_by_key: dict[WarningKey, list[Warning]] = {}
    for w in r_c.warnings:
        child_by_key.setdefault(key_of(w), []).append(w)
    diffs_by_old: dict[str, FileDiff] = {
        d.old_path: d for d in diffs if d.old_path is not None
    }

    actionable: list[ClassifiedWarning] = []
    non_actionable: list[ClassifiedWarning] = []
    actionable_keys: set[WarningKey] = set()
    seen_na_keys: set[WarningKey] = set()

    for w in r_p.warnings:
        k = key_of(w)
        is_actionable = False
        if affected_by_diff(w, diffs):
            diff = diffs_by_old.get(w.file_path)
            if diff is not None and diff.new_path is None:
                # File deleted: no changed region can still report the key.
                is_actionable = True
            else:
                ranges = _new_ranges(diff) if diff is not None else []
                persists_in_change = any(
                    lo <= wc.span.end_line and wc.span.start_line <= hi
                    for wc in child_by_key.get(k, ())
                    for lo, hi in ranges
                )
                is_actionable = not persists_in_change
        if is_actionable:
            if k not in actionable_keys:
                actionable_keys.add(k)
                actionable.append(
                    ClassifiedWarning(w, Label.ACTIONABLE, pair, pair.parent.sha)
                )
        elif k in child_keys and k not in seen_na_keys:
            seen_na_keys.add(k)
            non_actionable.append(
                ClassifiedWarning(w, Label.NON_ACTIONABLE, pair, pair.parent.sha)
            )

    # Conflict rule: a key flagged both ways is returned only as actionable.
    non_actionable = [cw for cw in non_actionable if key_of(cw.warning) not in actionable_keys]
    return actionable, non_actionable


def dedupe_na_keep_last(stream: Iterable[ClassifiedWarning]) -> list[ClassifiedWarning]:
    """Collapse duplicate non-actionable keys, keeping the latest occurrence.

    The stream must cover one repository in oldest-to-newest pair order;
    ties on child commit date resolve to the later stream position.
    """
    out: list[ClassifiedWarning] = []
    last_na: dict[WarningKey, ClassifiedWarning] = {}
    for cw in stream:
        if cw.label is Label.ACTIONABLE:
            out.append(cw)
            continue
        k = key_of(cw.warning)
        prev = last_na.get(k)
        if prev is None or cw.pair.child.commit_date_utc >= prev.pair.child.commit_date_utc:
            last_na[k] = cw
    out.extend(last_na.values())
    return out
