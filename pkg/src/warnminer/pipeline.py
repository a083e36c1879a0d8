"""Mining pipeline: wires repo access, analyzers, and the classifier together."""

from __future__ import annotations

import json
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable

from . import analyzers, classify, gitrepo
from .analyzers import Report, Tool
from .classify import ClassifiedWarning, Label
from .dataset import (
    archive_source,
    format_utc,
    positions_json,
    to_record,
    validate_record,
    write_dataset,
)
from .gitrepo import CommitMeta, CommitPair, GitRepo

CommitFilter = Callable[[list[CommitMeta]], list[CommitMeta]]

# Plug point for external commit rankers; only pass-through ships.
COMMIT_FILTERS: dict[str, CommitFilter] = {"none": lambda commits: commits}


@dataclass
class RunConfig:
    repos: list[str]
    workdir: Path
    out: Path | None = None
    since: datetime | None = None
    until: datetime | None = None
    analyzers: tuple[Tool, ...] = (Tool.BUILTIN,)
    workers: int = 1
    seed: int = 0
    commit_filter: str = "none"

    def __post_init__(self):
        if not self.analyzers:
            raise ValueError("at least one analyzer must be enabled")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        self.workdir = Path(self.workdir)


@dataclass
class PairDisposition:
    child_sha: str
    parent_sha: str
    status: str  # emitted | skipped | error
    reason: str | None = None
    actionable: int = 0
    non_actionable: int = 0

    def to_json(self) -> str:
        return json.dumps(
            {
                "child_sha": self.child_sha,
                "parent_sha": self.parent_sha,
                "status": self.status,
                "reason": self.reason,
                "actionable": self.actionable,
                "non_actionable": self.non_actionable,
            }
        )


@dataclass
class MineResult:
    repo_url: str
    slug: str
    dispositions: list[PairDisposition] = field(default_factory=list)
    analyzed_commits: int = 0
    fatal_error: str | None = None

    @property
    def ok(self) -> bool:
        return self.fatal_error is None


class ReportCache:
    """Single-flight per-(tool, sha) report cache shared by pair workers."""

    def __init__(self, compute: Callable[[Tool, str], Report]):
        self._compute = compute
        self._lock = threading.Lock()
        self._events: dict[tuple[Tool, str], threading.Event] = {}
        self._reports: dict[tuple[Tool, str], Report] = {}
        self._errors: dict[tuple[Tool, str], Exception] = {}

    def get(self, tool: Tool, sha: str) -> Report:
        key = (tool, sha)
        with self._lock:
            event = self._events.get(key)
            if event is None:
                event = threading.Event()
                self._events[key] = event
                owner = True
            else:
                owner = False
        if owner:
            try:
                self._reports[key] = self._compute(tool, sha)
            except Exception as e:  # propagated to every waiter
                self._errors[key] = e
            finally:
                event.set()
        else:
            event.wait()
        if key in self._errors:
            raise self._errors[key]
        return self._reports[key]

    def computed_count(self) -> int:
        return len(self._reports) + len(self._errors)


def builtin_report(repo: GitRepo, sha: str) -> Report:
    files = {
        path: repo.read_file_at(sha, path)
        for path in repo.list_files_at(sha, suffix=".java")
    }
    return analyzers.builtin_analyze(files, sha)


def classified_to_json(cw: ClassifiedWarning) -> str:
    w = cw.warning
    return json.dumps(
        {
            "tool": w.tool.value,
            "warning_type": w.rule_id,
            "warning_msg": w.message,
            "parent_sha": cw.pair.parent.sha,
            "parent_date": format_utc(cw.pair.parent.commit_date_utc),
            "commit_sha": cw.pair.child.sha,
            "commit_date": format_utc(cw.pair.child.commit_date_utc),
            "repo": cw.pair.repo_url,
            "filename": w.file_path,
            "positions": positions_json(
                w.span.start_line, w.span.end_line, w.span.start_col, w.span.end_col
            ),
            "label": cw.label.value,
        }
    )


def classified_from_json(line: str) -> ClassifiedWarning:
    obj = json.loads(line)
    positions = json.loads(obj["positions"])

    def parse_date(s: str) -> datetime:
        return datetime.strptime(s, "%Y-%m-%dT%H:%M:%SZ").replace(tzinfo=timezone.utc)

    parent = CommitMeta(
        sha=obj["parent_sha"],
        commit_date_utc=parse_date(obj["parent_date"]),
        parent_shas=(),
    )
    child = CommitMeta(
        sha=obj["commit_sha"],
        commit_date_utc=parse_date(obj["commit_date"]),
        parent_shas=(obj["parent_sha"],),
    )
    warning = analyzers.Warning(
        tool=Tool(obj["tool"]),
        rule_id=obj["warning_type"],
        category="",
        message=obj["warning_msg"],
        file_path=obj["filename"],
        span=analyzers.Span(
            start_line=positions["startLine"],
            end_line=positions["endLine"],
            start_col=positions.get("startColumn"),
            end_col=positions.get("endColumn"),
        ),
    )
    return ClassifiedWarning(
        warning=warning,
        label=Label(obj["label"]),
        pair=CommitPair(repo_url=obj["repo"], parent=parent, child=child),
        observed_at_sha=obj["parent_sha"],
    )


def mine_repo(url: str, config: RunConfig) -> MineResult:
    """Mine one repository into per-pair JSONL files plus a manifest."""
    slug = gitrepo.repo_slug(url)
    result = MineResult(repo_url=url, slug=slug)
    repo_dir = config.workdir / slug
    pairs_dir = repo_dir / "pairs"

    try:
        repo = gitrepo.clone_repo(url, repo_dir / "repo")
        commits = gitrepo.list_main_commits(repo, since=config.since, until=config.until)
        commits = COMMIT_FILTERS[config.commit_filter](commits)
        pairs = gitrepo.make_pairs(commits, repo, url)
    except gitrepo.GitError as e:
        result.fatal_error = str(e)
        return result

    pairs_dir.mkdir(parents=True, exist_ok=True)

    def compute_report(tool: Tool, sha: str) -> Report:
        if tool is Tool.BUILTIN:
            return builtin_report(repo, sha)
        raise analyzers.AnalyzerError(
            f"{tool.value} requires an external toolchain; run it via "
            "run_external_analyzer and feed the reports to the parsers"
        )

    cache = ReportCache(compute_report)

    def process(pair: CommitPair) -> PairDisposition:
        try:
            diffs = gitrepo.diff_java_changes(repo, pair)
        except gitrepo.GitError as e:
            return PairDisposition(
                pair.child.sha, pair.parent.sha, "error", f"diff failed: {e}"
            )
        if not diffs:
            return PairDisposition(
                pair.child.sha, pair.parent.sha, "skipped", "no-java-change"
            )
        classified: list[ClassifiedWarning] = []
        for tool in config.analyzers:
            try:
                r_p = cache.get(tool, pair.parent.sha)
                r_c = cache.get(tool, pair.child.sha)
            except analyzers.BuildFailed:
                continue  # skip this pair for this tool only
            except analyzers.AnalyzerError as e:
                return PairDisposition(
                    pair.child.sha, pair.parent.sha, "error", f"analyzer-error: {e}"
                )
            actionable, non_actionable = classify.classify_pair(r_p, r_c, diffs, pair)
            classified.extend(actionable)
            classified.extend(non_actionable)
        out_file = pairs_dir / f"{pair.child.sha}.jsonl"
        with open(out_file, "w", encoding="utf-8") as f:
            for cw in classified:
                f.write(classified_to_json(cw) + "\n")
        return PairDisposition(
            pair.child.sha,
            pair.parent.sha,
            "emitted",
            actionable=sum(1 for c in classified if c.label is Label.ACTIONABLE),
            non_actionable=sum(1 for c in classified if c.label is Label.NON_ACTIONABLE),
        )

    if config.workers > 1 and pairs:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            dispositions = list(pool.map(process, pairs))
    else:
        dispositions = [process(pair) for pair in pairs]

    result.dispositions = dispositions
    result.analyzed_commits = cache.computed_count()
    with open(repo_dir / "manifest.jsonl", "w", encoding="utf-8") as f:
        for d in dispositions:
            f.write(d.to_json() + "\n")
        f.write(
            json.dumps(
                {
                    "summary": True,
                    "repo": url,
                    "pairs": len(pairs),
                    "analyzed_commits": result.analyzed_commits,
                }
            )
            + "\n"
        )
    return result


def mine_repos(config: RunConfig) -> list[MineResult]:
    return [mine_repo(url, config) for url in config.repos]


def read_repo_list(path: Path) -> list[str]:
    urls = []
    for line in Path(path).read_text("utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            urls.append(line)
    return urls


@dataclass
class DatasetBuild:
    records: list[dict]
    violations: list[tuple[int, list[str]]]
    actionable: int
    non_actionable: int


def create_dataset(workdir: Path, out_path: Path, archive_root: Path) -> DatasetBuild:
    """Assemble mined pair outputs into validated records plus a source archive."""
    workdir = Path(workdir)
    archive_root = Path(archive_root)
    all_records: list[dict] = []

    for repo_dir in sorted(p for p in workdir.iterdir() if p.is_dir()):
        manifest = repo_dir / "manifest.jsonl"
        if not manifest.exists():
            continue
        repo = GitRepo(repo_dir / "repo")
        stream: list[ClassifiedWarning] = []
        for line in manifest.read_text("utf-8").splitlines():
            entry = json.loads(line)
            if entry.get("summary") or entry.get("status") != "emitted":
                continue
            pair_file = repo_dir / "pairs" / f"{entry['child_sha']}.jsonl"
            for rec_line in pair_file.read_text("utf-8").splitlines():
                if rec_line.strip():
                    stream.append(classified_from_json(rec_line))
        for cw in classify.dedupe_na_keep_last(stream):
            record = to_record(cw)
            content = repo.read_file_at(cw.pair.parent.sha, cw.warning.file_path)
            archive_source(
                cw.pair.repo_url,
                cw.pair.parent.sha,
                cw.warning.file_path,
                content,
                archive_root,
            )
            all_records.append(record.to_dict())

    violations = []
    for i, record in enumerate(all_records):
        v = validate_record(record, archive_root)
        if v:
            violations.append((i, v))
    actionable = sum(1 for r in all_records if r["label"] == 1)
    if not violations:
        write_dataset(all_records, out_path)
    return DatasetBuild(
        records=all_records,
        violations=violations,
        actionable=actionable,
        non_actionable=len(all_records) - actionable,
    )
