"""Warning reports: PMD/SpotBugs XML parsers and a hermetic built-in analyzer."""

from __future__ import annotations

import enum
import re
import subprocess
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path


class Tool(enum.Enum):
    PMD = "PMD"
    SPOTBUGS = "SpotBugs"
    BUILTIN = "Builtin"


class ReportParseError(ValueError):
    pass


class AnalyzerError(RuntimeError):
    pass


class BuildFailed(AnalyzerError):
    pass


@dataclass(frozen=True, order=True)
class Span:
    start_line: int
    end_line: int
    start_col: int | None = None
    end_col: int | None = None

    def __post_init__(self):
        if self.start_line < 1 or self.end_line < self.start_line:
            raise ValueError(f"invalid span {self.start_line}..{self.end_line}")
        for col in (self.start_col, self.end_col):
            if col is not None and col < 1:
                raise ValueError("columns must be >= 1")


@dataclass(frozen=True)
class Warning:
    tool: Tool
    rule_id: str
    category: str
    message: str
    file_path: str
    span: Span

    def __post_init__(self):
        if not self.rule_id or not self.message:
            raise ValueError("rule_id and message must be non-empty")


@dataclass(frozen=True)
class Report:
    commit_sha: str
    warnings: tuple[Warning, ...]
    skipped_count: int = 0  # findings without a usable source location


@dataclass(frozen=True)
class RuleUniverse:
    tool: Tool
    rule_ids: frozenset[str]
    categories: dict[str, str] = field(default_factory=dict, compare=False)


_MANIFESTS = {
    Tool.PMD: "pmd_rules.txt",
    Tool.SPOTBUGS: "spotbugs_rules.txt",
    Tool.BUILTIN: "builtin_rules.txt",
}

_CATEGORY_COMMENT = re.compile(r"^#\s*category:\s*(.+?)\s*$")


def parse_rule_manifest(text: str, tool: Tool) -> RuleUniverse:
    """One rule id per line; '#' comments; '# category:' lines open a section."""
    rules: list[str] = []
    categories: dict[str, str] = {}
    current = "Uncategorized"
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        m = _CATEGORY_COMMENT.match(line)
        if m:
            current = m.group(1)
            continue
        if line.startswith("#"):
            continue
        rules.append(line)
        categories[line] = current
    return RuleUniverse(tool=tool, rule_ids=frozenset(rules), categories=categories)


def load_rule_universe(tool: Tool) -> RuleUniverse:
    text = resources.files("warnminer.data").joinpath(_MANIFESTS[tool]).read_text("utf-8")
    return parse_rule_manifest(text, tool)


def _normalize_path(p: str) -> str:
    p = p.replace("\\", "/")
    while p.startswith("./"):
        p = p[2:]
    return p


def parse_pmd_report(content: bytes, commit_sha: str) -> Report:
    """Parse a PMD XML report. Documentation-category violations are dropped."""
    try:
        root = ET.fromstring(content)
    except ET.ParseError as e:
        raise ReportParseError(f"malformed PMD XML: {e}") from e
    ns = _strip_ns(root)
    warnings = []
    for file_el in root.iter(ns + "file"):
        path = _normalize_path(file_el.get("name", ""))
        for v in file_el.findall(ns + "violation"):
            category = v.get("ruleset", "")
            if category == "Documentation":
                continue
            begincol = v.get("begincolumn")
            endcol = v.get("endcolumn")
            warnings.append(
                Warning(
                    tool=Tool.PMD,
                    rule_id=v.get("rule", ""),
                    category=category,
                    message=(v.text or "").strip(),
                    file_path=path,
                    span=Span(
                        start_line=int(v.get("beginline", "1")),
                        end_line=int(v.get("endline", v.get("beginline", "1"))),
                        start_col=int(begincol) if begincol else None,
                        end_col=int(endcol) if endcol else None,
                    ),
                )
            )
    return Report(commit_sha=commit_sha, warnings=tuple(warnings))


def parse_spotbugs_report(content: bytes, commit_sha: str) -> Report:
    """Parse a SpotBugs BugCollection. All categories are retained."""
    try:
        root = ET.fromstring(content)
    except ET.ParseError as e:
        raise ReportParseError(f"malformed SpotBugs XML: {e}") from e
    ns = _strip_ns(root)
    warnings = []
    skipped = 0
    for bug in root.iter(ns + "BugInstance"):
        source = _primary_source_line(bug, ns)
        if source is None:
            skipped += 1
            continue
        start = int(source.get("start", "1") or "1")
        end = int(source.get("end", str(start)) or str(start))
        if end < start:
            start, end = end, start
        msg_el = bug.find(ns + "LongMessage")
        if msg_el is None:
            msg_el = bug.find(ns + "ShortMessage")
        message = (msg_el.text or "").strip() if msg_el is not None else bug.get("type", "")
        warnings.append(
            Warning(
                tool=Tool.SPOTBUGS,
                rule_id=bug.get("type", ""),
                category=bug.get("category", ""),
                message=message,
                file_path=_normalize_path(source.get("sourcepath", "")),
                span=Span(start_line=max(start, 1), end_line=max(end, 1)),
            )
        )
    return Report(commit_sha=commit_sha, warnings=tuple(warnings), skipped_count=skipped)


def _primary_source_line(bug: ET.Element, ns: str) -> ET.Element | None:
    lines = bug.findall(ns + "SourceLine")
    for sl in lines:
        if sl.get("primary") in ("true", "1"):
            return sl
    return lines[0] if lines else None


def _strip_ns(root: ET.Element) -> str:
    if root.tag.startswith("{"):
        return root.tag[: root.tag.index("}") + 1]
    return ""


# --- built-in analyzer -------------------------------------------------------

MAX_LINE_LENGTH = 120

_SYSOUT_RE = re.compile(r"System\.out\.print(?:ln)?")
_EMPTY_CATCH_RE = re.compile(r"catch\s*\(([^)]*)\)\s*\{\s*\}")

_BUILTIN_CATEGORIES = {
    "LongLine": "Code Style",
    "EmptyCatch": "Error Prone",
    "SysOut": "Best Practices",
}


def builtin_analyze(files: dict[str, str], commit_sha: str) -> Report:
    """Deterministic toy analyzer over `.java` sources, for hermetic pipelines.

    Rules: LongLine (line > 120 chars), EmptyCatch (catch with empty body),
    SysOut (System.out.print / println call).
    """
    warnings: list[Warning] = []
    for path in sorted(files):
        text = files[path]
        lines = text.split("\n")
        for i, line in enumerate(lines, start=1):
            if len(line) > MAX_LINE_LENGTH:
                warnings.append(
                    _builtin_warning(
                        "LongLine",
                        f"Line exceeds {MAX_LINE_LENGTH} characters ({len(line)})",
                        path,
                        Span(i, i),
                    )
                )
            for m in _SYSOUT_RE.finditer(line):
                warnings.append(
                    _builtin_warning(
                        "SysOut",
                        f"Avoid {m.group(0)} statements",
                        path,
                        Span(i, i),
                    )
                )
        for m in _EMPTY_CATCH_RE.finditer(text):
            start_line = text.count("\n", 0, m.start()) + 1
            end_line = text.count("\n", 0, m.end() - 1) + 1
            warnings.append(
                _builtin_warning(
                    "EmptyCatch",
                    f"Empty catch block for '{m.group(1).strip()}'",
                    path,
                    Span(start_line, end_line),
                )
            )
    return Report(commit_sha=commit_sha, warnings=tuple(warnings))


def _builtin_warning(rule: str, message: str, path: str, span: Span) -> Warning:
    return Warning(
        tool=Tool.BUILTIN,
        rule_id=rule,
        category=_BUILTIN_CATEGORIES[rule],
        message=message,
        file_path=_normalize_path(path),
        span=span,
    )


# --- external tool orchestration ---------------------------------------------

DEFAULT_COMMANDS = {
    Tool.PMD: ["pmd", "check", "-d", "{worktree}", "-R", "rulesets/java/quickstart.xml",
               "-f", "xml", "-r", "{report}", "--no-fail-on-violation"],
    Tool.SPOTBUGS: ["spotbugs", "-textui", "-xml:withMessages", "-output", "{report}",
                    "{worktree}"],
}


def run_external_analyzer(
    tool: Tool,
    worktree: Path,
    report_path: Path,
    command: list[str] | None = None,
    build_command: list[str] | None = None,
) -> Path:
    """Run an external SCA tool on a checked-out worktree, producing an XML report.

    SpotBugs requires a successful build first; a failing build raises
    BuildFailed so the caller can skip the commit for that tool only.
    """
    if tool is Tool.BUILTIN:
        raise ValueError("the built-in analyzer does not shell out")
    worktree = Path(worktree)
    report_path = Path(report_path)
    report_path.parent.mkdir(parents=True, exist_ok=True)
    if tool is Tool.SPOTBUGS and build_command:
        build = subprocess.run(build_command, cwd=worktree, capture_output=True)
        if build.returncode != 0:
            raise BuildFailed(
                f"build failed (exit {build.returncode}): {' '.join(build_command)}"
            )
    cmd = [
        part.format(worktree=str(worktree), report=str(report_path))
        for part in (command or DEFAULT_COMMANDS[tool])
    ]
    try:
        proc = subprocess.run(cmd, cwd=worktree, capture_output=True)
    except FileNotFoundError as e:
        raise AnalyzerError(f"{tool.value} binary not found: {cmd[0]}") from e
    if proc.returncode != 0:
        raise AnalyzerError(
            f"{tool.value} exited {proc.returncode}: "
            f"{proc.stderr.decode('utf-8', 'replace')[:500]}"
        )
    if not report_path.exists():
        raise AnalyzerError(f"{tool.value} produced no report at {report_path}")
    return report_path


def parse_report(tool: Tool, content: bytes, commit_sha: str) -> Report:
    if tool is Tool.PMD:
        return parse_pmd_report(content, commit_sha)
    if tool is Tool.SPOTBUGS:
        return parse_spotbugs_report(content, commit_sha)
    raise ValueError(f"no report parser for {tool}")
