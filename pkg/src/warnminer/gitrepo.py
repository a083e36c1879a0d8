"""Git access: cloning, first-parent commit walks, Java diffs, file reads."""

from __future__ import annotations

import re
import subprocess
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

SHA_RE = re.compile(r"^[0-9a-f]{40}$")

# @@ -old_start[,old_len] +new_start[,new_len] @@
HUNK_RE = re.compile(r"^@@ -(\d+)(?:,(\d+))? \+(\d+)(?:,(\d+))? @@")


class GitError(RuntimeError):
    pass


class CloneError(GitError):
    pass


class NotFoundAtCommit(GitError):
    pass


@dataclass(frozen=True)
class CommitMeta:
    sha: str
    commit_date_utc: datetime
    parent_shas: tuple[str, ...]

    def __post_init__(self):
        if not SHA_RE.match(self.sha):
            raise ValueError(f"not a 40-hex sha: {self.sha!r}")
        if self.commit_date_utc.tzinfo is None:
            raise ValueError("commit_date_utc must be timezone-aware")


@dataclass(frozen=True)
class CommitPair:
    repo_url: str
    parent: CommitMeta
    child: CommitMeta

    def __post_init__(self):
        if not self.child.parent_shas or self.child.parent_shas[0] != self.parent.sha:
            raise ValueError("parent must be the child's first parent")


@dataclass(frozen=True)
class Hunk:
    old_start: int
    old_len: int
    new_start: int
    new_len: int

    def __post_init__(self):
        if self.old_len == 0 and self.new_len == 0:
            raise ValueError("hunk cannot be empty on both sides")


@dataclass(frozen=True)
class FileDiff:
    old_path: str | None
    new_path: str | None
    hunks: tuple[Hunk, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.old_path is None and self.new_path is None:
            raise ValueError("file diff needs at least one path")


def _run_git(args: list[str], cwd: Path | None = None) -> str:
    try:
        out = subprocess.run(
            ["git", *args],
            cwd=cwd,
            check=True,
            capture_output=True,
        )
    except subprocess.CalledProcessError as e:
        raise GitError(
            f"git {' '.join(args)} failed: {e.stderr.decode('utf-8', 'replace').strip()}"
        ) from e
    return out.stdout.decode("utf-8", "replace")


def repo_slug(url: str) -> str:
    """Filesystem-safe identifier for a repository URL (host+path, '/' -> '_')."""
    s = re.sub(r"^[a-z+]+://", "", url.strip())
    s = re.sub(r"^git@", "", s)
    if s.endswith(".git"):
        s = s[:-4]
    return re.sub(r"[/:@]+", "_", s).strip("_")


class GitRepo:
    """Handle to a local clone. All operations are read-only and shell out to git."""

    def __init__(self, path: Path):
        self.path = Path(path)
        if not (self.path / ".git").exists() and not (self.path / "HEAD").exists():
            raise GitError(f"not a git repository: {self.path}")

    def _git(self, *args: str) -> str:
        return _run_git(list(args), cwd=self.path)

    def _git_bytes(self, *args: str) -> bytes:
        try:
            out = subprocess.run(
                ["git", *args], cwd=self.path, check=True, capture_output=True
            )
        except subprocess.CalledProcessError as e:
            raise GitError(
                f"git {' '.join(args)} failed: {e.stderr.decode('utf-8', 'replace').strip()}"
            ) from e
        return out.stdout

    def head_sha(self) -> str:
        return self._git("rev-parse", "HEAD").strip()

    def default_branch_tip(self) -> str:
        """Tip of the remote default branch, falling back to local HEAD."""
        try:
            ref = self._git("symbolic-ref", "refs/remotes/origin/HEAD").strip()
            return self._git("rev-parse", ref).strip()
        except GitError:
            return self.head_sha()

    def commit_meta(self, sha: str) -> CommitMeta:
        line = self._git("show", "-s", "--format=%H%x00%cI%x00%P", sha).strip()
        return _parse_meta_line(line)

    def read_file_at(self, sha: str, path: str) -> str:
        """Content of ``path`` at ``sha``, UTF-8 with lossy replacement."""
        try:
            raw = self._git_bytes("show", f"{sha}:{path}")
        except GitError as e:
            raise NotFoundAtCommit(f"{path} not found at {sha}") from e
        return raw.decode("utf-8", "replace")

    def list_files_at(self, sha: str, suffix: str | None = None) -> list[str]:
        out = self._git("ls-tree", "-r", "--name-only", sha)
        paths = [p for p in out.splitlines() if p]
        if suffix:
            paths = [p for p in paths if p.endswith(suffix)]
        return paths


def _parse_meta_line(line: str) -> CommitMeta:
    sha, date_iso, parents = line.split("\x00")
    dt = datetime.fromisoformat(date_iso).astimezone(timezone.utc)
    return CommitMeta(sha=sha, commit_date_utc=dt, parent_shas=tuple(parents.split()))


def clone_repo(url: str, workdir: Path) -> GitRepo:
    """Clone ``url`` into ``workdir``; reuse and refresh an existing clone."""
    workdir = Path(workdir)
    if (workdir / ".git").exists():
        repo = GitRepo(workdir)
        try:
            repo._git("fetch", "origin", "--prune")
        except GitError:
            pass  # offline reuse of an existing clone is still valid
        return repo
    workdir.parent.mkdir(parents=True, exist_ok=True)
    try:
        _run_git(["clone", url, str(workdir)])
    except GitError as e:
        raise CloneError(f"cannot clone {url}: {e}") from e
    return GitRepo(workdir)


def list_main_commits(
    repo: GitRepo,
    since: datetime | None = None,
    until: datetime | None = None,
) -> list[CommitMeta]:
    """First-parent chain of the default branch, oldest to newest.

    Date filters compare against the committer date converted to UTC,
    inclusive on both ends.
    """
    tip = repo.default_branch_tip()
    out = repo._git(
        "log", "--first-parent", "--reverse", "--format=%H%x00%cI%x00%P", tip
    )
    commits = [_parse_meta_line(ln) for ln in out.splitlines() if ln]
    if since is not None:
        commits = [c for c in commits if c.commit_date_utc >= since]
    if until is not None:
        commits = [c for c in commits if c.commit_date_utc <= until]
    return commits


def make_pairs(commits: list[CommitMeta], repo: GitRepo, url: str) -> list[CommitPair]:
    """One pair per non-root commit; the parent may fall outside the window."""
    by_sha = {c.sha: c for c in commits}
    pairs = []
    for c in commits:
        if not c.parent_shas:
            continue  # root commit
        parent = by_sha.get(c.parent_shas[0]) or repo.commit_meta(c.parent_shas[0])
        pairs.append(CommitPair(repo_url=url, parent=parent, child=c))
    return pairs


def diff_java_changes(repo: GitRepo, pair: CommitPair) -> list[FileDiff]:
    """Zero-context diff of `.java` files between the pair's commits.

    An empty result means the pair has no Java changes and must be skipped.
    """
    out = repo._git(
        "diff",
        "-U0",
        "--no-renames",
        "--no-color",
        pair.parent.sha,
        pair.child.sha,
        "--",
        "*.java",
    )
    return parse_unified_diff(out)


def parse_unified_diff(text: str) -> list[FileDiff]:
    diffs: list[FileDiff] = []
    old_path: str | None = None
    new_path: str | None = None
    hunks: list[Hunk] = []
    started = False

    def flush():
        nonlocal old_path, new_path, hunks, started
        if started and (old_path is not None or new_path is not None):
            diffs.append(FileDiff(old_path=old_path, new_path=new_path, hunks=tuple(hunks)))
        old_path, new_path, hunks, started = None, None, [], False

    for line in text.splitlines():
        if line.startswith("diff --git "):
            flush()
            started = True
        elif line.startswith("--- "):
            p = line[4:].split("\t")[0]
            old_path = None if p == "/dev/null" else p.removeprefix("a/")
        elif line.startswith("+++ "):
            p = line[4:].split("\t")[0]
            new_path = None if p == "/dev/null" else p.removeprefix("b/")
        else:
            m = HUNK_RE.match(line)
            if m:
                old_start = int(m.group(1))
                old_len = int(m.group(2)) if m.group(2) is not None else 1
                new_start = int(m.group(3))
                new_len = int(m.group(4)) if m.group(4) is not None else 1
                hunks.append(Hunk(old_start, old_len, new_start, new_len))
    flush()
    return diffs
