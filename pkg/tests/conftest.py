import subprocess
from pathlib import Path

import pytest


class RepoBuilder:
    """Deterministic local git repository for pipeline fixtures."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self._commit_no = 0
        self.git("init", "-q", "-b", "main")
        self.git("config", "user.name", "Fixture")
        self.git("config", "user.email", "fixture@example.invalid")

    def git(self, *args, date: str | None = None) -> str:
        env = {
            "GIT_AUTHOR_NAME": "Fixture",
            "GIT_AUTHOR_EMAIL": "fixture@example.invalid",
            "GIT_COMMITTER_NAME": "Fixture",
            "GIT_COMMITTER_EMAIL": "fixture@example.invalid",
            "HOME": str(self.path),
        }
        if date:
            env["GIT_AUTHOR_DATE"] = date
            env["GIT_COMMITTER_DATE"] = date
        out = subprocess.run(
            ["git", *args], cwd=self.path, env=env, check=True, capture_output=True
        )
        return out.stdout.decode()

    def write(self, rel: str, content: str) -> None:
        p = self.path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(content, encoding="utf-8")

    def commit(self, message: str, date: str | None = None) -> str:
        self._commit_no += 1
        date = date or f"2024-01-{self._commit_no:02d} 12:00:00 +0000"
        self.git("add", "-A")
        self.git("commit", "-q", "--allow-empty", "-m", message, date=date)
        return self.git("rev-parse", "HEAD").strip()

    @property
    def url(self) -> str:
        return str(self.path)


LONG_LINE_B = '        String s = "' + "x" * 110 + '";'
LONG_LINE_D = '    String t = "' + "y" * 110 + '";'
LONG_LINE_D2 = '    String t = "' + "z" * 110 + '";'

A_JAVA_V1 = 'public class A {\n    void greet() {\n        System.out.println("hello");\n    }\n}\n'
A_JAVA_FIXED = "public class A {\n    void greet() {\n    }\n}\n"
B_JAVA = "public class B {\n    void pad() {\n" + LONG_LINE_B + "\n    }\n}\n"
C_JAVA_V1 = (
    "public class C {\n    void read() {\n        try {\n            load();\n"
    "        } catch (Exception e) {\n        }\n    }\n}\n"
)
C_JAVA_FIXED = (
    "public class C {\n    void read() {\n        try {\n            load();\n"
    "        } catch (Exception e) {\n            handle(e);\n        }\n    }\n}\n"
)
D_JAVA = "public class D {\n" + LONG_LINE_D + "\n}\n"
D_JAVA_COMMENTED = "public class D {\n" + LONG_LINE_D + "\n}\n// end\n"
D_JAVA_EDITED = "public class D {\n" + LONG_LINE_D2 + "\n}\n// end\n"


def build_pipeline_fixture(path: Path) -> tuple[RepoBuilder, dict[str, str]]:
    """Ten-commit history with a merge, a pure-insertion fix, a persisting
    warning, and a file deletion. Returns the builder and named commit shas."""
    rb = RepoBuilder(path)
    shas = {}

    rb.write("README.md", "fixture\n")
    rb.write("A.java", A_JAVA_V1)
    shas["c1"] = rb.commit("add A")

    rb.write("B.java", B_JAVA)
    shas["c2"] = rb.commit("add B")

    rb.write("C.java", C_JAVA_V1)
    shas["c3"] = rb.commit("add C")

    rb.write("C.java", C_JAVA_FIXED)
    shas["c4"] = rb.commit("fill empty catch")

    rb.write("A.java", A_JAVA_FIXED)
    shas["c5"] = rb.commit("drop sysout")

    rb.git("checkout", "-q", "-b", "side")
    rb.write("D.java", D_JAVA)
    shas["s1"] = rb.commit("add D on side")

    rb.git("checkout", "-q", "main")
    rb.write("README.md", "fixture updated\n")
    shas["c6"] = rb.commit("docs only")

    rb.git("merge", "-q", "--no-ff", "-m", "merge side", "side",
           date="2024-01-08 12:00:00 +0000")
    rb._commit_no += 1
    shas["c7"] = rb.git("rev-parse", "HEAD").strip()

    rb.git("rm", "-q", "B.java")
    shas["c8"] = rb.commit("delete B")

    rb.write("D.java", D_JAVA_COMMENTED)
    shas["c9"] = rb.commit("trailing comment in D")

    rb.write("D.java", D_JAVA_EDITED)
    shas["c10"] = rb.commit("rewrite long line in D")

    return rb, shas


@pytest.fixture
def repo_builder(tmp_path):
    return RepoBuilder(tmp_path / "repo")


@pytest.fixture
def pipeline_fixture(tmp_path):
    return build_pipeline_fixture(tmp_path / "fixture-repo")
