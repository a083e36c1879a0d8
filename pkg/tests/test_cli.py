import json

import pytest
from click.testing import CliRunner

from warnminer.cli import main
from warnminer.dataset import read_dataset


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def mined_workdir(pipeline_fixture, tmp_path, runner):
    rb, shas = pipeline_fixture
    workdir = tmp_path / "work"
    result = runner.invoke(main, ["mine", rb.url, "--workdir", str(workdir)])
    assert result.exit_code == 0, result.output
    return rb, shas, workdir


@pytest.fixture
def dataset_files(mined_workdir, tmp_path, runner):
    rb, shas, workdir = mined_workdir
    out = tmp_path / "dataset.jsonl"
    archive = tmp_path / "archive"
    result = runner.invoke(
        main,
        ["create-dataset", "--workdir", str(workdir), "--out", str(out),
         "--archive", str(archive)],
    )
    assert result.exit_code == 0, result.output
    return rb, shas, out, archive


class TestMineCommand:
    def test_summary_line(self, mined_workdir, runner):
        rb, shas, workdir = mined_workdir
        assert (workdir / workdir.iterdir().__next__().name / "manifest.jsonl").exists()

    def test_unknown_analyzer_rejected(self, runner, tmp_path):
        result = runner.invoke(
            main, ["mine", "https://x/y", "--analyzers", "sonar"]
        )
        assert result.exit_code != 0
        assert "unknown analyzer" in result.output

    def test_bad_date_rejected(self, runner):
        result = runner.invoke(main, ["mine", "https://x/y", "--since", "01/02/2024"])
        assert result.exit_code != 0
        assert "YYYY-MM-DD" in result.output

    def test_clone_failure_exit_one(self, runner, tmp_path):
        result = runner.invoke(
            main,
            ["mine", str(tmp_path / "missing"), "--workdir", str(tmp_path / "w")],
        )
        assert result.exit_code == 1
        assert "FAILED" in result.output


class TestFeedCommand:
    def test_mixed_good_and_bad(self, pipeline_fixture, tmp_path, runner):
        rb, shas = pipeline_fixture
        listing = tmp_path / "repos.txt"
        listing.write_text(f"# fixtures\n{tmp_path / 'missing'}\n{rb.url}\n")
        result = runner.invoke(
            main, ["feed", str(listing), "--workdir", str(tmp_path / "w")]
        )
        assert result.exit_code == 1
        assert "9 pairs" in result.output

    def test_empty_list_is_noop(self, tmp_path, runner):
        listing = tmp_path / "repos.txt"
        listing.write_text("# nothing here\n")
        result = runner.invoke(main, ["feed", str(listing)])
        assert result.exit_code == 0
        assert "empty" in result.output


class TestCreateDatasetCommand:
    def test_reports_totals(self, mined_workdir, tmp_path, runner):
        rb, shas, workdir = mined_workdir
        out = tmp_path / "ds.jsonl"
        result = runner.invoke(
            main, ["create-dataset", "--workdir", str(workdir), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert "6 records (3 actionable, 3 non-actionable)" in result.output
        assert len(read_dataset(out)) == 6

    def test_parquet_output(self, mined_workdir, tmp_path, runner):
        rb, shas, workdir = mined_workdir
        out = tmp_path / "ds.parquet"
        result = runner.invoke(
            main, ["create-dataset", "--workdir", str(workdir), "--out", str(out)]
        )
        assert result.exit_code == 0, result.output
        assert len(read_dataset(out)) == 6


class TestDedupCommand:
    def test_writes_kept_and_droplog(self, dataset_files, tmp_path, runner):
        rb, shas, dataset, archive = dataset_files
        out = tmp_path / "deduped.jsonl"
        result = runner.invoke(
            main,
            ["dedup", str(dataset), "--out", str(out), "--archive", str(archive)],
        )
        assert result.exit_code == 0, result.output
        kept = read_dataset(out)
        assert 1 <= len(kept) <= 6
        droplog = tmp_path / "deduped.jsonl.droplog.jsonl"
        assert droplog.exists()
        drops = [json.loads(line) for line in droplog.read_text().splitlines()]
        assert len(kept) + len(drops) == 6


class TestStatsCommand:
    @pytest.mark.parametrize("kind", ["category", "rules", "projects"])
    def test_table_output(self, dataset_files, runner, kind):
        rb, shas, dataset, archive = dataset_files
        result = runner.invoke(
            main, ["stats", str(dataset), "--kind", kind, "--tool", "builtin"]
        )
        assert result.exit_code == 0, result.output
        assert result.output.strip()

    def test_csv_output_parses(self, dataset_files, runner):
        import csv
        import io

        rb, shas, dataset, archive = dataset_files
        result = runner.invoke(
            main,
            ["stats", str(dataset), "--kind", "category", "--tool", "builtin",
             "--format", "csv"],
        )
        rows = list(csv.DictReader(io.StringIO(result.output)))
        assert {r["category"] for r in rows} == {
            "Best Practices", "Code Style", "Error Prone",
        }

    def test_svg_output_well_formed(self, dataset_files, runner):
        import xml.etree.ElementTree as ET

        rb, shas, dataset, archive = dataset_files
        result = runner.invoke(
            main,
            ["stats", str(dataset), "--kind", "projects", "--format", "svg"],
        )
        assert result.exit_code == 0, result.output
        root = ET.fromstring(result.output)
        assert root.tag.endswith("svg")

    def test_rule_coverage_counts(self, dataset_files, runner):
        rb, shas, dataset, archive = dataset_files
        result = runner.invoke(
            main,
            ["stats", str(dataset), "--kind", "rules", "--tool", "builtin",
             "--format", "csv"],
        )
        import csv
        import io

        rows = {r["class"]: int(r["count"])
                for r in csv.DictReader(io.StringIO(result.output))}
        # SysOut and LongLine appear with both labels, EmptyCatch only as
        # actionable; the builtin universe has exactly those three rules.
        assert rows == {
            "Both A and NA": 2,
            "Only A": 1,
            "Only NA": 0,
            "Neither A nor NA": 0,
        }


class TestSampleCommand:
    def test_explicit_z_sizes(self, dataset_files, tmp_path, runner):
        rb, shas, dataset, archive = dataset_files
        out = tmp_path / "sample.jsonl"
        result = runner.invoke(
            main,
            ["sample", str(dataset), "--z", "1.65", "--margin", "0.45",
             "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        lines = out.read_text().strip().splitlines()
        assert len(lines) >= 1
        record = json.loads(lines[0])
        assert set(record) == {
            "repo", "commit_sha", "parent_sha", "filename", "positions",
            "warning_type", "label",
        }

    def test_z_1645_prints_reference_size(self, dataset_files, runner):
        rb, shas, dataset, archive = dataset_files
        result = runner.invoke(
            main, ["sample", str(dataset), "--z", "1.645", "--margin", "0.9"]
        )
        assert result.exit_code == 0, result.output
        assert "reference: z=1.65" in result.output

    def test_unknown_confidence_needs_z(self, dataset_files, runner):
        rb, shas, dataset, archive = dataset_files
        result = runner.invoke(main, ["sample", str(dataset), "--confidence", "0.8"])
        assert result.exit_code != 0
        assert "--z" in result.output

    def test_deterministic_per_seed(self, dataset_files, runner):
        rb, shas, dataset, archive = dataset_files
        args = ["sample", str(dataset), "--z", "1.0", "--margin", "0.5", "--seed", "3"]
        a = runner.invoke(main, args)
        b = runner.invoke(main, args)
        assert a.output == b.output
