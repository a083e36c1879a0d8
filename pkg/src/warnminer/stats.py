"""Summary tables and the statistically sized validation sample."""

from __future__ import annotations

import enum
import math
import random
from dataclasses import dataclass

from .analyzers import RuleUniverse, Tool, load_rule_universe


class CoverageClass(enum.Enum):
    BOTH = "Both A and NA"
    ONLY_A = "Only A"
    ONLY_NA = "Only NA"
    NEITHER = "Neither A nor NA"


@dataclass(frozen=True)
class SampleSpec:
    N: int
    z: float
    p_hat: float = 0.5
    epsilon: float = 0.10

    def __post_init__(self):
        if self.N < 1:
            raise ValueError("population size must be >= 1")
        if not 0.0 <= self.p_hat <= 1.0:
            raise ValueError("p_hat must be in [0, 1]")
        if not 0.0 < self.epsilon <= 1.0:
            raise ValueError("epsilon must be in (0, 1]")


def cochran_sample_size(spec: SampleSpec) -> int:
    """Finite-population-corrected sample size, rounded up, capped at N."""
    n0 = spec.z**2 * spec.p_hat * (1.0 - spec.p_hat) / spec.epsilon**2
    n = n0 / (1.0 + (n0 - 1.0) / spec.N)
    return min(math.ceil(n), spec.N)


def _tool_records(records: list[dict], tool: Tool) -> list[dict]:
    return [r for r in records if r["tool"] == tool.value]


def category_distribution(records: list[dict], tool: Tool) -> list[dict]:
    """(category, A count, A %, NA count, NA %) rows, sorted by category."""
    universe = load_rule_universe(tool)
    counts: dict[str, list[int]] = {}
    for r in _tool_records(records, tool):
        category = universe.categories.get(r["warning_type"], "Unknown")
        bucket = counts.setdefault(category, [0, 0])
        bucket[r["label"]] += 1
    total_a = sum(v[1] for v in counts.values())
    total_na = sum(v[0] for v in counts.values())
    rows = []
    for category in sorted(counts):
        na, a = counts[category]
        rows.append(
            {
                "category": category,
                "actionable": a,
                "actionable_pct": round(100.0 * a / total_a, 2) if total_a else 0.0,
                "non_actionable": na,
                "non_actionable_pct": round(100.0 * na / total_na, 2) if total_na else 0.0,
            }
        )
    return rows


def rule_coverage_classes(
    records: list[dict], universe: RuleUniverse
) -> tuple[dict[CoverageClass, int], set[str]]:
    """Partition the rule universe by observed labels; also report unknown rules."""
    seen_a: set[str] = set()
    seen_na: set[str] = set()
    unknown: set[str] = set()
    for r in _tool_records(records, universe.tool):
        rule = r["warning_type"]
        if rule not in universe.rule_ids:
            unknown.add(rule)
            continue
        (seen_a if r["label"] == 1 else seen_na).add(rule)
    both = seen_a & seen_na
    counts = {
        CoverageClass.BOTH: len(both),
        CoverageClass.ONLY_A: len(seen_a - both),
        CoverageClass.ONLY_NA: len(seen_na - both),
    }
    counts[CoverageClass.NEITHER] = len(universe.rule_ids) - sum(counts.values())
    return counts, unknown


def project_stats(records: list[dict]) -> list[dict]:
    """Per-repo actionable/non-actionable counts per tool, plus a sum row."""
    rows: dict[str, dict] = {}
    tools = sorted({r["tool"] for r in records})
    for r in records:
        row = rows.setdefault(r["repo"], {"repo": r["repo"]})
        key = f"{r['tool']}_{'A' if r['label'] == 1 else 'NA'}"
        row[key] = row.get(key, 0) + 1
    keys = [f"{t}_{lbl}" for t in tools for lbl in ("A", "NA")]
    out = []
    for repo in sorted(rows):
        row = {"repo": repo}
        row.update({k: rows[repo].get(k, 0) for k in keys})
        out.append(row)
    total = {"repo": "Sum"}
    total.update({k: sum(row[k] for row in out) for k in keys})
    out.append(total)
    return out


def draw_validation_sample(records: list[dict], n: int, seed: int) -> list[dict]:
    """Uniform sample without replacement; deterministic per seed."""
    if n > len(records):
        raise ValueError(f"cannot sample {n} from {len(records)} records")
    rng = random.Random(seed)
    picked = rng.sample(range(len(records)), n)
    return [
        {
            "repo": records[i]["repo"],
            "commit_sha": records[i]["commit_sha"],
            "parent_sha": records[i]["parent_sha"],
            "filename": records[i]["filename"],
            "positions": records[i]["positions"],
            "warning_type": records[i]["warning_type"],
            "label": records[i]["label"],
        }
        for i in picked
    ]


def rows_to_csv(rows: list[dict]) -> str:
    import csv
    import io

    buf = io.StringIO()
    if not rows:
        return ""
    writer = csv.DictWriter(buf, fieldnames=list(rows[0].keys()))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def bar_chart_svg(rows: list[dict], label_key: str, value_keys: list[str]) -> str:
    """Minimal grouped bar chart, one group per row."""
    width, height, margin = 800, 360, 40
    plot_h = height - 2 * margin
    max_val = max((row[k] for row in rows for k in value_keys), default=1) or 1
    group_w = (width - 2 * margin) / max(len(rows), 1)
    bar_w = group_w / (len(value_keys) + 1)
    colors = ["#4878d0", "#ee854a", "#6acc64", "#d65f5f"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
    ]
    for gi, row in enumerate(rows):
        x0 = margin + gi * group_w
        for vi, key in enumerate(value_keys):
            h = plot_h * row[key] / max_val
            x = x0 + vi * bar_w
            y = height - margin - h
            parts.append(
                f'<rect x="{x:.1f}" y="{y:.1f}" width="{bar_w:.1f}" height="{h:.1f}" '
                f'fill="{colors[vi % len(colors)]}"><title>{row[label_key]} '
                f"{key}={row[key]}</title></rect>"
            )
        parts.append(
            f'<text x="{x0 + group_w / 2:.1f}" y="{height - margin + 14}" '
            f'font-size="9" text-anchor="middle">{row[label_key]}</text>'
        )
    parts.append("</svg>")
    return "\n".join(parts)
