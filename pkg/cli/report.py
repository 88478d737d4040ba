# file: cli/report.py

"""
Run reports: verdict, applicable bound and measured quantities per run, rendered as an
aligned text table and as JSON lines.
"""

from dataclasses import dataclass, field
from typing import Dict, List, Optional

from data_io import dumps_record


@dataclass
class RunReport:
    seed: Optional[int]
    verdict: str
    stabilization_round: Optional[int]
    bound: Optional[int] = None
    bound_hypothesis: Optional[str] = None
    bound_satisfied: Optional[bool] = None
    measured: Dict[str, object] = field(default_factory=dict)
    problems: List[str] = field(default_factory=list)
    diagnostic: Optional[str] = None

    @property
    def passed(self) -> bool:
        return not self.problems and self.bound_satisfied is not False and self.diagnostic is None

    def to_record(self) -> Dict[str, object]:
        return {
            "type": "run",
            "seed": self.seed,
            "verdict": self.verdict,
            "stabilization_round": self.stabilization_round,
            "bound": self.bound,
            "bound_hypothesis": self.bound_hypothesis,
            "bound_satisfied": self.bound_satisfied,
            "measured": self.measured,
            "problems": self.problems,
            "diagnostic": self.diagnostic,
            "passed": self.passed,
        }


@dataclass
class Report:
    title: str
    runs: List[RunReport] = field(default_factory=list)
    header: Dict[str, object] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(run.passed for run in self.runs)

    def sorted_runs(self) -> List[RunReport]:
        return sorted(self.runs, key=lambda r: (r.seed is None, r.seed or 0))

    def to_records(self) -> List[Dict[str, object]]:
        records = [{"type": "report", "title": self.title, **self.header}]
        records += [run.to_record() for run in self.sorted_runs()]
        records.append({"type": "outcome", "runs": len(self.runs), "passed": self.passed})
        return records

    def to_jsonl(self) -> str:
        return "".join(dumps_record(r) + "\n" for r in self.to_records())

    def format_table(self) -> str:
        columns = ["seed", "verdict", "stab", "bound", "ok", "measured"]
        rows = []
        for run in self.sorted_runs():
            ok = "-" if run.bound_satisfied is None else ("yes" if run.bound_satisfied else "NO")
            measured = ", ".join(f"{k}={v}" for k, v in sorted(run.measured.items()))
            rows.append([str(run.seed), run.verdict, str(run.stabilization_round or "-"),
                         str(run.bound if run.bound is not None else "-"), ok, measured])
        widths = [max(len(c), *(len(r[k]) for r in rows)) if rows else len(c) for k, c in enumerate(columns)]
        lines = [self.title, "  ".join(c.ljust(w) for c, w in zip(columns, widths))]
        lines += ["  ".join(v.ljust(w) for v, w in zip(r, widths)).rstrip() for r in rows]
        for run in self.sorted_runs():
            for problem in run.problems[:10]:
                lines.append(f"  seed {run.seed}: {problem}")
            if run.diagnostic:
                lines.append(f"  seed {run.seed}: {run.diagnostic}")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def format_key_values(record: Dict[str, object]) -> str:
    width = max(len(k) for k in record) if record else 0
    return "\n".join(f"{k.ljust(width)} : {v}" for k, v in record.items())
