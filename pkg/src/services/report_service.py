"""Report Service: text and key=value renderings of runs and lasso checks."""
from typing import Dict, List

from src.domain.models import LassoVerdict, RunReport
from src.domain.policies import implied_objectives
from src.infra.templates import TemplateLoader

REPORT_FORMATS = ("text", "kv")


class ReportService:
    """Service for rendering reports."""

    def render(self, report: RunReport, fmt: str = "text") -> str:
        """
        Render a run report.

        Args:
            report: The report
            fmt: "text" for the human-readable layout, "kv" for key=value lines

        Returns:
            Report text ending with a newline
        """
        if fmt == "kv":
            return self.render_kv(report)
        implied = []
        if report.winner.value == "eve":
            implied = [kind.value for kind in implied_objectives(report.objective)]
        return TemplateLoader.render("report.txt.j2", report=report, implied=implied)

    def render_kv(self, report: RunReport) -> str:
        """One key=value line per field; counts are flattened as counts.<name>."""
        data = report.model_dump(mode="json")
        counts: Dict[str, int] = data.pop("counts")
        # Wall time is the only non-deterministic field
        data["wallTime"] = f"{report.wallTime:.3f}"
        lines = [f"{key}={'' if value is None else value}" for key, value in data.items()]
        lines.extend(f"counts.{key}={value}" for key, value in counts.items())
        return "\n".join(lines) + "\n"

    def render_verdicts(self, verdicts: List[LassoVerdict], fmt: str = "text") -> str:
        """
        Render lasso membership verdicts, one per objective.

        Args:
            verdicts: Verdicts in request order
            fmt: "text" or "kv"

        Returns:
            Report text ending with a newline
        """
        lines = []
        for verdict in verdicts:
            name = verdict.kind.value
            if verdict.lmax is not None:
                name = f"{name}({verdict.lmax})"
            if fmt == "kv":
                lines.append(f"{name}={'yes' if verdict.member else 'no'}")
                if verdict.violationPosition is not None:
                    lines.append(f"{name}.violationPosition={verdict.violationPosition}")
                continue
            line = f"{name:<12}: {'yes' if verdict.member else 'no'}"
            if verdict.witness is not None:
                path = " ".join(verdict.witness.states)
                line += f" (witness {path}"
                if verdict.violationPosition is not None:
                    line += f", window opens at {verdict.violationPosition}"
                line += ")"
            lines.append(line)
        return "\n".join(lines) + "\n"
