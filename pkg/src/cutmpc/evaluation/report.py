"""Report files: rate table, charts and per-trial logs.

All outputs are deterministic: CSV floats use ``repr``, SVGs are written with a
fixed hash salt and without a date.
"""

from __future__ import annotations

import csv
import json
import pathlib
from typing import TYPE_CHECKING

import matplotlib as mpl


mpl.use("Agg")

from matplotlib.figure import Figure  # noqa: E402
import numpy as np  # noqa: E402

from cutmpc import log  # noqa: E402
from cutmpc.evaluation.comparison import CONTROLLERS  # noqa: E402


if TYPE_CHECKING:
    from cutmpc.evaluation.comparison import ComparisonReport
    from cutmpc.evaluation.force_critical import ForceCriticalAssessment
    from cutmpc.evaluation.results import TrialResult


logger = log.get_logger(__name__)

RATE_COLUMNS = (
    "material",
    "controller",
    "held_out",
    "n_trials",
    "mean_rate",
    "std_rate",
    "n_completed",
    "winner",
)
SVG_RC = {"svg.hashsalt": "cutmpc", "svg.fonttype": "none"}
COLORS = {"baseline": "#8c8c8c", "mpc": "#1f77b4"}


def _save_svg(fig: Figure, path: pathlib.Path) -> pathlib.Path:
    with mpl.rc_context(SVG_RC):
        fig.savefig(path, format="svg", metadata={"Date": None})
    return path


def write_rates_csv(report: ComparisonReport, path: pathlib.Path) -> pathlib.Path:
    wins = report.wins()
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(RATE_COLUMNS)
        for s in report.summaries():
            writer.writerow(
                [
                    s.material,
                    s.controller,
                    int(s.held_out),
                    s.n_trials,
                    repr(s.mean_rate),
                    repr(s.std_rate),
                    s.n_completed,
                    wins[s.material] or "tie",
                ]
            )
    return path


def rates_chart(report: ComparisonReport, path: pathlib.Path) -> pathlib.Path:
    """Grouped bar chart of mean cutting rates with std error bars."""
    summaries = {(s.material, s.controller): s for s in report.summaries()}
    fig = Figure(figsize=(max(6.0, 1.1 * len(report.materials)), 4.0))
    ax = fig.add_subplot()
    x = np.arange(len(report.materials))
    width = 0.38
    for i, controller in enumerate(CONTROLLERS):
        cells = [summaries[m, controller] for m in report.materials]
        ax.bar(
            x + (i - 0.5) * width,
            [1000 * c.mean_rate for c in cells],
            width,
            yerr=[1000 * c.std_rate for c in cells],
            label=controller,
            color=COLORS[controller],
            capsize=3,
        )
    labels = [f"{m}*" if m in report.held_out else m for m in report.materials]
    ax.set_xticks(x, labels, rotation=30, ha="right")
    ax.set_ylabel("cutting rate (mm/s)")
    ax.set_title("Cutting rate per material (* held out)")
    ax.legend()
    fig.tight_layout()
    return _save_svg(fig, path)


def force_critical_chart(
    result: TrialResult, assessment: ForceCriticalAssessment, path: pathlib.Path
) -> pathlib.Path:
    """Positions, sensed and reference forces over time with the core contact marked."""
    trial_log = result.log
    fig = Figure(figsize=(8.0, 7.0))
    ax_p, ax_fz, ax_fy = fig.subplots(3, 1, sharex=True)
    t = trial_log.t
    ax_p.plot(t, 1000 * trial_log.p[:, 1], label="p_z")
    ax_p.plot(t, 1000 * trial_log.extra["cut_front"], label="cut front")
    ax_p.axhspan(1000 * assessment.core_bottom, 1000 * assessment.core_top, alpha=0.2, color="k")
    ax_p.set_ylabel("height (mm)")
    ax_p.legend(loc="upper right")
    ax_fz.plot(t, trial_log.f_s[:, 1], label="F_s_z")
    ax_fz.plot(t, trial_log.extra["F_r_star_z"], label="F_r*_z")
    ax_fz.set_ylabel("force z (N)")
    ax_fz.legend(loc="upper right")
    ax_fy.plot(t, trial_log.f_s[:, 0], label="F_s_y")
    ax_fy.plot(t, trial_log.extra["F_r_star_y"], label="F_r*_y")
    ax_fy.set_ylabel("force y (N)")
    ax_fy.set_xlabel("time (s)")
    ax_fy.legend(loc="upper right")
    if assessment.core_contact_time is not None:
        for ax in (ax_p, ax_fz, ax_fy):
            ax.axvline(assessment.core_contact_time, color="r", linestyle="--", linewidth=1)
    ax_p.set_title(f"Force-critical scenario ({result.material})")
    fig.tight_layout()
    return _save_svg(fig, path)


def emit_report(
    report: ComparisonReport,
    out_dir: str | pathlib.Path,
    force_critical: tuple[TrialResult, ForceCriticalAssessment] | None = None,
) -> list[pathlib.Path]:
    """Write the report directory and return the written files."""
    out_dir = pathlib.Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = [
        write_rates_csv(report, out_dir / "rates.csv"),
        rates_chart(report, out_dir / "rates.svg"),
    ]
    for result in report.results:
        # wall-clock timing differs between runs
        written.append(result.log.without("tick_wall_s").write_csv(out_dir / result.file_name))
    if force_critical is not None:
        result, assessment = force_critical
        written.append(force_critical_chart(result, assessment, out_dir / "force_critical.svg"))
        summary = out_dir / "force_critical.json"
        summary.write_text(
            json.dumps(assessment.as_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        written.append(summary)
    logger.info("Wrote %d report files to %s", len(written), out_dir)
    return written
