"""Run the baseline grid on every material preset and write the tuning record.

Usage: ``uv run scripts/tune_presets.py [config.toml]``
"""

from __future__ import annotations

import logging
from pathlib import Path
import sys

from cutmpc.config import load_config
from cutmpc.evaluation import BaselineController, tune_baseline


logging.basicConfig(level=logging.INFO)
logger = logging.getLogger(__name__)

OUTPUT = Path(__file__).parent.parent / "docs" / "preset_tuning.md"


def main(config_path: str | None = None) -> None:
    config = load_config(config_path)
    registry = config.registry()
    lines = [
        "# Preset tuning record",
        "",
        "Generated by scripts/tune_presets.py - do not edit manually.",
        "",
        "| material | kp | ka | saw period (s) | descent (s) | rate (mm/s) | completed | "
        "cut time (s) | peak force (N) |",
        "|---|---|---|---|---|---|---|---|---|",
    ]
    for label in registry.labels():
        material = registry.get(label)
        tuning = tune_baseline(material, config)
        result = BaselineController(config, tuning.setting).run(
            material, config.evaluation.tuning_seed
        )
        s = tuning.setting
        cut_time = f"{result.cut_time:.2f}" if result.cut_time is not None else "-"
        lines.append(
            f"| {label} | {s.kp} | {s.ka} | {s.saw_period} | {s.descent_duration} "
            f"| {1000 * result.cutting_rate:.2f} | {'yes' if result.completed else 'no'} "
            f"| {cut_time} | {result.peak_force:.2f} |"
        )
        logger.info("Tuned %s", label)
    OUTPUT.write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.info("Wrote %s", OUTPUT)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else None)
