"""
Report block writer.

Every report entity renders itself through ``to_lines()``; this module
joins the blocks into a ``key=value`` text file with a ``[section]`` line
before each block.
"""

import logging
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Protocol

logger = logging.getLogger(__name__)


class ReportBlock(Protocol):
    def to_lines(self) -> list[str]: ...


def render_blocks(blocks: Iterable[tuple[str, ReportBlock | Sequence[str]]]) -> str:
    """Text for a sequence of (section, block) pairs, blank line between blocks."""
    chunks = []
    for section, block in blocks:
        lines = block if isinstance(block, Sequence) else block.to_lines()
        chunks.append("\n".join([f"[{section}]", *lines]))
    return "\n\n".join(chunks) + "\n" if chunks else ""


def write_report(blocks: Iterable[tuple[str, ReportBlock | Sequence[str]]], path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_blocks(blocks), encoding="utf-8")
    logger.info("Wrote report to %s", path)
    return path


def parse_report(text: str) -> dict[str, dict[str, str]]:
    """Inverse of render_blocks: section -> {key: value}."""
    sections: dict[str, dict[str, str]] = {}
    current: dict[str, str] | None = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = sections.setdefault(line[1:-1], {})
            continue
        key, _, value = line.partition("=")
        if current is None:
            current = sections.setdefault("", {})
        current[key] = value
    return sections
