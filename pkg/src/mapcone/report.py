"""Command reports and their persistence."""

from __future__ import annotations

import hashlib
import json
import os
from datetime import UTC, datetime
from typing import TYPE_CHECKING, Any

from pydantic import BaseModel, ConfigDict, Field

from mapcone import __version__
from mapcone.logging import get_logger

if TYPE_CHECKING:
    from pathlib import Path

logger = get_logger(__name__)


def inputs_digest(inputs: dict[str, Any]) -> str:
    """Return the SHA-256 of the canonical JSON encoding of the inputs."""
    blob = json.dumps(inputs, separators=(",", ":"), sort_keys=True)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class Report(BaseModel):
    """Result of one command, written as JSON."""

    model_config = ConfigDict(frozen=True)

    command: str = Field(description="Subcommand that produced the report")
    version: str = Field(default=__version__, description="mapcone version")
    created: datetime = Field(
        default_factory=lambda: datetime.now(UTC),
        description="Creation time",
    )
    config: dict[str, Any] = Field(description="Resolved configuration")
    inputs: dict[str, Any] = Field(default_factory=dict, description="Command inputs")
    inputs_digest: str = Field(description="SHA-256 of the canonical inputs")
    results: dict[str, Any] = Field(default_factory=dict, description="Command output")
    checks: dict[str, bool] = Field(default_factory=dict, description="Pass/fail flags")
    wall_clock: float = Field(description="Elapsed seconds")

    @property
    def passed(self) -> bool:
        """True when every check passed."""
        return all(self.checks.values())

    def to_json(self) -> str:
        """Encode the report; floats keep their shortest round-trip form."""
        return self.model_dump_json(indent=2)


def persist_report(report: Report, path: Path | None) -> None:
    """Write the report to ``path`` atomically, or to stdout when ``path`` is None."""
    text = report.to_json()
    if path is None:
        print(text)
        return
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with tmp.open("w", encoding="utf-8") as f:
        f.write(text)
        f.write("\n")
        f.flush()
        os.fsync(f.fileno())
    tmp.replace(path)
    logger.info("Report written to %s", path)
