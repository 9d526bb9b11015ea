from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .histogram import Histogram

SCHEMA_VERSION = 1

# keys of ``telemetry`` that vary between identical runs
TIMING_KEYS = ("wall_time_ms",)


def digest(obj) -> str:
    """sha256 of the canonical JSON encoding of ``obj``."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass
class SanitizationReport:
    """Sanitized histogram plus achieved distances and solver telemetry.

    ``feasible_vs_c`` is ``None`` when no privacy parameter was given.
    """

    solver: str
    histogram: Histogram
    d_q: float
    d_p: float | None = None
    feasible_vs_c: bool | None = None
    parameters: dict = field(default_factory=dict)
    telemetry: dict = field(default_factory=dict)
    input_digest: str = ""

    @property
    def counts(self) -> tuple[int, ...]:
        return self.histogram.counts

    @property
    def verdict(self) -> str:
        return {None: "not-checked", True: "yes", False: "no"}[self.feasible_vs_c]

    def to_json(self, timing: bool = True) -> dict:
        telemetry = dict(self.telemetry)
        if not timing:
            for key in TIMING_KEYS:
                telemetry.pop(key, None)
        return {
            "schema_version": SCHEMA_VERSION,
            "solver": self.solver,
            "input_digest": self.input_digest,
            "parameters": self.parameters,
            "output": self.histogram.to_json(),
            "d_q": self.d_q,
            "d_p": self.d_p,
            "feasible_vs_c": self.verdict,
            "telemetry": telemetry,
        }

    def dumps(self, timing: bool = True) -> str:
        return json.dumps(self.to_json(timing), indent=2, sort_keys=True)
