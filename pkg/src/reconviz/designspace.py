"""Domain prevalence design space and scaled visual-encoding relevance.

The design space is a per-chart-type, per-year usage count table harvested
for a domain. Raw relevance decays counts from older years; scaled relevance
normalizes against the most used chart type so the top chart scores exactly
10 and everything else lands in [1, 10].
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .errors import AllZeroCounts, ConfigError, EmptyDesignSpace, UnmappedDataType

DEFAULT_DECAY = 0.9
SCALE_TOP = 10.0
SCALE_FLOOR = 1.0


@dataclass(frozen=True)
class PrevalenceDesignSpace:
    entries: tuple[tuple[str, int, int], ...]  # (chart_type, year, count)

    def __post_init__(self):
        keys = [(chart, year) for chart, year, _ in self.entries]
        if len(set(keys)) != len(keys):
            raise ConfigError("duplicate (chart_type, year) entry in design space")
        if any(count < 0 for _, _, count in self.entries):
            raise ConfigError("negative count in design space")

    @property
    def year_max(self) -> int:
        if not self.entries:
            raise EmptyDesignSpace("design space has no entries")
        return max(year for _, year, _ in self.entries)

    def chart_types(self) -> list[str]:
        return sorted({chart for chart, _, _ in self.entries})

    @classmethod
    def from_csv(cls, path: str | Path) -> "PrevalenceDesignSpace":
        rows = list(csv.DictReader(io.StringIO(Path(path).read_text(encoding="utf-8"))))
        if not rows:
            raise EmptyDesignSpace(f"design space file {path} has no rows")
        entries = []
        for row in rows:
            try:
                entries.append((row["chart_type"].strip(), int(row["year"]), int(row["count"])))
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"design space file {path} needs chart_type,year,count rows")
        return cls(tuple(entries))


def raw_relevance(space: PrevalenceDesignSpace, decay: float = DEFAULT_DECAY) -> dict[str, float]:
    """Decayed usage total per chart type: count * decay^(year_max - year)."""
    if not space.entries:
        raise EmptyDesignSpace("design space has no entries")
    if not (0 < decay <= 1):
        raise ConfigError(f"decay must be in (0, 1], got {decay}")
    year_max = space.year_max
    totals: dict[str, float] = {}
    for chart, year, count in space.entries:
        totals[chart] = totals.get(chart, 0.0) + count * decay ** (year_max - year)
    return dict(sorted(totals.items()))


@dataclass(frozen=True)
class RelevanceTable:
    raw: dict[str, float]
    scaled: dict[str, float]
    decay: float

    def score(self, chart_type: str) -> float:
        return self.scaled[chart_type]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["chart_type", "raw", "scaled"])
        order = sorted(self.scaled, key=lambda c: (-self.scaled[c], c))
        for chart in order:
            writer.writerow([chart, f"{self.raw[chart]:.6g}", f"{self.scaled[chart]:.6g}"])
        return buf.getvalue()


def scaled_relevance(raw: dict[str, float], decay: float = DEFAULT_DECAY) -> RelevanceTable:
    """Scale raw relevance to [1, 10] against the maximum chart type."""
    if not raw:
        raise EmptyDesignSpace("no raw relevance values")
    top = max(raw.values())
    if top <= 0:
        raise AllZeroCounts("all design-space counts are zero")
    scaled = {
        chart: max(SCALE_FLOOR, (value / top) * SCALE_TOP) for chart, value in sorted(raw.items())
    }
    return RelevanceTable(dict(sorted(raw.items())), scaled, decay)


def relevance_from_space(space: PrevalenceDesignSpace, decay: float = DEFAULT_DECAY) -> RelevanceTable:
    return scaled_relevance(raw_relevance(space, decay), decay)


@dataclass(frozen=True)
class TypeEncodingMap:
    candidates: dict[str, tuple[str, ...]]  # data type -> chart types

    def charts_for(self, dtype: str) -> tuple[str, ...]:
        if dtype not in self.candidates:
            raise UnmappedDataType(dtype)
        return self.candidates[dtype]

    def validate_against(self, table: RelevanceTable) -> None:
        for dtype, charts in sorted(self.candidates.items()):
            for chart in charts:
                if chart not in table.scaled:
                    raise ConfigError(
                        f"encoding map lists {chart!r} for {dtype} but the design space has no such chart type"
                    )

    @classmethod
    def from_json(cls, path: str | Path) -> "TypeEncodingMap":
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
        if not isinstance(doc, dict):
            raise ConfigError(f"encoding map {path} must be a JSON object")
        return cls({dtype: tuple(charts) for dtype, charts in sorted(doc.items())})
