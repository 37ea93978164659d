"""Run configuration: dataset manifest plus every tunable, loaded from one
JSON file with flag overrides. Relative paths resolve against the config
file's directory; unset resource paths fall back to the shipped assets.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .errors import ConfigError
from .ingest import DATA_TYPES, Dataset, load_dataset

ASSETS_DIR = Path(__file__).parent / "assets"

DEFAULT_DESIGN_SPACE = ASSETS_DIR / "design_space_genepi.csv"
DEFAULT_ENCODING_MAP = ASSETS_DIR / "type_encodings.json"
DEFAULT_VIABILITY = ASSETS_DIR / "viability_matrix.csv"
DEFAULT_TEMPLATES = ASSETS_DIR / "chart_templates.json"


@dataclass
class ManifestEntry:
    id: str
    path: Path
    dtype: str
    associated: Path | None = None


@dataclass
class RunConfig:
    datasets: list[ManifestEntry] = dc_field(default_factory=list)
    design_space: Path = DEFAULT_DESIGN_SPACE
    type_encodings: Path = DEFAULT_ENCODING_MAP
    viability_matrix: Path = DEFAULT_VIABILITY
    templates: Path = DEFAULT_TEMPLATES
    user_fields: list[str] = dc_field(default_factory=list)
    min_jaccard: float = 0.0
    decay: float = 0.9
    highcard_threshold: int = 12
    color_card_limit: int = 12
    max_charts: int = 5
    max_views_per_component: int = 10
    seed: int = 0
    out_dir: Path = Path("out")

    def validate(self) -> None:
        # an empty manifest is legal: it yields an empty graph and no views
        for entry in self.datasets:
            if entry.dtype not in DATA_TYPES:
                raise ConfigError(f"dataset {entry.id!r}: unknown dtype {entry.dtype!r}")
            if not entry.path.exists():
                raise ConfigError(f"dataset {entry.id!r}: file not found: {entry.path}")
            if entry.associated is not None and not entry.associated.exists():
                raise ConfigError(f"dataset {entry.id!r}: file not found: {entry.associated}")
        for label, path in (
            ("design_space", self.design_space),
            ("type_encodings", self.type_encodings),
            ("viability_matrix", self.viability_matrix),
            ("templates", self.templates),
        ):
            if not Path(path).exists():
                raise ConfigError(f"{label} file not found: {path}")
        if not (0 <= self.min_jaccard < 1):
            raise ConfigError(f"min_jaccard must be in [0, 1), got {self.min_jaccard}")
        if not (0 < self.decay <= 1):
            raise ConfigError(f"lambda must be in (0, 1], got {self.decay}")
        for label, value in (
            ("highcard_threshold", self.highcard_threshold),
            ("color_card_limit", self.color_card_limit),
            ("max_charts", self.max_charts),
            ("max_views_per_component", self.max_views_per_component),
        ):
            if value < 1:
                raise ConfigError(f"{label} must be >= 1, got {value}")

    def load_datasets(self) -> list[Dataset]:
        return [
            load_dataset(e.path, e.dtype, e.associated, dataset_id=e.id) for e in self.datasets
        ]

    def canonical(self) -> dict:
        return {
            "datasets": [
                {
                    "id": e.id,
                    "path": str(e.path),
                    "dtype": e.dtype,
                    "associated": str(e.associated) if e.associated else None,
                }
                for e in self.datasets
            ],
            "design_space": str(self.design_space),
            "type_encodings": str(self.type_encodings),
            "viability_matrix": str(self.viability_matrix),
            "templates": str(self.templates),
            "user_fields": list(self.user_fields),
            "min_jaccard": self.min_jaccard,
            "lambda": self.decay,
            "highcard_threshold": self.highcard_threshold,
            "color_card_limit": self.color_card_limit,
            "max_charts": self.max_charts,
            "max_views_per_component": self.max_views_per_component,
            "seed": self.seed,
        }

    def config_hash(self) -> str:
        blob = json.dumps(self.canonical(), sort_keys=True).encode("utf-8")
        return hashlib.sha256(blob).hexdigest()


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc.msg}")
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must be a JSON object")
    base = path.parent

    def resolve(value: str | None) -> Path | None:
        if value is None:
            return None
        p = Path(value)
        return p if p.is_absolute() else base / p

    entries = []
    for i, item in enumerate(doc.get("datasets", [])):
        if "path" not in item or "dtype" not in item:
            raise ConfigError(f"dataset entry {i} needs path and dtype")
        data_path = resolve(item["path"])
        entries.append(
            ManifestEntry(
                id=item.get("id") or Path(item["path"]).stem,
                path=data_path,
                dtype=item["dtype"],
                associated=resolve(item.get("associated")),
            )
        )
    ids = [e.id for e in entries]
    if len(set(ids)) != len(ids):
        raise ConfigError("duplicate dataset ids in manifest")

    config = RunConfig(datasets=entries)
    for key in ("design_space", "type_encodings", "viability_matrix", "templates"):
        if doc.get(key) is not None:
            setattr(config, key, resolve(doc[key]))
    if doc.get("out_dir") is not None:
        config.out_dir = resolve(doc["out_dir"])
    config.user_fields = list(doc.get("user_fields", []))
    for key, attr in (
        ("min_jaccard", "min_jaccard"),
        ("lambda", "decay"),
        ("highcard_threshold", "highcard_threshold"),
        ("color_card_limit", "color_card_limit"),
        ("max_charts", "max_charts"),
        ("max_views_per_component", "max_views_per_component"),
        ("seed", "seed"),
    ):
        if doc.get(key) is not None:
            setattr(config, attr, doc[key])
    return config
