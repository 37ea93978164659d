"""Load heterogeneous data files into normalized datasets and explode their
attribute fields.

Supported inputs: CSV tables, Newick trees, FASTA sequence sets, GeoJSON
polygon collections, CSV edge lists, and raster images with a sidecar table.
Each dataset yields one Field per attribute (column, tip label, sequence id,
feature property, node id, or sidecar column) carrying kind and cardinality
metadata used for linkage and slot assignment downstream.
"""

from __future__ import annotations

import csv
import io
import json
import re
from dataclasses import dataclass, field as dc_field
from pathlib import Path

from .errors import AllMissing, ConfigError, DuplicateDatasetId, KeyMismatch, ParseError

MISSING_MARKERS = {"", "na", "nan", "null"}

# Full-column agreement: one non-numeric token makes the field non-numeric.
_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")

SAMPLE_VALUES = 5

TABULAR = "tabular"
TREE = "tree"
GENOMIC = "genomic"
SPATIAL = "spatial"
NETWORK = "network"
IMAGE = "image"

DATA_TYPES = (TABULAR, TREE, GENOMIC, SPATIAL, NETWORK, IMAGE)

# Attachable metadata only makes sense where the primary payload has row ids.
_ASSOCIATED_OK = {TREE, GENOMIC, IMAGE}


def is_missing(value: str) -> bool:
    return value.strip().lower() in MISSING_MARKERS


def looks_numeric(value: str) -> bool:
    return bool(_NUMBER_RE.match(value.strip()))


@dataclass(frozen=True)
class Table:
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def column(self, name: str) -> list[str]:
        idx = self.columns.index(name)
        return [row[idx] for row in self.rows]


@dataclass
class TreeNode:
    name: str | None = None
    length: float | None = None
    children: list["TreeNode"] = dc_field(default_factory=list)

    def is_leaf(self) -> bool:
        return not self.children

    def leaves(self) -> list["TreeNode"]:
        if self.is_leaf():
            return [self]
        out: list[TreeNode] = []
        for child in self.children:
            out.extend(child.leaves())
        return out

    def leaf_labels(self) -> list[str]:
        return [leaf.name or "" for leaf in self.leaves()]

    def max_depth(self) -> float:
        if self.is_leaf():
            return self.length or 0.0
        return (self.length or 0.0) + max(c.max_depth() for c in self.children)


@dataclass(frozen=True)
class SequenceSet:
    records: tuple[tuple[str, str], ...]  # (id, sequence)


@dataclass(frozen=True)
class Feature:
    properties: dict
    polygons: tuple  # tuple of polygons; each polygon is a tuple of (lon, lat) ring points


@dataclass(frozen=True)
class FeatureSet:
    features: tuple[Feature, ...]


@dataclass(frozen=True)
class EdgeTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[str, ...], ...]

    def node_ids(self) -> list[str]:
        seen = []
        have = set()
        for row in self.rows:
            for endpoint in row[:2]:
                v = endpoint.strip()
                if v and v not in have:
                    have.add(v)
                    seen.append(v)
        return seen


@dataclass(frozen=True)
class ImageRef:
    path: str


@dataclass
class Dataset:
    id: str
    dtype: str
    payload: object
    associated: Table | None = None
    associated_key: str | None = None  # column of `associated` matching primary ids

    def row_count(self) -> int:
        if self.dtype == TABULAR:
            return len(self.payload.rows)
        if self.dtype == TREE:
            return len(self.payload.leaves())
        if self.dtype == GENOMIC:
            return len(self.payload.records)
        if self.dtype == SPATIAL:
            return len(self.payload.features)
        if self.dtype == NETWORK:
            return len(self.payload.node_ids())
        if self.dtype == IMAGE:
            return len(self.associated.rows)
        raise ValueError(self.dtype)

    def primary_ids(self) -> list[str]:
        """Row identifiers of the primary payload, in payload order."""
        if self.dtype == TREE:
            return self.payload.leaf_labels()
        if self.dtype == GENOMIC:
            return [rec_id for rec_id, _ in self.payload.records]
        if self.dtype == IMAGE:
            return [row[0] for row in self.associated.rows]
        if self.dtype == NETWORK:
            return self.payload.node_ids()
        raise ValueError(f"{self.dtype} datasets have no primary id axis")


@dataclass(frozen=True)
class Field:
    name: str
    source_id: str
    kind: str  # "numeric" | "non-numeric"
    cardinality: int | None
    values: frozenset | None
    row_count: int

    @property
    def qualified_name(self) -> str:
        return f"{self.source_id}.{self.name}"

    @property
    def numeric(self) -> bool:
        return self.kind == "numeric"


@dataclass(frozen=True)
class FieldMetadata:
    entries: tuple[dict, ...]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["field", "source", "kind", "cardinality", "sample_values"])
        for entry in self.entries:
            writer.writerow(
                [
                    entry["field"],
                    entry["source"],
                    entry["kind"],
                    "" if entry["cardinality"] is None else entry["cardinality"],
                    ";".join(entry["sample_values"]),
                ]
            )
        return buf.getvalue()


def classify_field(raw_values: list[str]) -> tuple[str, int | None]:
    """Classify a column as numeric or non-numeric with a distinct-value count.

    Numeric requires every non-missing value to parse as a decimal number.
    """
    present = [v.strip() for v in raw_values if not is_missing(v)]
    if not present:
        raise AllMissing("every value is a missing marker")
    if all(looks_numeric(v) for v in present):
        return "numeric", None
    return "non-numeric", len(set(present))


def _make_field(name: str, source_id: str, raw_values: list[str], row_count: int) -> Field | None:
    """Build a Field, or None when the column is entirely missing."""
    try:
        kind, cardinality = classify_field(raw_values)
    except AllMissing:
        return None
    if kind == "numeric":
        return Field(name, source_id, kind, None, None, row_count)
    values = frozenset(v.strip() for v in raw_values if not is_missing(v))
    return Field(name, source_id, kind, cardinality, values, row_count)


# ---------------------------------------------------------------------------
# Format readers
# ---------------------------------------------------------------------------

def _read_csv_table(path: Path, dtype: str) -> Table:
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(dtype, str(path), f"not UTF-8: {exc}")
    rows = list(csv.reader(io.StringIO(text)))
    rows = [row for row in rows if row]
    if not rows:
        raise ParseError(dtype, str(path), "file is empty")
    header = tuple(col.strip() for col in rows[0])
    if len(rows) == 1:
        raise ParseError(dtype, str(path), "header-only file has zero data rows")
    if len(set(header)) != len(header):
        raise ParseError(dtype, str(path), "duplicate column names in header")
    body = []
    for i, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(dtype, str(path), f"expected {len(header)} cells, got {len(row)}", line=i)
        body.append(tuple(cell for cell in row))
    return Table(header, tuple(body))


def parse_newick(text: str, path: str = "<newick>") -> TreeNode:
    """Parse a single Newick tree: named leaves, optional branch lengths,
    optional quoted labels; [] comment blocks are skipped."""
    pos = 0
    n = len(text)

    def error(detail: str) -> ParseError:
        return ParseError(TREE, path, detail, line=None)

    def skip_ws() -> None:
        nonlocal pos
        while pos < n:
            ch = text[pos]
            if ch in " \t\r\n":
                pos += 1
            elif ch == "[":  # comment block
                end = text.find("]", pos)
                if end == -1:
                    raise error(f"unterminated comment at offset {pos}")
                pos = end + 1
            else:
                break

    def parse_label() -> str:
        nonlocal pos
        skip_ws()
        if pos < n and text[pos] in "'\"":
            quote = text[pos]
            end = text.find(quote, pos + 1)
            if end == -1:
                raise error(f"unterminated quoted label at offset {pos}")
            label = text[pos + 1 : end]
            pos = end + 1
            return label
        start = pos
        while pos < n and text[pos] not in "(),:;[":
            pos += 1
        return text[start:pos].strip()

    def parse_length() -> float | None:
        nonlocal pos
        skip_ws()
        if pos < n and text[pos] == ":":
            pos += 1
            skip_ws()
            start = pos
            while pos < n and text[pos] not in "(),;[":
                pos += 1
            token = text[start:pos].strip()
            try:
                return float(token)
            except ValueError:
                raise error(f"bad branch length {token!r} at offset {start}")
        return None

    def parse_node() -> TreeNode:
        nonlocal pos
        skip_ws()
        node = TreeNode()
        if pos < n and text[pos] == "(":
            pos += 1
            while True:
                node.children.append(parse_node())
                skip_ws()
                if pos >= n:
                    raise error("unterminated clade: missing ')'")
                if text[pos] == ",":
                    pos += 1
                    continue
                if text[pos] == ")":
                    pos += 1
                    break
                raise error(f"unexpected {text[pos]!r} at offset {pos}")
        label = parse_label()
        if label:
            node.name = label
        node.length = parse_length()
        return node

    root = parse_node()
    skip_ws()
    if pos >= n or text[pos] != ";":
        raise error("missing terminating ';'")
    pos += 1
    skip_ws()
    if pos != n:
        raise error(f"trailing content after ';' at offset {pos}")
    leaves = root.leaves()
    if not leaves:
        raise error("tree has no leaves")
    labels = [leaf.name for leaf in leaves]
    if any(not lbl for lbl in labels):
        raise error("tree has unnamed leaves")
    if len(set(labels)) != len(labels):
        raise error("tree has duplicate leaf labels")
    return root


def _read_tree(path: Path) -> TreeNode:
    return parse_newick(path.read_text(encoding="utf-8"), str(path))


def _read_fasta(path: Path) -> SequenceSet:
    records: list[tuple[str, str]] = []
    current_id: str | None = None
    chunks: list[str] = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith(">"):
            if current_id is not None:
                records.append((current_id, "".join(chunks)))
            header = line[1:].strip()
            if not header:
                raise ParseError(GENOMIC, str(path), "empty FASTA header", line=lineno)
            current_id = header.split()[0]
            chunks = []
        else:
            if current_id is None:
                raise ParseError(GENOMIC, str(path), "sequence data before first header", line=lineno)
            chunks.append(line)
    if current_id is not None:
        records.append((current_id, "".join(chunks)))
    if not records:
        raise ParseError(GENOMIC, str(path), "no FASTA records")
    ids = [rec_id for rec_id, _ in records]
    if len(set(ids)) != len(ids):
        raise ParseError(GENOMIC, str(path), "duplicate sequence ids")
    return SequenceSet(tuple(records))


def _ring_points(ring: list) -> tuple:
    pts = []
    for pt in ring:
        if not isinstance(pt, list) or len(pt) < 2:
            raise ValueError("bad ring coordinate")
        pts.append((float(pt[0]), float(pt[1])))
    return tuple(pts)


def _read_geojson(path: Path) -> FeatureSet:
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(SPATIAL, str(path), f"invalid JSON: {exc.msg}", line=exc.lineno)
    if not isinstance(doc, dict) or doc.get("type") != "FeatureCollection":
        raise ParseError(SPATIAL, str(path), "expected a GeoJSON FeatureCollection")
    features = []
    for i, feat in enumerate(doc.get("features", [])):
        geom = feat.get("geometry") or {}
        props = feat.get("properties")
        if not isinstance(props, dict):
            raise ParseError(SPATIAL, str(path), f"feature {i} has no properties object")
        gtype = geom.get("type")
        coords = geom.get("coordinates", [])
        try:
            if gtype == "Polygon":
                polygons = (tuple(_ring_points(ring) for ring in coords),)
            elif gtype == "MultiPolygon":
                polygons = tuple(tuple(_ring_points(ring) for ring in poly) for poly in coords)
            else:
                raise ParseError(SPATIAL, str(path), f"feature {i}: unsupported geometry {gtype!r}")
        except (TypeError, ValueError):
            raise ParseError(SPATIAL, str(path), f"feature {i}: malformed coordinates")
        # keep outer rings only; holes add nothing at recon scale
        outer = tuple(poly[0] for poly in polygons if poly)
        features.append(Feature(dict(props), outer))
    if not features:
        raise ParseError(SPATIAL, str(path), "FeatureCollection has no features")
    return FeatureSet(tuple(features))


def _read_edge_list(path: Path) -> EdgeTable:
    table = _read_csv_table(path, NETWORK)
    if len(table.columns) < 2:
        raise ParseError(NETWORK, str(path), "edge list needs at least source,target columns")
    return EdgeTable(table.columns, table.rows)


def _attach_associated(dataset: Dataset, table: Table) -> None:
    """Attach a metadata table, keyed on the column best matching primary ids."""
    ids = set(dataset.primary_ids())
    best_col = None
    best_overlap = 0
    for col in table.columns:
        overlap = len(ids.intersection(v.strip() for v in table.column(col)))
        if overlap > best_overlap:
            best_overlap = overlap
            best_col = col
    if best_col is None:
        raise KeyMismatch(
            f"associated table for {dataset.id!r} shares no key values with the primary payload"
        )
    dataset.associated = table
    dataset.associated_key = best_col


def load_dataset(
    path: str | Path,
    dtype: str,
    associated_path: str | Path | None = None,
    dataset_id: str | None = None,
) -> Dataset:
    """Load one data source from disk into a normalized Dataset."""
    if dtype not in DATA_TYPES:
        raise ConfigError(f"unknown data type {dtype!r}; expected one of {', '.join(DATA_TYPES)}")
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    if associated_path is not None and dtype not in _ASSOCIATED_OK:
        raise ConfigError(f"associated tables are not supported for {dtype} data")
    ds_id = dataset_id or path.stem

    if dtype == TABULAR:
        dataset = Dataset(ds_id, dtype, _read_csv_table(path, TABULAR))
    elif dtype == TREE:
        dataset = Dataset(ds_id, dtype, _read_tree(path))
    elif dtype == GENOMIC:
        dataset = Dataset(ds_id, dtype, _read_fasta(path))
    elif dtype == SPATIAL:
        dataset = Dataset(ds_id, dtype, _read_geojson(path))
    elif dtype == NETWORK:
        dataset = Dataset(ds_id, dtype, _read_edge_list(path))
    else:  # IMAGE
        if associated_path is None:
            raise ParseError(IMAGE, str(path), "image data requires a sidecar table")
        sidecar = _read_csv_table(Path(associated_path), IMAGE)
        dataset = Dataset(ds_id, dtype, ImageRef(str(path)), associated=sidecar,
                          associated_key=sidecar.columns[0])
        return dataset

    if associated_path is not None:
        assoc_path = Path(associated_path)
        if not assoc_path.exists():
            raise FileNotFoundError(str(assoc_path))
        _attach_associated(dataset, _read_csv_table(assoc_path, TABULAR))
    return dataset


# ---------------------------------------------------------------------------
# Field explosion
# ---------------------------------------------------------------------------

def _dataset_fields(dataset: Dataset) -> list[Field]:
    fields: list[Field] = []
    rows = dataset.row_count()

    def add(name: str, values: list[str], row_count: int) -> None:
        built = _make_field(name, dataset.id, values, row_count)
        if built is not None:
            fields.append(built)

    if dataset.dtype == TABULAR:
        for col in dataset.payload.columns:
            add(col, dataset.payload.column(col), rows)
    elif dataset.dtype == TREE:
        add("tip_label", dataset.payload.leaf_labels(), rows)
    elif dataset.dtype == GENOMIC:
        add("seq_id", [rec_id for rec_id, _ in dataset.payload.records], rows)
    elif dataset.dtype == SPATIAL:
        names: list[str] = []
        for feat in dataset.payload.features:
            for prop in feat.properties:
                if prop not in names:
                    names.append(prop)
        for prop in names:
            values = [str(feat.properties.get(prop, "")) for feat in dataset.payload.features]
            add(prop, values, rows)
    elif dataset.dtype == NETWORK:
        node_ids = dataset.payload.node_ids()
        add("node_id", node_ids, len(node_ids))
        for col in dataset.payload.columns[2:]:
            idx = dataset.payload.columns.index(col)
            add(col, [row[idx] for row in dataset.payload.rows], len(dataset.payload.rows))
    elif dataset.dtype == IMAGE:
        for col in dataset.associated.columns:
            add(col, dataset.associated.column(col), rows)

    if dataset.dtype in (TREE, GENOMIC) and dataset.associated is not None:
        assoc_rows = len(dataset.associated.rows)
        for col in dataset.associated.columns:
            built = _make_field(col, dataset.id, dataset.associated.column(col), assoc_rows)
            if built is not None:
                fields.append(built)
    return fields


def explode_fields(datasets: list[Dataset]) -> tuple[list[Field], FieldMetadata]:
    """Extract one Field per attribute of every dataset.

    Output is sorted by (source_id, name) so results do not depend on load
    order.
    """
    seen_ids = set()
    for dataset in datasets:
        if dataset.id in seen_ids:
            raise DuplicateDatasetId(dataset.id)
        seen_ids.add(dataset.id)

    fields: list[Field] = []
    for dataset in datasets:
        fields.extend(_dataset_fields(dataset))
    fields.sort(key=lambda f: (f.source_id, f.name))

    entries = []
    for f in fields:
        samples = sorted(f.values)[:SAMPLE_VALUES] if f.values is not None else []
        entries.append(
            {
                "field": f.name,
                "source": f.source_id,
                "kind": f.kind,
                "cardinality": f.cardinality,
                "sample_values": samples,
            }
        )
    return fields, FieldMetadata(tuple(entries))
