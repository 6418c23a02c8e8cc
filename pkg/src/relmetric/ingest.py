"""Manifest-driven loading of entity and association tables from
delimiter-separated files, plus the inverse export used by the synthetic
data generator.

Manifest format (JSON)::

    {
      "delimiter": ",",
      "entities": [
        {"name": "users", "file": "users.csv", "key": "user_id",
         "numeric_features": ["age"],
         "categorical_features": ["gender"],
         "label": "occupation",
         "scale_numeric_features": true}
      ],
      "association": {
        "file": "ratings.csv",
        "parent": "users", "parent_key": "user_id",
        "child": "movies", "child_key": "movie_id",
        "numeric_attrs": ["rating"], "categorical_attrs": []
      }
    }

Categorical entity features are one-hot encoded (one column per distinct
value, named ``col=value``); the label column is mapped to integer codes
in sorted value order. Numeric entity features may be min-max scaled to
[0, 1] at load time (on by default); missing numeric cells are imputed
with the column mean before scaling.
"""

from __future__ import annotations

import csv
import json
import math
import os

import numpy as np

from .errors import MissingFileError, UnknownColumnError
from .schema import AssociationTable, EntityTable, RelationalSchema

__all__ = ["load_schema", "export_schema"]


def _read_rows(path: str, delimiter: str) -> tuple[list[str], list[list[str]]]:
    if not os.path.isfile(path):
        raise MissingFileError(f"data file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        try:
            header = next(reader)
        except StopIteration:
            raise UnknownColumnError(f"{path}: empty file, header row required") from None
        rows = [row for row in reader if row]
    header = [h.strip() for h in header]
    return header, rows


def _column(header: list[str], name: str, path: str) -> int:
    try:
        return header.index(name)
    except ValueError:
        raise UnknownColumnError(
            f"{path}: column {name!r} not found (have {', '.join(header)})"
        ) from None


def _parse_float(cell: str) -> float:
    cell = cell.strip()
    if not cell:
        return math.nan
    try:
        return float(cell)
    except ValueError:
        return math.nan


def _load_entity(decl: dict, base_dir: str, delimiter: str) -> EntityTable:
    path = os.path.join(base_dir, decl["file"])
    header, rows = _read_rows(path, delimiter)
    key_col = _column(header, decl["key"], path)
    numeric = list(decl.get("numeric_features", ()))
    categorical = list(decl.get("categorical_features", ()))
    num_cols = [_column(header, c, path) for c in numeric]
    cat_cols = [_column(header, c, path) for c in categorical]
    label_name = decl.get("label")
    label_col = _column(header, label_name, path) if label_name else None

    ids = tuple(row[key_col].strip() for row in rows)
    blocks: list[np.ndarray] = []
    names: list[str] = []

    if num_cols:
        raw = np.array(
            [[_parse_float(row[c]) for c in num_cols] for row in rows], dtype=np.float64
        ).reshape(len(rows), len(num_cols))
        for m in range(raw.shape[1]):
            col = raw[:, m]
            missing = ~np.isfinite(col)
            if missing.all():
                col[:] = 0.0
            elif missing.any():
                col[missing] = col[~missing].mean()
        if decl.get("scale_numeric_features", True) and len(rows):
            lo, hi = raw.min(axis=0), raw.max(axis=0)
            span = np.where(hi > lo, hi - lo, 1.0)
            raw = (raw - lo) / span
        blocks.append(raw)
        names.extend(numeric)

    for name, c in zip(categorical, cat_cols):
        values = [row[c].strip() for row in rows]
        levels = sorted(set(values))
        onehot = np.zeros((len(rows), len(levels)), dtype=np.float64)
        level_pos = {v: k for k, v in enumerate(levels)}
        for r, v in enumerate(values):
            onehot[r, level_pos[v]] = 1.0
        blocks.append(onehot)
        names.extend(f"{name}={v}" for v in levels)

    if not blocks:
        raise UnknownColumnError(
            f"{path}: entity table {decl['name']!r} declares no feature columns"
        )
    features = np.hstack(blocks)

    labels = None
    label_values: tuple[str, ...] = ()
    if label_col is not None:
        raw_labels = [row[label_col].strip() for row in rows]
        label_values = tuple(sorted(set(raw_labels)))
        code = {v: k for k, v in enumerate(label_values)}
        labels = np.array([code[v] for v in raw_labels], dtype=np.int64)

    return EntityTable(
        name=decl["name"],
        ids=ids,
        features=features,
        feature_names=tuple(names),
        labels=labels,
        label_values=label_values,
    )


def _load_association(decl: dict, base_dir: str, delimiter: str) -> AssociationTable:
    path = os.path.join(base_dir, decl["file"])
    header, rows = _read_rows(path, delimiter)
    p_col = _column(header, decl["parent_key"], path)
    c_col = _column(header, decl["child_key"], path)
    numeric_attrs = tuple(decl.get("numeric_attrs", ()))
    categorical_attrs = tuple(decl.get("categorical_attrs", ()))
    num_cols = [_column(header, a, path) for a in numeric_attrs]
    cat_cols = [_column(header, a, path) for a in categorical_attrs]

    parent_ids = tuple(row[p_col].strip() for row in rows)
    child_ids = tuple(row[c_col].strip() for row in rows)
    numeric = np.array(
        [[_parse_float(row[c]) for c in num_cols] for row in rows], dtype=np.float64
    ).reshape(len(rows), len(num_cols))
    categorical = tuple(
        tuple((row[c].strip() or None) for c in cat_cols) for row in rows
    )
    return AssociationTable(
        parent_table=decl["parent"],
        child_table=decl["child"],
        parent_ids=parent_ids,
        child_ids=child_ids,
        numeric=numeric,
        categorical=categorical,
        numeric_attrs=numeric_attrs,
        categorical_attrs=categorical_attrs,
    )


def load_schema(manifest_path: str) -> RelationalSchema:
    """Load a relational schema from a JSON manifest and its data files.

    Association numerics are min-max normalized into [0, 1] before the
    schema is returned, so downstream link-strength values always see
    unit-interval attributes.
    """
    if not os.path.isfile(manifest_path):
        raise MissingFileError(f"manifest not found: {manifest_path}")
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    base_dir = os.path.dirname(os.path.abspath(manifest_path))
    delimiter = manifest.get("delimiter", ",")
    entities = {}
    for decl in manifest["entities"]:
        table = _load_entity(decl, base_dir, delimiter)
        entities[table.name] = table
    assoc = _load_association(manifest["association"], base_dir, delimiter)
    return RelationalSchema(entities=entities, association=assoc).normalized()


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def export_schema(schema: RelationalSchema, directory: str) -> str:
    """Write a schema back out as manifest + CSV files; returns the manifest path.

    The exported manifest declares every entity feature as a plain numeric
    column with scaling disabled, so ``load_schema(export_schema(s)) ``
    reproduces feature matrices and labels exactly.
    """
    os.makedirs(directory, exist_ok=True)
    entity_decls = []
    for name in sorted(schema.entities):
        table = schema.entities[name]
        fname = f"{name}.csv"
        feat_names = list(table.feature_names) or [
            f"f{k}" for k in range(table.dim)
        ]
        with open(os.path.join(directory, fname), "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            header = ["id", *feat_names]
            if table.labels is not None:
                header.append("label")
            writer.writerow(header)
            for r, key in enumerate(table.ids):
                row = [key, *(_fmt(v) for v in table.features[r])]
                if table.labels is not None:
                    code = int(table.labels[r])
                    row.append(
                        table.label_values[code] if table.label_values else str(code)
                    )
                writer.writerow(row)
        decl = {
            "name": name,
            "file": fname,
            "key": "id",
            "numeric_features": feat_names,
            "scale_numeric_features": False,
        }
        if table.labels is not None:
            decl["label"] = "label"
        entity_decls.append(decl)

    assoc = schema.association
    with open(os.path.join(directory, "association.csv"), "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["parent", "child", *assoc.numeric_attrs, *assoc.categorical_attrs])
        for r in range(assoc.n_rows):
            num = [
                "" if not np.isfinite(v) else _fmt(v) for v in assoc.numeric[r]
            ]
            cat = ["" if v is None else str(v) for v in assoc.categorical[r]]
            writer.writerow([assoc.parent_ids[r], assoc.child_ids[r], *num, *cat])

    manifest = {
        "delimiter": ",",
        "entities": entity_decls,
        "association": {
            "file": "association.csv",
            "parent": assoc.parent_table,
            "parent_key": "parent",
            "child": assoc.child_table,
            "child_key": "child",
            "numeric_attrs": list(assoc.numeric_attrs),
            "categorical_attrs": list(assoc.categorical_attrs),
        },
    }
    manifest_path = os.path.join(directory, "manifest.json")
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return manifest_path
