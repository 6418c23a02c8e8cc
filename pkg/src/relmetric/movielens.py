"""MovieLens-100k loader mapping the native file formats onto the
users/ratings/movies schema.

Two tasks are supported. "genre" classifies movies: the label is the
globally most popular genre among each movie's flagged genres, the
features are the release year plus the 19 genre flags. "age" classifies
users: the label is the age segmented into 5 equal-frequency bins, the
features are the gender and occupation one-hot encodings. The rating is
the single numeric association attribute in both tasks; only the
reference direction flips (users rate movies; for the age task the movies
act as the parents of their raters).
"""

from __future__ import annotations

import os

import numpy as np

from .errors import MissingFileError, UnknownColumnError
from .schema import AssociationTable, EntityTable, RelationalSchema

__all__ = ["GENRES", "load_movielens", "quantile_bins"]

GENRES = (
    "unknown", "Action", "Adventure", "Animation", "Children's", "Comedy",
    "Crime", "Documentary", "Drama", "Fantasy", "Film-Noir", "Horror",
    "Musical", "Mystery", "Romance", "Sci-Fi", "Thriller", "War", "Western",
)


def quantile_bins(values, n_bins: int = 5) -> np.ndarray:
    """Equal-frequency binning: codes 0..n_bins-1 by quantile edges."""
    values = np.asarray(values, dtype=np.float64)
    edges = np.quantile(values, np.linspace(0, 1, n_bins + 1)[1:-1])
    return np.searchsorted(edges, values, side="right").astype(np.int64)


def _read_lines(directory: str, name: str) -> list[str]:
    path = os.path.join(directory, name)
    if not os.path.isfile(path):
        raise MissingFileError(f"MovieLens file not found: {path}")
    with open(path, encoding="latin-1") as fh:
        return [line.rstrip("\n") for line in fh if line.strip()]


def _scale01(col: np.ndarray) -> np.ndarray:
    lo, hi = col.min(), col.max()
    return (col - lo) / (hi - lo) if hi > lo else np.zeros_like(col)


def _load_movies(directory: str) -> EntityTable:
    ids = []
    years = []
    flags = []
    for line in _read_lines(directory, "u.item"):
        fields = line.split("|")
        if len(fields) < 5 + len(GENRES):
            raise UnknownColumnError(
                f"u.item: expected {5 + len(GENRES)} pipe-separated fields, got {len(fields)}"
            )
        ids.append(fields[0])
        date = fields[2]
        # release dates look like 01-Jan-1995; a few rows are empty
        years.append(float(date.rsplit("-", 1)[-1]) if date else np.nan)
        flags.append([float(v) for v in fields[5 : 5 + len(GENRES)]])
    years_arr = np.array(years)
    missing = ~np.isfinite(years_arr)
    if missing.any():
        years_arr[missing] = np.median(years_arr[~missing])
    flags_arr = np.array(flags)

    popularity = flags_arr.sum(axis=0)
    labels = np.empty(len(ids), dtype=np.int64)
    for r in range(len(ids)):
        flagged = np.flatnonzero(flags_arr[r])
        if len(flagged) == 0:
            labels[r] = 0  # the "unknown" genre
        else:
            labels[r] = int(flagged[np.argmax(popularity[flagged])])

    features = np.hstack([_scale01(years_arr)[:, None], flags_arr])
    return EntityTable(
        name="movies",
        ids=tuple(ids),
        features=features,
        feature_names=("release_year", *GENRES),
        labels=labels,
        label_values=GENRES,
    )


def _load_users(directory: str) -> EntityTable:
    ids = []
    ages = []
    genders = []
    occupations = []
    for line in _read_lines(directory, "u.user"):
        fields = line.split("|")
        if len(fields) < 4:
            raise UnknownColumnError(
                f"u.user: expected 5 pipe-separated fields, got {len(fields)}"
            )
        ids.append(fields[0])
        ages.append(float(fields[1]))
        genders.append(fields[2])
        occupations.append(fields[3])

    def onehot(values):
        levels = sorted(set(values))
        out = np.zeros((len(values), len(levels)))
        pos = {v: k for k, v in enumerate(levels)}
        for r, v in enumerate(values):
            out[r, pos[v]] = 1.0
        return out, levels

    g_mat, g_levels = onehot(genders)
    o_mat, o_levels = onehot(occupations)
    features = np.hstack([g_mat, o_mat])
    labels = quantile_bins(np.array(ages), n_bins=5)
    return EntityTable(
        name="users",
        ids=tuple(ids),
        features=features,
        feature_names=(
            *(f"gender={v}" for v in g_levels),
            *(f"occupation={v}" for v in o_levels),
        ),
        labels=labels,
        label_values=tuple(f"age_bin_{k}" for k in range(5)),
    )


def load_movielens(directory: str, task: str = "genre") -> RelationalSchema:
    """Load MovieLens-100k from its native files (u.item, u.user, u.data).

    task "genre": movies are the classified children, users the parents.
    task "age": users are the classified children, movies the parents.
    """
    if task not in ("genre", "age"):
        raise ValueError(f"unknown MovieLens task {task!r} (expected 'genre' or 'age')")
    movies = _load_movies(directory)
    users = _load_users(directory)

    user_ids = []
    movie_ids = []
    ratings = []
    for line in _read_lines(directory, "u.data"):
        fields = line.split("\t")
        if len(fields) < 3:
            raise UnknownColumnError(
                f"u.data: expected 4 tab-separated fields, got {len(fields)}"
            )
        user_ids.append(fields[0])
        movie_ids.append(fields[1])
        ratings.append([float(fields[2])])
    ratings_arr = np.array(ratings, dtype=np.float64)

    if task == "genre":
        assoc = AssociationTable(
            parent_table="users",
            child_table="movies",
            parent_ids=tuple(user_ids),
            child_ids=tuple(movie_ids),
            numeric=ratings_arr,
            categorical=tuple(() for _ in user_ids),
            numeric_attrs=("rating",),
        )
    else:
        assoc = AssociationTable(
            parent_table="movies",
            child_table="users",
            parent_ids=tuple(movie_ids),
            child_ids=tuple(user_ids),
            numeric=ratings_arr,
            categorical=tuple(() for _ in user_ids),
            numeric_attrs=("rating",),
        )
    return RelationalSchema(
        entities={"movies": movies, "users": users}, association=assoc
    ).normalized()
