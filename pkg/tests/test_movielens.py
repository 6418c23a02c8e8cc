import numpy as np
import pytest

from relmetric.errors import MissingFileError, UnknownColumnError
from relmetric.movielens import GENRES, load_movielens, quantile_bins


def test_quantile_bins_balanced():
    values = np.arange(100)
    codes = quantile_bins(values, n_bins=5)
    assert np.bincount(codes).tolist() == [20, 20, 20, 20, 20]
    assert codes.min() == 0 and codes.max() == 4


def test_quantile_bins_monotone():
    values = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
    codes = quantile_bins(values, n_bins=2)
    order = np.argsort(values)
    assert np.all(np.diff(codes[order]) >= 0)


def test_genre_task_schema_shape(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="genre")
    movies = schema.child_table
    users = schema.parent_table
    assert movies.name == "movies"
    assert users.name == "users"
    assert movies.dim == 1 + len(GENRES)
    assert movies.feature_names[0] == "release_year"
    assert movies.label_values == GENRES


def test_genre_label_prefers_globally_popular_flagged_genre(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="genre")
    movies = schema.entities["movies"]
    label_of = dict(zip(movies.ids, movies.labels.tolist()))
    # movie 1 flags genres 1 and 2; genre 2 is flagged by two movies while
    # genre 1 by one, so the more popular genre 2 wins
    assert label_of["1"] == 2
    assert label_of["2"] == 2
    assert label_of["3"] == 4
    # no flags at all falls back to the leading "unknown" genre
    assert label_of["4"] == 0
    assert label_of["5"] == 3


def test_year_scaled_and_missing_imputed_with_median(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="genre")
    movies = schema.entities["movies"]
    years = movies.features[:, 0]
    # years 1990, 1994, 1998, 2000 and one missing -> median 1996;
    # scaled to [0, 1] over the 1990..2000 span
    assert years.tolist() == [0.0, 0.4, 0.8, 1.0, 0.6]


def test_genre_flags_copied_into_features(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="genre")
    movies = schema.entities["movies"]
    row = movies.features[movies.index_of("1")]
    assert row[1 + 1] == 1.0 and row[1 + 2] == 1.0
    assert row[1:].sum() == 2.0


def test_ratings_normalized_to_unit_interval(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="genre")
    got = sorted(set(schema.association.numeric[:, 0].tolist()))
    # ratings 1..5 map onto {0, .25, .5, .75, 1}
    assert got == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert schema.association.numeric_attrs == ("rating",)


def test_age_task_flips_reference_direction(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="age")
    assert schema.child_table.name == "users"
    assert schema.parent_table.name == "movies"
    assert schema.association.parent_table == "movies"


def test_age_labels_are_quintiles(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="age")
    users = schema.entities["users"]
    # ages 20,25,30,35,40,45: quantile edges 25,30,35,40 (right-closed)
    assert users.labels.tolist() == [0, 1, 2, 3, 4, 4]
    assert users.label_values == tuple(f"age_bin_{k}" for k in range(5))


def test_user_features_are_onehot_blocks(movielens_dir):
    schema = load_movielens(str(movielens_dir), task="age")
    users = schema.entities["users"]
    # 2 gender levels + 6 distinct occupations
    assert users.dim == 8
    assert users.feature_names[0] == "gender=F"
    assert np.all(users.features[:, :2].sum(axis=1) == 1.0)
    assert np.all(users.features[:, 2:].sum(axis=1) == 1.0)


def test_unknown_task_rejected(movielens_dir):
    with pytest.raises(ValueError):
        load_movielens(str(movielens_dir), task="ratings")


def test_missing_file_rejected(tmp_path):
    with pytest.raises(MissingFileError):
        load_movielens(str(tmp_path), task="genre")


def test_short_item_line_rejected(movielens_dir, tmp_path):
    for name in ("u.user", "u.data"):
        (tmp_path / name).write_text((movielens_dir / name).read_text())
    (tmp_path / "u.item").write_text("1|Alpha|01-Jan-1990|x\n", encoding="latin-1")
    with pytest.raises(UnknownColumnError):
        load_movielens(str(tmp_path), task="genre")
