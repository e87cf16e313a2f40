"""Schema, CSV loading, coding, normalization, and rounding tests."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from utg.errors import DataLoadError, SchemaError
from utg.schema import ColumnSpec, Schema, round_column, round_discrete, validate_rows
from utg.synth import house_schema, make_house_rows, write_house_csv
from utg.tabular import (
    TabularDataset,
    code_rows,
    decode_coded,
    denormalize,
    load_csv,
    normalize,
    save_csv,
)

TABLE_HEADER = (
    "bedrooms,bathrooms,sqft_living,sqft_lot,floors,waterfront,view,condition,grade,"
    "sqft_above,sqft_basement,yr_built,sqft_living15,sqft_lot15"
)


class TestSchema:
    def test_stepped_requires_positive_step(self):
        with pytest.raises(SchemaError):
            ColumnSpec("bathrooms", "stepped")
        with pytest.raises(SchemaError):
            ColumnSpec("bathrooms", "stepped", step=0.0)

    def test_unknown_kind(self):
        with pytest.raises(SchemaError):
            ColumnSpec("x", "ordinal")

    def test_categorical_needs_values(self):
        with pytest.raises(SchemaError):
            ColumnSpec("c", "categorical")
        with pytest.raises(SchemaError):
            ColumnSpec("c", "categorical", allowed_values=())

    def test_duplicate_names_rejected(self):
        with pytest.raises(SchemaError):
            Schema([ColumnSpec("a", "continuous"), ColumnSpec("a", "integer")])

    def test_json_round_trip(self, tmp_path):
        schema = house_schema()
        path = tmp_path / "s.json"
        schema.save(path)
        loaded = Schema.load(path)
        assert loaded.to_obj() == schema.to_obj()

    def test_missing_file(self, tmp_path):
        with pytest.raises(SchemaError):
            Schema.load(tmp_path / "nope.json")

    def test_house_schema_shape(self):
        schema = house_schema()
        assert len(schema) == 14
        byname = {c.name: c for c in schema}
        assert byname["bathrooms"].kind == "stepped" and byname["bathrooms"].step == 0.25
        assert byname["floors"].kind == "stepped" and byname["floors"].step == 0.5
        assert byname["waterfront"].kind == "binary"


class TestRounding:
    def test_bathrooms_snap(self):
        col = ColumnSpec("bathrooms", "stepped", step=0.25)
        assert round_column(6.8, col) == 6.75

    def test_floors_snap(self):
        col = ColumnSpec("floors", "stepped", step=0.5)
        assert round_column(3.47, col) == 3.5

    def test_integer_already_integral(self):
        assert round_column(3.0, ColumnSpec("bedrooms", "integer")) == 3.0

    def test_integer_half_away_from_zero(self):
        col = ColumnSpec("n", "integer")
        assert round_column(2.5, col) == 3.0
        assert round_column(-2.5, col) == -3.0
        assert round_column(-0.2, col) == 0.0

    def test_binary_clamps(self):
        col = ColumnSpec("flag", "binary")
        assert round_column(1.7, col) == 1.0
        assert round_column(-0.3, col) == 0.0
        assert round_column(0.49, col) == 0.0

    def test_categorical_snaps_to_nearest(self):
        col = ColumnSpec("c", "categorical", allowed_values=(1.0, 5.0, 10.0))
        assert round_column(6.2, col) == 5.0
        assert round_column(7.5, col) == 5.0  # exact tie -> first allowed value wins
        assert round_column(-3.0, col) == 1.0

    def test_matrix_form_and_kind_conformance(self):
        schema = house_schema()
        rng = np.random.default_rng(0)
        raw = make_house_rows(50, seed=1) + rng.normal(0, 0.3, (50, 14))
        rounded = round_discrete(raw, schema)
        assert validate_rows(rounded, schema) == []

    @given(st.floats(min_value=-1e6, max_value=1e6), st.sampled_from([0.25, 0.5, 2.0, 3.0]))
    @settings(max_examples=200, deadline=None)
    def test_idempotent_and_on_grid(self, x, step):
        col = ColumnSpec("s", "stepped", step=step)
        once = round_column(x, col)
        assert round_column(once, col) == once
        assert abs(once / step - round(once / step)) < 1e-9


class TestLoadCsv:
    def test_single_row(self, tmp_path):
        path = tmp_path / "one.csv"
        path.write_text("a,b\n1.5,2\n")
        schema = Schema([ColumnSpec("a", "continuous"), ColumnSpec("b", "integer")])
        ds = load_csv(path, schema)
        assert ds.n_rows == 1
        assert ds.rows[0].tolist() == [1.5, 2.0]

    def test_table_style_row(self, tmp_path):
        path = tmp_path / "houses.csv"
        path.write_text(TABLE_HEADER + "\n3,6.75,8468,51257,3.5,1,4,5,13,5673,2783,1995,2986,32233\n")
        ds = load_csv(path, house_schema())
        assert ds.rows[0][1] == 6.75
        assert ds.rows[0][4] == 3.5

    def test_unparseable_cell_names_coordinates(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text(TABLE_HEADER + "\nabc,6.75,8468,51257,3.5,1,4,5,13,5673,2783,1995,2986,32233\n")
        with pytest.raises(DataLoadError) as err:
            load_csv(path, house_schema())
        assert err.value.row == 1
        assert err.value.column == "bedrooms"

    def test_kind_violation_names_coordinates(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("a,b\n1.0,2\n1.0,2.5\n")
        schema = Schema([ColumnSpec("a", "continuous"), ColumnSpec("b", "integer")])
        with pytest.raises(DataLoadError) as err:
            load_csv(path, schema)
        assert err.value.row == 2
        assert err.value.column == "b"

    def test_missing_column(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("a\n1.0\n")
        schema = Schema([ColumnSpec("a", "continuous"), ColumnSpec("b", "integer")])
        with pytest.raises(DataLoadError, match="missing column 'b'"):
            load_csv(path, schema)

    def test_constant_column_rejected(self, tmp_path):
        path = tmp_path / "const.csv"
        path.write_text("a,b\n1.0,2\n1.0,3\n")
        schema = Schema([ColumnSpec("a", "continuous"), ColumnSpec("b", "integer")])
        with pytest.raises(DataLoadError, match="constant column"):
            load_csv(path, schema)

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataLoadError, match="not found"):
            load_csv(tmp_path / "none.csv", house_schema())

    def test_save_load_round_trip(self, tmp_path):
        path = tmp_path / "houses.csv"
        write_house_csv(path, n=40, seed=9)
        ds = load_csv(path, house_schema())
        assert np.allclose(ds.rows, make_house_rows(40, seed=9))


class TestNormalization:
    def test_two_point_column(self):
        schema = Schema([ColumnSpec("a", "continuous")])
        ds = TabularDataset(schema, [[2.0], [4.0]])
        z = normalize(ds)
        assert z.tolist() == [[-1.0], [1.0]]

    def test_coded_columns_standardized(self):
        ds = TabularDataset(house_schema(), make_house_rows(300, seed=4))
        z = normalize(ds)
        assert np.abs(z.mean(axis=0)).max() < 1e-9
        assert np.abs(z.std(axis=0) - 1.0).max() < 1e-9

    def test_round_trip_identity(self):
        ds = TabularDataset(house_schema(), make_house_rows(200, seed=5))
        z = normalize(ds)
        back = denormalize(z, ds.norm_stats, ds.schema)
        assert np.abs(back - ds.rows).max() < 1e-9

    def test_idempotence_on_stats(self):
        rng = np.random.default_rng(6)
        schema = Schema([ColumnSpec("a", "continuous"), ColumnSpec("b", "continuous")])
        raw = rng.normal(0, 1, (500, 2))
        raw = (raw - raw.mean(0)) / raw.std(0)
        ds = TabularDataset(schema, raw)
        assert np.abs(normalize(ds) - raw).max() < 1e-9

    def test_single_row_round_trips(self):
        ds = TabularDataset(house_schema(), make_house_rows(1, seed=7))
        back = denormalize(normalize(ds), ds.norm_stats, ds.schema)
        assert np.abs(back - ds.rows).max() < 1e-9


class TestCategoricalCoding:
    schema = Schema(
        [
            ColumnSpec("size", "continuous"),
            ColumnSpec("zone", "categorical", allowed_values=(1.0, 2.0, 5.0)),
        ]
    )

    def test_one_hot_expansion(self):
        coded = code_rows([[3.0, 5.0]], self.schema)
        assert coded.tolist() == [[3.0, 0.0, 0.0, 1.0]]

    def test_argmax_decode(self):
        raw = decode_coded([[3.0, 0.2, 0.9, 0.4]], self.schema)
        assert raw.tolist() == [[3.0, 2.0]]

    def test_full_round_trip_through_normalization(self):
        rng = np.random.default_rng(8)
        rows = np.column_stack([rng.normal(0, 1, 60), rng.choice([1.0, 2.0, 5.0], 60)])
        ds = TabularDataset(self.schema, rows)
        back = denormalize(normalize(ds), ds.norm_stats, ds.schema)
        assert np.abs(back - rows).max() < 1e-9

    def test_unseen_category_is_constant_coded_column(self):
        rows = np.column_stack([np.arange(5, dtype=float), np.array([1.0, 2.0, 1.0, 2.0, 1.0])])
        with pytest.raises(DataLoadError, match="constant column"):
            TabularDataset(self.schema, rows)
