import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from taskrisk.corpus import (
    AttributeCatalog,
    AttributeObservation,
    CatalogEntry,
    OccupationMatrix,
    build_matrix,
    parse_attribute_file,
    parse_catalog_file,
    parse_employment_file,
    standardize,
)
from taskrisk.errors import (
    DegenerateColumnError,
    DuplicateKeyError,
    EmptyCorpusError,
    InputFormatError,
    InputValidationError,
    ParameterError,
)


def catalog(*ids):
    return AttributeCatalog(tuple(CatalogEntry(a, "bottleneck", a) for a in ids))


class TestParseAttributes:
    def test_basic_row(self):
        obs = parse_attribute_file(
            io.StringIO("soc_code,attribute_id,importance\n23-1011.00, 2.A.1.d (Speaking), 70\n")
        )
        assert obs == [AttributeObservation("23-1011.00", "2.A.1.d (Speaking)", 70.0)]

    def test_header_only_gives_empty_list(self):
        assert parse_attribute_file(io.StringIO("soc_code,attribute_id,importance\n")) == []

    def test_out_of_range_importance_carries_line_number(self):
        with pytest.raises(InputValidationError) as exc:
            parse_attribute_file(
                io.StringIO(
                    "soc_code,attribute_id,importance\n"
                    "23-1011.00,speaking,70\n"
                    "23-1012.00,speaking,105\n"
                )
            )
        assert exc.value.problems[0][0] == 3

    def test_bad_soc_code_rejected(self):
        with pytest.raises(InputValidationError):
            parse_attribute_file(
                io.StringIO("soc_code,attribute_id,importance\nnope,speaking,10\n")
            )

    def test_malformed_header(self):
        with pytest.raises(InputFormatError):
            parse_attribute_file(io.StringIO("soc,attr,imp\n1,2,3\n"))

    def test_empty_file(self):
        with pytest.raises(InputFormatError):
            parse_attribute_file(io.StringIO(""))

    def test_tab_delimiter_sniffed(self):
        obs = parse_attribute_file(
            io.StringIO("soc_code\tattribute_id\timportance\n11-1011\tnegotiation\t55\n")
        )
        assert obs[0].importance == 55.0

    def test_six_digit_soc_accepted(self):
        obs = parse_attribute_file(
            io.StringIO("soc_code,attribute_id,importance\n11-1011,negotiation,55\n")
        )
        assert obs[0].soc_code == "11-1011"


class TestParseEmployment:
    def test_two_years(self):
        series = parse_employment_file(
            io.StringIO("soc_code,year,employment\n11-1011,2010,100\n11-1011,2011,101\n")
        )
        assert series.records["11-1011"] == {2010: 100.0, 2011: 101.0}

    def test_nine_year_series(self):
        rows = "\n".join(f"11-1011,{y},{100 + y - 2010}" for y in range(2010, 2019))
        series = parse_employment_file(io.StringIO("soc_code,year,employment\n" + rows))
        assert len(series.records["11-1011"]) == 9

    def test_duplicate_year_conflict(self):
        with pytest.raises(DuplicateKeyError):
            parse_employment_file(
                io.StringIO("soc_code,year,employment\n11-1011,2010,100\n11-1011,2010,90\n")
            )

    def test_negative_headcount(self):
        with pytest.raises(InputValidationError):
            parse_employment_file(io.StringIO("soc_code,year,employment\n11-1011,2010,-5\n"))


class TestParseCatalog:
    def test_categories(self):
        cat = parse_catalog_file(
            io.StringIO(
                "attribute_id,category,label\n"
                "negotiation,Bottleneck,Negotiation\n"
                "contaminants,hazard,Exposed to Contaminants\n"
                "dexterity,routine,Finger Dexterity\n"
            )
        )
        assert cat.category_counts() == {"bottleneck": 1, "hazard": 1, "routine": 1}

    def test_unknown_category(self):
        with pytest.raises(InputValidationError):
            parse_catalog_file(io.StringIO("attribute_id,category,label\na,weird,A\n"))

    def test_duplicate_attribute(self):
        with pytest.raises(DuplicateKeyError):
            parse_catalog_file(
                io.StringIO("attribute_id,category,label\na,hazard,A\na,routine,B\n")
            )


def obs_grid(socs, attrs, value=50.0):
    return [AttributeObservation(s, a, value) for s in socs for a in attrs]


class TestBuildMatrix:
    socs = [f"11-{1000 + i:04d}.00" for i in range(5)]

    def test_incomplete_occupation_dropped_and_reported(self):
        observations = obs_grid(self.socs, ["a", "b"])
        observations = [
            o for o in observations if not (o.soc_code == self.socs[2] and o.attribute_id == "b")
        ]
        matrix, dropped = build_matrix(observations, catalog("a", "b"))
        assert matrix.shape == (4, 2)
        assert [d.soc_code for d in dropped] == [self.socs[2]]
        assert dropped[0].missing_attribute_ids == ("b",)

    def test_non_catalog_attributes_ignored(self):
        observations = obs_grid(self.socs, ["a", "b", "zz"])
        matrix, dropped = build_matrix(observations, catalog("a", "b"))
        assert matrix.attribute_ids == ["a", "b"] and not dropped

    def test_occupation_with_only_foreign_attributes_is_dropped(self):
        observations = obs_grid(self.socs, ["a"]) + [
            AttributeObservation("55-5555.00", "zz", 10.0)
        ]
        matrix, dropped = build_matrix(observations, catalog("a"))
        assert matrix.shape == (5, 1)
        assert [d.soc_code for d in dropped] == ["55-5555.00"]
        assert dropped[0].missing_attribute_ids == ("a",)

    def test_zero_survivors(self):
        observations = obs_grid(self.socs, ["a"])
        with pytest.raises(EmptyCorpusError):
            build_matrix(observations, catalog("a", "b"))

    def test_duplicate_observation_conflict(self):
        observations = obs_grid(self.socs, ["a"]) * 2
        with pytest.raises(DuplicateKeyError):
            build_matrix(observations, catalog("a"))

    def test_empty_catalog(self):
        with pytest.raises(ParameterError):
            build_matrix(obs_grid(self.socs, ["a"]), AttributeCatalog(()))

    def test_rows_plus_drops_cover_all_occupations(self):
        rng = np.random.default_rng(0)
        observations = [
            AttributeObservation(s, a, float(rng.uniform(0, 100)))
            for s in self.socs
            for a in ["a", "b", "c"]
            if rng.uniform() > 0.2
        ]
        seen = {o.soc_code for o in observations}
        matrix, dropped = build_matrix(observations, catalog("a", "b", "c"))
        assert len(matrix.occupation_ids) + len(dropped) == len(seen)


class TestStandardize:
    def make(self, values):
        values = np.asarray(values, dtype=float)
        socs = [f"11-{1000 + i:04d}.00" for i in range(values.shape[0])]
        attrs = [f"a{j}" for j in range(values.shape[1])]
        return OccupationMatrix(socs, attrs, values)

    def test_simple_column(self):
        z = standardize(self.make([[1.0], [2.0], [3.0]]))
        assert np.allclose(z.values[:, 0], [-1.0, 0.0, 1.0])
        assert z.standardized

    def test_constant_column_named(self):
        with pytest.raises(DegenerateColumnError, match="a1"):
            standardize(self.make([[1.0, 5.0], [2.0, 5.0], [3.0, 5.0]]))

    def test_random_fixture_mean_zero_sd_one(self):
        rng = np.random.default_rng(1)
        z = standardize(self.make(rng.uniform(0, 100, (4, 2))))
        assert np.max(np.abs(z.values.mean(axis=0))) < 1e-9
        assert np.max(np.abs(z.values.std(axis=0, ddof=1) - 1.0)) < 1e-9

    def test_already_standardized_rejected(self):
        z = standardize(self.make([[1.0], [2.0], [3.0]]))
        with pytest.raises(ParameterError):
            standardize(z)

    def test_too_few_rows(self):
        with pytest.raises(ParameterError):
            standardize(self.make([[1.0], [2.0]]))

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.integers(3, 12), st.integers(1, 6))
    def test_idempotent_on_standardized_data(self, seed, n, p):
        rng = np.random.default_rng(seed)
        values = rng.uniform(0, 100, (n, p))
        if np.any(values.std(axis=0, ddof=1) == 0):
            return
        z = standardize(self.make(values))
        again = standardize(
            OccupationMatrix(z.occupation_ids, z.attribute_ids, z.values.copy())
        )
        assert np.max(np.abs(again.values - z.values)) < 1e-9
