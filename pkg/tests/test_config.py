"""
Unit tests for key/value configuration parsing.
"""

import os
import tempfile
from fractions import Fraction

import pytest

from renyi_dimensions.config import (
    EstimatorSettings,
    MeasureSpec,
    apply_overrides,
    dump_config,
    parse_config,
)
from renyi_dimensions.exceptions import ConfigError


class TestParseConfig:
    """Test the flat key/value format."""

    def test_parse_text(self):
        entries = parse_config("# measure\nkind = constant\n\nq=2   # exponent\na = 1/2\n")
        assert entries == {"kind": "constant", "q": "2", "a": "1/2"}

    def test_parse_file(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "m.cfg")
            with open(path, "w", encoding="utf-8") as f:
                f.write("kind = block48\nq = 2\ndepth = 100\n")
            assert parse_config(path)["depth"] == "100"

    def test_missing_equals(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config("kind = constant\njust words\n")
        assert excinfo.value.line == 2

    def test_duplicate_key(self):
        with pytest.raises(ConfigError) as excinfo:
            parse_config("q = 2\nq = 3\n")
        assert excinfo.value.key == "q"
        assert "line 2" in str(excinfo.value)

    def test_empty_key(self):
        with pytest.raises(ConfigError):
            parse_config(" = 3\n")

    def test_dump_is_sorted_and_parses_back(self):
        text = dump_config({"q": 2.0, "kind": "explicit", "values": [Fraction(1, 2), 0.25]})
        assert text.splitlines()[0].startswith("kind")
        assert parse_config(text)["values"] == "1/2, 0.25"

    def test_overrides(self):
        merged = apply_overrides({"q": "2"}, ["q=3", "depth = 10"])
        assert merged == {"q": "3", "depth": "10"}
        with pytest.raises(ConfigError):
            apply_overrides({}, ["depth"])


class TestMeasureSpec:
    """Test measure descriptors."""

    def test_constant_keeps_fractions_exact(self):
        spec = MeasureSpec.from_entries({"kind": "constant", "q": "2", "depth": "8", "a": "1/2"})
        assert spec.a == Fraction(1, 2)
        assert spec.q == 2.0
        assert spec.profile().value_at(3) == Fraction(1, 2)

    def test_geometric_blocks_defaults(self):
        spec = MeasureSpec.from_entries({"kind": "geometric-blocks", "q": "2", "depth": "64",
                                         "ratio": "2"})
        assert spec.k_seed == 1
        assert spec.profile().block_starts[:3] == (1, 2, 4)

    def test_geometric_blocks_explicit_list(self):
        spec = MeasureSpec.from_entries({"kind": "geometric-blocks", "q": "0.5", "depth": "30",
                                         "k_list": "2, 5, 15"})
        assert spec.k_list == (2, 5, 15)
        assert spec.ratio is None
        assert spec.build().depth == 30

    def test_explicit_values(self):
        spec = MeasureSpec.from_entries({"kind": "explicit", "q": "3", "depth": "3",
                                         "values": "0, 1/3, 0.75"})
        assert spec.values == (Fraction(0), Fraction(1, 3), 0.75)

    def test_long_kind_spellings(self):
        spec = MeasureSpec.from_entries({"kind": "block-48", "q": "2", "depth": "48"})
        assert spec.kind == "block48"
        spec = MeasureSpec.from_entries({"kind": "explicit-list", "q": "2", "depth": "2",
                                         "values": "1/2, 1"})
        assert spec.kind == "explicit"
        assert spec.profile().value_at(2) == 1

    def test_from_file_applies_overrides(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "m.cfg")
            with open(path, "w", encoding="utf-8") as f:
                f.write("kind = constant\nq = 2\ndepth = 8\na = 1/2\n")
            spec = MeasureSpec.from_file(path, ["depth=4", "a = 1/4"])
        assert spec.depth == 4
        assert spec.a == Fraction(1, 4)

    def test_unknown_kind(self):
        with pytest.raises(ConfigError):
            MeasureSpec.from_entries({"kind": "cantor", "q": "2", "depth": "8"})

    def test_missing_and_malformed_values(self):
        with pytest.raises(ConfigError) as excinfo:
            MeasureSpec.from_entries({"kind": "block48", "depth": "8"})
        assert excinfo.value.key == "q"
        with pytest.raises(ConfigError):
            MeasureSpec.from_entries({"kind": "block48", "q": "two", "depth": "8"})
        with pytest.raises(ConfigError):
            MeasureSpec.from_entries({"kind": "block48", "q": "2", "depth": "8.5"})
        with pytest.raises(ConfigError):
            MeasureSpec.from_entries({"kind": "explicit", "q": "2", "depth": "2",
                                      "values": "0.5, x"})

    def test_out_of_range_profile_value(self):
        spec = MeasureSpec.from_entries({"kind": "constant", "q": "2", "depth": "8", "a": "3/2"})
        with pytest.raises(ConfigError):
            spec.profile()

    def test_unknown_key_warns(self, caplog):
        MeasureSpec.from_entries({"kind": "block48", "q": "2", "depth": "8", "colour": "red"})
        assert "colour" in caplog.text

    def test_entries_round_trip(self):
        spec = MeasureSpec.from_entries({"kind": "geometric-blocks", "q": "2", "depth": "64",
                                         "ratio": "1.5", "k_seed": "3"})
        again = MeasureSpec.from_entries(parse_config(dump_config(spec.to_entries())))
        assert again == spec


class TestEstimatorSettings:
    """Test estimator settings."""

    def test_defaults(self):
        settings = EstimatorSettings()
        assert settings.tail_fraction == 0.5
        assert settings.matuszewska_windows[-1] == 1 / 8

    def test_from_entries(self):
        settings = EstimatorSettings.from_entries({
            "tail_fraction": "0.8",
            "tail_terms": "7",
            "matuszewska_windows": "1/32, 1/4",
            "kind": "block48",
        })
        assert settings.tail_fraction == 0.8
        assert settings.tail_terms == 7
        assert settings.matuszewska_windows == (1 / 32, 1 / 4)

    def test_bad_setting(self):
        with pytest.raises(ConfigError):
            EstimatorSettings.from_entries({"tail_terms": "many"})

    def test_unknown_setting_warns(self, caplog):
        EstimatorSettings.from_entries({"smoothing": "1"})
        assert "smoothing" in caplog.text
