import pytest

from fairscan import io as fio
from fairscan.errors import InputError
from fairscan.grouping import BinRule, MapRule, PassthroughRule
from fairscan.prep import Interaction


class TestInteractions:
    def test_round_trip(self, tmp_path):
        rows = [Interaction("u1", "i1", 2.0, 100), Interaction("u2", "i9", 1.0, 5)]
        path = tmp_path / "inter.tsv"
        fio.write_interactions(path, rows)
        assert fio.read_interactions(path) == rows

    def test_bad_field_count_reports_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("u1\ti1\t1\t0\nu2\ti2\t1\n")
        with pytest.raises(InputError, match="bad.tsv:2"):
            fio.read_interactions(path)

    def test_bad_number_reports_line(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("u1\ti1\tnotanumber\t0\n")
        with pytest.raises(InputError, match="bad.tsv:1"):
            fio.read_interactions(path)


class TestRuns:
    def test_read_orders_by_rank(self, tmp_path):
        path = tmp_path / "run.tsv"
        path.write_text("u1\tsecond\t2\t0.5\nu1\tfirst\t1\t0.9\n")
        run = fio.read_run(path, "sys")
        assert run.rankings["u1"] == ("first", "second")
        assert run.scores["u1"] == (0.9, 0.5)

    def test_non_contiguous_ranks_rejected(self, tmp_path):
        path = tmp_path / "run.tsv"
        path.write_text("u1\ta\t1\t0.9\nu1\tb\t3\t0.5\n")
        with pytest.raises(InputError, match="contiguous"):
            fio.read_run(path)

    def test_write_read_round_trip(self, tmp_path):
        from fairscan.effectiveness import RankedRun

        run = RankedRun("sys", {"u1": ("a", "b"), "u2": ("c",)})
        path = tmp_path / "run.tsv"
        fio.write_run(path, run)
        again = fio.read_run(path, "sys")
        assert again.rankings == run.rankings


class TestJudgments:
    def test_read(self, tmp_path):
        path = tmp_path / "judg.tsv"
        path.write_text("u1\ta\nu1\tb\nu2\tz\n")
        rel = fio.read_judgments(path)
        assert rel == {"u1": frozenset({"a", "b"}), "u2": frozenset({"z"})}


class TestFreeTextRuns:
    def test_read_orders_by_position(self, tmp_path):
        path = tmp_path / "ft.tsv"
        path.write_text("u1\t2\tsecond text\nu1\t1\tfirst text\n")
        assert fio.read_free_text_run(path) == {"u1": ["first text", "second text"]}

    def test_gap_in_positions_rejected(self, tmp_path):
        path = tmp_path / "ft.tsv"
        path.write_text("u1\t1\ta\nu1\t5\tb\n")
        with pytest.raises(InputError):
            fio.read_free_text_run(path)


class TestAttributes:
    def test_read_skips_empty_values(self, tmp_path):
        path = tmp_path / "attrs.csv"
        path.write_text("user_id,gender,age\nu1,F,23\nu2,,41\n")
        attrs = fio.read_attributes(path)
        assert attrs["u1"] == {"gender": "F", "age": "23"}
        assert attrs["u2"] == {"age": "41"}  # empty = unspecified

    def test_header_required(self, tmp_path):
        path = tmp_path / "attrs.csv"
        path.write_text("uid,gender\nu1,F\n")
        with pytest.raises(InputError):
            fio.read_attributes(path)


class TestGroupingSpec:
    def test_parse_all_rule_types(self, tmp_path):
        path = tmp_path / "groups.json"
        path.write_text(
            """
            {"attributes": [
              {"name": "gender", "type": "passthrough"},
              {"name": "age", "type": "bins", "edges": [18, 25, 50],
               "labels": ["18-24", "25-49", "50+"]},
              {"name": "occupation", "type": "map",
               "mapping": {"student": "non-working", "farmer": "working"}}
            ]}
            """
        )
        spec = fio.read_grouping_spec(path)
        assert isinstance(spec.rules[0], PassthroughRule)
        assert isinstance(spec.rules[1], BinRule)
        assert isinstance(spec.rules[2], MapRule)
        assert spec.attribute_names == ("gender", "age", "occupation")

    def test_unknown_rule_type_rejected(self, tmp_path):
        path = tmp_path / "groups.json"
        path.write_text('{"attributes": [{"name": "x", "type": "fancy"}]}')
        with pytest.raises(InputError):
            fio.read_grouping_spec(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "groups.json"
        path.write_text("{nope")
        with pytest.raises(InputError):
            fio.read_grouping_spec(path)


class TestCatalog:
    def test_read(self, tmp_path):
        path = tmp_path / "catalog.tsv"
        path.write_text("m1\tMatrix, The (1999)\nm2\tUp (2009)\n")
        assert fio.read_catalog(path) == [("m1", "Matrix, The (1999)"), ("m2", "Up (2009)")]
