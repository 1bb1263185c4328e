import csv
import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from founder_success.ingest import (
    Dataset,
    DuplicateFounderError,
    FounderRecord,
    InsufficientRecordsError,
    MissingColumnError,
    build_sample,
    filter_valid,
    invalid_reason,
    load_founder_table,
    merge_and_flag,
    stratified_sample,
)


def write_csv(path, rows, header=("founder_id", "org_name", "linkedin_json")):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    return path


def rec(fid, success=True, doc='{"a": 1}'):
    return FounderRecord(fid, doc, f"org-{fid}", success)


def test_load_preserves_order_and_flag(tmp_path):
    doc = json.dumps({"summary": 'has "quotes",\ncommas and a newline'})
    p = write_csv(tmp_path / "s.csv", [["a", "Airtable", doc], ["b", "Stripe", "{}"]])
    d = load_founder_table(p, True)
    assert [r.founder_id for r in d] == ["a", "b"]
    assert all(r.success for r in d)
    assert d.records[0].linkedin_doc == doc


def test_header_only_file_gives_empty_dataset(tmp_path):
    p = write_csv(tmp_path / "empty.csv", [])
    assert len(load_founder_table(p, False)) == 0


def test_row_without_org_is_skipped_and_reported(tmp_path):
    p = write_csv(tmp_path / "s.csv", [["a", "X", "{}"], ["b", "", "{}"], ["c", "Z", "{}"]])
    d = load_founder_table(p, True)
    assert len(d) == 2
    assert len(d.skipped) == 1 and d.skipped[0].row == 2


def test_short_row_is_skipped(tmp_path):
    p = tmp_path / "s.csv"
    p.write_text('founder_id,org_name,linkedin_json\na,X,{}\nb\n', encoding="utf-8")
    d = load_founder_table(p, True)
    assert [r.founder_id for r in d] == ["a"]
    assert "cells" in d.skipped[0].reason


def test_missing_file_and_column(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        load_founder_table(tmp_path / "nope.csv", True)
    p = write_csv(tmp_path / "bad.csv", [["x"]], header=("linkedin_json",))
    with pytest.raises(MissingColumnError, match="org_name"):
        load_founder_table(p, True)


def test_founder_id_synthesised_when_column_absent(tmp_path):
    p = write_csv(tmp_path / "t.csv", [["Acme", "{}"], ["Beta", "{}"]], header=("org_name", "linkedin_json"))
    assert [r.founder_id for r in load_founder_table(p, True)] == ["t.csv:1", "t.csv:2"]


def test_merge_concatenates_successful_first():
    a = Dataset(tuple(rec(f"s{i}") for i in range(2)))
    b = Dataset(tuple(rec(f"u{i}", False) for i in range(3)))
    m = merge_and_flag(a, b)
    assert len(m) == 5
    assert [r.success for r in m] == [True, True, False, False, False]
    assert len(merge_and_flag(Dataset(()), Dataset(()))) == 0


def test_merge_rejects_shared_ids():
    with pytest.raises(DuplicateFounderError):
        merge_and_flag(Dataset((rec("x"),)), Dataset((rec("x", False),)))


def test_dataset_rejects_duplicates():
    with pytest.raises(DuplicateFounderError):
        Dataset((rec("x"), rec("x")))


def _well_formed(doc: str) -> bool:
    # independent checker: bracket balance outside strings plus a top-level object
    depth, in_str, esc = 0, False, False
    s = doc.strip()
    if not s.startswith("{"):
        return False
    for ch in s:
        if in_str:
            if esc:
                esc = False
            elif ch == "\\":
                esc = True
            elif ch == '"':
                in_str = False
        elif ch == '"':
            in_str = True
        elif ch in "{[":
            depth += 1
        elif ch in "}]":
            depth -= 1
            if depth < 0:
                return False
    return depth == 0 and not in_str


def test_filter_valid_ten_records_three_malformed():
    docs = ['{"a": 1}', "", '{"a": [1, 2}', '{"b": "x"}', '{"edu": []}', '{"c": {"d": 1}',
            '{}', '{"e": "]"}', '{"f": null}', '{"g": true}']  # fmt: skip
    d = Dataset(tuple(rec(f"r{i}", doc=doc) for i, doc in enumerate(docs)))
    out = filter_valid(d)
    assert len(out) == 7
    assert [r.founder_id for r in out] == [r.founder_id for r in d if _well_formed(r.linkedin_doc)]


def test_invalid_reason_cases():
    assert invalid_reason("") is not None
    assert invalid_reason('{"a": ') is not None
    assert invalid_reason("[1, 2]") is not None
    assert invalid_reason('{"a": 1}') is None


def _pool(n_pos, n_neg):
    return Dataset(tuple(rec(f"s{i}") for i in range(n_pos)) + tuple(rec(f"u{i}", False) for i in range(n_neg)))


def test_stratified_sample_counts_and_determinism():
    d = _pool(40, 70)
    a = stratified_sample(d, 25, seed=7)
    b = stratified_sample(d, 25, seed=7)
    assert a.dumps() == b.dumps()
    assert sum(r.success for r in a) == 25 and len(a) == 50
    assert len({r.founder_id for r in a}) == 50
    assert stratified_sample(d, 25, seed=8).records != a.records
    assert len(stratified_sample(d, 0, seed=1)) == 0
    assert a.provenance["seed"] == 7


def test_stratified_sample_insufficient():
    with pytest.raises(InsufficientRecordsError):
        stratified_sample(_pool(10, 50), 11, seed=0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 30), st.integers(0, 30), st.integers(0, 2**31), st.data())
def test_sample_property_exact_class_counts(n_pos, n_neg, seed, data):
    n = data.draw(st.integers(0, min(n_pos, n_neg)))
    out = stratified_sample(_pool(n_pos, n_neg), n, seed)
    assert sum(r.success for r in out) == n
    assert sum(not r.success for r in out) == n


@settings(max_examples=50, deadline=None)
@given(st.lists(st.sampled_from(['{"a": 1}', "", "{", "[]", "{}", '{"x": "y"}']), max_size=20))
def test_filter_valid_idempotent(docs):
    d = Dataset(tuple(rec(f"r{i}", doc=doc) for i, doc in enumerate(docs)))
    once = filter_valid(d)
    assert filter_valid(once).records == once.records


def test_serialization_roundtrip_is_byte_identical(tmp_path):
    d = stratified_sample(_pool(10, 10), 5, seed=3)
    d.save(tmp_path / "a.jsonl")
    again = Dataset.load(tmp_path / "a.jsonl")
    assert again.records == d.records
    again.save(tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_build_sample_replay_identical(tmp_path):
    rows_s = [[f"s{i}", "Org", json.dumps({"i": i})] for i in range(12)] + [["sbad", "Org", "{oops"]]
    rows_u = [[f"u{i}", "Org", json.dumps({"i": i})] for i in range(15)]
    ps = write_csv(tmp_path / "s.csv", rows_s)
    pu = write_csv(tmp_path / "u.csv", rows_u)
    a = build_sample(ps, pu, 12, seed=1)
    b = build_sample(ps, pu, 12, seed=1)
    assert a.dumps() == b.dumps()
    assert "sbad" not in {r.founder_id for r in a}
