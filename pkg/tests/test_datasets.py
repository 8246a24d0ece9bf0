import json

import pytest

from lawluo.datasets import CATEGORIES, corpus_stats, validate_dialogue_file
from lawluo.errors import IoError, UsageError


def _record(category="single_turn", n_turns=2, **overrides):
    turns = [
        {"role": "user" if i % 2 == 0 else "assistant", "text": f"turn {i + 1}"}
        for i in range(n_turns)
    ]
    record = {"category": category, "turns": turns, "source": "test"}
    record.update(overrides)
    return record


def _write(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records))


class TestValidate:
    def test_valid_file_all_pass(self, tmp_path):
        path = tmp_path / "good.jsonl"
        _write(path, [_record(c) for c in CATEGORIES if c != "multi_turn"])
        report = validate_dialogue_file(path)
        assert report.ok
        assert report.passed == 6
        assert report.failed == 0

    def test_unknown_category_flagged(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        _write(path, [_record(category="poetry")])
        report = validate_dialogue_file(path)
        assert not report.ok
        assert "unknown category 'poetry'" in report.lines[0].reasons[0]

    def test_single_turn_record_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        _write(path, [_record(n_turns=1)])
        report = validate_dialogue_file(path)
        assert "at least 2 turns required" in report.lines[0].reasons

    def test_assistant_first_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        record = _record()
        record["turns"][0]["role"] = "assistant"
        _write(path, [record])
        report = validate_dialogue_file(path)
        assert any("role order" in r for r in report.lines[0].reasons)

    def test_two_users_in_a_row_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        record = _record(n_turns=3)
        record["turns"][1]["role"] = "user"
        _write(path, [record])
        assert not validate_dialogue_file(path).ok

    def test_empty_text_rejected(self, tmp_path):
        path = tmp_path / "bad.jsonl"
        record = _record()
        record["turns"][1]["text"] = "  "
        _write(path, [record])
        report = validate_dialogue_file(path)
        assert "turn 2 text empty" in report.lines[0].reasons

    def test_multi_turn_minimum_four(self, tmp_path):
        path = tmp_path / "mt.jsonl"
        _write(path, [_record("multi_turn", n_turns=2), _record("multi_turn", n_turns=4)])
        report = validate_dialogue_file(path)
        assert not report.lines[0].ok
        assert report.lines[1].ok

    def test_invalid_json_line_reported_not_raised(self, tmp_path):
        path = tmp_path / "mixed.jsonl"
        path.write_text(json.dumps(_record()) + "\n{oops\n")
        report = validate_dialogue_file(path)
        assert report.passed == 1
        assert report.failed == 1
        assert report.lines[1].line_number == 2

    def test_blank_lines_ignored(self, tmp_path):
        path = tmp_path / "gaps.jsonl"
        path.write_text("\n" + json.dumps(_record()) + "\n\n")
        report = validate_dialogue_file(path)
        assert len(report.lines) == 1
        assert report.lines[0].line_number == 2

    def test_unreadable_file_raises(self, tmp_path):
        with pytest.raises(IoError):
            validate_dialogue_file(tmp_path / "missing.jsonl")


class TestStats:
    def test_counts_include_zero_categories(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write(path, [_record("scenario_qa"), _record("scenario_qa"), _record("judicial_exam")])
        stats = corpus_stats([path])
        assert stats["counts"]["scenario_qa"] == 2
        assert stats["counts"]["judicial_exam"] == 1
        assert stats["counts"]["legal_judgment"] == 0
        assert set(stats["counts"]) == set(CATEGORIES)
        assert stats["total"] == 3

    def test_turn_statistics(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write(path, [_record(n_turns=2), _record("multi_turn", n_turns=6)])
        stats = corpus_stats([path])
        assert stats["mean_turns"] == 4.0
        assert stats["max_turns"] == 6

    def test_multiple_files_aggregate(self, tmp_path):
        a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
        _write(a, [_record()])
        _write(b, [_record(), _record()])
        assert corpus_stats([a, b])["total"] == 3

    def test_invalid_corpus_refused_with_location(self, tmp_path):
        path = tmp_path / "c.jsonl"
        _write(path, [_record(), _record(category="poetry")])
        with pytest.raises(UsageError) as exc:
            corpus_stats([path])
        assert f"{path}:2" in str(exc.value)

    def test_empty_corpus(self, tmp_path):
        path = tmp_path / "empty.jsonl"
        path.write_text("")
        stats = corpus_stats([path])
        assert stats["total"] == 0
        assert stats["mean_turns"] == 0.0
