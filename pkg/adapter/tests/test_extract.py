import pytest

from vlmadapter.extract import extract_answer


class TestCleanResponses:
    def test_plain_json(self):
        assert extract_answer('{"answer": ["cat"], "reason": "fur"}') == ["cat"]

    def test_multiple_answers(self):
        assert extract_answer('{"answer": ["cat", "dog"]}') == ["cat", "dog"]

    def test_answer_as_comma_string(self):
        assert extract_answer('{"answer": "cat, dog", "reason": "both"}') == ["cat", "dog"]

    def test_none_string_answer(self):
        assert extract_answer('{"answer": "None"}') == []

    def test_bare_none_reply(self):
        assert extract_answer("None") == []


class TestFormatDrift:
    def test_single_quoted_dict(self):
        assert extract_answer("{'answer': ['cat'], 'reason': 'obvious'}") == ["cat"]

    def test_code_fence(self):
        text = 'Sure! Here you go:\n```json\n{"answer": ["dog"]}\n```\nHope that helps.'
        assert extract_answer(text) == ["dog"]

    def test_trailing_prose(self):
        text = '{"answer": ["bird"]} Let me know if you need anything else!'
        assert extract_answer(text) == ["bird"]

    def test_leading_prose(self):
        assert extract_answer('The labels are {"answer": ["frog"]}') == ["frog"]

    def test_first_object_without_answer_is_skipped(self):
        text = '{"description": "a pet"} then {"answer": ["cat"]}'
        assert extract_answer(text) == ["cat"]

    def test_repeated_labels_survive_extraction(self):
        # dedup happens downstream; extraction preserves the list
        got = extract_answer('{"answer": ["cat", "cat", "dog"]}')
        assert got == ["cat", "cat", "dog"]

    def test_none_entries_inside_lists_dropped(self):
        assert extract_answer('{"answer": ["None", "cat"]}') == ["cat"]


class TestUnparseable:
    @pytest.mark.parametrize(
        "text",
        [
            "",
            "I cannot see the image.",
            '{"answer": ',
            "{'reason': 'no answer key'}",
            '{"answer": 42}',
        ],
    )
    def test_degrades_to_empty(self, text):
        assert extract_answer(text) == []
