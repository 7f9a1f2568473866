import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from relabel.errors import VocabularyError
from relabel.labelspace import LabelVocabulary, canonicalize, sanitize_response


@pytest.fixture
def snake_vocab():
    return LabelVocabulary.create("snakes", ["sea snake", "garter snake"])


class TestVocabulary:
    def test_create_canonicalizes(self):
        v = LabelVocabulary.create("d", ["  Sea   Snake ", "DOG"])
        assert v.labels == ("sea snake", "dog")

    def test_order_defines_index(self):
        v = LabelVocabulary.create("d", ["b", "a", "c"])
        assert [v.index_of(l) for l in ("b", "a", "c")] == [0, 1, 2]
        assert v.sort_labels(["c", "b"]) == ["b", "c"]

    def test_rejects_duplicates_after_canonicalization(self):
        with pytest.raises(VocabularyError):
            LabelVocabulary.create("d", ["Cat", "cat "])

    def test_rejects_empty(self):
        with pytest.raises(VocabularyError):
            LabelVocabulary.create("d", [])

    def test_synonym_targets_must_be_members(self):
        with pytest.raises(VocabularyError):
            LabelVocabulary.create("d", ["cat"], synonyms={"kitty": "lion"})

    def test_json_round_trip(self, tmp_path, snake_vocab):
        path = tmp_path / "vocab.json"
        snake_vocab.to_json(path)
        assert LabelVocabulary.from_json(path) == snake_vocab


class TestCanonicalize:
    def test_case_and_whitespace(self, snake_vocab):
        assert canonicalize("Sea Snake ", snake_vocab) == "sea snake"

    def test_broader_term_misses(self, snake_vocab):
        # models answering with more general terms must not be legitimized
        assert canonicalize("snake", snake_vocab) is None

    def test_explicit_synonym(self):
        v = LabelVocabulary.create(
            "snakes", ["sea snake", "garter snake"], synonyms={"snake": "sea snake"}
        )
        assert canonicalize("snake", v) == "sea snake"

    def test_internal_whitespace_collapse(self, snake_vocab):
        assert canonicalize("sea\t  snake", snake_vocab) == "sea snake"

    @given(st.text(max_size=30))
    def test_idempotent_where_defined(self, raw):
        v = LabelVocabulary.create("d", ["cat", "dog bird"])
        first = canonicalize(raw, v)
        if first is not None:
            assert canonicalize(first, v) == first


class TestSanitizeResponse:
    def test_repetition_collapses(self, vocab4):
        rep = sanitize_response(["baby crib", "baby crib", "baby crib"], _crib_vocab(), cap=5)
        assert rep.accepted == ("baby crib",)
        assert rep.duplicates_removed == 2

    def test_null_response(self, vocab4):
        rep = sanitize_response(["None"], vocab4, cap=5)
        assert rep.accepted == ()
        assert rep.was_null

    def test_null_is_case_insensitive(self, vocab4):
        assert sanitize_response(["NONE"], vocab4, cap=5).was_null

    def test_null_among_others_is_just_noise(self, vocab4):
        rep = sanitize_response(["cat", "None"], vocab4, cap=5)
        assert rep.accepted == ("cat",)
        assert not rep.was_null
        assert rep.rejected_out_of_vocab == ("None",)

    def test_out_of_vocab_dropped_and_logged(self, vocab4):
        rep = sanitize_response(["cat", "unicorn", "dog"], vocab4, cap=5)
        assert rep.accepted == ("cat", "dog")
        assert rep.rejected_out_of_vocab == ("unicorn",)

    def test_cap_truncates(self, vocab4):
        rep = sanitize_response(["cat", "dog", "bird"], vocab4, cap=2)
        assert rep.accepted == ("cat", "dog")
        assert rep.truncated

    def test_cap_must_be_positive(self, vocab4):
        with pytest.raises(ValueError):
            sanitize_response(["cat"], vocab4, cap=0)

    def test_accepted_bounded_by_cap_and_vocab(self, vocab4):
        rep = sanitize_response(["cat", "dog", "bird", "frog", "cat"], vocab4, cap=10)
        assert len(rep.accepted) <= min(10, len(vocab4))

    @given(
        st.lists(
            st.sampled_from(["cat", "DOG", "bird", "unicorn", "", "  frog "]),
            max_size=12,
        ),
        st.integers(min_value=1, max_value=6),
    )
    @settings(max_examples=150)
    def test_idempotent(self, raw, cap):
        v = LabelVocabulary.create("d", ["cat", "dog", "bird", "frog"])
        first = sanitize_response(raw, v, cap)
        again = sanitize_response(list(first.accepted), v, cap)
        assert again.accepted == first.accepted
        assert again.duplicates_removed == 0
        assert again.rejected_out_of_vocab == ()


def _crib_vocab():
    return LabelVocabulary.create("cribs", ["baby crib", "cradle"])
