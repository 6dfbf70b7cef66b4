import random

import pytest
from hypothesis import given, strategies as st

from oracles import brute_lcs, naive_overlap, ngram_total
from sumforge.errors import BadN
from sumforge.rouge import RougeScore, lcs_length, ngrams, rouge_l, rouge_n, score_candidate

toks = st.lists(st.sampled_from("abcd"), max_size=12)


class TestNgrams:
    def test_bigrams(self):
        assert dict(ngrams(["a", "b", "c"], 2).counts) == {("a", "b"): 1, ("b", "c"): 1}

    def test_n_exceeds_length(self):
        assert ngrams(["a", "b"], 3).total == 0

    def test_multiplicity(self):
        assert dict(ngrams(["a", "a", "a"], 1).counts) == {("a",): 3}

    def test_bad_n(self):
        with pytest.raises(BadN):
            ngrams(["a"], 0)
        with pytest.raises(BadN):
            rouge_n(["a"], ["a"], 0)

    @given(toks, st.integers(1, 4))
    def test_total(self, t, n):
        counts = ngrams(t, n)
        assert counts.total == ngram_total(t, n)
        assert all(v >= 1 for v in counts.counts.values())


class TestRougeN:
    def test_partial_unigram(self):
        s = rouge_n(["A", "B", "C"], ["A", "B", "D"], 1)
        assert s.precision == pytest.approx(2 / 3)
        assert s.recall == pytest.approx(2 / 3)
        assert s.f1 == pytest.approx(2 / 3)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_identity(self, n):
        assert rouge_n(list("abcd"), list("abcd"), n) == (1.0, 1.0, 1.0)

    def test_disjoint(self):
        assert rouge_n(["x"], ["y"], 1) == (0.0, 0.0, 0.0)

    def test_clipping(self):
        s = rouge_n(["a", "a", "a"], ["a"], 1)
        assert s.precision == pytest.approx(1 / 3) and s.recall == 1.0

    def test_empty_candidate(self):
        assert rouge_n([], ["a"], 1) == (0.0, 0.0, 0.0)

    @given(toks, toks, st.integers(1, 3))
    def test_duality(self, a, b, n):
        assert rouge_n(a, b, n).precision == rouge_n(b, a, n).recall

    @given(toks, toks, st.integers(1, 3))
    def test_matches_naive_overlap(self, a, b, n):
        overlap = naive_overlap(a, b, n)
        s = rouge_n(a, b, n)
        ref_total = ngram_total(b, n)
        assert s.recall == (overlap / ref_total if ref_total else 0.0)

    @given(toks, st.lists(st.sampled_from("abcd"), min_size=1, max_size=12), st.data())
    def test_monotone_recall(self, cand, ref, data):
        tok = data.draw(st.sampled_from(ref))
        assert rouge_n(cand + [tok], ref, 1).recall >= rouge_n(cand, ref, 1).recall


class TestLcs:
    def test_classic(self):
        assert lcs_length(list("ABCBDAB"), list("BDCABA")) == 4
        assert brute_lcs(list("ABCBDAB"), list("BDCABA")) == 4

    def test_identity(self):
        assert lcs_length(list("hello"), list("hello")) == 5

    def test_empty(self):
        assert lcs_length([], list("abc")) == 0
        assert lcs_length(list("abc"), []) == 0

    @given(toks, toks)
    def test_matches_brute_force(self, a, b):
        assert lcs_length(a, b) == brute_lcs(a, b)

    @given(toks, toks)
    def test_symmetric(self, a, b):
        assert lcs_length(a, b) == lcs_length(b, a)


class TestRougeL:
    def test_example(self):
        s = rouge_l(["a", "b", "c"], ["a", "c"])
        assert s.precision == pytest.approx(2 / 3)
        assert s.recall == 1.0
        assert s.f1 == pytest.approx(0.8)

    def test_identity(self):
        assert rouge_l(list("xyz"), list("xyz")) == (1.0, 1.0, 1.0)

    def test_empty_candidate(self):
        assert rouge_l([], ["a"]) == (0.0, 0.0, 0.0)

    @given(toks, toks)
    def test_dominated_by_rouge1(self, c, r):
        l, u = rouge_l(c, r), rouge_n(c, r, 1)
        assert l.precision <= u.precision
        assert l.recall <= u.recall
        assert l.f1 <= u.f1


class TestScoreCandidate:
    def test_identity(self):
        out = score_candidate([["a", "b"]], ["a", "b"])
        assert all(s == (1.0, 1.0, 1.0) for s in out.values())

    def test_empty(self):
        out = score_candidate([], ["a"])
        assert all(s == (0.0, 0.0, 0.0) for s in out.values())

    def test_concatenation_forms_bigram(self):
        out = score_candidate([["a"], ["b"]], ["a", "b"])
        assert out["rouge1"].f1 == 1.0
        assert out["rouge2"].f1 == 1.0


@given(toks, toks, st.integers(1, 3))
def test_scores_in_unit_interval(a, b, n):
    for s in (rouge_n(a, b, n), rouge_l(a, b)):
        assert all(0.0 <= v <= 1.0 for v in s)
        assert (s.f1 == 0.0) == (s.precision == 0.0 or s.recall == 0.0)


def test_f1_formula():
    s = RougeScore.from_pr(0.5, 0.25)
    assert s.f1 == pytest.approx(2 * 0.5 * 0.25 / 0.75)
    assert RougeScore.from_pr(0.0, 0.0).f1 == 0.0


def test_random_long_lcs_agrees_with_brute_force():
    rng = random.Random(5)
    for _ in range(50):
        a = [rng.choice("ab") for _ in range(rng.randint(0, 12))]
        b = [rng.choice("ab") for _ in range(rng.randint(0, 12))]
        assert lcs_length(a, b) == brute_lcs(a, b)
