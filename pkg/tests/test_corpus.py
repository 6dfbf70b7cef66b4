import json

import pytest
from hypothesis import given, strategies as st

from sumforge.corpus import (NUM, Document, RawRecord, TokenUnit, build_document, clean_text,
                             detect_format, filter_by_score, lcsts_to_jsonl, parse_jsonl_records,
                             parse_lcsts, read_records, segment_sentences, split_dataset, tokenize)
from sumforge.errors import BadRatios, EmptyDocument, EmptyReference

text_st = st.text(alphabet=st.sampled_from(list("今天下雨。明天晴！？;!?ab C12３ ​\t\n”）")),
                  max_size=40)


class TestClean:
    def test_digit_runs(self):
        assert clean_text("2023年5月") == f"{NUM}年{NUM}月"

    def test_fullwidth_digits(self):
        assert clean_text("第１２期") == f"第{NUM}期"

    def test_empty(self):
        assert clean_text("") == ""

    def test_zero_width_and_whitespace(self):
        assert clean_text("a​b  c") == "ab c"

    def test_control_characters(self):
        assert clean_text("a\x00b\x07c\n\nd") == "abc d"

    @given(text_st)
    def test_idempotent(self, t):
        assert clean_text(clean_text(t)) == clean_text(t)


class TestSegment:
    def test_basic(self):
        assert segment_sentences("今天下雨。明天晴。") == ["今天下雨。", "明天晴。"]

    def test_no_terminal(self):
        assert segment_sentences("no terminal punctuation") == ["no terminal punctuation"]

    def test_empty(self):
        assert segment_sentences("") == []

    def test_closing_quote_attaches(self):
        assert segment_sentences("他说：“好。”然后走了") == ["他说：“好。”", "然后走了"]

    def test_repeated_terminals(self):
        assert segment_sentences("真的吗？！是的。") == ["真的吗？！", "是的。"]

    @given(text_st)
    def test_lossless_and_nonempty(self, t):
        t = clean_text(t)
        parts = segment_sentences(t)
        assert "".join(parts) == t
        assert all(parts)


class TestTokenize:
    def test_char_unit(self):
        assert tokenize("今天ABC好", TokenUnit.CHARACTER) == ["今", "天", "ABC", "好"]

    def test_word_unit(self):
        assert tokenize("a b  c", TokenUnit.WORD) == ["a", "b", "c"]

    def test_empty(self):
        assert tokenize("", "char") == []

    def test_placeholder_is_one_token(self):
        assert tokenize(clean_text("共12人"), "char") == ["共", NUM, "人"]

    def test_whitespace_never_a_token(self):
        assert tokenize("我 们", "char") == ["我", "们"]

    @given(text_st)
    def test_join_tokenize_idempotent(self, t):
        def f(tokens):
            return tokenize("".join(tokens), "char")
        once = f(tokenize(clean_text(t), "char"))
        assert f(once) == once

    @given(st.text(alphabet=st.sampled_from(list("今天下雨。AB9")), max_size=30))
    def test_roundtrip_without_spaces(self, t):
        toks = tokenize(clean_text(t), "char")
        assert tokenize("".join(toks), "char") == toks


class TestBuildDocument:
    def test_two_sentences(self):
        doc = build_document(RawRecord("1", "甲。乙。", "甲"))
        assert doc.sentences == [["甲", "。"], ["乙", "。"]]
        assert doc.raw_sentences == ["甲。", "乙。"]
        assert doc.reference == ["甲"]

    def test_blank_text(self):
        with pytest.raises(EmptyDocument):
            build_document(RawRecord("1", "   ", "x"))

    def test_blank_summary(self):
        with pytest.raises(EmptyReference):
            build_document(RawRecord("1", "甲。", ""))

    def test_summary_not_segmented(self):
        doc = build_document(RawRecord("1", "甲。", "乙。丙。"))
        assert doc.reference == ["乙", "。", "丙", "。"]

    def test_json_roundtrip(self):
        doc = build_document(RawRecord("x", "今天下雨。明天 晴。", "下雨"), "char")
        again = Document.from_json(json.loads(json.dumps(doc.to_json())))
        assert again == doc


class TestSplit:
    def test_floor_allocation(self):
        recs = list(range(10))
        train, valid, test = split_dataset(recs, (0.8, 0.1, 0.1), seed=7)
        assert (len(train), len(valid), len(test)) == (8, 1, 1)

    def test_remainder_to_train(self):
        train, valid, test = split_dataset(list(range(7)), (0.5, 0.25, 0.25), seed=0)
        assert (len(train), len(valid), len(test)) == (5, 1, 1)

    def test_empty(self):
        assert split_dataset([], (0.8, 0.1, 0.1), seed=3) == ([], [], [])

    def test_deterministic(self):
        recs = list(range(50))
        assert split_dataset(recs, seed=11) == split_dataset(recs, seed=11)

    def test_bad_ratios(self):
        with pytest.raises(BadRatios):
            split_dataset([1, 2], (0.5, 0.5, 0.5), seed=0)

    @given(st.lists(st.integers(), unique=True, max_size=60), st.integers(0, 10**6))
    def test_permutation_partition(self, items, seed):
        parts = split_dataset(items, (0.6, 0.2, 0.2), seed=seed)
        flat = [x for p in parts for x in p]
        assert sorted(flat) == sorted(items)
        assert len(set(flat)) == len(flat)


LCSTS_SAMPLE = """<doc id=0>
    <human_label>5</human_label>
    <summary>
        修改后的立法法全文公布
    </summary>
    <short_text>
        新华社受权于18日全文播发修改后的《中华人民共和国立法法》。
    </short_text>
</doc>
<doc id=1>
    <summary>
        标题二
    </summary>
    <short_text>
        正文二。
    </short_text>
</doc>
"""


class TestReaders:
    def test_parse_lcsts(self):
        recs = list(parse_lcsts(LCSTS_SAMPLE))
        assert [r.id for r in recs] == ["0", "1"]
        assert recs[0].score == 5 and recs[1].score is None
        assert recs[0].summary == "修改后的立法法全文公布"
        assert recs[1].text == "正文二。"

    def test_converter_emits_line_format(self):
        lines = lcsts_to_jsonl(LCSTS_SAMPLE).splitlines()
        objs = [json.loads(l) for l in lines]
        assert objs[0] == {"id": "0", "text": "新华社受权于18日全文播发修改后的《中华人民共和国立法法》。",
                           "summary": "修改后的立法法全文公布", "score": 5}
        assert "score" not in objs[1]

    def test_detect_format(self):
        assert detect_format("  \n<doc>") == "lcsts"
        assert detect_format('{"text": 1}') == "jsonl"

    def test_jsonl_autogenerates_id(self):
        res = parse_jsonl_records(['{"text": "a", "summary": "b"}', "", '{"text": "c", "summary": "d"}'])
        assert [r.id for r in res.records] == ["1", "3"]

    def test_jsonl_bad_lines(self):
        res = parse_jsonl_records(['{"text": "a"}', "not json", '{"id": "x", "text": "a", "summary": "b"}',
                                   '{"id": "x", "text": "a", "summary": "b"}'])
        assert len(res.records) == 1 and len(res.bad_lines) == 3

    def test_read_records_sniffs(self, tmp_path):
        p = tmp_path / "raw.txt"
        p.write_text(LCSTS_SAMPLE, encoding="utf-8")
        assert len(read_records(p).records) == 2
        p.write_text(lcsts_to_jsonl(LCSTS_SAMPLE), encoding="utf-8")
        assert [r.id for r in read_records(p).records] == ["0", "1"]

    def test_score_filter(self):
        recs = [RawRecord("a", "t", "s", 2), RawRecord("b", "t", "s", 4), RawRecord("c", "t", "s")]
        assert [r.id for r in filter_by_score(recs, 3)] == ["b", "c"]
        assert len(filter_by_score(recs, None)) == 3
