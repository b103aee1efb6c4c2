import itertools
import json
import string

import pytest
from hypothesis import given
from hypothesis import strategies as st

from sftok.errors import InvalidPrompt, MissingOptions, OutOfRange, UnexpectedOptions, Unparseable
from sftok.prompting import (
    CHOICE_ANSWER_PREFIX,
    CHOICE_INSTRUCTION,
    INPUT_DATA,
    OPEN_ANSWER_PREFIX,
    OPEN_INSTRUCTION,
    PromptBundle,
    build_prompt,
    parse_choice,
)

OPTIONS = ["runs", "jumps", "sits", "sleeps", "eats"]


def mc(**kw):
    return PromptBundle("What does the dog do?", "multiple_choice", list(OPTIONS), **kw)


class TestBuildPrompt:
    def test_multiple_choice_all_on(self):
        p = build_prompt(mc(include_task_instruction=True, include_input_data=True,
                            include_structured_answer=True))
        assert "Select the best option to answer the question" in p.pre_visual_text
        assert "The input consists of a sequence of key frames from a video" in p.pre_visual_text
        assert p.post_visual_text.endswith("Best Option:(")
        assert "(E) eats" in p.post_visual_text

    def test_multiple_choice_defaults(self):
        assert build_prompt(mc()) == build_prompt(
            mc(include_task_instruction=True, include_input_data=True, include_structured_answer=True)
        )

    def test_open_ended_defaults(self):
        p = build_prompt(PromptBundle("What is the man holding?"))
        assert p.pre_visual_text == INPUT_DATA + "."
        assert OPEN_INSTRUCTION not in p.pre_visual_text
        assert p.post_visual_text.endswith("In this video,")

    def test_open_ended_all_off(self):
        p = build_prompt(PromptBundle("What is the man holding?", include_task_instruction=False,
                                      include_input_data=False, include_structured_answer=False))
        assert p.pre_visual_text == ""
        assert p.post_visual_text == "What is the man holding?"

    def test_text_generation_uses_open_sentences(self):
        p = build_prompt(PromptBundle("Describe the video.", "text_generation",
                                      include_task_instruction=True))
        assert OPEN_INSTRUCTION in p.pre_visual_text
        assert p.post_visual_text.endswith(OPEN_ANSWER_PREFIX)

    def test_render_order(self):
        text = build_prompt(mc()).render(3680)
        lines = text.splitlines()
        marker = lines.index("<VISUAL_TOKENS n=3680>")
        assert CHOICE_INSTRUCTION in "\n".join(lines[:marker])
        assert lines[marker + 1] == "What does the dog do?"
        assert lines[-1] == CHOICE_ANSWER_PREFIX
        assert text.count("<VISUAL_TOKENS") == 1

    def test_missing_options(self):
        with pytest.raises(MissingOptions):
            build_prompt(PromptBundle("q?", "multiple_choice"))

    def test_unexpected_options(self):
        with pytest.raises(UnexpectedOptions):
            build_prompt(PromptBundle("q?", "open_ended", ["a", "b"]))

    @pytest.mark.parametrize("bundle", [PromptBundle("  "), PromptBundle("q", "essay")])
    def test_invalid(self, bundle):
        with pytest.raises(InvalidPrompt):
            build_prompt(bundle)

    @pytest.mark.parametrize("kind", ["open_ended", "multiple_choice", "text_generation"])
    def test_toggle_faithfulness(self, kind):
        instruction = CHOICE_INSTRUCTION if kind == "multiple_choice" else OPEN_INSTRUCTION
        prefix = CHOICE_ANSWER_PREFIX if kind == "multiple_choice" else OPEN_ANSWER_PREFIX
        options = list(OPTIONS) if kind == "multiple_choice" else None
        texts = set()
        for t, d, a in itertools.product([True, False], repeat=3):
            b = PromptBundle("Why?", kind, options, t, d, a)
            text = build_prompt(b).render(10)
            assert (instruction in text) == t
            assert (INPUT_DATA in text) == d
            assert (prefix in text) == a
            texts.add(text)
        assert len(texts) == 8

    def test_json_round_trip(self, tmp_path):
        b = mc(include_input_data=False)
        assert PromptBundle.from_dict(json.loads(json.dumps(b.to_dict()))) == b
        path = tmp_path / "p.json"
        path.write_text(json.dumps({"prompt": b.to_dict()}))
        assert PromptBundle.load(path) == b

    def test_unknown_key(self):
        with pytest.raises(InvalidPrompt):
            PromptBundle.from_dict({"question": "q", "colour": "red"})


class TestParseChoice:
    @pytest.mark.parametrize(
        "text,n,expected",
        [
            ("Best Option:(C)", 5, 2),
            ("(a) because the dog runs", 4, 0),
            ("B) jumps", 4, 1),
            ("B.", 4, 1),
            ("D", 4, 3),
            ("b", 4, 1),
            ("best option: d. eats", 5, 3),
            ("Best Option:(E) eats", 5, 4),
            ("C because it is sitting", 4, 2),
            ("I think the answer is (B).", 4, 1),
            ("I believe it is C", 4, 2),
        ],
    )
    def test_forms(self, text, n, expected):
        assert parse_choice(text, n) == expected

    def test_out_of_range(self):
        with pytest.raises(OutOfRange):
            parse_choice("I think the answer is Z", 4)
        with pytest.raises(OutOfRange):
            parse_choice("Best Option:(E)", 4)

    @pytest.mark.parametrize("text", ["", "no idea", "the dog runs away"])
    def test_unparseable(self, text):
        with pytest.raises(Unparseable):
            parse_choice(text, 4)

    @pytest.mark.parametrize("n", [1, 27])
    def test_bad_option_count(self, n):
        with pytest.raises(ValueError):
            parse_choice("A", n)

    @given(st.integers(2, 26).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1))))
    def test_round_trip(self, ni):
        n, i = ni
        assert parse_choice(CHOICE_ANSWER_PREFIX + string.ascii_uppercase[i] + ")", n) == i
