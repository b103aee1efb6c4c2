"""Three-part prompts for video QA and parsing of multiple-choice answers.

A prompt is split around the visual tokens::

    [task instruction] [input data description]
    <visual tokens>
    question [options] [answer prefix]

Each of the three optional parts can be switched on or off.  Left unset, the
task instruction is used only for multiple choice and the other two parts
are always used.
"""

from __future__ import annotations

import json
import re
import string
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .errors import InvalidPrompt, MissingOptions, OutOfRange, UnexpectedOptions, Unparseable

OPEN_ENDED = "open_ended"
MULTIPLE_CHOICE = "multiple_choice"
TEXT_GENERATION = "text_generation"
TASK_KINDS = (OPEN_ENDED, MULTIPLE_CHOICE, TEXT_GENERATION)

OPEN_INSTRUCTION = "Answer the question precisely based on the input"
CHOICE_INSTRUCTION = "Select the best option to answer the question"
INPUT_DATA = "The input consists of a sequence of key frames from a video"
CHOICE_ANSWER_PREFIX = "Best Option:("
OPEN_ANSWER_PREFIX = "In this video,"

LETTERS = string.ascii_uppercase


@dataclass
class PromptBundle:
    question: str
    task_kind: str = OPEN_ENDED
    options: Optional[list[str]] = None
    include_task_instruction: Optional[bool] = None
    include_input_data: Optional[bool] = None
    include_structured_answer: Optional[bool] = None

    def toggles(self) -> tuple[bool, bool, bool]:
        """Effective (task instruction, input data, structured answer) switches."""
        task = self.include_task_instruction
        if task is None:
            task = self.task_kind == MULTIPLE_CHOICE
        data = True if self.include_input_data is None else self.include_input_data
        answer = True if self.include_structured_answer is None else self.include_structured_answer
        return bool(task), bool(data), bool(answer)

    def validate(self) -> None:
        if self.task_kind not in TASK_KINDS:
            raise InvalidPrompt(f"unknown task_kind {self.task_kind!r}; expected {TASK_KINDS}")
        if not self.question or not self.question.strip():
            raise InvalidPrompt("question must be non-empty")
        if self.task_kind == MULTIPLE_CHOICE:
            if not self.options:
                raise MissingOptions("multiple_choice needs at least one option")
            if len(self.options) > len(LETTERS):
                raise InvalidPrompt(f"at most {len(LETTERS)} options are supported")
        elif self.options is not None:
            raise UnexpectedOptions(f"{self.task_kind} takes no options")

    def to_dict(self) -> dict:
        return {k: v for k, v in asdict(self).items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict) -> PromptBundle:
        if not isinstance(data, dict):
            raise InvalidPrompt("prompt bundle must be a JSON object")
        allowed = {f for f in cls.__dataclass_fields__}
        unknown = set(data) - allowed
        if unknown:
            raise InvalidPrompt(f"unknown prompt keys: {sorted(unknown)}")
        if "question" not in data:
            raise InvalidPrompt("prompt bundle needs a question")
        return cls(**data)

    @classmethod
    def load(cls, path) -> PromptBundle:
        try:
            data = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise InvalidPrompt(f"{path}: no such file") from None
        except json.JSONDecodeError as exc:
            raise InvalidPrompt(f"{path}: bad JSON: {exc}") from exc
        if isinstance(data, dict) and "prompt" in data:
            data = data["prompt"]
        return cls.from_dict(data)


@dataclass(frozen=True)
class AssembledInput:
    pre_visual_text: str
    post_visual_text: str
    visual_token_placeholder: str = field(default="<VISUAL_TOKENS n={n}>")

    def render(self, n_visual_tokens: int) -> str:
        """Full text with the visual span shown as a placeholder line."""
        parts = [
            self.pre_visual_text,
            self.visual_token_placeholder.format(n=n_visual_tokens),
            self.post_visual_text,
        ]
        return "\n".join(p for p in parts if p) + "\n"


def format_options(options: list[str]) -> str:
    return "\n".join(f"({LETTERS[i]}) {text}" for i, text in enumerate(options))


def build_prompt(bundle: PromptBundle) -> AssembledInput:
    bundle.validate()
    use_task, use_data, use_answer = bundle.toggles()
    mc = bundle.task_kind == MULTIPLE_CHOICE

    pre = []
    if use_task:
        pre.append((CHOICE_INSTRUCTION if mc else OPEN_INSTRUCTION) + ".")
    if use_data:
        pre.append(INPUT_DATA + ".")

    post = [bundle.question.strip()]
    if mc:
        post.append(format_options(bundle.options))
    if use_answer:
        post.append(CHOICE_ANSWER_PREFIX if mc else OPEN_ANSWER_PREFIX)
    return AssembledInput(" ".join(pre), "\n".join(post))


_PREFIX = re.compile(r"^\s*best\s*option\s*:?\s*", re.IGNORECASE)
# a leading letter followed by a lowercase word is prose ("I think", "a dog")
_LEADING = re.compile(r"^\(?\s*([A-Za-z])(?:\s*[).:,]|\s*$|\s+(?![a-z]))")
_PAREN = re.compile(r"\(\s*([A-Za-z])\s*\)")
_STANDALONE = re.compile(r"(?<![A-Za-z'])([A-Z])(?![A-Za-z'])")


def parse_choice(answer_text: str, n_options: int) -> int:
    """0-based option index named by an answer such as ``"Best Option:(C)"``.

    Tried in order: a letter at the start (after an optional ``Best Option:``
    prefix) written as ``(B)``, ``B)``, ``B.`` or bare ``B``; the first
    parenthesized letter anywhere; the first standalone capital letter,
    skipping the pronoun "I" in running text.
    """
    if not 2 <= n_options <= len(LETTERS):
        raise ValueError(f"n_options must be in [2, {len(LETTERS)}], got {n_options}")
    text = _PREFIX.sub("", answer_text, count=1)

    letter = None
    m = _LEADING.match(text.lstrip())
    if m:
        letter = m.group(1)
    if letter is None:
        m = _PAREN.search(text)
        if m:
            letter = m.group(1)
    if letter is None:
        for m in _STANDALONE.finditer(text):
            if m.group(1) == "I" and re.match(r"\s+[a-z]", text[m.end() :]):
                continue
            letter = m.group(1)
            break
    if letter is None:
        raise Unparseable(f"no option letter in {answer_text!r}")
    index = LETTERS.index(letter.upper())
    if index >= n_options:
        raise OutOfRange(f"option {letter.upper()} is beyond the {n_options} options")
    return index
