"""Parameter-file and template-appendix parsing.

A parameter file declares one dimension of the sweep per sentence::

    # comment
    LOOPTYPE=LIST, VALUE=hello, VALUE=goodbye, FUNCTION=ucfirst
    LOOPTYPE=RANGE, START=1000, END=1000, POINTS=8, \\
    FUNCTION=int rand

Words are ``KEY=VALUE`` pairs separated by the separation character and/or
blanks. A word without an assignment continues the value of the word before
it, which is how ``FUNCTION=int rand`` becomes a two-function chain. A
trailing backslash joins the next physical line.
"""
import logging
import re
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import List, Optional

from lark import Lark, Transformer
from lark.exceptions import UnexpectedInput

from core.errors import ParameterSyntaxError
from core.values import check_transform_chain

logger = logging.getLogger(__name__)


class LoopType(str, Enum):
    LIST = "LIST"
    RANGE = "RANGE"
    EXPRANGE = "EXPRANGE"


RANGE_KEYS = ("START", "END", "STEP", "POINTS")
KNOWN_KEYS = frozenset({"LOOPTYPE", "VALUE", "SKIP", "FUNCTION", *RANGE_KEYS})


@dataclass
class SetSpec:
    loop_type: LoopType
    values: List[str] = field(default_factory=list)
    start: Optional[str] = None
    end: Optional[str] = None
    step: Optional[str] = None
    points: Optional[int] = None
    skips: List[str] = field(default_factory=list)
    function_chain: List[str] = field(default_factory=list)
    line_number: int = field(default=0, compare=False)

    def to_sentence(self, cfg):
        """Serializes back into one parameter-file sentence."""
        eq = cfg.keyassignment_char
        words = [f"LOOPTYPE{eq}{self.loop_type.value}"]
        words += [f"VALUE{eq}{value}" for value in self.values]
        for key in RANGE_KEYS:
            value = getattr(self, key.lower())
            if value is not None:
                words.append(f"{key}{eq}{value}")
        words += [f"SKIP{eq}{skip}" for skip in self.skips]
        if self.function_chain:
            words.append(f"FUNCTION{eq}{' '.join(self.function_chain)}")
        return f"{cfg.separation_char} ".join(words)


@dataclass
class ParameterSpec:
    sets: List[SetSpec]

    @property
    def n(self):
        return len(self.sets)


@dataclass
class TemplateAppendix:
    lines: List[str] = field(default_factory=list)


def _rx(char):
    return re.escape(char).replace("/", "\\/")


@lru_cache(maxsize=8)
def _sentence_parser(separator, assignment):
    sep, eq = _rx(separator), _rx(assignment)
    grammar = rf'''
        start: (pair | bare | _SEP)+
        pair: PAIR
        bare: BARE

        PAIR.2: /[A-Za-z_][A-Za-z0-9_]*{eq}("[^"]*"|[^\s{sep}"]*)/
        BARE: /"[^"]*"|[^\s{sep}"{eq}]+/
        _SEP: /{sep}/

        %import common.WS_INLINE
        %ignore WS_INLINE
    '''
    return Lark(grammar, parser="lalr")


class _Words(Transformer):
    """Turns a parsed sentence into ``(key, value)`` words; bare words have no key."""

    def __init__(self, assignment):
        super().__init__()
        self.assignment = assignment

    def start(self, words):
        return list(words)

    def pair(self, tokens):
        key, _, value = str(tokens[0]).partition(self.assignment)
        return key, value

    def bare(self, tokens):
        return None, str(tokens[0])


def split_sentences(text, cfg):
    """Yields ``(line_number, sentence)`` after comments and continuations."""
    pending, first_line = [], None
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not pending and (not line or line.startswith(cfg.comment_char)):
            continue
        if first_line is None:
            first_line = number
        if line.endswith("\\"):
            pending.append(line[:-1])
            continue
        pending.append(line)
        yield first_line, " ".join(part for part in pending if part)
        pending, first_line = [], None
    if pending:
        yield first_line, " ".join(part for part in pending if part)


def tokenize_sentence(sentence, cfg, line_number=None):
    """Splits a sentence into ``(key, value)`` words, folding bare words."""
    parser = _sentence_parser(cfg.separation_char, cfg.keyassignment_char)
    try:
        tree = parser.parse(sentence)
    except UnexpectedInput as e:
        column = getattr(e, "column", "?")
        raise ParameterSyntaxError(f"cannot read sentence near column {column}: {sentence!r}",
                                   line_number) from e
    words = []
    for key, value in _Words(cfg.keyassignment_char).transform(tree):
        if key is not None:
            words.append([key, value])
        elif words:
            words[-1][1] = f"{words[-1][1]} {value}"
        else:
            raise ParameterSyntaxError(f"expected KEY{cfg.keyassignment_char}VALUE, got '{value}'",
                                       line_number)
    return [(key, value) for key, value in words]


def _build_set(words, line_number):
    if not words or words[0][0] != "LOOPTYPE":
        raise ParameterSyntaxError("LOOPTYPE must be the first word of a sentence", line_number)
    try:
        loop_type = LoopType(words[0][1])
    except ValueError:
        raise ParameterSyntaxError(f"unknown LOOPTYPE '{words[0][1]}'", line_number) from None

    spec = SetSpec(loop_type=loop_type, line_number=line_number)
    for key, value in words[1:]:
        if key not in KNOWN_KEYS:
            raise ParameterSyntaxError(f"unknown key '{key}'", line_number)
        if value == "":
            raise ParameterSyntaxError(f"key {key} has an empty value", line_number)
        if key == "LOOPTYPE":
            raise ParameterSyntaxError("LOOPTYPE given twice", line_number)
        if key == "SKIP":
            spec.skips.append(value)
        elif key == "FUNCTION":
            if spec.function_chain:
                raise ParameterSyntaxError("FUNCTION given twice", line_number)
            spec.function_chain = value.split()
            check_transform_chain(spec.function_chain, line_number)
        elif key == "VALUE":
            if loop_type is not LoopType.LIST:
                raise ParameterSyntaxError(f"VALUE is not allowed for LOOPTYPE={loop_type.value}",
                                           line_number)
            spec.values.append(value)
        else:
            if loop_type is LoopType.LIST:
                raise ParameterSyntaxError(f"{key} is not allowed for LOOPTYPE=LIST", line_number)
            attribute = key.lower()
            if getattr(spec, attribute) is not None:
                raise ParameterSyntaxError(f"{key} given twice", line_number)
            if key == "POINTS":
                if not re.fullmatch(r"\+?\d+", value) or int(value) < 1:
                    raise ParameterSyntaxError(f"POINTS must be a positive integer, got '{value}'",
                                               line_number)
                spec.points = int(value)
            else:
                setattr(spec, attribute, value)
    _validate_set(spec)
    return spec


def _validate_set(spec):
    line_number = spec.line_number
    if spec.loop_type is LoopType.LIST:
        if not spec.values:
            raise ParameterSyntaxError("LOOPTYPE=LIST needs at least one VALUE", line_number)
        return
    kind = spec.loop_type.value
    if spec.start is None or spec.end is None:
        raise ParameterSyntaxError(f"LOOPTYPE={kind} needs both START and END", line_number)
    if spec.step is not None and spec.points is not None:
        raise ParameterSyntaxError(f"STEP and POINTS are mutually exclusive in LOOPTYPE={kind}",
                                   line_number)
    if spec.step is None and spec.points is None:
        raise ParameterSyntaxError(f"LOOPTYPE={kind} needs either STEP or POINTS", line_number)


def parse_parameter_file(text, cfg):
    sets = []
    for line_number, sentence in split_sentences(text, cfg):
        words = tokenize_sentence(sentence, cfg, line_number)
        if not words:
            continue
        sets.append(_build_set(words, line_number))
        logger.debug(f"Line {line_number}: {sets[-1]}")
    if not sets:
        raise ParameterSyntaxError("the parameter file declares no sets")
    return ParameterSpec(sets=sets)


def parse_template_appendix(text, cfg):
    lines = [line for line in text.splitlines()
             if line.strip() and not line.lstrip().startswith(cfg.comment_char)]
    return TemplateAppendix(lines=lines)
