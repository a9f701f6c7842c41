"""Expands each declared set and walks their Cartesian product.

Points are numbered in odometer order: the last dimension varies fastest,
so point ``j + 1`` differs from point ``j`` only in a suffix of coordinates.
Values that carry wildcards are resolved per point, after the coordinates of
the earlier dimensions are fixed.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from typing import Iterator, List, Tuple

from core.errors import ComputationError, ParameterSyntaxError
from core.grammar import LoopType
from core.values import (Kind, Scalar, apply_transform_chain, arithmetic_context,
                         integral, make_random_stream, number, parse_scalar, render_scalar)
from core.wildcard import DEFAULT_WILDCARD, SubstitutionContext, has_tags, referenced_positions, substitute

logger = logging.getLogger(__name__)

# Relative slack when comparing an inexact range element against END.
RELATIVE_TOLERANCE = Decimal("1e-12")
# Presentation precision for inexact exponential elements.
_PRESENTATION_DIGITS = 15


@dataclass
class SweepContext:
    use_bignum: bool = False
    wildcard: str = DEFAULT_WILDCARD
    rng: object = field(default_factory=make_random_stream)

    @classmethod
    def from_config(cls, cfg, rng=None):
        return cls(use_bignum=bool(cfg.use_bignum), wildcard=cfg.job_template_wildcard,
                   rng=rng if rng is not None else make_random_stream(cfg.rng_seed))


@dataclass
class DimensionSet:
    elements: List[str]
    deferred_mask: List[bool]
    function_chain: List[str] = field(default_factory=list)

    @property
    def size(self):
        return len(self.elements)

    @property
    def deferred(self):
        return any(self.deferred_mask)


@dataclass(frozen=True)
class SweepPoint:
    index: int
    label: str
    coordinates: Tuple[str, ...]


def index_label(j, m):
    return str(j).zfill(len(str(m - 1)))


def _transform(spec, value, context):
    if not spec.function_chain:
        return render_scalar(value)
    return render_scalar(apply_transform_chain(spec.function_chain, value, context.rng,
                                               context.use_bignum))


def _finish(spec, scalars, context):
    """Drops skipped values, applies the transform chain and renders."""
    skips = [parse_scalar(token, context.use_bignum) for token in spec.skips]
    kept = [value for value in scalars if not any(_same_value(value, skip) for skip in skips)]
    if not kept:
        raise ParameterSyntaxError("every element of the set was skipped", spec.line_number)
    elements = [_transform(spec, value, context) for value in kept]
    return DimensionSet(elements=elements, deferred_mask=[False] * len(elements),
                        function_chain=list(spec.function_chain))


def _same_value(value, skip):
    if value.is_numeric and skip.is_numeric:
        return value.as_decimal() == skip.as_decimal()
    return render_scalar(value) == render_scalar(skip)


def expand_list(spec, context=None):
    context = context or SweepContext()
    values = [raw for raw in spec.values if raw not in spec.skips]
    if not values:
        raise ParameterSyntaxError("every VALUE of the set was skipped", spec.line_number)
    elements, mask = [], []
    for raw in values:
        deferred = has_tags(raw, context.wildcard)
        if deferred or not spec.function_chain:
            elements.append(raw)
        else:
            elements.append(_transform(spec, parse_scalar(raw, context.use_bignum), context))
        mask.append(deferred)
    return DimensionSet(elements=elements, deferred_mask=mask, function_chain=list(spec.function_chain))


def _bound(spec, token, context):
    value = parse_scalar(token, context.use_bignum)
    if not value.is_numeric and value.kind is not Kind.CHARACTER:
        raise ParameterSyntaxError(f"'{token}' is neither a number nor a single character",
                                   spec.line_number)
    return value


def _positive_step(spec, context):
    step = parse_scalar(spec.step, context.use_bignum)
    if not step.is_numeric or step.as_decimal() <= 0:
        raise ParameterSyntaxError(f"STEP must be a positive number, got '{spec.step}'", spec.line_number)
    return step


def _within(value, end):
    slack = abs(end) * RELATIVE_TOLERANCE
    return value <= end + slack


def _character_range(spec, start, end, context):
    first, last = ord(start.value), ord(end.value)
    if spec.step is not None:
        step = _positive_step(spec, context)
        if not step.is_exact_integer:
            raise ParameterSyntaxError("a character range needs an integer STEP", spec.line_number)
        if first > last:
            raise ParameterSyntaxError("START is after END", spec.line_number)
        codes = range(first, last + 1, step.value)
    elif spec.points == 1:
        codes = [first]
    else:
        span, gaps = last - first, spec.points - 1
        if span % gaps:
            raise ParameterSyntaxError(f"{spec.points} POINTS do not split {start.value}..{end.value} "
                                       f"into whole characters", spec.line_number)
        codes = [first + j * (span // gaps) for j in range(spec.points)]
    return [Scalar(Kind.CHARACTER, chr(code)) for code in codes]


def _linear_range(spec, start, end, context):
    exact = start.is_exact_integer and end.is_exact_integer
    if spec.step is not None:
        step = _positive_step(spec, context)
        if start.as_decimal() > end.as_decimal():
            raise ParameterSyntaxError("START is after END; descending ranges need POINTS",
                                       spec.line_number)
        if exact and step.is_exact_integer:
            return [number(v, context.use_bignum) for v in range(start.value, end.value + 1, step.value)]
        values = []
        with localcontext(arithmetic_context(context.use_bignum)):
            first, last, increment = start.as_decimal(), end.as_decimal(), step.as_decimal()
            current = first
            while _within(current, last):
                values.append(number(current))
                following = first + len(values) * increment
                if following == current:
                    raise ComputationError(f"STEP={spec.step} is below the precision of "
                                           f"{spec.start}..{spec.end}")
                current = following
        return values

    if spec.points == 1:
        return [start]
    gaps = spec.points - 1
    if exact and (end.value - start.value) % gaps == 0:
        increment = (end.value - start.value) // gaps
        return [number(start.value + j * increment, context.use_bignum) for j in range(spec.points)]
    with localcontext(arithmetic_context(context.use_bignum)):
        first, last = start.as_decimal(), end.as_decimal()
        increment = (last - first) / gaps
        values = [number(first + j * increment) for j in range(gaps)]
    return values + [number(last)]


def expand_range(spec, context=None):
    context = context or SweepContext()
    start, end = _bound(spec, spec.start, context), _bound(spec, spec.end, context)
    if start.kind is Kind.CHARACTER and end.kind is Kind.CHARACTER:
        scalars = _character_range(spec, start, end, context)
    elif start.is_numeric and end.is_numeric:
        scalars = _linear_range(spec, start, end, context)
    else:
        raise ParameterSyntaxError("START and END must both be numbers or both be characters",
                                   spec.line_number)
    return _finish(spec, scalars, context)


def _present(value, context):
    """Snaps near-integers to plain integers and trims inexact powers to presentation precision."""
    nearest = value.to_integral_value()
    if abs(value - nearest) <= abs(value) * RELATIVE_TOLERANCE:
        if not context.use_bignum:
            with localcontext() as ctx:
                ctx.prec = _PRESENTATION_DIGITS
                nearest = +nearest
        return integral(nearest, context.use_bignum)
    if context.use_bignum:
        return number(value)
    with localcontext() as ctx:
        ctx.prec = _PRESENTATION_DIGITS
        return number(+value)


def expand_exprange(spec, context=None):
    context = context or SweepContext()
    start, end = _bound(spec, spec.start, context), _bound(spec, spec.end, context)
    if not (start.is_numeric and end.is_numeric):
        raise ParameterSyntaxError("EXPRANGE bounds must be numbers", spec.line_number)
    first, last = start.as_decimal(), end.as_decimal()
    if first <= 0 or last <= 0:
        raise ParameterSyntaxError("EXPRANGE bounds must be positive", spec.line_number)
    if first > last:
        raise ParameterSyntaxError("START is after END", spec.line_number)

    values = []
    with localcontext(arithmetic_context(context.use_bignum)):
        ten = Decimal(10)
        if spec.step is not None:
            exponent_step = _positive_step(spec, context).as_decimal()
            current = first
            while _within(current, last):
                values.append(current)
                current = first * ten ** (len(values) * exponent_step)
        elif spec.points == 1:
            values.append(first)
        else:
            low, high = first.log10(), last.log10()
            gaps = spec.points - 1
            values = [ten ** (low + j * (high - low) / gaps) for j in range(spec.points)]
        scalars = [_present(v, context) for v in values]
    return _finish(spec, scalars, context)


_EXPANDERS = {
    LoopType.LIST: expand_list,
    LoopType.RANGE: expand_range,
    LoopType.EXPRANGE: expand_exprange,
}


def check_wildcard_order(spec, wildcard=DEFAULT_WILDCARD):
    """A set may only reference coordinates of sets declared before it."""
    for position, set_spec in enumerate(spec.sets, start=1):
        for raw in set_spec.values:
            for referenced in referenced_positions(raw):
                if not 1 <= referenced < position:
                    raise ParameterSyntaxError(
                        f"wildcard ${{{referenced}}} in set {position} must reference an earlier set",
                        set_spec.line_number)


class Sweep:
    """The expanded sets of a parameter spec and the lazy walk over their product."""

    def __init__(self, spec, cfg, rng=None):
        self.context = SweepContext.from_config(cfg, rng)
        check_wildcard_order(spec, self.context.wildcard)
        self.dimensions = [_EXPANDERS[s.loop_type](s, self.context) for s in spec.sets]
        for position, dimension in enumerate(self.dimensions, start=1):
            logger.debug(f"Set {position}: {dimension.size} elements {dimension.elements}")

    @property
    def size(self):
        return math.prod(d.size for d in self.dimensions)

    def _resolve(self, dimension, element, coordinates, label):
        resolved = substitute(element, SubstitutionContext(tuple(coordinates), label), self.context.wildcard)
        if not dimension.function_chain:
            return resolved
        value = parse_scalar(resolved, self.context.use_bignum)
        return render_scalar(apply_transform_chain(dimension.function_chain, value, self.context.rng,
                                                   self.context.use_bignum))

    def points(self) -> Iterator[SweepPoint]:
        m = self.size
        choices = [list(zip(d.elements, d.deferred_mask)) for d in self.dimensions]
        for j, combination in enumerate(itertools.product(*choices)):
            label = index_label(j, m)
            coordinates = []
            for dimension, (element, deferred) in zip(self.dimensions, combination):
                if deferred:
                    element = self._resolve(dimension, element, coordinates, label)
                coordinates.append(element)
            yield SweepPoint(index=j, label=label, coordinates=tuple(coordinates))


def enumerate_points(spec, cfg, rng=None):
    return Sweep(spec, cfg, rng).points()
