"""Sweep values: classification, exact rendering and the transform library.

Numbers are carried exactly: integers as ``int`` and everything else numeric
as ``Decimal``. Binary floating point only appears inside the transcendental
transforms, whose results come back as 15-significant-digit decimals.
"""
import logging
import math
import random
import re
from dataclasses import dataclass, field
from decimal import MAX_EMAX, MIN_EMIN, ROUND_DOWN, Context, Decimal, InvalidOperation
from enum import Enum
from typing import Optional, Union

from core.errors import ComputationError, ParameterSyntaxError

logger = logging.getLogger(__name__)

INT64_MAX = 2 ** 63 - 1
SIGNIFICANT_DIGITS = 15

_INTEGER = re.compile(r"[+-]?\d+")
_DECIMAL = re.compile(r"[+-]?(?:\d+\.\d*|\.\d+)")
_SCIENTIFIC = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)[eE][+-]?\d+")

# Rounds like a double printed with 15 significant digits.
_FLOAT_CONTEXT = Context(prec=SIGNIFICANT_DIGITS)
# Random draws stay strictly below their bound.
_DRAW_CONTEXT = Context(prec=SIGNIFICANT_DIGITS, rounding=ROUND_DOWN)
_WIDE_CONTEXT = Context(prec=400, Emax=MAX_EMAX, Emin=MIN_EMIN)


def arithmetic_context(use_bignum):
    """Decimal context used while expanding ranges."""
    return _WIDE_CONTEXT if use_bignum else Context(prec=34)


class Kind(str, Enum):
    INTEGER = "integer"
    DECIMAL = "decimal"
    SCIENTIFIC = "scientific"
    CHARACTER = "character"
    BIGNUM = "bignum"
    TEXT = "text"


NUMERIC_KINDS = frozenset({Kind.INTEGER, Kind.DECIMAL, Kind.SCIENTIFIC, Kind.BIGNUM})


@dataclass(frozen=True)
class Scalar:
    kind: Kind
    value: Union[int, Decimal, str]
    # Digits as written, for bignum tokens whose value alone would lose them
    spelling: Optional[str] = field(default=None, compare=False)

    @property
    def is_numeric(self):
        return self.kind in NUMERIC_KINDS

    @property
    def is_exact_integer(self):
        return self.kind in (Kind.INTEGER, Kind.BIGNUM)

    def as_decimal(self):
        return Decimal(self.value)

    def __str__(self):
        return render_scalar(self)


def number(value, use_bignum=False):
    """Wraps a computed ``int``/``Decimal`` into a Scalar of the right kind."""
    if isinstance(value, int):
        if use_bignum:
            return Scalar(Kind.BIGNUM, value)
        if abs(value) <= INT64_MAX:
            return Scalar(Kind.INTEGER, value)
        # Too wide for a machine integer: precision collapses
        return Scalar(Kind.SCIENTIFIC, _FLOAT_CONTEXT.create_decimal(value))
    return Scalar(Kind.DECIMAL, value)


def integral(value, use_bignum=False):
    """An integral result that renders as plain digits whatever its width."""
    return Scalar(Kind.BIGNUM if use_bignum else Kind.INTEGER, int(value))


def text(value):
    return Scalar(Kind.CHARACTER if len(value) == 1 else Kind.TEXT, value)


def parse_scalar(token, use_bignum=False):
    if _INTEGER.fullmatch(token):
        if use_bignum:
            return Scalar(Kind.BIGNUM, int(token), spelling=token)
        return number(int(token))
    if _DECIMAL.fullmatch(token):
        return Scalar(Kind.DECIMAL, Decimal(token))
    if _SCIENTIFIC.fullmatch(token):
        return Scalar(Kind.SCIENTIFIC, Decimal(token))
    return text(token)


def render_scalar(v):
    if v.spelling is not None:
        return v.spelling
    if v.kind in (Kind.INTEGER, Kind.BIGNUM):
        return str(v.value)
    if v.kind in (Kind.DECIMAL, Kind.SCIENTIFIC):
        return render_decimal(v.value)
    return v.value


def render_decimal(d):
    if not d.is_finite():
        return {"Infinity": "inf", "-Infinity": "-inf"}.get(str(d), "nan")
    if d.is_zero():
        return "0"
    d = d.normalize(_WIDE_CONTEXT)
    exponent = d.adjusted()
    if exponent < SIGNIFICANT_DIGITS and d == d.to_integral_value():
        return str(int(d))
    if -5 <= exponent < SIGNIFICANT_DIGITS:
        return format(d, "f")
    mantissa = d.scaleb(-exponent, _WIDE_CONTEXT)
    sign = "-" if exponent < 0 else "+"
    return f"{format(mantissa, 'f')}e{sign}{abs(exponent):02d}"


def make_random_stream(seed=None):
    """The process-wide random stream behind ``rand``/``srand``."""
    return random.Random(seed)


# --- transform library -------------------------------------------------------

def _numeric(name, v, use_bignum):
    if v.is_numeric:
        return v.value
    parsed = parse_scalar(v.value, use_bignum)
    if parsed.is_numeric:
        return parsed.value
    raise ComputationError(f"FUNCTION {name} needs a numeric argument, got '{v.value}'")


def _from_float(result):
    return Scalar(Kind.DECIMAL, _FLOAT_CONTEXT.create_decimal_from_float(result))


def _transcendental(fn):
    def apply(name, v, rng, use_bignum):
        x = float(_numeric(name, v, use_bignum))
        try:
            return _from_float(fn(x))
        except (ValueError, OverflowError) as e:
            raise ComputationError(f"FUNCTION {name} is undefined for {render_scalar(v)}: {e}") from e
    return apply


def _abs(name, v, rng, use_bignum):
    x = _numeric(name, v, use_bignum)
    if isinstance(x, int):
        return number(abs(x), use_bignum)
    kind = v.kind if v.kind in (Kind.DECIMAL, Kind.SCIENTIFIC) else Kind.DECIMAL
    return Scalar(kind, x.copy_abs())


def _int(name, v, rng, use_bignum):
    x = _numeric(name, v, use_bignum)
    try:
        return number(int(x), use_bignum)
    except (ValueError, OverflowError, InvalidOperation) as e:
        raise ComputationError(f"FUNCTION int is undefined for {render_scalar(v)}") from e


def _parse_based(name, s, default_base):
    s = s.strip().lower().replace("_", "")
    base = default_base
    for prefix, prefix_base in (("0x", 16), ("x", 16), ("0b", 2), ("b", 2), ("0o", 8), ("o", 8)):
        if s.startswith(prefix) and (default_base == 8 or prefix_base == 16):
            s, base = s[len(prefix):], prefix_base
            break
    if not s:
        return 0
    try:
        return int(s, base)
    except ValueError as e:
        raise ComputationError(f"FUNCTION {name} cannot read '{s}' as a base-{base} number") from e


def _hex(name, v, rng, use_bignum):
    return number(_parse_based(name, render_scalar(v), 16), use_bignum)


def _oct(name, v, rng, use_bignum):
    return number(_parse_based(name, render_scalar(v), 8), use_bignum)


def _rand(name, v, rng, use_bignum):
    upper = float(_numeric(name, v, use_bignum)) or 1.0
    draw = rng.random() * upper
    if abs(draw) >= abs(upper):
        draw = math.nextafter(upper, 0.0)
    return Scalar(Kind.DECIMAL, _DRAW_CONTEXT.create_decimal_from_float(draw))


def _srand(name, v, rng, use_bignum):
    seed = int(_numeric(name, v, use_bignum))
    rng.seed(seed)
    logger.debug(f"Random stream reseeded with {seed}")
    return v


def _chr(name, v, rng, use_bignum):
    code = int(_numeric(name, v, use_bignum))
    try:
        return text(chr(code))
    except (ValueError, OverflowError) as e:
        raise ComputationError(f"FUNCTION chr is undefined for {code}") from e


def _ord(name, v, rng, use_bignum):
    s = render_scalar(v)
    return number(ord(s[0]) if s else 0, use_bignum)


def _length(name, v, rng, use_bignum):
    return number(len(render_scalar(v)), use_bignum)


def _string(fn):
    def apply(name, v, rng, use_bignum):
        return text(fn(render_scalar(v)))
    return apply


def _chomp(s):
    return s[:-1] if s.endswith("\n") else s


TRANSFORMS = {
    "abs": _abs,
    "atan2": _transcendental(lambda x: math.atan2(x, 1.0)),
    "cos": _transcendental(math.cos),
    "exp": _transcendental(math.exp),
    "hex": _hex,
    "int": _int,
    "log": _transcendental(math.log),
    "oct": _oct,
    "rand": _rand,
    "sin": _transcendental(math.sin),
    "sqrt": _transcendental(math.sqrt),
    "srand": _srand,
    "chomp": _string(_chomp),
    "chop": _string(lambda s: s[:-1]),
    "chr": _chr,
    "lc": _string(str.lower),
    "lcfirst": _string(lambda s: s[:1].lower() + s[1:]),
    "length": _length,
    "ord": _ord,
    "reverse": _string(lambda s: s[::-1]),
    "uc": _string(str.upper),
    "ucfirst": _string(lambda s: s[:1].upper() + s[1:]),
}

UNSUPPORTED_TRANSFORMS = {
    "crypt": "it needs a salt as second argument",
}


def check_transform_chain(chain, line_number=None):
    for name in chain:
        if name in UNSUPPORTED_TRANSFORMS:
            raise ParameterSyntaxError(
                f"FUNCTION {name} is not supported: {UNSUPPORTED_TRANSFORMS[name]}", line_number)
        if name not in TRANSFORMS:
            raise ParameterSyntaxError(f"unknown FUNCTION '{name}'", line_number)


def apply_transform_chain(chain, v, rng, use_bignum=False):
    """Applies ``chain`` as a composition: ``[int, rand]`` is ``int(rand(v))``."""
    check_transform_chain(chain)
    for name in reversed(chain):
        v = TRANSFORMS[name](name, v, rng, use_bignum)
    return v
