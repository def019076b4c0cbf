"""Precision-carrying scalar layer.

Every numerical module works on gmpy2 big floats (``mpfr``) and big
complex values (``mpc``).  A :class:`PrecisionContext` pins the decimal
working precision: user-facing ``digits`` plus internal ``guard`` digits
that absorb cancellation in recurrences.  All arithmetic belonging to a
context must run inside ``with ctx.activate():`` so that gmpy2's
thread-local precision matches the contract.
"""

import math
import re
from dataclasses import dataclass

import gmpy2
from gmpy2 import mpc, mpfr

from .errors import InvalidPrecision, ParseError, TruncationError

MIN_DIGITS = 16

_LOG2_10 = math.log2(10)

# The scalar "types" of the library: plain gmpy2 values, used unwrapped.
BigReal = type(mpfr(0))
BigComplex = type(mpc(0))

_DECIMAL_RE = re.compile(r"(?:\d+(?:\.\d*)?|\.\d+)(?:[eE][+-]?\d+)?")
_RATIONAL_RE = re.compile(r"(\d+)/(\d+)")


@dataclass(frozen=True)
class PrecisionContext:
    """Decimal working precision: ``digits`` visible + ``guard`` internal."""

    digits: int
    guard: int

    @property
    def working_digits(self):
        return self.digits + self.guard

    @property
    def bits(self):
        # a few extra bits so working_digits decimal digits survive the
        # binary <-> decimal roundtrip
        return int(math.ceil(self.working_digits * _LOG2_10)) + 5

    def activate(self):
        """Context manager installing this precision for the current thread."""
        return gmpy2.context(precision=self.bits)

    def eps(self, slack=0):
        """10**-(digits + guard - slack) at working precision."""
        return mpfr(10) ** -(self.working_digits - slack)

    def tol(self, slack):
        """10**-(digits - slack), the user-visible tolerance scale."""
        return mpfr(10) ** -(self.digits - slack)


def make_context(digits):
    """Build a context with the default guard 10 + ceil(log10(digits))."""
    if not isinstance(digits, int) or isinstance(digits, bool):
        raise InvalidPrecision(f"digits must be an integer, got {digits!r}")
    if digits < MIN_DIGITS:
        raise InvalidPrecision(f"digits must be >= {MIN_DIGITS}, got {digits}")
    guard = 10 + math.ceil(math.log10(max(digits, 2)))
    return PrecisionContext(digits=digits, guard=guard)


def _parse_real_part(body, ctx):
    """Decimal literal or integer rational p/q -> mpfr (context active)."""
    m = _RATIONAL_RE.fullmatch(body)
    if m:
        p, q = int(m.group(1)), int(m.group(2))
        if q == 0:
            raise ParseError(f"zero denominator in {body!r}")
        return mpfr(p) / mpfr(q)
    if _DECIMAL_RE.fullmatch(body):
        return mpfr(body)
    raise ParseError(f"malformed numeric literal {body!r}")


def parse_scalar(text, ctx):
    """Parse a decimal, integer rational, or pure-imaginary literal.

    Accepted forms: ``1.5``, ``-2.5e-3``, ``3/2``, ``2i``, ``3/2i``,
    ``i``, ``-i``.  Returns a BigComplex carrying ctx's working
    precision; real inputs come back with zero imaginary part.
    """
    if not isinstance(text, str):
        raise ParseError(f"expected string, got {type(text).__name__}")
    s = text.strip()
    if not s:
        raise ParseError("empty scalar literal")
    sign = 1
    if s[0] in "+-":
        if s[0] == "-":
            sign = -1
        s = s[1:]
    imaginary = s.endswith(("i", "I"))
    if imaginary:
        s = s[:-1]
    with ctx.activate():
        if imaginary and not s:
            mag = mpfr(1)
        else:
            mag = _parse_real_part(s, ctx)
        if sign < 0:
            mag = -mag
        if imaginary:
            return mpc(0, mag)
        return mpc(mag, 0)


def _capacity_digits(x):
    """Decimal digits actually carried by a big float."""
    return int(x.precision / _LOG2_10)


def _render_real(x, out_digits):
    if x == 0:
        return "0.0"
    digs, dexp, _ = x.digits(10, out_digits)
    sign = ""
    if digs.startswith("-"):
        sign = "-"
        digs = digs[1:]
    # value = 0.digs * 10**dexp
    if 0 < dexp <= out_digits:
        if dexp == len(digs):
            body = digs + ".0"
        else:
            body = digs[:dexp] + "." + digs[dexp:]
    elif -3 < dexp <= 0:
        body = "0." + "0" * (-dexp) + digs
    else:
        mantissa = digs[0] + "." + (digs[1:] or "0")
        body = f"{mantissa}e{dexp - 1:+d}"
    return sign + body


def format_scalar(x, out_digits):
    """Round-to-nearest decimal rendering with out_digits significant digits.

    Pure-real values omit the imaginary part; pure-imaginary values render
    as ``<mag>i``.  Raises TruncationError when more digits are requested
    than the value physically stores.
    """
    if not isinstance(out_digits, int) or out_digits < 1:
        raise TruncationError(f"out_digits must be a positive integer, got {out_digits!r}")
    if isinstance(x, BigComplex):
        re_part, im_part = x.real, x.imag
    else:
        re_part, im_part = x, None
    for part in (re_part, im_part):
        if part is not None and not gmpy2.is_finite(part):
            raise TruncationError("cannot format a non-finite value")
        if part is not None and out_digits > _capacity_digits(part):
            raise TruncationError(
                f"{out_digits} digits requested but value carries only "
                f"{_capacity_digits(part)}"
            )
    if im_part is None or im_part == 0:
        return _render_real(re_part, out_digits)
    if re_part == 0:
        return _render_real(im_part, out_digits) + "i"
    im_str = _render_real(abs(im_part), out_digits)
    joiner = "-" if im_part < 0 else "+"
    return _render_real(re_part, out_digits) + joiner + im_str + "i"


def to_real(value, ctx):
    """Coerce int/str/float/mpfr to an mpfr under ctx; reject complex parts."""
    with ctx.activate():
        if isinstance(value, BigComplex):
            if value.imag != 0:
                raise ParseError(f"expected a real value, got {value}")
            return mpfr(value.real)
        if isinstance(value, str):
            z = parse_scalar(value, ctx)
            if z.imag != 0:
                raise ParseError(f"expected a real value, got {value!r}")
            return mpfr(z.real)
        return mpfr(value)
