"""Integer-valued polynomials in the binomial basis.

A polynomial is stored as integer coefficients c_0..c_d of sum c_k * C(n, k),
which represents exactly the polynomials taking integer values on all
integers; Newton forward differences convert sample values into this basis
without any rational arithmetic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import FormulaParseError, SignatureError


@dataclass(frozen=True)
class IntPolynomial:
    coeffs: tuple[int, ...]  # binomial-basis coefficients, no trailing zeros

    def __post_init__(self):
        if self.coeffs and self.coeffs[-1] == 0:
            raise SignatureError("binomial coefficients carry a trailing zero")

    def __call__(self, n: int) -> int:
        return sum(c * math.comb(n, k) for k, c in enumerate(self.coeffs))

    @property
    def degree(self) -> int:
        """Degree of the polynomial; -1 for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_constant(self) -> bool:
        return len(self.coeffs) <= 1

    def power_coeffs(self) -> tuple[Fraction, ...]:
        """Exact power-basis coefficients (may be non-integer)."""
        out = [Fraction(0)] * max(len(self.coeffs), 1)
        # C(n, k) = n(n-1)...(n-k+1)/k!
        for k, c in enumerate(self.coeffs):
            poly = [Fraction(1)]
            for i in range(k):
                poly = _poly_mul(poly, [Fraction(-i), Fraction(1)])
            scale = Fraction(c, math.factorial(k))
            for i, v in enumerate(poly):
                if i >= len(out):
                    out.extend([Fraction(0)] * (i - len(out) + 1))
                out[i] += scale * v
        while len(out) > 1 and out[-1] == 0:
            out.pop()
        return tuple(out)

    def to_expression(self) -> str:
        """Render as an integer-coefficient expression in n when possible,
        otherwise as a combination of C(n,k) terms."""
        power = self.power_coeffs()
        if all(c.denominator == 1 for c in power):
            return _power_to_expression([int(c) for c in power])
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            term = f"C(n,{k})" if k else "1"
            parts.append(f"{c}*{term}" if k else str(c))
        return " + ".join(parts) if parts else "0"


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _power_to_expression(coeffs: list[int]) -> str:
    if not any(coeffs):
        return "0"
    parts = []
    for k in range(len(coeffs) - 1, -1, -1):
        c = coeffs[k]
        if c == 0:
            continue
        if k == 0:
            body = str(abs(c))
        else:
            var = "n" if k == 1 else f"n^{k}"
            body = var if abs(c) == 1 else f"{abs(c)}*{var}"
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


def from_binomial(coeffs) -> IntPolynomial:
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    return IntPolynomial(tuple(int(c) for c in coeffs))


def from_power(coeffs) -> IntPolynomial:
    """Binomial-basis form of sum coeffs[k] * n^k (integer coefficients)."""
    coeffs = [int(c) for c in coeffs]
    degree = len(coeffs) - 1
    values = [sum(c * n**k for k, c in enumerate(coeffs)) for n in range(max(degree + 1, 1))]
    return interpolate(list(enumerate(values)))


def constant(value: int) -> IntPolynomial:
    return from_binomial([value])


def interpolate(samples) -> IntPolynomial:
    """Newton forward-difference interpolation of samples (n, value) taken at
    consecutive arguments 0, 1, 2, ...; binomial coefficients are the leading
    finite differences and are automatically integers."""
    samples = list(samples)
    if not samples:
        raise SignatureError("interpolation needs at least one sample")
    for i, (n, _) in enumerate(samples):
        if n != i:
            raise SignatureError(f"samples must sit at consecutive n from 0; got n={n} at index {i}")
    values = [int(v) for _, v in samples]
    coeffs = []
    row = values
    while row:
        coeffs.append(row[0])
        row = [b - a for a, b in zip(row, row[1:])]
    return from_binomial(coeffs)


# ---------------------------------------------------------------------------
# Parsing of integer polynomial expressions in n

_POLY_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<n>n)|(?P<op>[-+*^()])|(?P<C>C))")


class _PolyParser:
    """Grammar: expr := term (('+'|'-') term)*; term := factor ('*' factor)*;
    factor := base ('^' INT)?; base := INT | 'n' | '(' expr ')' | '-' factor."""

    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while pos < len(text):
            m = _POLY_TOKEN.match(text, pos)
            if m is None or m.end() == m.start():
                stripped = text[pos:].lstrip()
                if not stripped:
                    break
                raise FormulaParseError(
                    f"unexpected character {stripped[0]!r} in polynomial",
                    len(text) - len(stripped) + 1,
                )
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind) + 1))
            pos = m.end()
        self.pos = 0

    def peek(self):
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return ("eof", "", len(self.text) + 1)

    def next(self):
        tok = self.peek()
        self.pos += 1
        return tok

    def parse(self):
        value = self.expr()
        tok = self.peek()
        if tok[0] != "eof":
            raise FormulaParseError("unexpected trailing input in polynomial", tok[2])
        return value

    def expr(self):
        value = self.term()
        while self.peek()[1] in ("+", "-"):
            op = self.next()[1]
            rhs = self.term()
            value = _add(value, rhs) if op == "+" else _sub(value, rhs)
        return value

    def term(self):
        value = self.factor()
        while self.peek()[1] == "*":
            self.next()
            value = _mul(value, self.factor())
        return value

    def factor(self):
        base = self.base()
        if self.peek()[1] == "^":
            self.next()
            tok = self.next()
            if tok[0] != "int":
                raise FormulaParseError("exponent must be an integer literal", tok[2])
            result = [1]
            for _ in range(int(tok[1])):
                result = _mul(result, base)
            return result
        return base

    def base(self):
        kind, value, offset = self.next()
        if kind == "int":
            return [int(value)]
        if kind == "n":
            return [0, 1]
        if value == "(":
            inner = self.expr()
            tok = self.next()
            if tok[1] != ")":
                raise FormulaParseError("expected ')'", tok[2])
            return inner
        if value == "-":
            return _sub([0], self.factor())
        raise FormulaParseError("expected a polynomial term", offset)


def _add(a, b):
    out = [0] * max(len(a), len(b))
    for i, v in enumerate(a):
        out[i] += v
    for i, v in enumerate(b):
        out[i] += v
    return out


def _sub(a, b):
    return _add(a, [-v for v in b])


def _mul(a, b):
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def parse_polynomial(text: str) -> IntPolynomial:
    """Parse an integer-coefficient expression in n ("n", "2*n+1", "n^2")."""
    power = _PolyParser(text).parse()
    while len(power) > 1 and power[-1] == 0:
        power.pop()
    return from_power(power)
