"""Model definition files.

    # comment
    name nicolai
    dimension 1
    period 2
    range 3
    pattern {-1, 0, 1}: a(1) a+(0) a(-1)
    suite nilpotent susy-algebra spectrum
    param region = -3..3
    param time = 0.001

Regions are `{s, s, ...}` with sites `k` or `(k, l, ...)`, or `a..b` on a
chain. Polynomials use `a(i)`, `a+(i)`, `*` or juxtaposition for products,
`+`/`-`, parentheses, integers, decimals, fractions `p/q`, `i` and complex
literals `(re,im)`. Every number is read exactly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .car import CarPolynomial, Region, format_polynomial, site
from .exact import GaussRational
from .supercharge import AssignmentError, ChargeAssignment

CHECKS = ("nilpotent", "leibniz", "susy-algebra", "spectrum", "states", "dynamics", "face", "affiliation", "case2")
CASE_I = CHECKS[:-1]

PARAMS = {
    "region": "region",
    "state-sizes": "ints",
    "face-region": "region",
    "time": "float",
    "tol": "float",
    "order": "int",
    "seed": "int",
    "samples": "int",
    "decompositions": "int",
    "modes": "int",
    "cutoff": "int",
    "grid": "int",
    "dp": "float",
    "amplitude": "float",
    "kappa": "float",
    "periods": "int",
}


class ModelError(ValueError):
    """Lexical, syntax or semantic error at a 1-based line and column."""

    def __init__(self, kind: str, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {kind} error: {message}")
        self.kind = kind
        self.message = message
        self.line = line
        self.col = col


# tokens

_TOKEN = re.compile(
    r"""
    (?P<ws>[ \t]+)
  | (?P<num>\d+\.(?!\.)\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\d+)
  | (?P<cre>a\+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_\-]*)
  | (?P<range>\.\.)
  | (?P<op>[()+\-*/,{}:=])
    """,
    re.VERBOSE,
)


@dataclass
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str, line: int = 1, col0: int = 1) -> list[Token]:
    out = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ModelError("lexical", f"unexpected character {text[pos]!r}", line, col0 + pos)
        kind = m.lastgroup
        if kind != "ws":
            out.append(Token(kind, m.group(), line, col0 + pos))
        pos = m.end()
    out.append(Token("end", "", line, col0 + len(text)))
    return out


class _Cursor:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def take(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def accept(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind in ("op", "range"):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not (self.tok.text == text and self.tok.kind in ("op", "range")):
            self.error(f"expected {text!r}")
        return self.take()

    def error(self, msg: str):
        t = self.tok
        found = "end of line" if t.kind == "end" else repr(t.text)
        raise ModelError("syntax", f"{msg}, found {found}", t.line, t.col)


# numbers, sites, regions

def _number(c: _Cursor) -> Fraction:
    t = c.tok
    if t.kind != "num":
        c.error("expected a number")
    c.take()
    val = Fraction(t.text)
    if c.tok.text == "/" and c.peek().kind == "num":
        c.take()
        den = Fraction(c.take().text)
        if den == 0:
            raise ModelError("semantic", "division by zero", t.line, t.col)
        val /= den
    return val


def _signed_number(c: _Cursor) -> Fraction:
    sign = 1
    while c.tok.text in "+-" and c.tok.kind == "op":
        sign = -sign if c.take().text == "-" else sign
    return sign * _number(c)


def _integer(c: _Cursor) -> int:
    sign = 1
    if c.tok.kind == "op" and c.tok.text in "+-":
        sign = -1 if c.take().text == "-" else 1
    t = c.tok
    if t.kind != "num" or not t.text.isdigit():
        c.error("expected an integer")
    c.take()
    return sign * int(t.text)


def _site_body(c: _Cursor) -> tuple:
    coords = [_integer(c)]
    while c.accept(","):
        coords.append(_integer(c))
    return tuple(coords)


def _site(c: _Cursor) -> tuple:
    if c.accept("("):
        s = _site_body(c)
        c.expect(")")
        return s
    return (_integer(c),)


def _region(c: _Cursor) -> Region:
    if c.accept("{"):
        sites = []
        if not c.accept("}"):
            sites.append(_site(c))
            while c.accept(","):
                sites.append(_site(c))
            c.expect("}")
        dims = {len(s) for s in sites}
        if len(dims) > 1:
            t = c.toks[c.i - 1]
            raise ModelError("semantic", "region mixes sites of different dimensions", t.line, t.col)
        return Region(sites)
    lo = _integer(c)
    c.expect("..")
    hi = _integer(c)
    if hi < lo:
        t = c.toks[c.i - 1]
        raise ModelError("semantic", f"empty interval {lo}..{hi}", t.line, t.col)
    return Region.interval(lo, hi)


# polynomials

def _is_complex_literal(c: _Cursor) -> bool:
    """'(' [sign] num ['/' num] ',' [sign] num ['/' num] ')' starting at the cursor."""
    j = c.i + 1
    toks = c.toks

    def part(j):
        while toks[j].kind == "op" and toks[j].text in "+-":
            j += 1
        if toks[j].kind != "num":
            return None
        j += 1
        if toks[j].text == "/" and toks[j + 1].kind == "num":
            j += 2
        return j

    j = part(j)
    if j is None or toks[j].text != ",":
        return False
    j = part(j + 1)
    return j is not None and toks[j].text == ")"


def _factor(c: _Cursor) -> CarPolynomial:
    t = c.tok
    if t.kind == "num":
        return CarPolynomial.scalar(GaussRational.coerce(_number(c)))
    if t.kind == "cre" or (t.kind == "ident" and t.text == "a"):
        c.take()
        c.expect("(")
        s = _site_body(c)
        c.expect(")")
        return CarPolynomial.create(s) if t.kind == "cre" else CarPolynomial.annihilate(s)
    if t.kind == "ident" and t.text == "i":
        c.take()
        return CarPolynomial.scalar(GaussRational(0, 1))
    if t.text == "(":
        if _is_complex_literal(c):
            c.take()
            re_ = _signed_number(c)
            c.expect(",")
            im_ = _signed_number(c)
            c.expect(")")
            return CarPolynomial.scalar(GaussRational.coerce(re_) + GaussRational.coerce(im_) * GaussRational(0, 1))
        c.take()
        inner = _expr(c)
        c.expect(")")
        return inner
    c.error("expected a(i), a+(i), a number or '('")


def _starts_factor(t: Token) -> bool:
    return t.kind in ("num", "cre") or (t.kind == "ident" and t.text in ("a", "i")) or t.text == "("


def _term(c: _Cursor) -> CarPolynomial:
    out = _factor(c)
    while True:
        if c.accept("*"):
            out = out * _factor(c)
        elif _starts_factor(c.tok):
            out = out * _factor(c)
        else:
            return out


def _expr(c: _Cursor) -> CarPolynomial:
    sign = 1
    if c.tok.kind == "op" and c.tok.text in "+-":
        sign = -1 if c.take().text == "-" else 1
    out = _term(c)
    if sign < 0:
        out = -out
    while c.tok.kind == "op" and c.tok.text in "+-":
        op = c.take().text
        t = _term(c)
        out = out + t if op == "+" else out - t
    return out


def parse_polynomial(text: str, line: int = 1, col: int = 1) -> CarPolynomial:
    c = _Cursor(tokenize(text, line, col))
    if c.tok.kind == "end":
        c.error("expected a polynomial")
    p = _expr(c)
    if c.tok.kind != "end":
        c.error("unexpected trailing input")
    return p


def parse_region(text: str, line: int = 1, col: int = 1) -> Region:
    c = _Cursor(tokenize(text, line, col))
    r = _region(c)
    if c.tok.kind != "end":
        c.error("unexpected trailing input")
    return r


# model files

@dataclass
class PatternSpec:
    region: Region
    polynomial: CarPolynomial
    line: int = 0


@dataclass
class ModelFile:
    name: str = "model"
    dimension: int = 1
    period: tuple | None = None
    range: int = 0
    patterns: list = field(default_factory=list)
    suite: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def assignment(self) -> ChargeAssignment:
        return ChargeAssignment(
            [(p.region, p.polynomial) for p in self.patterns],
            declared_range=self.range,
            period=self.period,
            dimension=self.dimension,
            name=self.name,
        )

    def key(self) -> tuple:
        pats = sorted((tuple(p.region.sorted()), str(p.polynomial)) for p in self.patterns)
        params = tuple(sorted((k, _param_text(v)) for k, v in self.params.items()))
        return (self.name, self.dimension, self.period, self.range, tuple(pats), tuple(self.suite), params)

    def __eq__(self, other) -> bool:
        return isinstance(other, ModelFile) and self.key() == other.key()

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "dimension": self.dimension,
            "period": list(self.period) if self.period else None,
            "range": self.range,
            "patterns": [{"region": [list(s) for s in p.region.sorted()], "polynomial": str(p.polynomial)} for p in self.patterns],
            "suite": list(self.suite),
            "params": {k: _param_text(v) for k, v in sorted(self.params.items())},
        }


def _format_region(r: Region) -> str:
    pts = r.sorted()
    if pts and len(pts[0]) == 1:
        lo, hi = pts[0][0], pts[-1][0]
        if len(pts) == hi - lo + 1:
            return f"{lo}..{hi}"
        return "{" + ", ".join(str(s[0]) for s in pts) + "}"
    return "{" + ", ".join("(" + ", ".join(map(str, s)) + ")" for s in pts) + "}"


def _param_text(v) -> str:
    if isinstance(v, Region):
        return _format_region(v)
    if isinstance(v, (list, tuple)):
        return " ".join(map(str, v))
    return repr(v) if isinstance(v, float) else str(v)


def _parse_param(kind: str, text: str, line: int, col: int):
    try:
        if kind == "region":
            return parse_region(text, line, col)
        if kind == "ints":
            return [int(x) for x in text.replace(",", " ").split()]
        if kind == "int":
            return int(text)
        return float(text)
    except ModelError:
        raise
    except ValueError:
        raise ModelError("syntax", f"cannot read {text!r} as {kind}", line, col) from None


def parse_model(text: str) -> ModelFile:
    model = ModelFile()
    seen = set()
    header_pos = {}
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        stripped = body.lstrip()
        if not stripped:
            continue
        indent = len(body) - len(stripped)
        key, _, rest = stripped.partition(" ")
        rest_col = indent + len(key) + 2 + (len(rest) - len(rest.lstrip()))
        rest = rest.strip()
        col = indent + 1
        if key in ("name", "dimension", "period", "range"):
            if key in seen:
                raise ModelError("syntax", f"duplicate {key!r}", ln, col)
            seen.add(key)
            header_pos[key] = (ln, col)
            if not rest:
                raise ModelError("syntax", f"{key!r} needs a value", ln, rest_col)
            if key == "name":
                model.name = rest
            elif key == "period":
                if rest == "none":
                    model.period = None
                else:
                    try:
                        model.period = tuple(int(x) for x in rest.replace(",", " ").split())
                    except ValueError:
                        raise ModelError("syntax", f"bad period {rest!r}", ln, rest_col) from None
            else:
                try:
                    setattr(model, key, int(rest))
                except ValueError:
                    raise ModelError("syntax", f"{key} must be an integer", ln, rest_col) from None
        elif key == "pattern":
            colon = body.find(":", indent)
            if colon < 0:
                raise ModelError("syntax", "pattern needs 'region: polynomial'", ln, len(body) + 1)
            reg_text = body[indent + len("pattern") : colon]
            reg = parse_region(reg_text, ln, indent + len("pattern") + 1)
            poly_text = body[colon + 1 :]
            poly = parse_polynomial(poly_text, ln, colon + 2)
            model.patterns.append(PatternSpec(reg, poly, ln))
            _check_pattern(model, reg, poly, ln, colon + 2)
        elif key == "suite":
            names = rest.replace(",", " ").split()
            for nm in names:
                if nm == "all":
                    model.suite.extend(CASE_I)
                elif nm not in CHECKS:
                    raise ModelError("semantic", f"unknown check {nm!r}", ln, body.find(nm) + 1)
                else:
                    model.suite.append(nm)
        elif key == "param":
            pk, eq, pv = rest.partition("=")
            pk, pv = pk.strip(), pv.strip()
            if not eq:
                raise ModelError("syntax", "param needs 'key = value'", ln, rest_col)
            if pk not in PARAMS:
                raise ModelError("semantic", f"unknown parameter {pk!r}", ln, rest_col)
            model.params[pk] = _parse_param(PARAMS[pk], pv, ln, body.find("=") + 2)
        else:
            raise ModelError("syntax", f"unknown keyword {key!r}", ln, col)
    if model.period is not None and len(model.period) != model.dimension:
        ln, col = header_pos.get("period", (1, 1))
        raise ModelError("semantic", f"period has {len(model.period)} entries for dimension {model.dimension}", ln, col)
    if model.period is not None and min(model.period) < 1:
        ln, col = header_pos.get("period", (1, 1))
        raise ModelError("semantic", "period entries must be positive", ln, col)
    try:
        model.assignment()
    except AssignmentError as e:
        raise ModelError("semantic", str(e), 1, 1) from None
    return model


def _check_pattern(model: ModelFile, reg: Region, poly: CarPolynomial, ln: int, col: int) -> None:
    if len(reg) == 0:
        raise ModelError("semantic", "pattern region is empty", ln, col)
    if reg.dimension != model.dimension:
        raise ModelError("semantic", f"pattern region has dimension {reg.dimension}, model has {model.dimension}", ln, col)
    if poly.is_zero():
        return
    if not poly.is_odd():
        what = "even parity" if poly.is_even() else "mixed parity"
        raise ModelError("semantic", f"pattern polynomial has {what}; charges must be odd", ln, col)
    outside = [s for s in poly.support().sorted() if s not in reg.sites]
    if outside:
        raise ModelError("semantic", f"site {_fmt_site(outside[0])} lies outside the pattern region {_format_region(reg)}", ln, col)
    if reg.diameter() > model.range:
        raise ModelError("semantic", f"pattern region has diameter {reg.diameter()} > range {model.range}", ln, col)


def _fmt_site(s) -> str:
    s = site(s)
    return str(s[0]) if len(s) == 1 else "(" + ",".join(map(str, s)) + ")"


def serialize_model(model: ModelFile) -> str:
    lines = [f"name {model.name}", f"dimension {model.dimension}"]
    lines.append("period " + (" ".join(map(str, model.period)) if model.period else "none"))
    lines.append(f"range {model.range}")
    for p in model.patterns:
        lines.append(f"pattern {_format_region(p.region)}: {format_polynomial(p.polynomial)}")
    if model.suite:
        lines.append("suite " + " ".join(model.suite))
    for k, v in model.params.items():
        lines.append(f"param {k} = {_param_text(v)}")
    return "\n".join(lines) + "\n"


def model_from_assignment(psi: ChargeAssignment, suite=(), params=None) -> ModelFile:
    pats = [PatternSpec(p.region, p.polynomial) for p in psi.patterns]
    return ModelFile(psi.name or "model", psi.dimension, psi.period, psi.declared_range, pats, list(suite), dict(params or {}))
