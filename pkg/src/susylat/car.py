"""Symbolic CAR algebra on finite subsets of the integer lattice.

Polynomials are kept in a canonical normal-ordered form: every monomial is a
product of creators followed by annihilators, each group sorted by the
lexicographic site order, with no repeated factor.  Products are normal
ordered with Wick's theorem, so coefficients stay exact whenever the inputs
are exact.
"""

from __future__ import annotations

import itertools
from functools import lru_cache
from typing import Iterable, Iterator, Mapping, Sequence

from .exact import GaussRational, coerce

Site = tuple
Monomial = tuple  # (creators, annihilators), each a sorted tuple of sites

IDENTITY_MONOMIAL: Monomial = ((), ())


def site(x) -> Site:
    """Normalize an int or integer sequence to a site tuple."""
    if isinstance(x, tuple) and all(isinstance(c, int) for c in x):
        return x
    if isinstance(x, int):
        return (x,)
    return tuple(int(c) for c in x)


def distance(x: Site, y: Site) -> int:
    return max(abs(a - b) for a, b in zip(x, y)) if x else 0


class Region:
    """Finite set of lattice sites of a fixed dimension."""

    __slots__ = ("sites", "_sorted")

    def __init__(self, sites: Iterable = ()):
        self.sites = frozenset(site(s) for s in sites)
        self._sorted = None

    @classmethod
    def interval(cls, lo: int, hi: int) -> "Region":
        return cls((i,) for i in range(lo, hi + 1))

    @classmethod
    def cube(cls, l: int, dim: int) -> "Region":
        """Sites with all coordinates in [-l, l]."""
        return cls(itertools.product(range(-l, l + 1), repeat=dim))

    @property
    def dimension(self) -> int | None:
        for s in self.sites:
            return len(s)
        return None

    def sorted(self) -> list[Site]:
        if self._sorted is None:
            self._sorted = sorted(self.sites)
        return self._sorted

    def enlarge(self, r: int) -> "Region":
        """All sites within max-norm distance r of the region."""
        if r < 0:
            raise ValueError("enlargement radius must be non-negative")
        if r == 0 or not self.sites:
            return self
        dim = self.dimension
        offsets = list(itertools.product(range(-r, r + 1), repeat=dim))
        out = set()
        for s in self.sites:
            for o in offsets:
                out.add(tuple(a + b for a, b in zip(s, o)))
        return Region(out)

    def diameter(self) -> int:
        if len(self.sites) <= 1:
            return 0
        dim = self.dimension
        return max(max(s[k] for s in self.sites) - min(s[k] for s in self.sites) for k in range(dim))

    def translate(self, shift: Sequence[int]) -> "Region":
        return Region(tuple(a + b for a, b in zip(s, shift)) for s in self.sites)

    def union(self, other: "Region | Iterable") -> "Region":
        o = other.sites if isinstance(other, Region) else frozenset(site(s) for s in other)
        return Region(self.sites | o)

    def intersects(self, other: "Region") -> bool:
        return not self.sites.isdisjoint(other.sites)

    def issubset(self, other: "Region") -> bool:
        return self.sites <= other.sites

    def __contains__(self, s) -> bool:
        return site(s) in self.sites

    def __iter__(self) -> Iterator[Site]:
        return iter(self.sorted())

    def __len__(self) -> int:
        return len(self.sites)

    def __eq__(self, other) -> bool:
        if isinstance(other, Region):
            return self.sites == other.sites
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.sites)

    def __repr__(self) -> str:
        pts = self.sorted()
        if pts and len(pts[0]) == 1:
            xs = [p[0] for p in pts]
            if xs == list(range(xs[0], xs[-1] + 1)) and len(xs) > 2:
                return f"Region({xs[0]}..{xs[-1]})"
            return f"Region({xs})"
        return f"Region({pts})"


def _merge_sign(xs: Sequence[Site], ys: Sequence[Site]) -> int:
    """Sign of sorting the concatenation of two sorted lists; 0 on a repeat."""
    inv = 0
    j = 0
    ny = len(ys)
    for x in xs:
        while j < ny and ys[j] < x:
            j += 1
        if j < ny and ys[j] == x:
            return 0
        inv += j
    return -1 if inv & 1 else 1


def _inversion_parity(seq: Sequence[int]) -> int:
    inv = 0
    n = len(seq)
    for i in range(n):
        si = seq[i]
        for j in range(i + 1, n):
            if seq[j] < si:
                inv += 1
    return inv & 1


@lru_cache(maxsize=1 << 20)
def _monomial_product(m1: Monomial, m2: Monomial) -> tuple:
    """Normal-ordered expansion of m1*m2 as a tuple of (sign, monomial)."""
    c1, a1 = m1
    c2, a2 = m2
    common = set(a1).intersection(c2)
    out = []
    p = len(a1)
    a1_pos = {s: i for i, s in enumerate(a1)}
    c2_pos = {s: i for i, s in enumerate(c2)}
    ks = sorted(common)
    for r in range(len(ks) + 1):
        for k in itertools.combinations(ks, r):
            kset = set(k)
            c2_rest = tuple(s for s in c2 if s not in kset)
            a1_rest = tuple(s for s in a1 if s not in kset)
            # reorder the middle word a1 c2 into contracted pairs, then c2_rest, then a1_rest
            target = []
            for s in k:
                target.append(a1_pos[s])
                target.append(p + c2_pos[s])
            target.extend(p + c2_pos[s] for s in c2_rest)
            target.extend(a1_pos[s] for s in a1_rest)
            sign = -1 if _inversion_parity(target) else 1
            sc = _merge_sign(c1, c2_rest)
            if sc == 0:
                continue
            sa = _merge_sign(a1_rest, a2)
            if sa == 0:
                continue
            creators = tuple(sorted(c1 + c2_rest))
            annihilators = tuple(sorted(a1_rest + a2))
            out.append((sign * sc * sa, (creators, annihilators)))
    return tuple(out)


def _clean(terms: dict) -> dict:
    return {m: c for m, c in terms.items() if c != 0}


class CarPolynomial:
    """Immutable finite linear combination of canonical CAR monomials."""

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping | None = None, *, _trusted: bool = False):
        if terms is None:
            terms = {}
        if _trusted:
            self.terms = terms
        else:
            clean = {}
            for m, c in terms.items():
                c = coerce(c)
                if c != 0:
                    clean[_check_monomial(m)] = c
            self.terms = clean
        self._hash = None

    # constructors
    @classmethod
    def zero(cls) -> "CarPolynomial":
        return cls({}, _trusted=True)

    @classmethod
    def sum(cls, parts: Iterable["CarPolynomial"]) -> "CarPolynomial":
        """Sum of many polynomials in one pass."""
        out: dict = {}
        for p in parts:
            for m, c in p.terms.items():
                v = out.get(m)
                out[m] = c if v is None else v + c
        return cls(_clean(out), _trusted=True)

    @classmethod
    def identity(cls) -> "CarPolynomial":
        return cls({IDENTITY_MONOMIAL: GaussRational(1)}, _trusted=True)

    @classmethod
    def scalar(cls, c) -> "CarPolynomial":
        c = coerce(c)
        return cls({IDENTITY_MONOMIAL: c} if c != 0 else {}, _trusted=True)

    @classmethod
    def create(cls, s) -> "CarPolynomial":
        return cls({((site(s),), ()): GaussRational(1)}, _trusted=True)

    @classmethod
    def annihilate(cls, s) -> "CarPolynomial":
        return cls({((), (site(s),)): GaussRational(1)}, _trusted=True)

    # basic queries
    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self) -> int:
        return len(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def is_exact(self) -> bool:
        return all(isinstance(c, GaussRational) for c in self.terms.values())

    def coefficient(self, m: Monomial):
        return self.terms.get(m, GaussRational(0))

    def constant_term(self):
        return self.coefficient(IDENTITY_MONOMIAL)

    def is_scalar(self) -> bool:
        return all(m == IDENTITY_MONOMIAL for m in self.terms)

    def parity(self) -> int | None:
        """0 for even, 1 for odd, None for mixed; the zero polynomial is even."""
        ps = {(len(c) + len(a)) & 1 for c, a in self.terms}
        if len(ps) > 1:
            return None
        return ps.pop() if ps else 0

    def is_even(self) -> bool:
        return self.parity() == 0

    def is_odd(self) -> bool:
        return self.is_zero() or self.parity() == 1

    def even_part(self) -> "CarPolynomial":
        return CarPolynomial({m: c for m, c in self.terms.items() if not (len(m[0]) + len(m[1])) & 1}, _trusted=True)

    def odd_part(self) -> "CarPolynomial":
        return CarPolynomial({m: c for m, c in self.terms.items() if (len(m[0]) + len(m[1])) & 1}, _trusted=True)

    def support(self) -> Region:
        sites = set()
        for c, a in self.terms:
            sites.update(c)
            sites.update(a)
        return Region(sites)

    def degree(self) -> int:
        return max((len(c) + len(a) for c, a in self.terms), default=0)

    def l1_norm(self) -> float:
        """Sum of |coefficients|, an upper bound on the C*-norm."""
        return float(sum(abs(c) for c in self.terms.values()))

    # algebra
    def __add__(self, other) -> "CarPolynomial":
        if not isinstance(other, CarPolynomial):
            other = CarPolynomial.scalar(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            out[m] = c if v is None else v + c
        return CarPolynomial(_clean(out), _trusted=True)

    __radd__ = __add__

    def __neg__(self) -> "CarPolynomial":
        return CarPolynomial({m: -c for m, c in self.terms.items()}, _trusted=True)

    def __sub__(self, other) -> "CarPolynomial":
        if not isinstance(other, CarPolynomial):
            other = CarPolynomial.scalar(other)
        return self + (-other)

    def __rsub__(self, other) -> "CarPolynomial":
        return (-self) + other

    def scale(self, c) -> "CarPolynomial":
        c = coerce(c)
        if c == 0:
            return CarPolynomial.zero()
        return CarPolynomial(_clean({m: v * c for m, v in self.terms.items()}), _trusted=True)

    def __mul__(self, other) -> "CarPolynomial":
        if not isinstance(other, CarPolynomial):
            return self.scale(other)
        out: dict = {}
        for m1, x in self.terms.items():
            for m2, y in other.terms.items():
                xy = x * y
                for s, m in _monomial_product(m1, m2):
                    v = xy if s > 0 else -xy
                    w = out.get(m)
                    out[m] = v if w is None else w + v
        return CarPolynomial(_clean(out), _trusted=True)

    def __rmul__(self, other) -> "CarPolynomial":
        return self.scale(other)

    def __pow__(self, n: int) -> "CarPolynomial":
        if n < 0:
            raise ValueError("negative power")
        out = CarPolynomial.identity()
        for _ in range(n):
            out = out * self
        return out

    def adjoint(self) -> "CarPolynomial":
        out = {}
        for (c, a), v in self.terms.items():
            p, q = len(c), len(a)
            flip = ((p * (p - 1)) // 2 + (q * (q - 1)) // 2) & 1
            v = v.conjugate()
            out[(a, c)] = -v if flip else v
        return CarPolynomial(out, _trusted=True)

    def gamma(self) -> "CarPolynomial":
        return CarPolynomial(
            {m: (-v if (len(m[0]) + len(m[1])) & 1 else v) for m, v in self.terms.items()}, _trusted=True
        )

    def chop(self, tol: float = 1e-14) -> "CarPolynomial":
        """Drop float coefficients of modulus <= tol; exact ones are kept."""
        return CarPolynomial(
            {m: v for m, v in self.terms.items() if isinstance(v, GaussRational) or abs(v) > tol}, _trusted=True
        )

    def to_complex(self) -> "CarPolynomial":
        return CarPolynomial({m: complex(v) for m, v in self.terms.items()}, _trusted=True)

    # comparison
    def __eq__(self, other) -> bool:
        if not isinstance(other, CarPolynomial):
            try:
                other = CarPolynomial.scalar(other)
            except TypeError:
                return NotImplemented
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self) -> str:
        return f"CarPolynomial({format_polynomial(self)!r})"

    def __str__(self) -> str:
        return format_polynomial(self)


def _check_monomial(m) -> Monomial:
    c, a = m
    c = tuple(site(s) for s in c)
    a = tuple(site(s) for s in a)
    if list(c) != sorted(set(c)) or list(a) != sorted(set(a)):
        raise ValueError(f"monomial {m!r} is not in canonical form")
    return (c, a)


def a(s) -> CarPolynomial:
    """Annihilation operator a_s."""
    return CarPolynomial.annihilate(s)


def adag(s) -> CarPolynomial:
    """Creation operator a_s*."""
    return CarPolynomial.create(s)


def normalize(factors: Iterable) -> CarPolynomial:
    """Canonical form of an ordered product.

    Each factor is a CarPolynomial, a scalar, or a pair (kind, site) with kind
    '+' for a creator and '-' for an annihilator.
    """
    out = CarPolynomial.identity()
    for f in factors:
        if isinstance(f, tuple) and len(f) == 2 and f[0] in ("+", "-"):
            f = adag(f[1]) if f[0] == "+" else a(f[1])
        out = out * f
    return out


def adjoint(p: CarPolynomial) -> CarPolynomial:
    return p.adjoint()


def gamma(p: CarPolynomial) -> CarPolynomial:
    return p.gamma()


def support(p: CarPolynomial) -> Region:
    return p.support()


def graded_commutator(f: CarPolynomial, g: CarPolynomial) -> CarPolynomial:
    """[f, g]_gamma, extended bilinearly over the parity components."""
    fe, fo = f.even_part(), f.odd_part()
    ge, go = g.even_part(), g.odd_part()
    out = f * g - g * fe
    if not fo.is_zero():
        out = out - ge * fo + go * fo
    return out


def odd_commutator(c: CarPolynomial, f: CarPolynomial) -> CarPolynomial:
    """[c, f]_gamma = c f - gamma(f) c for an odd c."""
    return c * f - f.gamma() * c


def multi_commutator(fs: Sequence[CarPolynomial], g: CarPolynomial) -> CarPolynomial:
    """[f1, [f2, ... [fn, g]_gamma ...]_gamma]_gamma."""
    out = g
    for f in reversed(fs):
        out = graded_commutator(f, out)
    return out


def monomial_basis(region: Region) -> Iterator[Monomial]:
    """All 4^|region| canonical monomials supported in the region."""
    pts = region.sorted()
    n = len(pts)
    for cmask in range(1 << n):
        cs = tuple(pts[i] for i in range(n) if cmask >> i & 1)
        for amask in range(1 << n):
            yield (cs, tuple(pts[i] for i in range(n) if amask >> i & 1))


def monomial(creators: Iterable = (), annihilators: Iterable = (), coeff=1) -> CarPolynomial:
    """Canonical monomial from site sets (sorted internally, sign included)."""
    cs = [site(s) for s in creators]
    ans = [site(s) for s in annihilators]
    return normalize([coeff] + [adag(s) for s in cs] + [a(s) for s in ans])


def _format_site(s: Site) -> str:
    return str(s[0]) if len(s) == 1 else ",".join(str(x) for x in s)


def _format_coeff(c) -> str:
    if isinstance(c, GaussRational):
        re, im = c.real, c.imag
        if im == 0:
            return str(re)
        return f"({re},{im})"
    c = complex(c)
    if c.imag == 0:
        return repr(c.real)
    return f"({c.real!r},{c.imag!r})"


def format_monomial(m: Monomial) -> str:
    c, an = m
    parts = [f"a+({_format_site(s)})" for s in c] + [f"a({_format_site(s)})" for s in an]
    return " ".join(parts)


def format_polynomial(p: CarPolynomial) -> str:
    """Textual form accepted back by the polynomial parser."""
    if p.is_zero():
        return "0"
    items = sorted(p.terms.items(), key=lambda kv: (len(kv[0][0]) + len(kv[0][1]), kv[0]))
    chunks = []
    for m, c in items:
        coef = _format_coeff(c)
        body = format_monomial(m)
        if not body:
            chunks.append(coef)
        elif coef == "1":
            chunks.append(body)
        elif coef == "-1":
            chunks.append("-" + body)
        else:
            chunks.append(f"{coef} {body}")
    out = chunks[0]
    for ch in chunks[1:]:
        out += " - " + ch[1:] if ch.startswith("-") else " + " + ch
    return out


def translate(p: CarPolynomial, shift: Sequence[int]) -> CarPolynomial:
    """Lattice translate of p; the site order is translation invariant so signs are kept."""
    shift = tuple(shift)
    if not any(shift):
        return p

    def mv(ss):
        return tuple(tuple(x + d for x, d in zip(s, shift)) for s in ss)

    return CarPolynomial({(mv(c), mv(an)): v for (c, an), v in p.terms.items()}, _trusted=True)
