"""Local supercharge assignments and the superderivations they generate."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .car import CarPolynomial, Region, a, adag, translate
from .exact import GaussRational
from .jw import operator_norm


class AssignmentError(ValueError):
    pass


class NotNilpotentError(RuntimeError):
    pass


@dataclass(frozen=True)
class Pattern:
    region: Region
    polynomial: CarPolynomial


def _bbox(region: Region):
    pts = region.sorted()
    dim = len(pts[0])
    return [min(p[k] for p in pts) for k in range(dim)], [max(p[k] for p in pts) for k in range(dim)]


class ChargeAssignment:
    """A finite-range map X -> Psi(X) from finite regions to odd local polynomials.

    With a period vector the listed patterns are repeated by every translation
    in the period lattice; with ``period=None`` the listed patterns are the
    whole assignment.
    """

    def __init__(
        self,
        patterns: Iterable[tuple[Region | Iterable, CarPolynomial]],
        declared_range: int,
        period: Sequence[int] | None = None,
        dimension: int | None = None,
        name: str = "",
    ):
        merged: dict[Region, CarPolynomial] = {}
        for reg, poly in patterns:
            reg = reg if isinstance(reg, Region) else Region(reg)
            merged[reg] = merged.get(reg, CarPolynomial.zero()) + poly
        self.name = name
        self.declared_range = int(declared_range)
        dims = {r.dimension for r in merged if len(r)}
        if dimension is None:
            dimension = dims.pop() if len(dims) == 1 else (len(period) if period else 1)
        self.dimension = int(dimension)
        self.period = tuple(int(x) for x in period) if period is not None else None
        if self.period is not None and (len(self.period) != self.dimension or min(self.period) < 1):
            raise AssignmentError("period must be a positive vector of length equal to the dimension")
        if self.declared_range < 0:
            raise AssignmentError("range must be non-negative")
        for reg, poly in merged.items():
            if len(reg) == 0:
                raise AssignmentError("pattern regions must be non-empty")
            if reg.dimension != self.dimension:
                raise AssignmentError(f"pattern region {reg!r} has the wrong dimension")
            if not poly.is_odd():
                raise AssignmentError(f"pattern on {reg!r} is not odd")
            if not poly.support().issubset(reg):
                raise AssignmentError(f"pattern polynomial on {reg!r} is supported outside its region")
            if reg.diameter() > self.declared_range:
                raise AssignmentError(
                    f"pattern region {reg!r} has diameter {reg.diameter()} > declared range {self.declared_range}"
                )
        self.patterns = [Pattern(r, p) for r, p in merged.items() if not p.is_zero()]
        self._charge_cache: dict = {}
        self._nilpotent: bool | None = None
        self._norm_cache: dict = {}

    # enumeration
    def _shifts_meeting(self, pat: Pattern, lo: Sequence[int], hi: Sequence[int]):
        if self.period is None:
            yield tuple(0 for _ in range(self.dimension))
            return
        plo, phi = _bbox(pat.region)
        ranges = []
        for k in range(self.dimension):
            p = self.period[k]
            nmin = math.ceil((lo[k] - phi[k]) / p)
            nmax = math.floor((hi[k] - plo[k]) / p)
            ranges.append(range(nmin, nmax + 1))
        for ns in itertools.product(*ranges):
            yield tuple(n * p for n, p in zip(ns, self.period))

    def translates_meeting(self, region: Region) -> dict[Region, CarPolynomial]:
        """All translates X with X meeting the region, merged by X."""
        if len(region) == 0:
            return {}
        lo, hi = _bbox(region)
        out: dict[Region, CarPolynomial] = {}
        for pat in self.patterns:
            for shift in self._shifts_meeting(pat, lo, hi):
                x = pat.region.translate(shift)
                if x.intersects(region):
                    poly = translate(pat.polynomial, shift)
                    out[x] = out[x] + poly if x in out else poly
        return {x: p for x, p in out.items() if not p.is_zero()}

    def translates_within(self, region: Region) -> dict[Region, CarPolynomial]:
        """Translates X fully inside the region (open boundary)."""
        return {x: p for x, p in self.translates_meeting(region).items() if x.issubset(region)}

    def value(self, x: Region | Iterable) -> CarPolynomial:
        x = x if isinstance(x, Region) else Region(x)
        return self.translates_meeting(x).get(x, CarPolynomial.zero())

    def local_charge(self, region: Region | Iterable) -> CarPolynomial:
        """Sum of Psi(X) over all X meeting the region."""
        region = region if isinstance(region, Region) else Region(region)
        hit = self._charge_cache.get(region)
        if hit is None:
            hit = CarPolynomial.zero()
            for p in self.translates_meeting(region).values():
                hit = hit + p
            if len(self._charge_cache) < 100_000:
                self._charge_cache[region] = hit
        return hit

    def open_charge(self, region: Region) -> CarPolynomial:
        """Sum of Psi(X) over X contained in the region."""
        out = CarPolynomial.zero()
        for p in self.translates_within(region).values():
            out = out + p
        return out

    def fundamental_sites(self, periods: int = 1) -> list:
        """Sites of `periods` fundamental cells (all pattern sites if aperiodic)."""
        if self.period is None:
            sites = set()
            for pat in self.patterns:
                sites.update(pat.region.sites)
            return sorted(sites)
        return sorted(itertools.product(*[range(periods * p) for p in self.period]))

    # derived assignments
    def _mapped(self, fn, name: str) -> "ChargeAssignment":
        return ChargeAssignment(
            [(p.region, fn(p.polynomial)) for p in self.patterns],
            self.declared_range,
            self.period,
            self.dimension,
            name,
        )

    def conjugate(self) -> "ChargeAssignment":
        return self._mapped(lambda q: q.adjoint(), self.name + "*")

    def symmetrize(self) -> tuple["ChargeAssignment", "ChargeAssignment"]:
        i = GaussRational(0, 1)
        s1 = self._mapped(lambda q: q + q.adjoint(), self.name + "_s1")
        s2 = self._mapped(lambda q: (q - q.adjoint()).scale(i), self.name + "_s2")
        return s1, s2

    def is_zero(self) -> bool:
        return not self.patterns

    def pattern_norm(self, poly: CarPolynomial) -> float:
        # norms are translation invariant; key by the translate to the origin
        sup = poly.support()
        if len(sup) == 0:
            return operator_norm(poly)
        lo, _ = _bbox(sup)
        key = translate(poly, [-x for x in lo])
        if key not in self._norm_cache:
            self._norm_cache[key] = operator_norm(key)
        return self._norm_cache[key]

    def sup_norm(self) -> float:
        return max((self.pattern_norm(p.polynomial) for p in self.patterns), default=0.0)

    def __repr__(self) -> str:
        return (
            f"ChargeAssignment(name={self.name!r}, dim={self.dimension}, period={self.period}, "
            f"range={self.declared_range}, patterns={len(self.patterns)})"
        )


def conjugate_assignment(psi: ChargeAssignment) -> ChargeAssignment:
    return psi.conjugate()


def symmetrize(psi: ChargeAssignment) -> tuple[ChargeAssignment, ChargeAssignment]:
    return psi.symmetrize()


def local_charge(psi: ChargeAssignment, region) -> CarPolynomial:
    return psi.local_charge(region)


def _by_support(p: CarPolynomial) -> dict:
    groups: dict = {}
    for m, c in p.terms.items():
        sites = frozenset(m[0]) | frozenset(m[1])
        groups.setdefault(sites, {})[m] = c
    return groups


def apply_delta(psi: ChargeAssignment, A: CarPolynomial) -> CarPolynomial:
    """delta(A) = [C_psi(supp A), A]_gamma, evaluated monomial group by group."""
    parts = []
    for sites, terms in _by_support(A).items():
        if not sites:
            continue
        c = psi.local_charge(Region(sites))
        if c.is_zero():
            continue
        part = CarPolynomial(terms, _trusted=True)
        parts += [c * part, -(part.gamma() * c)]
    return CarPolynomial.sum(parts)


def apply_delta_star(psi: ChargeAssignment, A: CarPolynomial) -> CarPolynomial:
    return apply_delta(psi.conjugate(), A)


def apply_delta_region(psi: ChargeAssignment, region: Region, A: CarPolynomial, boundary: str = "meets") -> CarPolynomial:
    """[C, A]_gamma for the fixed charge C of a region.

    boundary='meets' uses all X meeting the region, 'open' only X inside it.
    """
    c = psi.local_charge(region) if boundary == "meets" else psi.open_charge(region)
    return c * A - A.gamma() * c


def _pair_products(psi: ChargeAssignment, sites: frozenset) -> CarPolynomial:
    """Sum of Psi(X2) Psi(X1) over overlapping pairs whose union meets the sites."""
    reg = Region(sites)
    cand = psi.translates_meeting(reg.enlarge(psi.declared_range))
    items = list(cand.items())
    out = CarPolynomial.zero()
    for x1, p1 in items:
        for x2, p2 in items:
            if not x1.intersects(x2):
                continue
            if not (x1.intersects(reg) or x2.intersects(reg)):
                continue
            out = out + p2 * p1
    return out


def pair_formula(psi: ChargeAssignment, A: CarPolynomial) -> CarPolynomial:
    """Sum over overlapping pairs of [Psi(X2) Psi(X1), A] (ordinary commutators)."""
    parts = []
    for sites, terms in _by_support(A).items():
        if not sites:
            continue
        h = _pair_products(psi, sites)
        if h.is_zero():
            continue
        part = CarPolynomial(terms, _trusted=True)
        parts += [h * part, -(part * h)]
    return CarPolynomial.sum(parts)


def generators(sites: Iterable) -> list[CarPolynomial]:
    out = []
    for s in sites:
        out.append(a(s))
        out.append(adag(s))
    return out


@dataclass
class NilpotencyReport:
    nilpotent: bool
    exact: bool
    checked: int
    counterexample: CarPolynomial | None = None
    delta_squared: CarPolynomial | None = None
    pair_formula_agrees: bool = True
    details: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "nilpotent": self.nilpotent,
            "exact": self.exact,
            "generators_checked": self.checked,
            "pair_formula_agrees": self.pair_formula_agrees,
            "counterexample": None if self.counterexample is None else str(self.counterexample),
            "delta_squared": None if self.delta_squared is None else str(self.delta_squared),
        }


def check_nilpotent(psi: ChargeAssignment, periods: int = 2, tol: float = 1e-12) -> NilpotencyReport:
    """Exact test of delta^2 = 0 on the generators a_i, a_i* of `periods` cells.

    delta^2 is an ordinary derivation and commutes with lattice translations,
    so vanishing on these generators gives delta^2 = 0 on the local algebra.
    Each generator is checked both by iterating delta and by the pair formula.
    """
    exact = all(p.polynomial.is_exact() for p in psi.patterns)
    report = NilpotencyReport(True, exact, 0)
    for g in generators(psi.fundamental_sites(periods)):
        report.checked += 1
        direct = apply_delta(psi, apply_delta(psi, g))
        paired = pair_formula(psi, g)
        if not exact:
            direct = direct.chop(tol)
            paired = paired.chop(tol)
            agree = (direct - paired).chop(tol).is_zero()
        else:
            agree = direct == paired
        report.pair_formula_agrees &= agree
        if not direct.is_zero() and report.nilpotent:
            report.nilpotent = False
            report.counterexample = g
            report.delta_squared = direct
    psi._nilpotent = report.nilpotent and report.pair_formula_agrees
    return report


def _require_nilpotent(psi: ChargeAssignment) -> None:
    if psi._nilpotent is None:
        check_nilpotent(psi)
    if not psi._nilpotent:
        raise NotNilpotentError(f"assignment {psi.name!r} is not nilpotent; delta_0 is not defined")


def apply_delta0(psi: ChargeAssignment, A: CarPolynomial) -> CarPolynomial:
    """delta_0(A) = delta* delta(A) + delta delta*(A) for a nilpotent assignment."""
    _require_nilpotent(psi)
    star = psi.conjugate()
    return apply_delta(star, apply_delta(psi, A)) + apply_delta(psi, apply_delta(star, A))


def apply_delta0_symmetric(psi_s: ChargeAssignment, A: CarPolynomial) -> CarPolynomial:
    """delta_s(delta_s(A)) for a symmetrized assignment."""
    return apply_delta(psi_s, apply_delta(psi_s, A))


def apply_delta0_pairs(psi_s: ChargeAssignment, A: CarPolynomial) -> CarPolynomial:
    """delta_0 through the overlapping-pair formula for a symmetrized assignment."""
    return pair_formula(psi_s, A)


@dataclass(frozen=True)
class NormConstants:
    L: float
    log_M: float
    r: int
    nu: int

    @property
    def M(self) -> float:
        return math.exp(self.log_M) if self.log_M < 700 else math.inf

    @property
    def t0(self) -> float:
        return math.exp(-self.log_M)

    @property
    def growth(self) -> int:
        """Maximal number of new sites a range-r pattern can add to a region."""
        return (self.r + 1) ** self.nu - 1

    def bound(self, a_norm: float, n_sites: int, n: int) -> float:
        """Right side of (1/n!) |delta_0^n A| <= |A| exp(4|I|L) M^n."""
        return a_norm * math.exp(4 * n_sites * self.L + n * self.log_M)

    def to_dict(self) -> dict:
        return {"L": self.L, "M": self.M, "log_M": self.log_M, "t0": self.t0, "r": self.r, "nu": self.nu}


def norm_constants(psi_s: ChargeAssignment) -> NormConstants:
    """L = sup_i sum_{X containing i} sum_{Y meeting X} |Psi_s(Y)| |Psi_s(X)|; M = exp(8 r^nu L)."""
    r = psi_s.declared_range
    nu = psi_s.dimension
    best = 0.0
    for s in psi_s.fundamental_sites(1):
        point = Region([s])
        total = 0.0
        for x, px in psi_s.translates_meeting(point).items():
            nx = psi_s.pattern_norm(px)
            for _, py in psi_s.translates_meeting(x).items():
                total += psi_s.pattern_norm(py) * nx
        best = max(best, total)
    return NormConstants(L=best, log_M=8 * (r**nu) * best, r=r, nu=nu)


def lattice_constants(psi: ChargeAssignment) -> NormConstants:
    """Constants valid for both symmetrizations of psi."""
    s1, s2 = psi.symmetrize()
    c1, c2 = norm_constants(s1), norm_constants(s2)
    return c1 if c1.L >= c2.L else c2
