"""Words in c(f), j(f), zeta(f) = c(f) R(1, f) and R(lam, f), and the
superderivation on them.

On generators:

    delta_s(c(f))       = j(f)
    delta_s(j(f))       = i c(f')
    delta_s(R(lam, f))  = i c(f') R(lam, f)^2
    delta_s(zeta(f))    = i R(1, f) - 1 - i c(f) c(f') R(1, f)^2

extended to words by the graded Leibniz rule. The last line follows from the
first three; `literal=True` uses the variant with +i c(f) c(f') R(1, f)^2.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .functions import TestFunction
from .space import TruncatedQftSpace


@dataclass(frozen=True, eq=False)
class Letter:
    kind: str  # "c", "j", "zeta", "R"
    f: TestFunction
    lam: float = 1.0

    @property
    def odd(self) -> bool:
        return self.kind in ("c", "zeta")

    def __repr__(self) -> str:
        if self.kind == "R":
            return f"R({self.lam:g},{self.f.name})"
        return f"{self.kind}({self.f.name})"


def c(f: TestFunction) -> Letter:
    return Letter("c", f)


def j(f: TestFunction) -> Letter:
    return Letter("j", f)


def zeta(f: TestFunction) -> Letter:
    return Letter("zeta", f)


def R(lam: float, f: TestFunction) -> Letter:
    return Letter("R", f, float(lam))


Word = tuple  # tuple[Letter, ...]
Expr = list  # list[tuple[complex, Word]]


def word_parity(w: Word) -> int:
    return sum(x.odd for x in w) % 2


def delta_letter(x: Letter, literal: bool = False) -> Expr:
    if x.kind == "c":
        return [(1.0, (j(x.f),))]
    if x.kind == "j":
        return [(1j, (c(x.f.derivative()),))]
    if x.kind == "R":
        return [(1j, (c(x.f.derivative()), x, x))]
    if x.kind == "zeta":
        r = R(1.0, x.f)
        s = 1j if literal else -1j
        return [(1j, (r,)), (-1.0, ()), (s, (c(x.f), c(x.f.derivative()), r, r))]
    raise ValueError(f"unknown letter {x.kind!r}")


def delta_word(w: Word, literal: bool = False) -> Expr:
    """Graded Leibniz: sum_k gamma(x_1..x_{k-1}) delta(x_k) x_{k+1}..x_n."""
    out = []
    sign = 1
    for k, x in enumerate(w):
        for coef, dw in delta_letter(x, literal):
            out.append((sign * coef, w[:k] + dw + w[k + 1 :]))
        if x.odd:
            sign = -sign
    return out


def delta_expr(e: Expr, literal: bool = False) -> Expr:
    return [(a * b, w) for a, w0 in e for b, w in delta_word(w0, literal)]


def evaluate_word(space: TruncatedQftSpace, w: Word) -> np.ndarray:
    out = np.eye(space.dim, dtype=complex)
    for x in w:
        if x.kind == "c":
            m = space.c(x.f)
        elif x.kind == "j":
            m = space.j(x.f)
        elif x.kind == "R":
            m = space.R(x.lam, x.f)
        else:
            m = space.zeta(x.f)
        out = out @ m
    return out


def evaluate(space: TruncatedQftSpace, e: Expr) -> np.ndarray:
    out = np.zeros((space.dim, space.dim), dtype=complex)
    for coef, w in e:
        out = out + coef * evaluate_word(space, w)
    return out


def commutator_value(space: TruncatedQftSpace, w: Word) -> np.ndarray:
    """[Q_s, w]_gamma in the truncated space."""
    return space.graded_commutator_Q(evaluate_word(space, w), bool(word_parity(w)))


def mollifier_c(f: TestFunction, lam: float) -> Expr:
    """N_{c(f), lam} = i lam R(lam, f) = i R(1, f/lam)."""
    return [(1j * lam, (R(lam, f),))]


def mollified_monomial(fs: list[TestFunction], rs: list[tuple[float, TestFunction]], lam: float) -> tuple[Expr, Expr]:
    """For B = c(f_1)..c(f_n) R(k_1, g_1)..R(k_m, g_m), return (N_{B,lam} B, the same element
    rewritten as (i lam)^n zeta(f_1/lam)..zeta(f_n/lam) R(k_1, g_1).., a word in the core).
    """
    n = len(fs)
    tail = tuple(R(k, g) for k, g in rs)
    mol = tuple(R(1.0, f.scale(1.0 / lam)) for f in fs)
    direct = [((1j) ** n, mol + tuple(c(f) for f in fs) + tail)]
    core = [((1j * lam) ** n, tuple(zeta(f.scale(1.0 / lam)) for f in fs) + tail)]
    return direct, core
