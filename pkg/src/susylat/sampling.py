"""Seeded random elements of the local algebra."""

from __future__ import annotations

import numpy as np

from .car import CarPolynomial, Region, monomial
from .exact import GaussRational


def random_polynomial(
    region: Region,
    rng: np.random.Generator,
    n_terms: int = 4,
    max_degree: int = 4,
    parity: int | None = None,
    coeff_range: int = 3,
) -> CarPolynomial:
    """Sum of random canonical monomials with small Gaussian-integer coefficients."""
    pts = region.sorted()
    out = CarPolynomial.zero()
    for _ in range(n_terms):
        deg = int(rng.integers(0, max_degree + 1))
        if parity is not None and deg % 2 != parity:
            deg = deg + 1 if deg < max_degree or deg == 0 else deg - 1
        cs, an = [], []
        for _ in range(deg):
            s = pts[int(rng.integers(len(pts)))]
            (cs if rng.random() < 0.5 else an).append(s)
        if len(set(cs)) != len(cs) or len(set(an)) != len(an):
            cs, an = sorted(set(cs)), sorted(set(an))
            if parity is not None and (len(cs) + len(an)) % 2 != parity:
                continue
        re = int(rng.integers(-coeff_range, coeff_range + 1))
        im = int(rng.integers(-coeff_range, coeff_range + 1))
        if re == 0 and im == 0:
            re = 1
        out = out + monomial(cs, an, GaussRational(re, im))
    return out
