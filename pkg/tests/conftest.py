"""Shared helpers: seeded random polynomial/expression generators."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from painleve_d32.ring import Poly, RatExpr, SymbolTable


@pytest.fixture(scope="session")
def xyz_table() -> SymbolTable:
    return SymbolTable([("x", "state"), ("y", "state"), ("z", "state")])


def random_poly(
    rng: random.Random, table: SymbolTable, max_terms: int = 4, max_exp: int = 2
) -> Poly:
    terms: dict = {}
    for _ in range(rng.randint(0, max_terms)):
        mono = tuple(rng.randint(0, max_exp) for _ in range(len(table)))
        coeff = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        terms[mono] = terms.get(mono, Fraction(0)) + coeff
    return Poly(table, terms)


def random_nonzero_poly(rng: random.Random, table: SymbolTable, **kw) -> Poly:
    while True:
        p = random_poly(rng, table, **kw)
        if not p.is_zero:
            return p


def random_ratexpr(rng: random.Random, table: SymbolTable) -> RatExpr:
    """Small rational expression; the denominator stays short so that chained
    quotient-rule applications in property tests cannot swell unboundedly."""
    return RatExpr(
        random_poly(rng, table, max_terms=3, max_exp=1),
        random_nonzero_poly(rng, table, max_terms=2, max_exp=1),
    )
