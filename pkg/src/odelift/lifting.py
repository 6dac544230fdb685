"""Derive the monic linear ODE of order m+1 annihilating m-th powers of
solutions of y'' = p(x) y' + q(x) y.

The construction works in coordinates.  For y = f^m, every derivative of y
is a combination of the basis elements

    B_i = f^(m-i) * (f')^i,        i = 0 .. m,

with coefficients in the differential polynomial ring of `diffring`: each
differentiation produces an f'' which is rewritten as p f' + q f, so the
span of the B_i is closed under d/dx.  In these coordinates d/dx acts
tridiagonally, and the coordinate rows of y, y', ..., y^(m) form a lower
triangular matrix whose diagonal entries are the integer falling factorials
m!/(m-k)!.  Expressing y^(m+1) against those rows is therefore a pure
back-substitution whose only divisions are by nonzero integers, so the monic
coefficients come out as exact DiffPoly values with no fraction-field
elimination anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

from .diffring import DiffPoly, P, Q, format_poly, parse_poly

_P = DiffPoly.symbol(P())
_Q = DiffPoly.symbol(Q())

#: Orders with bundled reference coefficient tables.
FIXTURE_ORDERS = (2, 3, 4, 5)


class FixtureFormatError(ValueError):
    """A reference coefficient table has the wrong shape for its order."""


@dataclass(frozen=True)
class ModuleVector:
    """Coordinates of one derivative of y = f^m over the basis B_i.

    ``coords[i]`` multiplies B_i = f^(m-i) (f')^i; the tuple always has
    length m+1.
    """

    m: int
    coords: tuple[DiffPoly, ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"power m must be >= 1, got {self.m}")
        if len(self.coords) != self.m + 1:
            raise ValueError(
                f"coordinate vector for m={self.m} must have length {self.m + 1}, "
                f"got {len(self.coords)}"
            )


@dataclass(frozen=True)
class LiftedODE:
    """The monic equation y^(m+1) + c_m y^(m) + ... + c_1 y' + c_0 y = 0.

    ``coeffs[k]`` is c_k, the coefficient of y^(k); the leading coefficient
    is implicitly 1.
    """

    m: int
    coeffs: tuple[DiffPoly, ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"power m must be >= 1, got {self.m}")
        if len(self.coeffs) != self.m + 1:
            raise ValueError(
                f"coefficient list for m={self.m} must have length {self.m + 1}, "
                f"got {len(self.coeffs)}"
            )

    @property
    def order(self) -> int:
        return self.m + 1


def falling_factorial(m: int, k: int) -> int:
    """m * (m-1) * ... * (m-k+1), i.e. m!/(m-k)! as an integer."""
    out = 1
    for t in range(k):
        out *= m - t
    return out


def basis_step(v: ModuleVector) -> ModuleVector:
    """Apply d/dx to a combination of the B_i, in coordinates.

    Differentiating v_j B_j and rewriting f'' via the base equation sends
    weight to B_j (the formal derivative of v_j plus j p v_j), to B_{j+1}
    (factor m-j from the f-power), and to B_{j-1} (factor j q from the
    rewritten f'').  Gathering contributions into row j:

        w_j = D(v_j) + j p v_j + (m-j+1) v_{j-1} + (j+1) q v_{j+1}

    with out-of-range coordinates contributing nothing.
    """
    m = v.m
    w = []
    for j in range(m + 1):
        entry = v.coords[j].derive() + j * _P * v.coords[j]
        if j >= 1:
            entry = entry + (m - j + 1) * v.coords[j - 1]
        if j < m:
            entry = entry + (j + 1) * _Q * v.coords[j + 1]
        w.append(entry)
    return ModuleVector(m, tuple(w))


@lru_cache(maxsize=None)
def derivative_tower(m: int) -> tuple[ModuleVector, ...]:
    """Coordinates of y, y', ..., y^(m+1) for y = f^m.

    Returns m+2 vectors: the first is (1, 0, ..., 0) and each subsequent one
    is basis_step of its predecessor.
    """
    if m < 1:
        raise ValueError(f"power m must be >= 1, got {m}")
    zero = DiffPoly.zero()
    start = ModuleVector(m, (DiffPoly.const(1),) + (zero,) * m)
    tower = [start]
    for _ in range(m + 1):
        tower.append(basis_step(tower[-1]))
    return tuple(tower)


@lru_cache(maxsize=None)
def derive_lifted_ode(m: int) -> LiftedODE:
    """The unique monic order-(m+1) relation satisfied by y = f^m.

    Writes y^(m+1) = sum_k a_k y^(k) by back-substitution against the
    triangular tower (row k has pivot m!/(m-k)! in column k), then returns
    the monic form with c_k = -a_k.  Every division is by a nonzero integer
    and exact.
    """
    if m < 1:
        raise ValueError(f"power m must be >= 1, got {m}")
    tower = derivative_tower(m)
    residue = list(tower[m + 1].coords)
    multipliers: list[DiffPoly] = [DiffPoly.zero()] * (m + 1)
    for k in range(m, -1, -1):
        pivot = falling_factorial(m, k)
        row = tower[k].coords
        assert row[k] == DiffPoly.const(pivot), (
            f"tower diagonal broken at m={m}, k={k}: expected {pivot}, got {row[k]!r}"
        )
        a_k = residue[k] / pivot
        multipliers[k] = a_k
        for j in range(k + 1):
            residue[j] = residue[j] - a_k * row[j]
    assert all(r.is_zero() for r in residue), f"back-substitution left a residue at m={m}"

    coeffs = tuple(-a for a in multipliers)
    bound = m - 1 if m >= 2 else 0
    worst = max(c.max_order() for c in coeffs)
    assert worst <= bound, (
        f"coefficient for m={m} uses derivative order {worst}, above the bound {bound}"
    )
    return LiftedODE(m, coeffs)


# ---------------------------------------------------------------------------
# Reference coefficient tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CoefficientCheck:
    """Outcome for one coefficient: ``difference`` is derived minus expected,
    the zero polynomial on a match."""

    k: int
    matched: bool
    difference: DiffPoly


@dataclass(frozen=True)
class FixtureReport:
    m: int
    checks: tuple[CoefficientCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.matched for c in self.checks)

    def summary(self) -> str:
        parts = ", ".join(f"c{c.k} {'ok' if c.matched else 'MISMATCH'}" for c in self.checks)
        return f"m={self.m}: {parts} -> {'PASS' if self.passed else 'FAIL'}"


def check_against_fixture(m: int, fixture: Sequence[DiffPoly]) -> FixtureReport:
    """Compare the derived coefficients against an expected c_0..c_m list.

    Equality is structural (exact); on a mismatch the report carries the
    difference polynomial derived - expected for that k.
    """
    if len(fixture) != m + 1:
        raise FixtureFormatError(
            f"fixture for m={m} must list {m + 1} coefficients, got {len(fixture)}"
        )
    derived = derive_lifted_ode(m)
    checks = []
    for k, expected in enumerate(fixture):
        diff = derived.coeffs[k] - expected
        checks.append(CoefficientCheck(k, diff.is_zero(), diff))
    return FixtureReport(m, tuple(checks))


def load_fixture(m: int, directory: str | Path | None = None) -> list[DiffPoly]:
    """Load the coefficient table ``order_m<m>.txt``: m+1 lines, line k = c_k.

    With no directory, reads the table bundled with the package (available
    for m in FIXTURE_ORDERS).
    """
    name = f"order_m{m}.txt"
    if directory is None:
        text = resources.files(__package__).joinpath("fixtures", name).read_text()
    else:
        text = (Path(directory) / name).read_text()
    lines = [line for line in text.splitlines() if line.strip()]
    if len(lines) != m + 1:
        raise FixtureFormatError(
            f"fixture file {name} must have {m + 1} coefficient lines, got {len(lines)}"
        )
    return [parse_poly(line) for line in lines]
