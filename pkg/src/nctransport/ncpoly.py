"""Truncated non-commutative power series in N generators.

A polynomial is a finite map from words (tuples of generator indices in
1..N) to complex coefficients.  Every instance carries a degree cap; any
operation that would produce words beyond the cap drops them and sets the
``truncated`` taint flag, so downstream reports can state "exact modulo
degree > cap" honestly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import VarCountMismatch
from .modular import ModularContext, apply_sigma

Word = tuple[int, ...]

# Coefficients below this are double-precision noise, well under every test
# tolerance, and are pruned on construction.
PRUNE_TOL = 1e-14

CENTRALIZER_TOL = 1e-9


def _prune(coeffs: dict[Word, complex]) -> dict[Word, complex]:
    return {w: complex(c) for w, c in coeffs.items() if abs(c) > PRUNE_TOL}


@dataclass(frozen=True)
class NCPoly:
    """Sparse non-commutative polynomial with a degree cap and taint flag."""

    num_vars: int
    coeffs: dict[Word, complex]
    degree_cap: int
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _prune(self.coeffs))

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(num_vars: int, cap: int) -> "NCPoly":
        return NCPoly(num_vars, {}, cap)

    @staticmethod
    def one(num_vars: int, cap: int) -> "NCPoly":
        return NCPoly(num_vars, {(): 1.0}, cap)

    @staticmethod
    def constant(num_vars: int, c: complex, cap: int) -> "NCPoly":
        return NCPoly(num_vars, {(): c}, cap)

    @staticmethod
    def gen(num_vars: int, j: int, cap: int) -> "NCPoly":
        """The generator X_j."""
        if not 1 <= j <= num_vars:
            from .errors import IndexOutOfRange

            raise IndexOutOfRange(f"generator index {j} outside 1..{num_vars}")
        return NCPoly(num_vars, {(j,): 1.0}, cap)

    @staticmethod
    def monomial(num_vars: int, word, c: complex = 1.0, cap: int | None = None) -> "NCPoly":
        word = tuple(word)
        if cap is None:
            cap = max(len(word), 1)
        return NCPoly(num_vars, {word: c}, cap)

    # -- bookkeeping -------------------------------------------------------

    def degree(self) -> int:
        return max((len(w) for w in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def with_cap(self, cap: int) -> "NCPoly":
        """Retarget the cap, dropping (and tainting on) too-long words."""
        kept = {w: c for w, c in self.coeffs.items() if len(w) <= cap}
        dropped = len(kept) != len(self.coeffs)
        return NCPoly(self.num_vars, kept, cap, self.truncated or dropped)

    def _check(self, other: "NCPoly") -> None:
        if self.num_vars != other.num_vars:
            raise VarCountMismatch(
                f"operands over {self.num_vars} and {other.num_vars} generators"
            )

    def __repr__(self):
        if not self.coeffs:
            return "NCPoly<0>"
        parts = []
        for w in sorted(self.coeffs, key=lambda w: (len(w), w))[:6]:
            c = self.coeffs[w]
            mono = "*".join(f"X{j}" for j in w) if w else "1"
            parts.append(f"({c:.6g})*{mono}")
        more = "+..." if len(self.coeffs) > 6 else ""
        taint = ", truncated" if self.truncated else ""
        return f"NCPoly<{' + '.join(parts)}{more}{taint}>"

    # -- linear structure --------------------------------------------------

    def __add__(self, other: "NCPoly") -> "NCPoly":
        self._check(other)
        out = dict(self.coeffs)
        for w, c in other.coeffs.items():
            out[w] = out.get(w, 0.0) + c
        return NCPoly(
            self.num_vars,
            out,
            min(self.degree_cap, other.degree_cap),
            self.truncated or other.truncated,
        )

    def __neg__(self) -> "NCPoly":
        return NCPoly(
            self.num_vars,
            {w: -c for w, c in self.coeffs.items()},
            self.degree_cap,
            self.truncated,
        )

    def __sub__(self, other: "NCPoly") -> "NCPoly":
        return self + (-other)

    def scale(self, c: complex) -> "NCPoly":
        if c == 0:
            return NCPoly(self.num_vars, {}, self.degree_cap, self.truncated)
        return NCPoly(
            self.num_vars,
            {w: c * v for w, v in self.coeffs.items()},
            self.degree_cap,
            self.truncated,
        )

    def __rmul__(self, c) -> "NCPoly":
        return self.scale(c)

    # -- multiplicative structure -----------------------------------------

    def __mul__(self, other: "NCPoly") -> "NCPoly":
        """Word-concatenation product; words beyond the cap are dropped."""
        self._check(other)
        cap = min(self.degree_cap, other.degree_cap)
        out: dict[Word, complex] = {}
        dropped = False
        for w1, c1 in self.coeffs.items():
            for w2, c2 in other.coeffs.items():
                if len(w1) + len(w2) > cap:
                    dropped = True
                    continue
                w = w1 + w2
                out[w] = out.get(w, 0.0) + c1 * c2
        return NCPoly(
            self.num_vars, out, cap, self.truncated or other.truncated or dropped
        )

    def adjoint(self) -> "NCPoly":
        """Word reversal with conjugated coefficients; an involution."""
        return NCPoly(
            self.num_vars,
            {w[::-1]: c.conjugate() for w, c in self.coeffs.items()},
            self.degree_cap,
            self.truncated,
        )

    def project_degree(self, n: int) -> "NCPoly":
        """Keep exactly the words of length n."""
        return NCPoly(
            self.num_vars,
            {w: c for w, c in self.coeffs.items() if len(w) == n},
            self.degree_cap,
            self.truncated,
        )

    def degrees(self):
        return sorted({len(w) for w in self.coeffs})


def add(P: NCPoly, Q: NCPoly) -> NCPoly:
    return P + Q


def scalar_mul(c: complex, P: NCPoly) -> NCPoly:
    return P.scale(c)


def mul(P: NCPoly, Q: NCPoly) -> NCPoly:
    return P * Q


def adjoint(P: NCPoly) -> NCPoly:
    return P.adjoint()


def project_degree(P: NCPoly, n: int) -> NCPoly:
    return P.project_degree(n)


def substitute(P: NCPoly, Y: list[NCPoly], cap: int | None = None) -> NCPoly:
    """Composition P(Y_1, ..., Y_N); each word maps to the ordered product.

    The result lives over the Y's generators.  ``cap`` defaults to the
    smallest cap among the Y_j; truncation taints propagate.
    """
    if len(Y) != P.num_vars:
        raise VarCountMismatch(f"need {P.num_vars} substituends, got {len(Y)}")
    nv = Y[0].num_vars
    for y in Y:
        if y.num_vars != nv:
            raise VarCountMismatch("substituends over differing generator counts")
    if cap is None:
        cap = min(y.degree_cap for y in Y)
    out = NCPoly.zero(nv, cap)
    one = NCPoly.one(nv, cap)
    taint = P.truncated or any(y.truncated for y in Y)
    for word, c in P.coeffs.items():
        term = one.scale(c)
        for j in word:
            term = term * Y[j - 1].with_cap(cap)
        out = out + term
    return NCPoly(nv, out.coeffs, cap, out.truncated or taint)


def norm_R(P: NCPoly, R: float) -> float:
    """Weighted coefficient-sum norm: sum |c(w)| R^{|w|}."""
    if R <= 0:
        raise ValueError("R must be positive")
    return float(sum(abs(c) * R ** len(w) for w, c in P.coeffs.items()))


def max_coeff_diff(P: NCPoly, Q: NCPoly) -> float:
    """Largest coefficient deviation between two polynomials."""
    P._check(Q)
    words = set(P.coeffs) | set(Q.coeffs)
    return max(
        (abs(P.coeffs.get(w, 0.0) - Q.coeffs.get(w, 0.0)) for w in words), default=0.0
    )


def is_centralizer(ctx: ModularContext, P: NCPoly, tol: float = CENTRALIZER_TOL) -> bool:
    """True when P is fixed by the modular action (sigma_{-i} P = P)."""
    if ctx.is_tracial:
        return True
    return max_coeff_diff(apply_sigma(ctx, P, -1.0), P) <= tol


def rho(ctx: ModularContext, P: NCPoly, k: int = 1) -> NCPoly:
    """Twisted cyclic rotation, k-fold.

    One step moves the last letter to the front after acting on it by the
    modular matrix; the inverse moves the first letter to the back with the
    inverse action.  On a degree-n word, n steps amount to one full modular
    twist of every letter, so k reduces modulo n against powers of the
    modular action.  Constants are fixed.
    """
    if P.num_vars != ctx.num_vars:
        raise VarCountMismatch(
            f"polynomial over {P.num_vars} vars, context has {ctx.num_vars}"
        )
    out = NCPoly.zero(ctx.num_vars, P.degree_cap)
    A = ctx.A
    n_gen = ctx.num_vars
    for n in P.degrees():
        comp = P.project_degree(n)
        if n == 0 or k == 0:
            out = out + comp
            continue
        l = k % n
        m = (k - l) // n
        coeffs = comp.coeffs
        for _ in range(l):
            nxt: dict[Word, complex] = {}
            for w, c in coeffs.items():
                last = w[-1]
                head = w[:-1]
                row = A[last - 1]
                for v in range(n_gen):
                    a = row[v]
                    if a == 0:
                        continue
                    key = (v + 1,) + head
                    nxt[key] = nxt.get(key, 0.0) + c * a
            coeffs = nxt
        piece = NCPoly(ctx.num_vars, coeffs, P.degree_cap, comp.truncated)
        if m != 0:
            piece = apply_sigma(ctx, piece, -float(m))
        out = out + piece
    return NCPoly(ctx.num_vars, out.coeffs, P.degree_cap, P.truncated)


def is_cyclically_symmetric(
    ctx: ModularContext, P: NCPoly, tol: float = CENTRALIZER_TOL
) -> bool:
    """True when P is fixed by the twisted cyclic rotation."""
    return max_coeff_diff(rho(ctx, P, 1), P) <= tol


class NormValue(NamedTuple):
    """Value of the rotation-invariant norm plus an exactness flag."""

    value: float
    exact: bool


def norm_R_sigma(ctx: ModularContext, P: NCPoly, R: float) -> NormValue:
    """Rotation-invariant norm: per degree, the max of norm_R over all
    twisted cyclic rearrangements.

    On centralizer input the supremum over all rotations is a finite max
    over one period per degree, returned exactly.  Outside the centralizer
    the rotation orbit is unbounded in general; the returned value is the
    norm_A^{deg-1} * norm_R majorant with ``exact=False``.
    """
    if R <= 0:
        raise ValueError("R must be positive")
    total = 0.0
    for n in P.degrees():
        comp = P.project_degree(n)
        if n == 0:
            total += norm_R(comp, R)
            continue
        if not is_centralizer(ctx, comp):
            deg = P.degree()
            bound = ctx.norm_A ** max(deg - 1, 0) * norm_R(P, R)
            return NormValue(float(bound), False)
        best = norm_R(comp, R)
        rotated = comp
        for _ in range(1, n):
            rotated = rho(ctx, rotated, 1)
            best = max(best, norm_R(rotated, R))
        total += best
    return NormValue(float(total), True)


def quadratic_potential(ctx: ModularContext, cap: int) -> NCPoly:
    """The quadratic potential whose cyclic gradient is the generator vector:
    1/2 sum_{j,k} [(1+A)/2]_{jk} X_k X_j.
    """
    half = 0.5 * (ctx.A + np.eye(ctx.num_vars))
    coeffs: dict[Word, complex] = {}
    for j in range(ctx.num_vars):
        for k in range(ctx.num_vars):
            c = 0.5 * half[j, k]
            if abs(c) <= PRUNE_TOL:
                continue
            w = (k + 1, j + 1)
            coeffs[w] = coeffs.get(w, 0.0) + c
    return NCPoly(ctx.num_vars, coeffs, cap)


def generators(ctx: ModularContext, cap: int) -> list[NCPoly]:
    """The vector (X_1, ..., X_N)."""
    return [NCPoly.gen(ctx.num_vars, j, cap) for j in range(1, ctx.num_vars + 1)]
