"""Adjoint formulas for the twisted derivations, Schwinger-Dyson residuals,
and the moment-matching metric used for uniqueness statements.

The residual measures, monomial by monomial, how far a law is from
integration by parts against a potential: the pairing of the potential's
cyclic gradient with a test monomial must equal the tensor state of the
twisted difference quotient of that monomial.
"""

from __future__ import annotations

from itertools import product

from .calculus import cyclic_D, partial_bar, partial_sigma
from .errors import BadGamma, DimMismatch, NotCyclicallySymmetric
from .modular import ModularContext, apply_sigma
from .moments import MomentOracle
from .ncpoly import NCPoly, is_cyclically_symmetric
from .tensor import TensorMatrix, TensorPoly, t_mul


def _q_deriv_bar(ctx: ModularContext, j: int, P: NCPoly, Xi: TensorPoly) -> TensorPoly:
    """Deformed conjugate derivation: partial_bar followed by # with Xi.

    The product is computed exactly (caps lifted to the degree sum); the
    state contractions downstream kill the high Fock levels anyway.
    """
    base = partial_bar(ctx, j, P)
    if Xi.coeffs == {((), ()): 1.0 + 0.0j}:
        return base
    full = base.degree() + Xi.degree()
    return t_mul(base.with_cap(full), Xi.with_cap(full))


def partial_q_star(
    o: MomentOracle, ctx: ModularContext, j: int, T: TensorPoly, Xi: TensorPoly
) -> NCPoly:
    """Adjoint of the deformed derivation applied to a word-pair tensor.

    Elementwise on a (x) b:

        a X_j s(b) - a s(CL(dbar_j b)) - CR(dbar_j a) s(b),

    where s is the modular twist at -i, CL/CR contract the left/right leg
    with the state, and dbar_j is the deformed conjugate derivation.  With
    Xi = 1 (x) 1 this is the q = 0 adjoint; in particular the unit maps to
    the generator X_j.
    """
    ctx.check_index(j)
    nv = ctx.num_vars
    cap = T.degree_cap + 1
    out = NCPoly.zero(nv, cap)
    xj = NCPoly.gen(nv, j, cap)
    for (a, b), c in T.coeffs.items():
        pa = NCPoly.monomial(nv, a, c, cap=cap)
        pb = NCPoly.monomial(nv, b, 1.0, cap=cap)
        sb = apply_sigma(ctx, pb, -1.0)
        t1 = pa * xj * sb
        t2 = pa * apply_sigma(ctx, o.contract_left(_q_deriv_bar(ctx, j, pb, Xi)), -1.0).with_cap(cap)
        t3 = o.contract_right(_q_deriv_bar(ctx, j, pa, Xi)).with_cap(cap) * sb
        out = out + t1 - t2 - t3
    return out


def jsigma_star(
    o: MomentOracle, ctx: ModularContext, Q: TensorMatrix, Xi: TensorPoly
) -> list[NCPoly]:
    """Adjoint of the twisted Jacobian: component j is sum_i of the adjoint
    derivation applied to entry (j, i)."""
    if Q.dim != ctx.num_vars:
        raise DimMismatch(f"matrix dim {Q.dim}, context has {ctx.num_vars}")
    out = []
    for j in range(1, ctx.num_vars + 1):
        acc = NCPoly.zero(ctx.num_vars, Q.degree_cap + 1)
        for i in range(1, ctx.num_vars + 1):
            acc = acc + partial_q_star(o, ctx, i, Q[j - 1, i - 1], Xi)
        out.append(acc)
    return out


def _words_up_to(n_vars: int, d: int):
    for length in range(d + 1):
        yield from product(range(1, n_vars + 1), repeat=length)


def sd_residual(law, ctx: ModularContext, V: NCPoly, d: int) -> float:
    """Worst deviation from the Schwinger-Dyson identity up to degree d.

    For each generator index j and each monomial p with |p| <= d, compares
    law((D_j V)* p) against (law (x) law)(partial_sigma_j p).  The supplied
    law may be a Law instance or any word -> complex callable.
    """
    if d < 0:
        raise ValueError("degree must be >= 0")
    if not is_cyclically_symmetric(ctx, V):
        raise NotCyclicallySymmetric("potential is not cyclically symmetric")
    law_w = law if callable(law) else law.__call__

    def law_poly(P: NCPoly) -> complex:
        return sum((c * law_w(w) for w, c in P.coeffs.items()), 0.0 + 0.0j)

    def law_tensor(T: TensorPoly) -> complex:
        return sum(
            (c * law_w(a) * law_w(b) for (a, b), c in T.coeffs.items()), 0.0 + 0.0j
        )

    worst = 0.0
    for j in range(1, ctx.num_vars + 1):
        dv_star = cyclic_D(ctx, j, V).adjoint()
        for p in _words_up_to(ctx.num_vars, d):
            # Lift caps so the pairing polynomial (D_j V)* p is exact.
            need = dv_star.degree() + len(p)
            mono = NCPoly.monomial(ctx.num_vars, p, 1.0, cap=need)
            lhs = law_poly(dv_star.with_cap(need) * mono)
            rhs = law_tensor(partial_sigma(ctx, j, mono))
            worst = max(worst, abs(lhs - rhs))
    return worst


def gibbs_distance(law1, law2, gamma: float, L: int, num_vars: int) -> float:
    """Weighted moment distance: sum over degrees l of gamma^l times the
    worst monomial disagreement at that degree, truncated at degree L."""
    if not 0.0 < gamma < 1.0 / 3.0:
        raise BadGamma(f"gamma must lie in (0, 1/3), got {gamma}")
    total = 0.0
    for l in range(1, L + 1):
        delta_l = max(
            (abs(law1(w) - law2(w)) for w in product(range(1, num_vars + 1), repeat=l)),
            default=0.0,
        )
        total += gamma**l * delta_l
    return total
