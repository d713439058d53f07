"""Derivations and structural operators on the polynomial algebra.

Contains the free difference quotient delta_j, its alpha-weighted variants,
the twisted cyclic gradient, Jacobian matrices, the number operator and its
partial inverse, and the cyclic symmetrization.  Tensor-valued outputs get a
degree cap of twice the input cap so that downstream # products have room
before truncation.
"""

from __future__ import annotations

from .errors import DimMismatch, IndexOutOfRange
from .modular import ModularContext, apply_sigma
from .ncpoly import NCPoly, Word, rho
from .tensor import TensorMatrix, TensorPoly, t_diamond, t_flip_m, t_sigma


def _check_j(ctx: ModularContext, j: int) -> None:
    if not 1 <= j <= ctx.num_vars:
        raise IndexOutOfRange(f"generator index {j} outside 1..{ctx.num_vars}")


def delta(j: int, P: NCPoly) -> TensorPoly:
    """Free difference quotient: split each word at every occurrence of X_j."""
    if not 1 <= j <= P.num_vars:
        raise IndexOutOfRange(f"generator index {j} outside 1..{P.num_vars}")
    cap = 2 * P.degree_cap
    out: dict[tuple[Word, Word], complex] = {}
    for w, c in P.coeffs.items():
        for k, letter in enumerate(w):
            if letter != j:
                continue
            key = (w[:k], w[k + 1:])
            out[key] = out.get(key, 0.0) + c
    return TensorPoly(P.num_vars, out, cap, P.truncated)


def partial_sigma(ctx: ModularContext, j: int, P: NCPoly) -> TensorPoly:
    """Twisted difference quotient sum_k alpha_kj delta_k."""
    _check_j(ctx, j)
    out = TensorPoly.zero(P.num_vars, 2 * P.degree_cap)
    for k in range(1, ctx.num_vars + 1):
        a = ctx.alpha[k - 1, j - 1]
        if abs(a) > 0:
            out = out + delta(k, P).scale(a)
    return out


def partial_bar(ctx: ModularContext, j: int, P: NCPoly) -> TensorPoly:
    """Conjugate variant sum_k alpha_jk delta_k."""
    _check_j(ctx, j)
    out = TensorPoly.zero(P.num_vars, 2 * P.degree_cap)
    for k in range(1, ctx.num_vars + 1):
        a = ctx.alpha[j - 1, k - 1]
        if abs(a) > 0:
            out = out + delta(k, P).scale(a)
    return out


def partial_tilde(ctx: ModularContext, j: int, P: NCPoly) -> TensorPoly:
    """Leg-swapped variant sum_k alpha_jk delta_k(.)^diamond."""
    return t_diamond(partial_bar(ctx, j, P))


def cyclic_D(ctx: ModularContext, j: int, P: NCPoly) -> NCPoly:
    """Twisted cyclic derivative.

    On a word, every position l contributes alpha_{j, w_l} times the tail
    (twisted by the modular action) followed by the head.  Computed by the
    explicit word formula; the composition through the difference quotient
    is kept as a cross-check in the tests.
    """
    _check_j(ctx, j)
    alpha = ctx.alpha
    out = NCPoly.zero(P.num_vars, P.degree_cap)
    for w, c in P.coeffs.items():
        n = len(w)
        for l in range(n):
            a = alpha[j - 1, w[l] - 1]
            if abs(a) == 0.0:
                continue
            tail = NCPoly.monomial(P.num_vars, w[l + 1:], 1.0, cap=P.degree_cap)
            head = NCPoly.monomial(P.num_vars, w[:l], c * a, cap=P.degree_cap)
            out = out + apply_sigma(ctx, tail, -1.0) * head
    return out


def cyclic_D_composed(ctx: ModularContext, j: int, P: NCPoly) -> NCPoly:
    """Cyclic derivative as m o diamond o (1 (x) sigma_{-i}) o partial_bar."""
    t = partial_bar(ctx, j, P)
    t = t_sigma(ctx, t, 0.0, -1.0)
    return t_flip_m(t_diamond(t)).with_cap(P.degree_cap)


def grad_D(ctx: ModularContext, P: NCPoly) -> list[NCPoly]:
    """Cyclic gradient vector (D_1 P, ..., D_N P)."""
    return [cyclic_D(ctx, j, P) for j in range(1, ctx.num_vars + 1)]


def jac_J(ctx: ModularContext, f: list[NCPoly]) -> TensorMatrix:
    """Plain Jacobian: entry (i, j) is delta_j f_i."""
    if len(f) != ctx.num_vars:
        raise DimMismatch(f"need {ctx.num_vars} components, got {len(f)}")
    return TensorMatrix(
        ctx.num_vars,
        tuple(
            tuple(delta(j, fi) for j in range(1, ctx.num_vars + 1)) for fi in f
        ),
    )


def jac_J_sigma(ctx: ModularContext, f: list[NCPoly]) -> TensorMatrix:
    """Twisted Jacobian: entry (i, j) is partial_sigma_j f_i."""
    if len(f) != ctx.num_vars:
        raise DimMismatch(f"need {ctx.num_vars} components, got {len(f)}")
    return TensorMatrix(
        ctx.num_vars,
        tuple(
            tuple(partial_sigma(ctx, j, fi) for j in range(1, ctx.num_vars + 1))
            for fi in f
        ),
    )


def number_op(P: NCPoly) -> NCPoly:
    """Multiply each word by its length."""
    return NCPoly(
        P.num_vars,
        {w: len(w) * c for w, c in P.coeffs.items()},
        P.degree_cap,
        P.truncated,
    )


def sigma_inv_op(P: NCPoly) -> NCPoly:
    """Divide each word by its length; constants map to zero."""
    return NCPoly(
        P.num_vars,
        {w: c / len(w) for w, c in P.coeffs.items() if w},
        P.degree_cap,
        P.truncated,
    )


def pi_op(P: NCPoly) -> NCPoly:
    """Remove the constant term."""
    return NCPoly(
        P.num_vars,
        {w: c for w, c in P.coeffs.items() if w},
        P.degree_cap,
        P.truncated,
    )


def symmetrize_S(ctx: ModularContext, P: NCPoly) -> NCPoly:
    """Average of twisted cyclic rotations, per degree; constants fixed.

    Centralizer input lands on rotation-fixed output, and the map contracts
    the rotation-invariant norm there.
    """
    out = NCPoly.zero(P.num_vars, P.degree_cap)
    for n in P.degrees():
        comp = P.project_degree(n)
        if n == 0:
            out = out + comp
            continue
        acc = comp
        rotated = comp
        for _ in range(1, n):
            rotated = rho(ctx, rotated, 1)
            acc = acc + rotated
        out = out + acc.scale(1.0 / n)
    return out
