"""Wick polynomials, q-Gram orthonormalization, the level-sum kernel Xi and
its Neumann inverse, conjugate variables, and the q-isomorphism pipeline.

The pipeline reduces the q-deformed problem to an undeformed transport
problem: build the kernel, invert it, assemble conjugate variables and the
perturbation W of the quadratic potential, solve transport against the
undeformed state, then verify the law, the positivity certificate, and the
series inversion.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .calculus import grad_D, partial_bar, partial_sigma, sigma_inv_op
from .errors import (
    DenominatorNonpositive,
    GramNotPositive,
    LevelTooLarge,
    MissingInverse,
    NeumannDivergence,
    NoConvergence,
    NormTooLarge,
    NotCyclicallySymmetric,
)
from .modular import ModularContext
from .moments import MomentOracle
from .ncpoly import (
    NCPoly,
    Word,
    is_cyclically_symmetric,
    max_coeff_diff,
    norm_R_sigma,
    quadratic_potential,
)
from .tensor import (
    TensorPoly,
    max_pair_diff,
    pi_norm_bound,
    t_mul,
    t_sigma,
    t_star,
    tensor_of,
)

DEFAULT_LEVEL_CAP = 6

# Hard bound on the per-level Gram dimension N^n.
MAX_GRAM_DIM = 4096

GRAM_EIG_FLOOR = 1e-12


def u_inner(ctx: ModularContext, j: int, k: int) -> complex:
    """Deformed generator inner product <e_j, e_k>_U = alpha_{kj}."""
    return complex(ctx.alpha[k - 1, j - 1])


def wick_poly(ctx: ModularContext, q: float, word, _memo=None) -> NCPoly:
    """Polynomial whose Fock vector is the plain tensor of the word's letters.

    Built by the head-letter recursion: multiply by the first generator and
    subtract the q-weighted contractions with every later letter.  In one
    variable these are the q-Hermite polynomials.
    """
    word = tuple(word)
    for j in word:
        ctx.check_index(j)
    if _memo is None:
        _memo = {}
    return _wick(ctx, q, word, _memo)


def _wick(ctx: ModularContext, q: float, word: Word, memo: dict) -> NCPoly:
    got = memo.get(word)
    if got is not None:
        return got
    n = len(word)
    cap = max(n, 1)
    if n == 0:
        out = NCPoly.one(ctx.num_vars, cap)
    else:
        head, rest = word[0], word[1:]
        out = NCPoly.gen(ctx.num_vars, head, cap) * _wick(ctx, q, rest, memo).with_cap(cap)
        for k in range(len(rest)):
            w = q**k * u_inner(ctx, head, rest[k])
            if w == 0:
                continue
            out = out - _wick(ctx, q, rest[:k] + rest[k + 1:], memo).with_cap(cap).scale(w)
    memo[word] = out
    return out


def _level_words(n_vars: int, n: int) -> list[Word]:
    return list(product(range(1, n_vars + 1), repeat=n))


def q_gram(ctx: ModularContext, q: float, n: int, level_cap: int = DEFAULT_LEVEL_CAP) -> np.ndarray:
    """Gram matrix of the plain tensor words at level n under the q-inner
    product: entry (u, v) sums q^{inversions} over permutations pairing the
    letters of u against the permuted letters of v."""
    if n > level_cap or ctx.num_vars**n > MAX_GRAM_DIM:
        raise LevelTooLarge(f"level {n} over {ctx.num_vars} generators")
    words = _level_words(ctx.num_vars, n)
    dim = len(words)
    gram = np.zeros((dim, dim), dtype=complex)
    perms = []
    for perm in permutations(range(n)):
        inv = sum(
            1 for a in range(n) for b in range(a + 1, n) if perm[a] > perm[b]
        )
        perms.append((perm, q**inv))
    inner = ctx.alpha.T
    for iu, u in enumerate(words):
        for iv, v in enumerate(words):
            total = 0.0 + 0.0j
            for perm, w in perms:
                prod_val = w
                for k in range(n):
                    prod_val *= inner[u[k] - 1, v[perm[k]] - 1]
                    if prod_val == 0:
                        break
                total += prod_val
            gram[iu, iv] = total
    return gram


def _herm_power(M: np.ndarray, p: float, what: str) -> np.ndarray:
    """Real power of a Hermitian positive definite matrix via eigh."""
    w, v = np.linalg.eigh(M)
    if np.min(w) <= GRAM_EIG_FLOOR:
        raise GramNotPositive(f"{what} lost positivity: min eig {np.min(w):.3g}")
    return (v * (w**p)) @ v.conj().T


def orthonormal_basis(
    ctx: ModularContext, q: float, n: int, level_cap: int = DEFAULT_LEVEL_CAP, _memo=None
) -> list[NCPoly]:
    """Orthonormal family spanning the level-n Wick polynomials under the
    q-state.

    Two stages, acting on the coefficient columns of the Wick family: first
    a congruence taking the q-Gram to the undeformed Gram G0 (the transpose
    of the n-th tensor power of alpha), then the inverse square root of G0.
    The combined family has identity Gram; each stage is checked here only
    through the eigenvalue floor, the Gram identity itself is a test.
    """
    if n == 0:
        return [NCPoly.one(ctx.num_vars, 1)]
    gq = q_gram(ctx, q, n, level_cap)
    alpha_n = ctx.alpha
    for _ in range(n - 1):
        alpha_n = np.kron(alpha_n, ctx.alpha)
    g0 = alpha_n.T

    g0_ih = _herm_power(g0, -0.5, "undeformed Gram")
    g0_h = _herm_power(g0, 0.5, "undeformed Gram")
    k_mid = g0_ih @ gq @ g0_ih
    s1 = g0_ih @ _herm_power(k_mid, -0.5, "reduced q-Gram") @ g0_h
    cols = s1 @ g0_ih

    words = _level_words(ctx.num_vars, n)
    memo = _memo if _memo is not None else {}
    wicks = [_wick(ctx, q, w, memo) for w in words]
    out = []
    for i in range(len(words)):
        r = NCPoly.zero(ctx.num_vars, n)
        for j in range(len(words)):
            c = cols[j, i]
            if abs(c) > 1e-16:
                r = r + wicks[j].with_cap(n).scale(complex(c))
        out.append(r)
    return out


@dataclass
class XiData:
    """The level-sum kernel at deformation q, truncated at max_level."""

    q: float
    max_level: int
    levels: list[list[NCPoly]]
    xi: TensorPoly
    xi_inv: TensorPoly | None = None
    pi_bound_value: float | None = None
    inverse_residual: float | None = None
    neumann_terms: int = 0


def build_xi(
    ctx: ModularContext, q: float, d: int, level_cap: int | None = None
) -> XiData:
    """Assemble sum over levels n <= d of q^n sum_i r_i (x) r_i*.

    The tensor cap is 2d so no level is clipped.  At q = 0 only level zero
    survives and the kernel is the unit.
    """
    if level_cap is None:
        level_cap = max(d, DEFAULT_LEVEL_CAP)
    cap = max(2 * d, 2)
    memo: dict[Word, NCPoly] = {}
    levels = []
    xi = TensorPoly.zero(ctx.num_vars, cap)
    for n in range(d + 1):
        if q == 0.0 and n > 0:
            levels.append([])
            continue
        fam = orthonormal_basis(ctx, q, n, level_cap=max(level_cap, d), _memo=memo)
        levels.append(fam)
        block = TensorPoly.zero(ctx.num_vars, cap)
        for r in fam:
            block = block + tensor_of(r, r.adjoint(), cap)
        xi = xi + block.scale(q**n)
    return XiData(q=q, max_level=d, levels=levels, xi=xi)


def pi_bound(q: float, N: int, A_norm: float, A_t_norm: float, c: float) -> float:
    """Closed-form majorant for the projective distance of the (twisted)
    kernel from the unit at the natural radius."""
    base = A_t_norm * (3.0 + c) ** 2 * (1.0 + A_norm) * N * N
    den = 2.0 - (4.0 + base) * abs(q)
    if den <= 0.0:
        raise DenominatorNonpositive(f"bound undefined: denominator {den:.4g}")
    return base * abs(q) / den


def natural_radius(q: float, c: float) -> float:
    """The radius (1 + c/2) * 2 / (1 - |q|) at which the kernel bound holds."""
    return (1.0 + 0.5 * c) * 2.0 / (1.0 - abs(q))


def invert_xi(xi: XiData, R: float, tol: float, c: float, ctx: ModularContext) -> XiData:
    """Neumann inverse of the kernel in the # algebra, updated in place.

    Requires the closed-form bound at t = 0 below one; stops when the
    projective-norm bound of the next increment falls below tol.  The
    product of kernel and inverse is re-checked against the unit up to the
    degree cap and the residual is stored.
    """
    try:
        pb = pi_bound(xi.q, ctx.num_vars, ctx.norm_A, 1.0, c)
    except DenominatorNonpositive:
        pb = float("inf")
    xi.pi_bound_value = pb
    one = TensorPoly.one(ctx.num_vars, xi.xi.degree_cap)
    e = one - xi.xi
    # In the truncated algebra the series terminates whenever the scalar
    # part of the deviation is strictly inside the unit disc: every other
    # part of e has positive degree, so powers of e gain degree.  The
    # closed-form majorant and the computed deviation are recorded; they
    # govern the untruncated limit, not this computation.
    scalar_dev = abs(e.coeffs.get(((), ()), 0.0))
    if scalar_dev >= 1.0:
        raise NeumannDivergence(
            f"scalar deviation {scalar_dev:.4g} >= 1; series diverges even truncated"
        )
    acc = one
    term = one
    count = 0
    while True:
        term = t_mul(term, e)
        if term.is_zero():
            break
        acc = acc + term
        count += 1
        if pi_norm_bound(term, R) < tol:
            break
        if count > 500:
            raise NeumannDivergence("Neumann series did not settle in 500 terms")
    xi.xi_inv = acc
    xi.neumann_terms = count
    prodt = t_mul(xi.xi, acc)
    xi.inverse_residual = max_pair_diff(prodt, one)
    return xi


def conjugate_vars(
    ctx: ModularContext, q: float, xi: XiData, o_q: MomentOracle
) -> list[NCPoly]:
    """Conjugate variables of the generators for the twisted difference
    quotient under the q-state.

    With eta the left-twisted adjoint of the kernel inverse, component j is,
    elementwise on a (x) b in eta,

        a X_j b  -  a CL(d_j b # xi)  -  CR(dbar_j a # xi) b,

    contracted through the q-state.  At q = 0 this collapses to the
    generators themselves.
    """
    if xi.xi_inv is None:
        raise MissingInverse("kernel inverse not computed; run invert_xi first")
    nv = ctx.num_vars
    eta = t_sigma(ctx, t_star(xi.xi_inv), -1.0, 0.0)
    cap = eta.degree_cap + 1
    out = []
    kernel = xi.xi
    for j in range(1, nv + 1):
        acc: dict[Word, complex] = {}

        def bump(word: Word, val: complex) -> None:
            acc[word] = acc.get(word, 0.0) + val

        # Many terms of eta share a leg; cache the contracted derivations.
        left_cache: dict[Word, NCPoly] = {}
        right_cache: dict[Word, NCPoly] = {}
        for (a, b), cc in eta.coeffs.items():
            bump(a + (j,) + b, cc)
            cl = left_cache.get(b)
            if cl is None:
                pb = NCPoly.monomial(nv, b, 1.0, cap=cap)
                db = _deformed(ctx, partial_sigma(ctx, j, pb), kernel)
                cl = o_q.contract_left(db).with_cap(cap)
                left_cache[b] = cl
            for w, v in cl.coeffs.items():
                bump(a + w, -cc * v)
            cr = right_cache.get(a)
            if cr is None:
                pa1 = NCPoly.monomial(nv, a, 1.0, cap=cap)
                da = _deformed(ctx, partial_bar(ctx, j, pa1), kernel)
                cr = o_q.contract_right(da).with_cap(cap)
                right_cache[a] = cr
            for w, v in cr.coeffs.items():
                bump(w + b, -cc * v)
        out.append(NCPoly(nv, acc, cap))
    return out


def _deformed(ctx: ModularContext, base: TensorPoly, kernel: TensorPoly) -> TensorPoly:
    if kernel.coeffs == {((), ()): 1.0 + 0.0j}:
        return base
    full = base.degree() + kernel.degree()
    return t_mul(base.with_cap(full), kernel.with_cap(full))


@dataclass
class PotentialResult:
    V: NCPoly
    W: NCPoly
    grad_residual: float


def conjugate_check(
    ctx: ModularContext, o_q: MomentOracle, xi_vec: list[NCPoly], d: int
) -> float:
    """Worst deviation from the defining pairing of conjugate variables:
    <xi_j, p> against the tensor state of the twisted quotient of p, over
    all monomials p of degree at most d."""
    worst = 0.0
    for j in range(1, ctx.num_vars + 1):
        for ln in range(d + 1):
            for p in product(range(1, ctx.num_vars + 1), repeat=ln):
                mono = NCPoly.monomial(ctx.num_vars, p, 1.0)
                lhs = o_q.inner(xi_vec[j - 1], mono)
                rhs = o_q.state_tensor(partial_sigma(ctx, j, mono))
                worst = max(worst, abs(lhs - rhs))
    return worst


def potential_W(
    ctx: ModularContext, q: float, xi_vec: list[NCPoly], cs_tol: float = 1e-7
) -> PotentialResult:
    """Potential with cyclic gradient equal to the conjugate variables.

    V applies the degree-normalizer to sum_{jk} [(1+A)/2]_{jk} xi_k X_j; the
    perturbation is W = V minus the quadratic potential.  Cyclic symmetry of
    V is required (its failure signals too-coarse truncation); the gradient
    identity residual is measured and returned.
    """
    nv = ctx.num_vars
    cap = max(p.degree_cap for p in xi_vec) + 1
    half = 0.5 * (ctx.A + np.eye(nv))
    acc = NCPoly.zero(nv, cap)
    for j in range(nv):
        xj = NCPoly.gen(nv, j + 1, cap)
        for k in range(nv):
            c = complex(half[j, k])
            if abs(c) < 1e-16:
                continue
            acc = acc + (xi_vec[k].with_cap(cap) * xj).scale(c)
    V = sigma_inv_op(acc)
    if not is_cyclically_symmetric(ctx, V, tol=cs_tol):
        raise NotCyclicallySymmetric(
            "potential is not cyclically symmetric; kernel truncation too coarse"
        )
    W = V - quadratic_potential(ctx, cap)
    grads = grad_D(ctx, V)
    res = 0.0
    for j in range(nv):
        res = max(res, max_coeff_diff(grads[j], xi_vec[j].with_cap(cap)))
    return PotentialResult(V=V, W=W, grad_residual=res)


def q_isomorphism_pipeline(
    ctx: ModularContext,
    q: float,
    cfg,
    c: float = 1.0,
    level_cap: int | None = None,
    sd_degree: int = 4,
    law_degree: int | None = None,
    enforce_hypotheses: bool = False,
    conjugate_check_degree: int | None = None,
) -> dict:
    """Run the full reduction of the q-deformed state to transport.

    Stages: kernel build and inversion (at the natural radius), conjugate
    variables, potential assembly, contractivity report, transport solve,
    then the verification battery (Schwinger-Dyson residual of the
    transported law, monotonicity certificate, series inversion).  Returns a
    flat report dict ready for serialization; every stage's norms and
    residuals are included.  ``law_degree`` truncates law evaluation for
    larger generator counts; None keeps it exact.
    """
    from .schwinger import sd_residual as _sd_residual
    from .transport import (
        check_hypotheses,
        invert_series,
        inversion_residual,
        monotonicity_certificate,
        solve_transport,
    )

    d = level_cap if level_cap is not None else min(cfg.degree_cap, DEFAULT_LEVEL_CAP + 2)
    r_nat = natural_radius(q, c)
    report: dict = {"q": q, "num_vars": ctx.num_vars, "level_cap": d, "c": c}

    o0 = MomentOracle(ctx, 0.0)
    oq = MomentOracle(ctx, q)

    xi = build_xi(ctx, q, d)
    invert_xi(xi, r_nat, cfg.tolerance, c, ctx)
    report["pi_bound"] = xi.pi_bound_value
    report["natural_radius"] = r_nat
    report["xi_deviation"] = pi_norm_bound(
        xi.xi - TensorPoly.one(ctx.num_vars, xi.xi.degree_cap), r_nat
    )
    report["xi_inverse_residual"] = xi.inverse_residual
    report["neumann_terms"] = xi.neumann_terms

    xi_vec = conjugate_vars(ctx, q, xi, oq)
    if conjugate_check_degree is not None:
        report["conjugate_check"] = conjugate_check(
            ctx, oq, xi_vec, conjugate_check_degree
        )

    pot = potential_W(ctx, q, xi_vec)
    w_capped = pot.W.with_cap(cfg.degree_cap)
    report["norm_W_Rsigma"] = norm_R_sigma(ctx, w_capped, cfg.R).value
    report["potential_grad_residual"] = pot.grad_residual

    hyp = check_hypotheses(ctx, w_capped, cfg)
    report["hypotheses"] = {
        "norm_W_Rsigma": hyp.norm_W_Rsigma,
        "sum_delta_pi_norm": hyp.sum_delta_pi_norm,
        "bound_W": hyp.bound_W,
        "bound_delta": hyp.bound_delta,
        "radius_ok": hyp.radius_ok,
        "pass": hyp.pass_,
    }
    if not hyp.pass_ and q != 0.0:
        # The perturbation scales linearly in q at leading order, so this
        # estimates where both inequalities would start to hold.
        factors = [hyp.bound_W / max(hyp.norm_W_Rsigma, 1e-300),
                   hyp.bound_delta / max(hyp.sum_delta_pi_norm, 1e-300)]
        report["hypotheses"]["q_estimate_pass"] = abs(q) * min(min(factors), 1.0)

    try:
        sol = solve_transport(
            ctx, o0, w_capped, cfg, enforce_hypotheses=enforce_hypotheses
        )
    except (NormTooLarge, NoConvergence) as exc:
        report["transport"] = {"completed": False, "error": str(exc)}
        report["sd_residual"] = None
        report["monotone_certified"] = None
        report["inverse_residual"] = None
        report["pass"] = False
        return report
    report["transport"] = {
        "completed": True,
        "iterations": sol.iterations,
        "delta_history": sol.delta_history,
        "contraction_ratios": sol.contraction_ratios,
        "fixed_point_residual": sol.fixed_point_residual,
        "norm_ghat": sol.norm_ghat,
        "bound_6W_ok": sol.bound_6W_ok,
        "truncated": sol.truncated,
        "warnings": sol.warnings,
    }

    v_target = quadratic_potential(ctx, cfg.degree_cap) + w_capped
    law = o0.law_of(sol.Y, max_degree=law_degree)
    sol.sd_residual = _sd_residual(law, ctx, v_target, sd_degree)
    report["sd_residual"] = sol.sd_residual

    cert = monotonicity_certificate(ctx, sol.f, cfg.R)
    sol.monotone_certified = cert.certified
    report["monotone_bound"] = cert.bound
    report["monotone_lambda_min"] = cert.lambda_min
    report["monotone_certified"] = cert.certified

    H = invert_series(sol.Y, cfg)
    report["inverse_residual"] = inversion_residual(sol.Y, H, cfg.degree_cap)

    max_ratio = max(sol.contraction_ratios, default=0.0)
    report["pass"] = bool(
        sol.fixed_point_residual < max(cfg.tolerance, 1e-9) * 10
        and max_ratio <= 0.55
        and report["sd_residual"] < 1e-5
        and cert.certified
        and report["inverse_residual"] < 1e-8
    )
    return report
