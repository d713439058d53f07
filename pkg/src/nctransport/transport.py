"""Fixed-point construction of transport between quasi-free Gibbs states.

Given a small cyclically symmetric perturbation W of the quadratic
potential, the solver iterates the contractive self-map

    ghat -> SymPi[ -W(X + DSg) - 1/4 {(1+A) # DSg} # DSg
                   + (contractions of the log-Jacobian series) ]

until the twisted-norm difference of successive iterates is below
tolerance.  The transported tuple is Y = X + D(Sigma ghat); certificates
(contraction ratios, fixed-point residual, gradient positivity bound,
series inversion) are measured, not assumed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .calculus import (
    delta,
    grad_D,
    jac_J,
    jac_J_sigma,
    pi_op,
    sigma_inv_op,
    symmetrize_S,
)
from .errors import (
    ContractionFailure,
    HypothesisViolation,
    NoConvergence,
    NormTooLarge,
    NotCyclicallySymmetric,
    NotGradient,
)
from .modular import ModularContext
from .moments import MomentOracle
from .ncpoly import (
    NCPoly,
    generators,
    is_cyclically_symmetric,
    max_coeff_diff,
    norm_R,
    norm_R_sigma,
    substitute,
)
from .tensor import (
    TensorMatrix,
    mat_mul,
    mat_sigma,
    mat_star,
    max_pair_diff,
    pi_norm_bound,
    pi_norm_bound_mat,
    vec_dot,
)

# Measured contraction above this triggers a warning: the guaranteed factor
# is 1/2, with slack for truncation noise.
RATIO_WARN = 0.55


@dataclass(frozen=True)
class TransportConfig:
    """Numerical parameters of a transport solve."""

    R: float
    R_prime: float
    rho: float = 1.0
    degree_cap: int = 8
    tolerance: float = 1e-9
    max_iterations: int = 200
    gamma: float = 0.25

    def __post_init__(self):
        if self.R_prime <= self.R:
            raise ValueError("R_prime must exceed R")
        if not 0.0 < self.rho <= 1.0:
            raise ValueError("rho must lie in (0, 1]")
        if self.degree_cap < 1:
            raise ValueError("degree_cap must be >= 1")

    def radius_ok(self, ctx: ModularContext) -> bool:
        return self.R >= 4.0 * ctx.norm_A**0.5


@dataclass
class HypothesisReport:
    """The two contractivity quantities and whether both inequalities hold."""

    norm_W_Rsigma: float
    sum_delta_pi_norm: float
    radius_ok: bool
    bound_W: float
    bound_delta: float = 0.125
    pass_: bool = False


@dataclass
class TransportSolution:
    """Everything a transport solve produced, including iteration telemetry."""

    ghat: NCPoly
    g: NCPoly
    f: list[NCPoly]
    Y: list[NCPoly]
    iterations: int
    delta_history: list[float]
    contraction_ratios: list[float]
    fixed_point_residual: float
    norm_ghat: float
    norm_W: float
    bound_6W_ok: bool
    hypotheses: HypothesisReport
    truncated: bool
    warnings: list[str] = field(default_factory=list)
    sd_residual: float | None = None
    monotone_certified: bool | None = None


def check_hypotheses(ctx: ModularContext, W: NCPoly, cfg: TransportConfig) -> HypothesisReport:
    """Evaluate the sufficient contractivity inequalities for W.

    Passing requires the twisted norm of W below rho/2N, the summed
    projective-norm bound of its difference quotients below 1/8 at radius
    R + rho, and R at least 4 sqrt(norm A).
    """
    if not is_cyclically_symmetric(ctx, W):
        raise NotCyclicallySymmetric("perturbation is not cyclically symmetric")
    n = ctx.num_vars
    norm_w = norm_R_sigma(ctx, W, cfg.R).value
    s = cfg.R + cfg.rho
    sum_delta = sum(pi_norm_bound(delta(j, W), s) for j in range(1, n + 1))
    radius_ok = cfg.radius_ok(ctx)
    bound_w = cfg.rho / (2.0 * n)
    rep = HypothesisReport(
        norm_W_Rsigma=norm_w,
        sum_delta_pi_norm=sum_delta,
        radius_ok=radius_ok,
        bound_W=bound_w,
    )
    rep.pass_ = radius_ok and norm_w < bound_w and sum_delta < rep.bound_delta
    return rep


def _trace_contractions(ctx: ModularContext, o: MomentOracle, B: TensorMatrix) -> NCPoly:
    """(1 (x) phi) Tr_A + (phi (x) 1) Tr_{A^{-1}} applied to a matrix."""
    from .tensor import trace_A, trace_Ainv

    return o.contract_right(trace_A(ctx, B)) + o.contract_left(trace_Ainv(ctx, B))


def q_series(
    ctx: ModularContext,
    o: MomentOracle,
    ghat: NCPoly,
    R: float,
    tol: float,
) -> NCPoly:
    """Alternating trace series of the log-Jacobian remainder.

    Sums (-1)^m / (m+2) times the trace contractions of the (m+2)-nd #
    power of the Jacobian of the cyclic gradient of Sigma ghat.  The tail is
    controlled geometrically through r = 2 |ghat| / R^2; summation stops
    when the bound on the remainder drops below tol.
    """
    if o.q != 0.0:
        raise ValueError("series is defined against the undeformed state")
    norm_g = norm_R_sigma(ctx, ghat, R).value
    r = 2.0 * norm_g / (R * R)
    if r >= 1.0:
        raise NormTooLarge(f"|ghat| = {norm_g} exceeds R^2/2 = {R * R / 2}")
    if ghat.is_zero():
        return NCPoly.zero(ctx.num_vars, ghat.degree_cap)
    f = grad_D(ctx, sigma_inv_op(ghat))
    B = jac_J(ctx, f)
    out = NCPoly.zero(ctx.num_vars, ghat.degree_cap)
    power = mat_mul(B, B)
    m = 0
    while True:
        term = _trace_contractions(ctx, o, power)
        out = out + term.with_cap(ghat.degree_cap).scale((-1.0) ** m / (m + 2))
        tail = 2.0 * ctx.norm_A * r ** (m + 3) / (1.0 - r)
        if tail < tol or m > 200:
            break
        power = mat_mul(power, B)
        if all(e.is_zero() for row in power.entries for e in row):
            break
        m += 1
    return out


def F_map(
    ctx: ModularContext,
    o: MomentOracle,
    W: NCPoly,
    ghat: NCPoly,
    cfg: TransportConfig,
) -> NCPoly:
    """One application of the transport self-map (before symmetrization).

    Four pieces: the recentred perturbation -W(X + f), the quadratic
    correction -1/4 {(1+A) # f} # f, the linear trace contraction of the
    Jacobian, and minus the alternating series; f is the cyclic gradient of
    Sigma ghat.  At ghat = 0 this returns -W(X).
    """
    if not is_cyclically_symmetric(ctx, ghat):
        raise NotCyclicallySymmetric("iterate left the cyclically symmetric cone")
    cap = cfg.degree_cap
    f = grad_D(ctx, sigma_inv_op(ghat))
    xs = generators(ctx, cap)
    shifted = [xs[j] + f[j].with_cap(cap) for j in range(ctx.num_vars)]
    t_w = substitute(W, shifted, cap=cap).scale(-1.0)

    one_plus_a = ctx.A + np.eye(ctx.num_vars)
    af = [
        sum(
            (f[k].scale(complex(one_plus_a[i, k])) for k in range(ctx.num_vars)),
            NCPoly.zero(ctx.num_vars, cap),
        )
        for i in range(ctx.num_vars)
    ]
    t_quad = vec_dot(af, f).with_cap(cap).scale(-0.25)

    B = jac_J(ctx, f)
    t_lin = _trace_contractions(ctx, o, B).with_cap(cap)

    t_series = q_series(ctx, o, ghat, cfg.R, cfg.tolerance)

    return t_w + t_quad + t_lin - t_series


def solve_transport(
    ctx: ModularContext,
    o: MomentOracle,
    W: NCPoly,
    cfg: TransportConfig,
    enforce_hypotheses: bool = True,
) -> TransportSolution:
    """Iterate ghat -> SymPi F(ghat) from the seed ghat = W to a fixed point.

    With ``enforce_hypotheses`` the sufficient inequalities must hold before
    iterating; without it they are still evaluated and recorded, and the
    contraction is measured empirically (a ratio at or above one aborts).
    """
    if o.q != 0.0:
        raise ValueError("transport solves against the undeformed state")
    rep = check_hypotheses(ctx, W, cfg)
    if enforce_hypotheses and not rep.pass_:
        raise HypothesisViolation(
            f"|W|_Rsigma = {rep.norm_W_Rsigma:.6g} (needs < {rep.bound_W:.6g}), "
            f"sum delta bound = {rep.sum_delta_pi_norm:.6g} (needs < 0.125), "
            f"radius_ok = {rep.radius_ok}"
        )
    warn_list: list[str] = []
    if not rep.pass_:
        warn_list.append("contractivity hypotheses not satisfied; measuring anyway")

    if W.is_zero():
        xs = generators(ctx, cfg.degree_cap)
        zero = NCPoly.zero(ctx.num_vars, cfg.degree_cap)
        return TransportSolution(
            ghat=zero,
            g=zero,
            f=[zero] * ctx.num_vars,
            Y=xs,
            iterations=0,
            delta_history=[],
            contraction_ratios=[],
            fixed_point_residual=0.0,
            norm_ghat=0.0,
            norm_W=0.0,
            bound_6W_ok=True,
            hypotheses=rep,
            truncated=False,
            warnings=warn_list,
        )

    ghat = W.with_cap(cfg.degree_cap)
    deltas: list[float] = []
    ratios: list[float] = []
    iterations = 0
    for _ in range(cfg.max_iterations):
        nxt = symmetrize_S(ctx, pi_op(F_map(ctx, o, W, ghat, cfg)))
        d = norm_R_sigma(ctx, nxt - ghat, cfg.R).value
        deltas.append(d)
        if len(deltas) >= 2 and deltas[-2] > 0.0:
            ratio = deltas[-1] / deltas[-2]
            ratios.append(ratio)
            if ratio >= 1.0:
                raise NoConvergence(
                    f"contraction ratio {ratio:.4f} >= 1 at iteration {iterations}"
                )
            if ratio > RATIO_WARN:
                msg = f"contraction ratio {ratio:.4f} above {RATIO_WARN}"
                warn_list.append(msg)
                warnings.warn(msg, stacklevel=2)
        ghat = nxt
        iterations += 1
        if d < cfg.tolerance:
            break
    else:
        raise NoConvergence(
            f"no fixed point within {cfg.max_iterations} iterations; last delta {deltas[-1]:.3g}"
        )

    residual = norm_R_sigma(
        ctx, symmetrize_S(ctx, pi_op(F_map(ctx, o, W, ghat, cfg))) - ghat, cfg.R
    ).value
    g = sigma_inv_op(ghat)
    f = grad_D(ctx, g)
    xs = generators(ctx, cfg.degree_cap)
    Y = [xs[j] + f[j].with_cap(cfg.degree_cap) for j in range(ctx.num_vars)]

    norm_ghat = norm_R_sigma(ctx, ghat, cfg.R).value
    norm_w = rep.norm_W_Rsigma
    return TransportSolution(
        ghat=ghat,
        g=g,
        f=f,
        Y=Y,
        iterations=iterations,
        delta_history=deltas,
        contraction_ratios=ratios,
        fixed_point_residual=residual,
        norm_ghat=norm_ghat,
        norm_W=norm_w,
        bound_6W_ok=norm_ghat <= 6.0 * norm_w + cfg.tolerance,
        hypotheses=rep,
        truncated=ghat.truncated or any(p.truncated for p in Y),
        warnings=warn_list,
    )


@dataclass(frozen=True)
class MonotonicityCertificate:
    bound: float
    lambda_min: float
    certified: bool


def monotonicity_certificate(
    ctx: ModularContext, f: list[NCPoly], R: float, grad_tol: float = 1e-8
) -> MonotonicityCertificate:
    """Sufficient positivity check for the twisted Jacobian of X + f.

    Requires f to be a cyclic gradient, detected through the self-adjointness
    identity of twisted Jacobians of gradients.  Certifies monotonicity when
    the projective-norm bound of the half-twisted Jacobian of f stays below
    the smallest eigenvalue of the scalar Jacobian of X, namely
    2 / (1 + norm A).  Failure of the bound is reported as "uncertified",
    never as a claim of non-monotonicity.
    """
    Q = jac_J_sigma(ctx, f)
    star = mat_star(Q)
    twisted = mat_sigma(ctx, Q, 1.0, 0.0)
    dev = max(
        max_pair_diff(star[i, j], twisted[i, j])
        for i in range(Q.dim)
        for j in range(Q.dim)
    )
    if dev > grad_tol:
        raise NotGradient(
            f"twisted Jacobian fails the gradient identity by {dev:.3g}"
        )
    half = mat_sigma(ctx, Q, 0.5, 0.0)
    bound = pi_norm_bound_mat(half, R)
    lambda_min = 2.0 / (1.0 + ctx.norm_A)
    return MonotonicityCertificate(bound, lambda_min, bound < lambda_min)


def _inversion_constant(norm_f_S: float, s_prime: float, S: float) -> float:
    """C(S') = |f|_S max_k k S'^{k-1} S^{-k}; the max is over integers.

    Terms decrease once k exceeds S' / (S - S'), so the scan is finite.
    """
    k_max = int(s_prime / (S - s_prime)) + 2
    best = max(k * s_prime ** (k - 1) / S**k for k in range(1, k_max + 1))
    return norm_f_S * best


def invert_series(Y: list[NCPoly], cfg: TransportConfig) -> list[NCPoly]:
    """Compositional inverse of Y = X + f as a series in fresh indeterminates.

    Iterates H_k = Y - f(H_{k-1}) symbolically (the indeterminates reuse the
    same machinery), truncated at the degree cap, until successive norms at
    radius R settle below tolerance.  The contraction constant C(S') must be
    below one for some S' between |Y|_R and S = R_prime.
    """
    nv = Y[0].num_vars
    cap = cfg.degree_cap
    xs = [NCPoly.gen(nv, j, cap) for j in range(1, nv + 1)]
    f = [Y[j].with_cap(cap) - xs[j] for j in range(nv)]

    S = cfg.R_prime
    norm_f_S = max(norm_R(fj, S) for fj in f)
    norm_Y_R = max(norm_R(yj, cfg.R) for yj in Y)
    if norm_f_S > 0.0:
        lo = max(norm_Y_R, cfg.R)
        if lo >= S:
            raise ContractionFailure(f"|Y|_R = {norm_Y_R} leaves no room below {S}")
        candidates = [lo + (S - lo) * t for t in (0.25, 0.5, 0.75)]
        c_val = min(_inversion_constant(norm_f_S, sp, S) for sp in candidates)
        if c_val >= 1.0:
            raise ContractionFailure(
                f"inversion constant {c_val:.4g} >= 1 (|f|_S = {norm_f_S:.4g})"
            )

    H = list(xs)
    for _ in range(cfg.max_iterations):
        nxt = [xs[j] - substitute(f[j], H, cap=cap) for j in range(nv)]
        diff = max(norm_R(nxt[j] - H[j], cfg.R) for j in range(nv))
        H = nxt
        if diff < cfg.tolerance:
            break
    else:
        raise ContractionFailure("series inversion did not settle")
    return H


def inversion_residual(Y: list[NCPoly], H: list[NCPoly], cap: int) -> float:
    """Worst coefficient error of H(Y) against the generators, up to cap."""
    nv = Y[0].num_vars
    worst = 0.0
    for j in range(nv):
        comp = substitute(H[j], Y, cap=cap)
        target = NCPoly.gen(nv, j + 1, cap)
        worst = max(worst, max_coeff_diff(comp, target))
    return worst
