"""Word-pair polynomials (the algebra P (x) P^op) and N x N matrices of them.

An elementary tensor a (x) b is stored as the pair of words (a, b); the
product is (a (x) b) # (c (x) d) = (ac) (x) (db).  The degree cap applies to
|a| + |b|.  The projective-norm value computed here is the upper bound read
off the stored elementary-tensor representation, which is what every
estimate in this library consumes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DimMismatch, VarCountMismatch
from .modular import ModularContext, apply_sigma
from .ncpoly import NCPoly, PRUNE_TOL, Word

Pair = tuple[Word, Word]


def _prune(coeffs: dict[Pair, complex]) -> dict[Pair, complex]:
    return {p: complex(c) for p, c in coeffs.items() if abs(c) > PRUNE_TOL}


@dataclass(frozen=True)
class TensorPoly:
    """Sparse element of P (x) P^op with a total-degree cap and taint flag."""

    num_vars: int
    coeffs: dict[Pair, complex]
    degree_cap: int
    truncated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _prune(self.coeffs))

    @staticmethod
    def zero(num_vars: int, cap: int) -> "TensorPoly":
        return TensorPoly(num_vars, {}, cap)

    @staticmethod
    def one(num_vars: int, cap: int) -> "TensorPoly":
        """The unit 1 (x) 1."""
        return TensorPoly(num_vars, {((), ()): 1.0}, cap)

    @staticmethod
    def elementary(num_vars: int, left, right, c: complex = 1.0, cap: int | None = None) -> "TensorPoly":
        left, right = tuple(left), tuple(right)
        if cap is None:
            cap = max(len(left) + len(right), 1)
        return TensorPoly(num_vars, {(left, right): c}, cap)

    def _check(self, other) -> None:
        if self.num_vars != other.num_vars:
            raise VarCountMismatch(
                f"operands over {self.num_vars} and {other.num_vars} generators"
            )

    def degree(self) -> int:
        return max((len(a) + len(b) for a, b in self.coeffs), default=0)

    def is_zero(self) -> bool:
        return not self.coeffs

    def with_cap(self, cap: int) -> "TensorPoly":
        kept = {p: c for p, c in self.coeffs.items() if len(p[0]) + len(p[1]) <= cap}
        dropped = len(kept) != len(self.coeffs)
        return TensorPoly(self.num_vars, kept, cap, self.truncated or dropped)

    def __add__(self, other: "TensorPoly") -> "TensorPoly":
        self._check(other)
        out = dict(self.coeffs)
        for p, c in other.coeffs.items():
            out[p] = out.get(p, 0.0) + c
        return TensorPoly(
            self.num_vars,
            out,
            min(self.degree_cap, other.degree_cap),
            self.truncated or other.truncated,
        )

    def __neg__(self) -> "TensorPoly":
        return TensorPoly(
            self.num_vars,
            {p: -c for p, c in self.coeffs.items()},
            self.degree_cap,
            self.truncated,
        )

    def __sub__(self, other: "TensorPoly") -> "TensorPoly":
        return self + (-other)

    def scale(self, c: complex) -> "TensorPoly":
        return TensorPoly(
            self.num_vars,
            {p: c * v for p, v in self.coeffs.items()},
            self.degree_cap,
            self.truncated,
        )

    def __rmul__(self, c) -> "TensorPoly":
        return self.scale(c)

    def __repr__(self):
        n = len(self.coeffs)
        taint = ", truncated" if self.truncated else ""
        return f"TensorPoly<{n} terms, deg<={self.degree()}{taint}>"


def tensor_of(P: NCPoly, Q: NCPoly, cap: int | None = None) -> TensorPoly:
    """The tensor P (x) Q of two polynomials."""
    P._check(Q)
    if cap is None:
        cap = P.degree_cap + Q.degree_cap
    out: dict[Pair, complex] = {}
    dropped = False
    for wa, ca in P.coeffs.items():
        for wb, cb in Q.coeffs.items():
            if len(wa) + len(wb) > cap:
                dropped = True
                continue
            key = (wa, wb)
            out[key] = out.get(key, 0.0) + ca * cb
    return TensorPoly(P.num_vars, out, cap, P.truncated or Q.truncated or dropped)


def t_mul(S: TensorPoly, T: TensorPoly) -> TensorPoly:
    """# product: (a (x) b) # (c (x) d) = (ac) (x) (db)."""
    S._check(T)
    cap = min(S.degree_cap, T.degree_cap)
    out: dict[Pair, complex] = {}
    dropped = False
    small, big = (S, T) if len(S.coeffs) <= len(T.coeffs) else (T, S)
    swapped = small is T
    for (a1, b1), c1 in small.coeffs.items():
        for (a2, b2), c2 in big.coeffs.items():
            if swapped:
                pa, pb = a2 + a1, b1 + b2
            else:
                pa, pb = a1 + a2, b2 + b1
            if len(pa) + len(pb) > cap:
                dropped = True
                continue
            key = (pa, pb)
            out[key] = out.get(key, 0.0) + c1 * c2
    return TensorPoly(
        S.num_vars, out, cap, S.truncated or T.truncated or dropped
    )


def t_apply(S: TensorPoly, g: NCPoly) -> NCPoly:
    """Two-sided action (a (x) b) # c = a c b, extended bilinearly."""
    S._check(g)
    cap = min(S.degree_cap, g.degree_cap)
    out: dict[Word, complex] = {}
    dropped = False
    for (a, b), c1 in S.coeffs.items():
        for w, c2 in g.coeffs.items():
            word = a + w + b
            if len(word) > cap:
                dropped = True
                continue
            out[word] = out.get(word, 0.0) + c1 * c2
    return NCPoly(S.num_vars, out, cap, S.truncated or g.truncated or dropped)


def lmul(P: NCPoly, S: TensorPoly) -> TensorPoly:
    """Left action P . (a (x) b) = (Pa) (x) b."""
    return t_mul(tensor_of(P, NCPoly.one(P.num_vars, S.degree_cap), S.degree_cap), S)


def rmul(S: TensorPoly, P: NCPoly) -> TensorPoly:
    """Right action (a (x) b) . P = a (x) (bP)."""
    return t_mul(tensor_of(NCPoly.one(P.num_vars, S.degree_cap), P, S.degree_cap), S)


def t_star(S: TensorPoly) -> TensorPoly:
    """Adjoint on each leg: conjugate coefficients, reverse both words."""
    return TensorPoly(
        S.num_vars,
        {(a[::-1], b[::-1]): c.conjugate() for (a, b), c in S.coeffs.items()},
        S.degree_cap,
        S.truncated,
    )


def t_diamond(S: TensorPoly) -> TensorPoly:
    """Linear leg swap: a (x) b -> b (x) a."""
    return TensorPoly(
        S.num_vars,
        {(b, a): c for (a, b), c in S.coeffs.items()},
        S.degree_cap,
        S.truncated,
    )


def t_dagger(S: TensorPoly) -> TensorPoly:
    """Conjugate-linear involution a (x) b -> b* (x) a*."""
    return TensorPoly(
        S.num_vars,
        {(b[::-1], a[::-1]): c.conjugate() for (a, b), c in S.coeffs.items()},
        S.degree_cap,
        S.truncated,
    )


def t_flip_m(S: TensorPoly) -> NCPoly:
    """Multiplication map m(a (x) b) = ab."""
    out: dict[Word, complex] = {}
    for (a, b), c in S.coeffs.items():
        w = a + b
        out[w] = out.get(w, 0.0) + c
    return NCPoly(S.num_vars, out, S.degree_cap, S.truncated)


def t_sigma(ctx: ModularContext, S: TensorPoly, s_left: float, s_right: float) -> TensorPoly:
    """Legwise modular action at imaginary parameters (s_left, s_right)."""
    if S.num_vars != ctx.num_vars:
        raise VarCountMismatch(
            f"tensor over {S.num_vars} vars, context has {ctx.num_vars}"
        )
    if ctx.is_tracial or (s_left == 0.0 and s_right == 0.0):
        return S
    out = TensorPoly.zero(S.num_vars, S.degree_cap)
    for (a, b), c in S.coeffs.items():
        pa = NCPoly.monomial(S.num_vars, a, c, cap=max(len(a), 1))
        pb = NCPoly.monomial(S.num_vars, b, 1.0, cap=max(len(b), 1))
        if s_left != 0.0:
            pa = apply_sigma(ctx, pa, s_left)
        if s_right != 0.0:
            pb = apply_sigma(ctx, pb, s_right)
        out = out + tensor_of(pa, pb, S.degree_cap)
    return TensorPoly(S.num_vars, out.coeffs, S.degree_cap, S.truncated or out.truncated)


def pi_norm_bound(S: TensorPoly, R: float) -> float:
    """Projective-norm upper bound from the stored representation."""
    if R <= 0:
        raise ValueError("R must be positive")
    return float(
        sum(abs(c) * R ** (len(a) + len(b)) for (a, b), c in S.coeffs.items())
    )


def max_pair_diff(S: TensorPoly, T: TensorPoly) -> float:
    S._check(T)
    keys = set(S.coeffs) | set(T.coeffs)
    return max(
        (abs(S.coeffs.get(k, 0.0) - T.coeffs.get(k, 0.0)) for k in keys), default=0.0
    )


# -- matrices over the tensor algebra ---------------------------------------


@dataclass(frozen=True)
class TensorMatrix:
    """Square matrix with TensorPoly entries, all over the same generators."""

    dim: int
    entries: tuple  # tuple of tuples of TensorPoly

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.entries)
        object.__setattr__(self, "entries", rows)
        nv = rows[0][0].num_vars
        for row in rows:
            if len(row) != self.dim:
                raise DimMismatch("ragged matrix")
            for e in row:
                if e.num_vars != nv:
                    raise VarCountMismatch("mixed generator counts in matrix")

    @property
    def num_vars(self) -> int:
        return self.entries[0][0].num_vars

    @property
    def degree_cap(self) -> int:
        return min(e.degree_cap for row in self.entries for e in row)

    @property
    def truncated(self) -> bool:
        return any(e.truncated for row in self.entries for e in row)

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    @staticmethod
    def identity(num_vars: int, dim: int, cap: int) -> "TensorMatrix":
        one = TensorPoly.one(num_vars, cap)
        zero = TensorPoly.zero(num_vars, cap)
        return TensorMatrix(
            dim,
            tuple(
                tuple(one if i == j else zero for j in range(dim)) for i in range(dim)
            ),
        )

    @staticmethod
    def scalar(M, num_vars: int, cap: int) -> "TensorMatrix":
        """Embed a numeric matrix as degree-zero tensor entries."""
        dim = len(M)
        rows = []
        for i in range(dim):
            row = []
            for j in range(dim):
                c = complex(M[i][j])
                row.append(
                    TensorPoly(num_vars, {((), ()): c}, cap)
                    if abs(c) > PRUNE_TOL
                    else TensorPoly.zero(num_vars, cap)
                )
            rows.append(tuple(row))
        return TensorMatrix(dim, tuple(rows))

    def map_entries(self, fn) -> "TensorMatrix":
        return TensorMatrix(
            self.dim,
            tuple(tuple(fn(e) for e in row) for row in self.entries),
        )

    def __add__(self, other: "TensorMatrix") -> "TensorMatrix":
        if self.dim != other.dim:
            raise DimMismatch("matrix dims differ")
        return TensorMatrix(
            self.dim,
            tuple(
                tuple(a + b for a, b in zip(r1, r2))
                for r1, r2 in zip(self.entries, other.entries)
            ),
        )

    def __sub__(self, other: "TensorMatrix") -> "TensorMatrix":
        return self + other.map_entries(lambda e: -e)

    def scale(self, c: complex) -> "TensorMatrix":
        return self.map_entries(lambda e: e.scale(c))


def mat_mul(Q: TensorMatrix, Qp: TensorMatrix) -> TensorMatrix:
    """Entrywise # matrix product."""
    if Q.dim != Qp.dim:
        raise DimMismatch(f"matrix dims {Q.dim} and {Qp.dim}")
    n = Q.dim
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            acc = TensorPoly.zero(Q.num_vars, min(Q.degree_cap, Qp.degree_cap))
            for k in range(n):
                acc = acc + t_mul(Q[i, k], Qp[k, j])
            row.append(acc)
        rows.append(tuple(row))
    return TensorMatrix(n, tuple(rows))


def mat_vec(Q: TensorMatrix, g: list[NCPoly]) -> list[NCPoly]:
    """Matrix # vector: (Q # g)_i = sum_j Q_ij # g_j."""
    if Q.dim != len(g):
        raise DimMismatch(f"matrix dim {Q.dim}, vector length {len(g)}")
    out = []
    for i in range(Q.dim):
        acc = NCPoly.zero(g[0].num_vars, g[0].degree_cap)
        for j in range(Q.dim):
            acc = acc + t_apply(Q[i, j], g[j])
        out.append(acc)
    return out


def vec_dot(f: list[NCPoly], g: list[NCPoly]) -> NCPoly:
    """Vector pairing f # g = sum_j f_j g_j."""
    if len(f) != len(g):
        raise DimMismatch(f"vector lengths {len(f)} and {len(g)}")
    acc = NCPoly.zero(f[0].num_vars, min(p.degree_cap for p in f + g))
    for fj, gj in zip(f, g):
        acc = acc + fj * gj
    return acc


def trace(Q: TensorMatrix) -> TensorPoly:
    acc = TensorPoly.zero(Q.num_vars, Q.degree_cap)
    for i in range(Q.dim):
        acc = acc + Q[i, i]
    return acc


def _trace_weighted(ctx: ModularContext, Q: TensorMatrix, M) -> TensorPoly:
    if Q.dim != ctx.num_vars:
        raise DimMismatch(f"matrix dim {Q.dim}, context has {ctx.num_vars}")
    acc = TensorPoly.zero(Q.num_vars, Q.degree_cap)
    for i in range(Q.dim):
        for j in range(Q.dim):
            m = complex(M[i][j])
            if abs(m) > PRUNE_TOL:
                acc = acc + Q[j, i].scale(m)
    return acc


def trace_A(ctx: ModularContext, Q: TensorMatrix) -> TensorPoly:
    """Tr(A # Q) = sum_{ij} A_ij Q_ji."""
    return _trace_weighted(ctx, Q, ctx.A)


def trace_Ainv(ctx: ModularContext, Q: TensorMatrix) -> TensorPoly:
    """Tr(A^{-1} # Q); A^{-1} = A^T for the block structure used here."""
    return _trace_weighted(ctx, Q, ctx.A.T)


def pi_norm_bound_mat(Q: TensorMatrix, R: float) -> float:
    """Max row sum of entrywise projective-norm bounds."""
    return max(
        sum(pi_norm_bound(Q[i, j], R) for j in range(Q.dim)) for i in range(Q.dim)
    )


def mat_star(Q: TensorMatrix) -> TensorMatrix:
    """Matrix adjoint: transpose with entrywise leg adjoints."""
    return TensorMatrix(
        Q.dim,
        tuple(
            tuple(t_star(Q[j, i]) for j in range(Q.dim)) for i in range(Q.dim)
        ),
    )


def mat_sigma(ctx: ModularContext, Q: TensorMatrix, s_left: float, s_right: float) -> TensorMatrix:
    """Legwise modular action applied to every entry."""
    return Q.map_entries(lambda e: t_sigma(ctx, e, s_left, s_right))


def mat_pow(Q: TensorMatrix, m: int) -> TensorMatrix:
    if m < 0:
        raise ValueError("only nonnegative powers")
    acc = TensorMatrix.identity(Q.num_vars, Q.dim, Q.degree_cap)
    for _ in range(m):
        acc = mat_mul(acc, Q)
    return acc
