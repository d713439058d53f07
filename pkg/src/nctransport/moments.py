"""Moment evaluation for the q-quasi-free state by pairing enumeration.

A monomial moment is a sum over pair partitions of the letter positions,
each pairing weighted by q per chord crossing and by the deformed inner
product of the paired generators.  Odd-degree monomials vanish.

Three routes compute the same values and are cross-checked in the tests:

* pairing enumeration with incremental crossing counts (the reference);
* a non-crossing interval recursion, exact at q = 0;
* a truncated Fock-space walk, used for long words at q != 0, where
  enumerating all (2n-1)!! pairings is too slow.

All routes memoize per word on the oracle instance, so results are
deterministic and reproducible.
"""

from __future__ import annotations

from .errors import DimMismatch, IndexOutOfRange, VarCountMismatch
from .modular import ModularContext
from .ncpoly import NCPoly, Word
from .tensor import TensorPoly

# Above this word length, pairing enumeration hands off to the Fock walk.
ENUMERATION_LIMIT = 8


class MomentOracle:
    """Evaluator of the q-quasi-free state, with a per-word memo cache.

    The generator inner products are <e_j, e_k>_U = alpha_{kj}, pinned by
    matching the second moments of the two-generator context against the
    four-point closed form.
    """

    def __init__(self, ctx: ModularContext, q: float):
        if not -1.0 < q < 1.0:
            raise ValueError(f"q must lie in (-1, 1), got {q}")
        self.ctx = ctx
        self.q = float(q)
        # inner[j-1][k-1] = <e_j, e_k>_U
        self.inner_U = ctx.alpha.T.copy()
        self._memo: dict[Word, complex] = {(): 1.0 + 0.0j}

    # -- single-word moments -------------------------------------------

    def moment(self, word) -> complex:
        word = tuple(word)
        for j in word:
            if not 1 <= j <= self.ctx.num_vars:
                raise IndexOutOfRange(f"index {j} outside 1..{self.ctx.num_vars}")
        if len(word) % 2 == 1:
            return 0.0 + 0.0j
        got = self._memo.get(word)
        if got is not None:
            return got
        if self.q == 0.0:
            val = self._noncrossing(word)
        elif len(word) <= ENUMERATION_LIMIT:
            val = self._enumerate(word)
        else:
            val = self._fock_walk(word)
        val = complex(val)
        self._memo[word] = val
        return val

    def _enumerate(self, word: Word) -> complex:
        """Sum over all pairings, counting crossings incrementally.

        Positions are paired smallest-first.  When chord (i, j) is laid
        down, it crosses exactly the already-open chords whose far end lies
        strictly between i and j.
        """
        q = self.q
        inner = self.inner_U

        def rec(remaining: tuple[int, ...], open_ends: tuple[int, ...]) -> complex:
            if not remaining:
                return 1.0 + 0.0j
            i = remaining[0]
            rest = remaining[1:]
            active = tuple(b for b in open_ends if b > i)
            total = 0.0 + 0.0j
            for idx, j in enumerate(rest):
                crossings = sum(1 for b in active if b < j)
                w = inner[word[i] - 1, word[j] - 1] * q**crossings
                if w == 0:
                    continue
                total += w * rec(rest[:idx] + rest[idx + 1:], active + (j,))
            return total

        return rec(tuple(range(len(word))), ())

    def _noncrossing(self, word: Word) -> complex:
        """Interval recursion over non-crossing pairings (q = 0 only)."""
        inner = self.inner_U
        memo = self._memo

        def rec(w: Word) -> complex:
            if len(w) % 2 == 1:
                return 0.0 + 0.0j
            got = memo.get(w)
            if got is not None:
                return got
            total = 0.0 + 0.0j
            first = w[0]
            for k in range(1, len(w), 2):
                c = inner[first - 1, w[k] - 1]
                if c == 0:
                    continue
                total += c * rec(w[1:k]) * rec(w[k + 1:])
            memo[w] = total
            return total

        return rec(word)

    def _fock_walk(self, word: Word) -> complex:
        """Apply the field operators to the vacuum, right to left.

        States are dicts keyed by tensor words.  Annihilation of the m-th
        slot costs q^{m-1}; words too long to annihilate back down to the
        vacuum within the remaining steps are pruned.
        """
        q = self.q
        inner = self.inner_U
        state: dict[Word, complex] = {(): 1.0 + 0.0j}
        n = len(word)
        for step, letter in enumerate(reversed(word)):
            budget = n - step - 1
            nxt: dict[Word, complex] = {}
            for vec, c in state.items():
                created = (letter,) + vec
                if len(created) <= budget:
                    nxt[created] = nxt.get(created, 0.0) + c
                qfac = 1.0
                for m, slot in enumerate(vec):
                    w = inner[letter - 1, slot - 1]
                    if w != 0:
                        reduced = vec[:m] + vec[m + 1:]
                        if len(reduced) <= budget:
                            nxt[reduced] = nxt.get(reduced, 0.0) + c * qfac * w
                    qfac *= q
            state = nxt
        return state.get((), 0.0 + 0.0j)

    # -- linear extensions -----------------------------------------------

    def _check_vars(self, P) -> None:
        if P.num_vars != self.ctx.num_vars:
            raise VarCountMismatch(
                f"operand over {P.num_vars} vars, oracle context has {self.ctx.num_vars}"
            )

    def state(self, P: NCPoly) -> complex:
        self._check_vars(P)
        return sum((c * self.moment(w) for w, c in P.coeffs.items()), 0.0 + 0.0j)

    def state_tensor(self, T: TensorPoly) -> complex:
        self._check_vars(T)
        return sum(
            (c * self.moment(a) * self.moment(b) for (a, b), c in T.coeffs.items()),
            0.0 + 0.0j,
        )

    def inner(self, P: NCPoly, Q: NCPoly) -> complex:
        """<P, Q> = state(P* Q), complex-linear in the second slot.

        Computed wordwise, so no degree cap interferes.
        """
        self._check_vars(P)
        self._check_vars(Q)
        total = 0.0 + 0.0j
        for wp, cp in P.coeffs.items():
            rev = wp[::-1]
            for wq, cq in Q.coeffs.items():
                total += cp.conjugate() * cq * self.moment(rev + wq)
        return total

    def inner_tensor(self, S: TensorPoly, T: TensorPoly) -> complex:
        """Inner product on the tensor square:
        <a (x) b, c (x) d> = state(a* c) state(d b*).
        """
        self._check_vars(S)
        self._check_vars(T)
        total = 0.0 + 0.0j
        for (a, b), cs in S.coeffs.items():
            ra, rb = a[::-1], b[::-1]
            for (c, d), ct in T.coeffs.items():
                total += (
                    cs.conjugate() * ct * self.moment(ra + c) * self.moment(d + rb)
                )
        return total

    def contract_left(self, T: TensorPoly) -> NCPoly:
        """(phi (x) 1): a (x) b -> state(a) b."""
        self._check_vars(T)
        out: dict[Word, complex] = {}
        for (a, b), c in T.coeffs.items():
            v = c * self.moment(a)
            if v != 0:
                out[b] = out.get(b, 0.0) + v
        return NCPoly(T.num_vars, out, T.degree_cap, T.truncated)

    def contract_right(self, T: TensorPoly) -> NCPoly:
        """(1 (x) phi): a (x) b -> state(b) a."""
        self._check_vars(T)
        out: dict[Word, complex] = {}
        for (a, b), c in T.coeffs.items():
            v = c * self.moment(b)
            if v != 0:
                out[a] = out.get(a, 0.0) + v
        return NCPoly(T.num_vars, out, T.degree_cap, T.truncated)

    def law_of(self, Y: list[NCPoly], max_degree: int | None = None) -> "Law":
        """Moment functional of the tuple Y under this state."""
        if len(Y) != self.ctx.num_vars:
            raise DimMismatch(f"need {self.ctx.num_vars} components, got {len(Y)}")
        return Law(self, Y, max_degree)

    def law(self) -> "Law":
        """The oracle's own moments as a law (identity substitution)."""
        from .ncpoly import generators

        return Law(self, generators(self.ctx, 1), None)


class Law:
    """Moment functional w -> state(Y_{w_1} ... Y_{w_n}), memoized.

    Products of the Y_j are exact by default; ``max_degree`` truncates them,
    trading accuracy for speed on larger generator counts.
    """

    def __init__(self, oracle: MomentOracle, Y: list[NCPoly], max_degree: int | None):
        self.oracle = oracle
        self.Y = list(Y)
        self.max_degree = max_degree
        self._memo: dict[Word, complex] = {}
        self._identity = all(
            y.coeffs == {(j + 1,): 1.0 + 0.0j} for j, y in enumerate(Y)
        )

    def __call__(self, word) -> complex:
        word = tuple(word)
        if self._identity:
            return self.oracle.moment(word)
        got = self._memo.get(word)
        if got is not None:
            return got
        if not word:
            return 1.0 + 0.0j
        maxdeg = self.max_degree
        if maxdeg is None:
            maxdeg = sum(max(self.Y[j - 1].degree(), 1) for j in word)
        prod = NCPoly.one(self.oracle.ctx.num_vars, maxdeg)
        for j in word:
            prod = prod * self.Y[j - 1].with_cap(maxdeg)
        val = self.oracle.state(prod)
        self._memo[word] = val
        return val

    def poly(self, P: NCPoly) -> complex:
        """Linear extension to polynomials."""
        return sum((c * self(w) for w, c in P.coeffs.items()), 0.0 + 0.0j)

    def tensor(self, T: TensorPoly) -> complex:
        """Linear extension to word-pair tensors: both legs through the law."""
        return sum(
            (c * self(a) * self(b) for (a, b), c in T.coeffs.items()), 0.0 + 0.0j
        )
