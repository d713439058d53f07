import numpy as np
import pytest

from nctransport.calculus import grad_D, jac_J_sigma
from nctransport.errors import DimMismatch, VarCountMismatch
from nctransport.ncpoly import NCPoly, max_coeff_diff, norm_R
from nctransport.randgen import random_centralizer, random_poly, random_tensor
from nctransport.tensor import (
    TensorMatrix,
    TensorPoly,
    mat_mul,
    mat_sigma,
    mat_star,
    mat_vec,
    max_pair_diff,
    pi_norm_bound,
    pi_norm_bound_mat,
    t_apply,
    t_dagger,
    t_diamond,
    t_flip_m,
    t_mul,
    t_sigma,
    t_star,
    tensor_of,
    trace,
    trace_A,
    trace_Ainv,
    vec_dot,
)

TOL = 1e-12


def elem(left, right, c=1.0, n=2, cap=8):
    return TensorPoly.elementary(n, left, right, c, cap)


def test_t_mul_order():
    # (X1 (x) X2) # (X3 (x) X4) = X1 X3 (x) X4 X2
    s = elem((1,), (2,), n=4)
    t = elem((3,), (4,), n=4)
    assert t_mul(s, t).coeffs == {((1, 3), (4, 2)): 1.0 + 0.0j}


def test_t_mul_unit():
    one = TensorPoly.one(2, 8)
    s = elem((1, 2), (2,))
    assert max_pair_diff(t_mul(one, s), s) == 0.0
    assert max_pair_diff(t_mul(s, one), s) == 0.0


def test_t_mul_associative(ctx2, rng):
    for _ in range(10):
        a = random_tensor(ctx2, rng, 2)
        b = random_tensor(ctx2, rng, 2)
        c = random_tensor(ctx2, rng, 2)
        assert max_pair_diff(t_mul(t_mul(a, b), c), t_mul(a, t_mul(b, c))) < TOL


def test_t_apply():
    one = TensorPoly.one(2, 8)
    g = NCPoly.monomial(2, (1, 2), 2.0, cap=8)
    assert max_coeff_diff(t_apply(one, g), g) == 0.0
    got = t_apply(elem((1,), (2,), n=4), NCPoly.gen(4, 3, 8))
    assert got.coeffs == {(1, 3, 2): 1.0 + 0.0j}


def test_t_apply_norm_bound(ctx2, rng):
    for _ in range(10):
        s = random_tensor(ctx2, rng, 3)
        g = random_poly(ctx2, rng, 3, cap=12)
        lhs = norm_R(t_apply(s, g), 2.0)
        assert lhs <= pi_norm_bound(s, 2.0) * norm_R(g, 2.0) + 1e-9


def test_involutions_on_elementaries():
    s = elem((1,), (2,), 1j)
    assert t_star(s).coeffs == {((1,), (2,)): -1j}
    assert t_dagger(elem((1, 2), (3,), n=3)).coeffs == {((3,), (2, 1)): 1.0 + 0.0j}
    assert t_diamond(elem((1,), (), n=2)).coeffs == {((), (1,)): 1.0 + 0.0j}


def test_involution_algebra(ctx2, rng):
    for _ in range(10):
        s = random_tensor(ctx2, rng, 3)
        t = random_tensor(ctx2, rng, 3)
        # star reverses products, dagger distributes, diamond is an involution
        assert max_pair_diff(t_star(t_mul(s, t)), t_mul(t_star(t), t_star(s))) < TOL
        assert max_pair_diff(t_dagger(t_mul(s, t)), t_mul(t_dagger(s), t_dagger(t))) < TOL
        assert max_pair_diff(t_diamond(t_diamond(s)), s) < TOL
        assert max_pair_diff(t_dagger(s), t_diamond(t_star(s))) < TOL
        assert max_pair_diff(t_dagger(s), t_star(t_diamond(s))) < TOL


def test_flip_m():
    one = TensorPoly.one(2, 8)
    assert t_flip_m(one).coeffs == {(): 1.0 + 0.0j}
    assert t_flip_m(elem((1,), (2,))).coeffs == {(1, 2): 1.0 + 0.0j}
    s = elem((1,), (2,)) + elem((), (1,), 2.0) + elem((2,), (), -1.0)
    got = t_flip_m(s)
    assert got.coeffs == {(1, 2): 1.0 + 0.0j, (1,): 2.0 + 0.0j, (2,): -1.0 + 0.0j}


def test_t_sigma_cases(ctx2, lam2, rng):
    s = random_tensor(ctx2, rng, 3)
    assert t_sigma(ctx2, s, 1.0, -1.0) is s
    one = TensorPoly.one(2, 4)
    assert max_pair_diff(t_sigma(lam2, one, 1.0, 1.0), one) == 0.0
    # legwise action matches the polynomial action on each leg
    from nctransport.modular import apply_sigma

    t = elem((1, 2), (2,), 1.5)
    got = t_sigma(lam2, t, -1.0, 0.5)
    pa = apply_sigma(lam2, NCPoly.monomial(2, (1, 2), 1.5, cap=3), -1.0)
    pb = apply_sigma(lam2, NCPoly.monomial(2, (2,), 1.0, cap=1), 0.5)
    assert max_pair_diff(got, tensor_of(pa, pb, 8)) < TOL


def test_mat_identity_neutral(ctx2, rng):
    entries = [[random_tensor(ctx2, rng, 2) for _ in range(2)] for _ in range(2)]
    q = TensorMatrix(2, tuple(tuple(r) for r in entries))
    ident = TensorMatrix.identity(2, 2, q.degree_cap)
    for i in range(2):
        for j in range(2):
            assert max_pair_diff(mat_mul(ident, q)[i, j], q[i, j]) < TOL
            assert max_pair_diff(mat_mul(q, ident)[i, j], q[i, j]) < TOL


def test_scalar_jacobian_inverse(lam2):
    # the twisted Jacobian of X is alpha; its inverse is (1 + A) / 2
    jx = TensorMatrix.scalar(lam2.alpha, 2, 4)
    inv = TensorMatrix.scalar(0.5 * (np.eye(2) + lam2.A), 2, 4)
    prod = mat_mul(jx, inv)
    ident = TensorMatrix.identity(2, 2, 4)
    for i in range(2):
        for j in range(2):
            assert max_pair_diff(prod[i, j], ident[i, j]) < TOL


def test_mat_vec_scalar_action(lam2):
    xs = [NCPoly.gen(2, 1, 6), NCPoly.gen(2, 2, 6)]
    got = mat_vec(TensorMatrix.scalar(lam2.A, 2, 6), xs)
    for i in range(2):
        expected = NCPoly(
            2, {(1,): complex(lam2.A[i, 0]), (2,): complex(lam2.A[i, 1])}, 6
        )
        assert max_coeff_diff(got[i], expected) < TOL


def test_vec_dot():
    f = [NCPoly.gen(2, 1, 6), NCPoly.gen(2, 2, 6)]
    got = vec_dot(f, f)
    assert got.coeffs == {(1, 1): 1.0 + 0.0j, (2, 2): 1.0 + 0.0j}
    with pytest.raises(DimMismatch):
        vec_dot(f, f[:1])


def test_traces(lam2):
    ident = TensorMatrix.identity(2, 2, 4)
    assert trace(ident).coeffs == {((), ()): 2.0 + 0.0j}
    got = trace_A(lam2, ident)
    assert got.coeffs == {((), ()): complex(np.trace(lam2.A))}
    # trace against the inverse weight of the scalar twisted Jacobian
    jx = TensorMatrix.scalar(lam2.alpha, 2, 4)
    got = trace_Ainv(lam2, jx)
    expected = complex(np.trace(lam2.A.T @ lam2.alpha))
    assert abs(got.coeffs[((), ())] - expected) < TOL


def test_trace_A_reduces_to_trace(ctx2, rng):
    entries = [[random_tensor(ctx2, rng, 2) for _ in range(2)] for _ in range(2)]
    q = TensorMatrix(2, tuple(tuple(r) for r in entries))
    assert max_pair_diff(trace_A(ctx2, q), trace(q)) < TOL


def test_pi_norm_bounds(lam2):
    one = TensorPoly.one(2, 4)
    assert pi_norm_bound(one, 3.0) == pytest.approx(1.0)
    assert pi_norm_bound(elem((1,), (2,)), 3.0) == pytest.approx(9.0)
    jx = TensorMatrix.scalar(lam2.alpha, 2, 4)
    expected = max(np.abs(lam2.alpha).sum(axis=1))
    assert pi_norm_bound_mat(jx, 5.0) == pytest.approx(expected)


def test_gradient_jacobian_star_identity(lam2, rng):
    # for self-adjoint centralizer G, the matrix adjoint of the twisted
    # Jacobian of the cyclic gradient is its half-twisted version
    for _ in range(6):
        g = random_centralizer(lam2, rng, 4, cap=10, self_adjoint=True)
        q = jac_J_sigma(lam2, grad_D(lam2, g))
        lhs = mat_star(q)
        rhs = mat_sigma(lam2, q, 1.0, 0.0)
        for i in range(2):
            for j in range(2):
                assert max_pair_diff(lhs[i, j], rhs[i, j]) < 1e-9


def test_gradient_jacobian_conjugation(lam2, rng):
    # legwise twist equals conjugation by matrix powers on gradient Jacobians
    from nctransport.modular import matrix_power

    for _ in range(4):
        g = random_centralizer(lam2, rng, 4, cap=10)
        q = jac_J_sigma(lam2, grad_D(lam2, g))
        for s in (0.5, -1.0):
            lhs = mat_sigma(lam2, q, -s, -s)
            a_s = TensorMatrix.scalar(matrix_power(lam2, s), 2, q.degree_cap)
            a_ms = TensorMatrix.scalar(matrix_power(lam2, -s), 2, q.degree_cap)
            rhs = mat_mul(a_s, mat_mul(q, a_ms))
            for i in range(2):
                for j in range(2):
                    assert max_pair_diff(lhs[i, j], rhs[i, j]) < 1e-9


def test_var_mismatch():
    with pytest.raises(VarCountMismatch):
        t_mul(TensorPoly.one(1, 4), TensorPoly.one(2, 4))
