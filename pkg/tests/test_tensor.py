import numpy as np
import pytest
import scipy.sparse as sp

from mpjc.errors import DimensionError, LinearSolveError, SingularOperatorError
from mpjc.tensor import ODEControl, as_operator, integrate_ode, kron, matvec, prune, solve_sparse


def kron_oracle(a, b):
    """Quadruple-loop Kronecker product."""
    a = np.asarray(a.toarray() if sp.issparse(a) else a)
    b = np.asarray(b.toarray() if sp.issparse(b) else b)
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra * rb, ca * cb), dtype=complex)
    for i1 in range(ra):
        for j1 in range(ca):
            for i2 in range(rb):
                for j2 in range(cb):
                    out[i1 * rb + i2, j1 * cb + j2] = a[i1, j1] * b[i2, j2]
    return out


def gauss_solve_oracle(a, b):
    """Dense Gaussian elimination with partial pivoting."""
    a = np.array(a, dtype=complex)
    b = np.array(b, dtype=complex)
    n = a.shape[0]
    for col in range(n):
        piv = col + np.argmax(np.abs(a[col:, col]))
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            b[[col, piv]] = b[[piv, col]]
        for row in range(col + 1, n):
            f = a[row, col] / a[col, col]
            a[row, col:] -= f * a[col, col:]
            b[row] -= f * b[col]
    x = np.zeros(n, dtype=complex)
    for row in range(n - 1, -1, -1):
        x[row] = (b[row] - a[row, row + 1:] @ x[row + 1:]) / a[row, row]
    return x


class TestKron:
    def test_identity_case(self):
        result = kron(sp.identity(2), sp.identity(3))
        assert np.array_equal(result.toarray(), np.eye(6))

    def test_diagonal_structure(self):
        result = kron(sp.diags([1.0, 2.0]), sp.identity(2))
        assert np.allclose(result.toarray(), np.diag([1.0, 1.0, 2.0, 2.0]))

    def test_against_quadruple_loop(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        b = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        result = kron(as_operator(a), as_operator(b))
        # entrywise equality up to the complex-multiply rounding of either path
        assert np.max(np.abs(result.toarray() - kron_oracle(a, b))) < 1e-15

    def test_associativity(self):
        rng = np.random.default_rng(11)
        for _ in range(5):
            mats = [
                as_operator(rng.uniform(-0.5, 0.5, size=(2, 2)) + 1j * rng.uniform(-0.5, 0.5, size=(2, 2)))
                for _ in range(3)
            ]
            left = kron(kron(mats[0], mats[1]), mats[2]).toarray()
            right = kron(mats[0], kron(mats[1], mats[2])).toarray()
            assert np.max(np.abs(left - right)) < 1e-15

    def test_dimension_overflow(self):
        big = sp.identity(1 << 14)
        with pytest.raises(DimensionError):
            kron(big, big)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            as_operator(np.array([[np.nan, 0.0], [0.0, 1.0]]))


class TestMatvec:
    def test_identity(self):
        v = np.array([1.0, 2.0 + 1j, -3.0])
        assert np.array_equal(matvec(sp.identity(3, format="csr"), v), v)

    def test_zero_matrix(self):
        v = np.ones(4)
        out = matvec(sp.csr_matrix((4, 4)), v)
        assert np.all(out == 0)

    def test_against_dense_loop(self):
        rng = np.random.default_rng(7)
        a = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
        v = rng.normal(size=8) + 1j * rng.normal(size=8)
        expected = np.array([sum(a[i, j] * v[j] for j in range(8)) for i in range(8)])
        assert np.max(np.abs(matvec(as_operator(a), v) - expected)) < 1e-13

    def test_linearity(self):
        rng = np.random.default_rng(13)
        op = as_operator(rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6)))
        u = rng.normal(size=6) + 1j * rng.normal(size=6)
        v = rng.normal(size=6) + 1j * rng.normal(size=6)
        alpha, beta = 0.7 - 0.2j, -1.3 + 0.5j
        lhs = matvec(op, alpha * u + beta * v)
        rhs = alpha * matvec(op, u) + beta * matvec(op, v)
        assert np.max(np.abs(lhs - rhs)) < 1e-13

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            matvec(sp.identity(3, format="csr"), np.ones(4))


class TestIntegrateOde:
    def test_analytic_exponential(self):
        # dy/dt = -i y from 1: y(pi) = exp(-i pi) = -1
        out = integrate_ode(lambda t, y: -1j * y, np.array([1.0 + 0j]), [0.0, np.pi])
        assert abs(out[-1, 0] - (-1.0)) < 1e-8

    def test_zero_rhs_constant(self):
        y0 = np.array([1.0, 2.0 - 1j])
        out = integrate_ode(lambda t, y: 0 * y, y0, np.linspace(0, 5, 11))
        assert np.allclose(out, y0[None, :], atol=1e-12)

    def test_two_level_rabi_closed_form(self):
        # H = (omega/2) sigma_x from (1,0): P_2(t) = sin^2(omega t / 2)
        omega = 2.7
        h = 0.5 * omega * np.array([[0.0, 1.0], [1.0, 0.0]])
        t = np.linspace(0.0, 8.0, 81)
        out = integrate_ode(lambda _t, y: -1j * (h @ y), np.array([1.0, 0.0], dtype=complex), t)
        p2 = np.abs(out[:, 1]) ** 2
        assert np.max(np.abs(p2 - np.sin(0.5 * omega * t) ** 2)) < 1e-7

    def test_norm_preserved_anti_hermitian(self):
        rng = np.random.default_rng(5)
        h = rng.normal(size=(12, 12))
        h = h + h.T  # Hermitian generator -> anti-Hermitian -i h
        y0 = rng.normal(size=12) + 1j * rng.normal(size=12)
        y0 /= np.linalg.norm(y0)
        out = integrate_ode(lambda _t, y: -1j * (h @ y), y0, np.linspace(0, 10, 21))
        norms = np.linalg.norm(out, axis=1)
        assert np.max(np.abs(norms - 1.0)) < 1e-6

    def test_requires_increasing_grid(self):
        with pytest.raises(ValueError):
            integrate_ode(lambda t, y: y, np.array([1.0 + 0j]), [0.0, 1.0, 0.5])


class TestSolveSparse:
    def test_identity(self):
        b = np.array([1.0, -2.0, 3.0 + 1j])
        assert np.allclose(solve_sparse(sp.identity(3, format="csc"), b), b)

    def test_diagonal(self):
        a = sp.diags([2.0, 4.0]).tocsc()
        x = solve_sparse(a, np.array([2.0, 4.0]))
        assert np.allclose(x, [1.0, 1.0])

    def test_against_gaussian_elimination(self):
        rng = np.random.default_rng(17)
        a = rng.normal(size=(50, 50)) + 1j * rng.normal(size=(50, 50)) + 50 * np.eye(50)
        b = rng.normal(size=50) + 1j * rng.normal(size=50)
        x = solve_sparse(as_operator(a), b)
        assert np.max(np.abs(x - gauss_solve_oracle(a, b))) < 1e-9

    def test_residual_with_matvec(self):
        rng = np.random.default_rng(19)
        a = as_operator(rng.normal(size=(30, 30)) + 10 * np.eye(30))
        b = rng.normal(size=30)
        x = solve_sparse(a, b)
        assert np.linalg.norm(matvec(a, x) - b) / np.linalg.norm(b) <= 1e-10

    def test_singular_matrix(self):
        a = sp.csc_matrix(np.array([[1.0, 1.0], [1.0, 1.0]]))
        with pytest.raises((SingularOperatorError, LinearSolveError)):
            solve_sparse(a, np.array([1.0, 0.0]))


def test_prune_drops_tiny_entries():
    m = as_operator(np.array([[1.0, 1e-16], [0.0, 2.0]]))
    pruned = prune(m)
    assert pruned.nnz == 2


def test_ode_control_defaults():
    ctrl = ODEControl()
    assert ctrl.rel_tol < 1e-8 and ctrl.abs_tol < ctrl.rel_tol
