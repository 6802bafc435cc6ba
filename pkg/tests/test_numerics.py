import numpy as np
import pytest

from oqho_memory.errors import (
    DiagonalizabilityError,
    InvalidMomentMatrixError,
    ResonanceError,
)
from oqho_memory.model import J2
from oqho_memory.numerics import (
    LinearMatrixEquation,
    eig_real,
    matrix_exp,
    solve_lyapunov,
    solve_sylvester,
    solve_symmetric_constrained,
    sqrt_psd,
    sym_basis,
    sym_to_vec,
    vec_to_sym,
)

from oracles import kron_solve_lyapunov, kron_solve_sylvester, random_sym, random_spd


def series_expm(a, t, terms=60):
    """Plain Taylor-series exponential, reference only."""
    acc = np.eye(a.shape[0])
    term = np.eye(a.shape[0])
    for k in range(1, terms):
        term = term @ (t * a) / k
        acc = acc + term
    return acc


class TestMatrixExp:
    def test_zero_matrix(self):
        np.testing.assert_allclose(matrix_exp(np.zeros((3, 3)), 5.0), np.eye(3), atol=1e-15)

    def test_planar_rotation(self):
        # e^{t J2} rotates by t; a quarter turn reproduces J2 itself.
        got = matrix_exp(J2, np.pi / 2)
        np.testing.assert_allclose(got, J2, atol=1e-14)
        np.testing.assert_allclose(got, series_expm(J2, np.pi / 2), atol=1e-13)

    def test_diagonal(self):
        np.testing.assert_allclose(matrix_exp(-np.eye(2), 1.0),
                                   np.exp(-1) * np.eye(2), atol=1e-15)

    def test_semigroup(self):
        rng = np.random.default_rng(10)
        for _ in range(10):
            a = rng.standard_normal((4, 4))
            a *= 10.0 / np.linalg.norm(a)
            s, t = rng.uniform(0, 5, 2)
            lhs = matrix_exp(a, s + t)
            rhs = matrix_exp(a, s) @ matrix_exp(a, t)
            assert np.linalg.norm(lhs - rhs) <= 1e-9 * np.linalg.norm(lhs)


class TestSolveLyapunov:
    def test_scalar_like(self):
        x = solve_lyapunov(-np.eye(2), np.eye(2))
        np.testing.assert_allclose(x, 0.5 * np.eye(2), atol=1e-13)

    def test_rotation_plus_damping(self):
        # M = -I + J2: the commutator part vanishes at X = I/2.
        x = solve_lyapunov(-np.eye(2) + J2, np.eye(2))
        np.testing.assert_allclose(x, 0.5 * np.eye(2), atol=1e-12)
        np.testing.assert_allclose(x, kron_solve_lyapunov(-np.eye(2) + J2, np.eye(2)),
                                   atol=1e-12)

    def test_resonant_spectrum_rejected(self):
        with pytest.raises(ResonanceError):
            solve_lyapunov(J2, np.eye(2))

    def test_matches_kronecker_solve(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            m = rng.standard_normal((4, 4)) - 2.0 * np.eye(4)
            q = random_sym(rng, 4)
            x = solve_lyapunov(m, q)
            x_ref = kron_solve_lyapunov(m, q)
            assert np.linalg.norm(x - x_ref) <= 1e-9 * max(np.linalg.norm(x_ref), 1.0)
            res = np.linalg.norm(m @ x + x @ m.T + q)
            assert res <= 1e-10 * (np.linalg.norm(q) + np.linalg.norm(m) * np.linalg.norm(x) + 1)
            assert np.linalg.norm(x - x.T) <= 1e-12 * max(np.linalg.norm(x), 1.0)


class TestSolveSylvester:
    def test_identity_coefficients(self):
        np.testing.assert_allclose(solve_sylvester(-np.eye(3), -np.eye(3), np.eye(3)),
                                   0.5 * np.eye(3), atol=1e-13)

    def test_diagonal_scalars(self):
        # (1+3)x = -4 and (2+3)x = -5.
        x = solve_sylvester(np.diag([1.0, 2.0]), np.diag([3.0]), np.array([[4.0], [5.0]]))
        np.testing.assert_allclose(x, [[-1.0], [-1.0]], atol=1e-13)

    def test_matches_kronecker_solve(self):
        rng = np.random.default_rng(12)
        for _ in range(10):
            m1 = rng.standard_normal((3, 3)) - 2 * np.eye(3)
            m2 = rng.standard_normal((4, 4)) - 2 * np.eye(4)
            q = rng.standard_normal((3, 4))
            x = solve_sylvester(m1, m2, q)
            x_ref = kron_solve_sylvester(m1, m2, q)
            assert np.linalg.norm(x - x_ref) <= 1e-9 * max(np.linalg.norm(x_ref), 1.0)

    def test_resonance_rejected(self):
        with pytest.raises(ResonanceError):
            solve_sylvester(np.eye(2), -np.eye(2), np.eye(2))


class TestSymmetricConstrained:
    def test_agrees_with_lyapunov(self):
        rng = np.random.default_rng(13)
        for _ in range(5):
            m = rng.standard_normal((3, 3)) - 2 * np.eye(3)
            q = random_sym(rng, 3)
            eq = LinearMatrixEquation.lyapunov(m, q)
            x, res = solve_symmetric_constrained(eq)
            x_ref = solve_lyapunov(m, q)
            assert np.linalg.norm(x - x_ref) <= 1e-9 * max(np.linalg.norm(x_ref), 1.0)
            assert res <= 1e-9 * max(np.linalg.norm(q), 1.0)

    def test_zero_operator_zero_rhs(self):
        eq = LinearMatrixEquation(operator=lambda x: np.zeros((2, 2)),
                                  q=np.zeros((2, 2)), kind="general", symmetric=True)
        x, res = solve_symmetric_constrained(eq)
        assert np.all(x == 0)
        assert res == 0

    def test_homogeneous_definite_equation_gives_zero(self):
        # S X P + P X S + 0 = 0 with S < 0, P > 0 has only the zero solution.
        rng = np.random.default_rng(14)
        s = -random_spd(rng, 4)
        p = random_spd(rng, 4)
        eq = LinearMatrixEquation(operator=lambda x: s @ x @ p + p @ x @ s,
                                  q=np.zeros((4, 4)), kind="general", symmetric=True)
        x, res = solve_symmetric_constrained(eq)
        assert np.linalg.norm(x) <= 1e-12
        assert res <= 1e-12


class TestSqrtPsd:
    def test_identity(self):
        np.testing.assert_allclose(sqrt_psd(np.eye(3)), np.eye(3), atol=1e-15)

    def test_diagonal(self):
        np.testing.assert_allclose(sqrt_psd(np.diag([4.0, 9.0])), np.diag([2.0, 3.0]),
                                   atol=1e-14)

    def test_reconstruction(self):
        rng = np.random.default_rng(15)
        for _ in range(10):
            g = rng.standard_normal((5, 5))
            p = g.T @ g
            s = sqrt_psd(p)
            assert np.linalg.norm(s @ s - p) <= 1e-10 * max(np.linalg.norm(p), 1.0)
            assert np.min(np.linalg.eigvalsh(s)) >= -1e-12

    def test_indefinite_rejected(self):
        with pytest.raises(InvalidMomentMatrixError):
            sqrt_psd(np.diag([1.0, -1.0]))


class TestEigReal:
    def test_symplectic_unit(self):
        w, _ = eig_real(J2)
        np.testing.assert_allclose(np.sort_complex(w), [-1j, 1j], atol=1e-12)

    def test_diagonal(self):
        w, u = eig_real(np.diag([1.0, 2.0]))
        np.testing.assert_allclose(w, [1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(np.abs(u), np.eye(2), atol=1e-12)

    def test_anisotropic_rotation(self):
        w, _ = eig_real(np.array([[0.0, 4.0], [-1.0, 0.0]]))
        np.testing.assert_allclose(np.sort_complex(w), [-2j, 2j], atol=1e-12)

    def test_reconstruction(self):
        rng = np.random.default_rng(16)
        for _ in range(10):
            a = rng.standard_normal((5, 5))
            w, u = eig_real(a)
            rec = (u @ np.diag(w) @ np.linalg.inv(u)).real
            assert np.linalg.norm(rec - a) <= 1e-8 * max(np.linalg.norm(a), 1.0)

    def test_defective_rejected(self):
        with pytest.raises(DiagonalizabilityError):
            eig_real(np.array([[0.0, 1.0], [0.0, 0.0]]))


class TestSymBasis:
    def test_orthonormal(self):
        basis = sym_basis(4)
        assert len(basis) == 10
        gram = np.array([[np.sum(e1 * e2) for e2 in basis] for e1 in basis])
        np.testing.assert_allclose(gram, np.eye(10), atol=1e-14)

    def test_roundtrip(self):
        rng = np.random.default_rng(17)
        r = random_sym(rng, 4)
        np.testing.assert_allclose(vec_to_sym(sym_to_vec(r), 4), r, atol=1e-14)
