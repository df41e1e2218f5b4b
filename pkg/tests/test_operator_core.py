""" UnitTest for dense operator algebra """
import unittest
import logging
logging.basicConfig(format='%(asctime)s %(levelname)-8s %(message)s', level=logging.INFO, datefmt='%Y-%m-%d %H:%M:%S')

from itertools import product

import numpy as np
from scipy import linalg

from qcontact.operator_core import (
    HermitianOperator, DensityMatrix, Superoperator, BranchCutError, DimensionError, tensor_product, partial_trace,
    matrix_exponential, principal_matrix_logarithm, superoperator_from_action, vectorize, unvectorize, max_norm,
    swap_operator, pauli, random_hermitian, random_density_matrix, random_unitary, nested_commutator, commutator,
    trace_distance, allclose_max)


def rng(seed=0):
    return np.random.Generator(np.random.Philox(seed))


class Test(unittest.TestCase):
    """ Test operator_core """

    def test_partial_trace(self):
        r = rng(1)
        for d_left, d_right in product([2, 3, 4], repeat=2):
            rho_left = random_density_matrix(d_left, r)
            rho_right = random_density_matrix(d_right, r)
            joint = tensor_product(rho_left.matrix, rho_right.matrix)
            self.assertLessEqual(max_norm(partial_trace(joint, (d_left, d_right), 'left') - rho_left.matrix), 1e-14)
            self.assertLessEqual(max_norm(partial_trace(joint, (d_left, d_right), 'right') - rho_right.matrix), 1e-14)
        with self.assertRaises(DimensionError):
            partial_trace(np.eye(6), (4, 2))
        with self.assertRaises(ValueError):
            partial_trace(np.eye(4), (2, 2), keep='middle')

    def test_row_stacking(self):
        self.assertEqual(vectorize(np.array([[1, 2], [3, 4]])).tolist(), [1, 2, 3, 4])
        x = np.arange(9).reshape(3, 3)
        self.assertEqual(unvectorize(vectorize(x)).tolist(), x.tolist())
        with self.assertRaises(DimensionError):
            unvectorize(np.ones(5))

    def test_commutator_generator(self):
        r = rng(2)
        h = random_hermitian(3, r)
        x = r.normal(size=(3, 3)) + 1j * r.normal(size=(3, 3))
        generator = Superoperator.commutator_generator(h)
        eye = np.eye(3)
        self.assertLessEqual(max_norm(generator.matrix + 1j * (np.kron(h.matrix, eye) - np.kron(eye, h.matrix.T))),
                             1e-15)
        self.assertLessEqual(max_norm(generator(x) + 1j * commutator(h.matrix, x)), 1e-12)
        self.assertTrue(generator.is_trace_annihilating())

    def test_generator_from_action(self):
        r = rng(8)
        for d in [2, 3, 4]:
            h = random_hermitian(d, r).matrix
            materialized = superoperator_from_action(lambda x: -1j * commutator(h, x), d)
            self.assertTrue(allclose_max(materialized.matrix, Superoperator.commutator_generator(h).matrix, 1e-13))
        sigma_x = pauli('x')
        bit_flip = superoperator_from_action(lambda x: sigma_x @ x @ sigma_x, 2)
        self.assertTrue(allclose_max(bit_flip.matrix, Superoperator.conjugation(sigma_x).matrix, 1e-15))
        self.assertFalse(allclose_max(bit_flip.matrix, np.eye(2)))

    def test_action_on_random_operators(self):
        r = rng(9)
        u = random_unitary(3, r)
        k = r.normal(size=(3, 3)) + 1j * r.normal(size=(3, 3))

        def action(x):
            return u @ x @ u.conj().T + k @ x - x.T

        channel = superoperator_from_action(action, 3)
        for _ in range(100):
            x = r.normal(size=(3, 3)) + 1j * r.normal(size=(3, 3))
            y = r.normal(size=(3, 3)) + 1j * r.normal(size=(3, 3))
            a, b = r.normal(size=2)
            self.assertTrue(allclose_max(channel(x), action(x), 1e-12))
            self.assertTrue(allclose_max(channel(a * x + b * y), a * channel(x) + b * channel(y), 1e-12))

    def test_generator_eigenvalues(self):
        r = rng(10)
        h = random_hermitian(3, r)
        eigenvalues = Superoperator.commutator_generator(h).eigenvalues()
        gaps = np.subtract.outer(h.eigenvalues, h.eigenvalues).reshape(-1)
        self.assertLessEqual(max_norm(np.real(eigenvalues)), 1e-12)
        self.assertTrue(allclose_max(np.sort(np.imag(eigenvalues)), np.sort(-gaps), 1e-12))
        self.assertEqual(len(Superoperator.identity(3).eigenvalues()), 9)

    def test_conjugation_and_composition(self):
        r = rng(3)
        u, v = random_unitary(3, r), random_unitary(3, r)
        rho = random_density_matrix(3, r)
        channel = Superoperator.conjugation(u) @ Superoperator.conjugation(v)
        expected = u @ v @ rho.matrix @ v.conj().T @ u.conj().T
        self.assertLessEqual(max_norm(channel(rho) - expected), 1e-12)
        self.assertTrue(channel.is_trace_preserving())
        self.assertTrue(channel.is_completely_positive())
        self.assertLessEqual(channel.power(2).distance(channel @ channel), 1e-12)

    def test_choi(self):
        identity = Superoperator.identity(2)
        choi = identity.choi()
        # sum_ij |i><j| kron |i><j| = 2 |phi+><phi+|
        phi = np.array([1, 0, 0, 1]) / np.sqrt(2)
        self.assertLessEqual(max_norm(choi - 2 * np.outer(phi, phi)), 1e-15)
        transpose = superoperator_from_action(lambda x: x.T, 2)
        self.assertTrue(transpose.is_trace_preserving())
        self.assertFalse(transpose.is_completely_positive())
        self.assertLessEqual(max_norm(transpose.choi() - swap_operator(2)), 1e-15)

    def test_matrix_exponential(self):
        r = rng(4)
        h = random_hermitian(4, r)
        u = matrix_exponential(-1j * 0.7 * h.matrix)
        self.assertLessEqual(max_norm(u @ u.conj().T - np.eye(4)), 1e-13)
        self.assertLessEqual(max_norm(u - linalg.expm(-1j * 0.7 * h.matrix)), 1e-12)
        self.assertLessEqual(max_norm(matrix_exponential(h.matrix) - linalg.expm(h.matrix)), 1e-12)
        a = r.normal(size=(4, 4))
        self.assertLessEqual(max_norm(matrix_exponential(a) - linalg.expm(a)), 1e-12)
        self.assertLessEqual(max_norm(matrix_exponential(np.zeros((3, 3))) - np.eye(3)), 1e-15)

    def test_principal_logarithm(self):
        r = rng(5)
        a = r.normal(size=(4, 4)) + 1j * r.normal(size=(4, 4))
        a = 0.3 * a / np.linalg.norm(a, 2)
        self.assertLessEqual(max_norm(principal_matrix_logarithm(linalg.expm(a)) - a), 1e-12)
        phase = np.diag([np.exp(0.3j), np.exp(-0.3j)])
        self.assertTrue(allclose_max(principal_matrix_logarithm(phase), np.diag([0.3j, -0.3j]), 1e-14))
        with self.assertRaises(BranchCutError):
            principal_matrix_logarithm(np.diag([-1.0, 1.0]))
        with self.assertRaises(BranchCutError):
            principal_matrix_logarithm(np.diag([0.0, 1.0]))

    def test_density_matrix(self):
        with self.assertRaises(ValueError):
            DensityMatrix(np.diag([1.2, -0.2]))
        with self.assertRaises(ValueError):
            DensityMatrix(np.diag([0.5, 0.6]))
        with self.assertRaises(ValueError):
            DensityMatrix(np.array([[0.5, 0.1], [0.3, 0.5]]))
        plus = DensityMatrix.pure([1, 1])
        self.assertAlmostEqual(plus.expectation(pauli('x')), 1.0, places=12)
        mixed = DensityMatrix.maximally_mixed(3)
        self.assertLessEqual(max_norm(mixed.populations - 1 / 3), 1e-15)
        zero, one = DensityMatrix.pure([1, 0]), DensityMatrix.pure([0, 1])
        self.assertAlmostEqual(trace_distance(zero, one), 1.0, places=12)
        self.assertAlmostEqual(trace_distance(zero, zero), 0.0, places=12)

    def test_hermitian_operator(self):
        with self.assertRaises(ValueError):
            HermitianOperator(np.array([[0, 1], [0, 0]]))
        with self.assertRaises(DimensionError):
            HermitianOperator(np.ones((2, 3)))
        r = rng(6)
        h = random_hermitian(5, r, scale=2.5)
        self.assertAlmostEqual(h.spectral_norm(), 2.5, places=12)
        self.assertLessEqual(max_norm(h.reconstruct() - h.matrix), 1e-13)
        self.assertLessEqual(max_norm((h / 2.5).eigenvalues - h.eigenvalues / 2.5), 1e-13)

    def test_swap_and_nested_commutator(self):
        r = rng(7)
        a, b = random_density_matrix(3, r).matrix, random_density_matrix(3, r).matrix
        swap = swap_operator(3)
        self.assertLessEqual(max_norm(swap @ tensor_product(a, b) @ swap - tensor_product(b, a)), 1e-15)
        x, y, z = [random_hermitian(2, r).matrix for _ in range(3)]
        self.assertLessEqual(max_norm(nested_commutator([x, y], z) - commutator(x, commutator(y, z))), 1e-14)
        self.assertLessEqual(max_norm(nested_commutator([], z) - z), 0)
        # commuting operators may be applied in either order
        a, b = np.diag(r.normal(size=3)), np.diag(r.normal(size=3))
        x = r.normal(size=(3, 3)) + 1j * r.normal(size=(3, 3))
        self.assertTrue(allclose_max(nested_commutator([a, b], x), nested_commutator([b, a], x), 1e-13))
        self.assertFalse(allclose_max(nested_commutator([a, b], x), np.zeros((3, 3))))


if __name__ == "__main__":
    unittest.main()
