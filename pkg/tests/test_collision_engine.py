""" UnitTest for the collision channel and its effective Liouvillian """
import unittest
import logging
logging.basicConfig(format='%(asctime)s %(levelname)-8s %(message)s', level=logging.INFO, datefmt='%Y-%m-%d %H:%M:%S')

import numpy as np

from qcontact.operator_core import (
    DensityMatrix, Superoperator, DimensionError, matrix_exponential, superoperator_from_action,
    tensor_product, max_norm, pauli, random_hermitian, random_density_matrix, trace_distance)
from qcontact.thermal import ThermalSpec, gibbs_state, fit_temperature
from qcontact.collision_engine import (
    CollisionSetup, collision_channel, iterate_collisions, trajectory_steps, phi_series_term, phi_term_components,
    ancilla_sandwich_term, induced_hamiltonian, effective_liouvillian, liouvillian_series, fixed_point,
    truncated_fixed_point, audit_ancilla_dependence, audit_system_dependence, commutator_residual,
    partial_swap_preset)

DT_GRID = np.logspace(np.log10(3e-3), -1, 7)


def random_setup(rng, d_s=2, d_a=2, scale=1.0, beta_e=1.0, dt=0.1):
    return CollisionSetup(
        h_s=random_hermitian(d_s, rng, scale),
        h_a=random_hermitian(d_a, rng, scale),
        h_sa=random_hermitian(d_s * d_a, rng, scale),
        beta_e=beta_e,
        dt=dt)


def log_slope(steps, values):
    return np.polyfit(np.log(steps), np.log(values), 1)[0]


class Test(unittest.TestCase):
    """ Test collision_engine """

    def test_setup_validation(self):
        with self.assertRaises(DimensionError):
            CollisionSetup(pauli('z'), pauli('z'), np.eye(3), 1.0, 0.1)
        with self.assertRaises(ValueError):
            CollisionSetup(pauli('z'), pauli('z'), np.zeros((4, 4)), 1.0, 0.0)
        with self.assertRaises(ValueError):
            CollisionSetup(pauli('z'), pauli('z'), np.zeros((4, 4)), -1.0, 0.1)

    def test_free_evolution(self):
        rng = np.random.Generator(np.random.Philox(20))
        setup = random_setup(rng, d_s=3, d_a=2, dt=0.2).replace(h_sa=np.zeros((6, 6)))
        u = matrix_exponential(-1j * setup.dt * setup.h_s.matrix)
        self.assertLessEqual(collision_channel(setup).distance(Superoperator.conjugation(u)), 1e-12)
        # a Gibbs state of H_S stays put
        rho = gibbs_state(ThermalSpec(setup.h_s, 0.8))
        trajectory = iterate_collisions(setup, rho, 50)
        self.assertEqual(len(trajectory), 51)
        for state in trajectory:
            self.assertLessEqual(max_norm(state.matrix - rho.matrix), 1e-12)

    def test_channel_is_cptp(self):
        rng = np.random.Generator(np.random.Philox(21))
        for d_s, d_a in [(2, 2), (2, 3), (3, 2)]:
            for _ in range(10):
                setup = random_setup(rng, d_s, d_a, beta_e=rng.uniform(0.1, 3.0), dt=rng.uniform(0.01, 1.0))
                channel = collision_channel(setup)
                self.assertLessEqual(channel.trace_defect(), 1e-10)
                self.assertTrue(channel.is_completely_positive())

    def test_partial_swap_replacer(self):
        dt = 0.3
        setup = partial_swap_preset(e_s=1.0, e_a=1.0, j=np.pi / 2 / dt, beta_a=0.8, dt=dt)
        rng = np.random.Generator(np.random.Philox(22))
        for _ in range(5):
            rho = random_density_matrix(2, rng)
            self.assertLessEqual(max_norm(collision_channel(setup)(rho) - setup.rho_a.matrix), 1e-12)

    def test_partial_swap_full_swap_is_free_evolution(self):
        dt = 0.3
        setup = partial_swap_preset(e_s=1.0, e_a=1.0, j=np.pi / dt, beta_a=0.8, dt=dt)
        channel = collision_channel(setup)
        for p in [0.1, 0.5, 0.9]:
            rho = np.diag([p, 1 - p])
            self.assertLessEqual(max_norm(channel(rho) - rho), 1e-12)

    def test_partial_swap_thermalizes(self):
        setup = partial_swap_preset(e_s=1.0, e_a=1.0, j=1.0, beta_a=0.8, dt=0.3)
        rho0 = random_density_matrix(2, np.random.Generator(np.random.Philox(23)))
        trajectory = iterate_collisions(setup, rho0, 600)
        distances = [trace_distance(state, setup.rho_a) for state in trajectory]
        for before, after in zip(distances[:-1], distances[1:]):
            self.assertLessEqual(after, before + 1e-14)
        self.assertLessEqual(distances[-1], 1e-8)
        report = fixed_point(collision_channel(setup))
        self.assertTrue(report.unique)
        self.assertLessEqual(max_norm(report.state.matrix - setup.rho_a.matrix), 1e-8)

    def test_detuned_partial_swap(self):
        # population transfer is symmetric, so e_s beta_s = e_a beta_a at the fixed point
        setup = partial_swap_preset(e_s=2.0, e_a=1.0, j=1.0, beta_a=0.8, dt=0.1)
        report = fixed_point(collision_channel(setup))
        self.assertTrue(report.unique)
        fit = fit_temperature(report.state, setup.h_s)
        self.assertAlmostEqual(fit.beta_hat, 0.4, delta=1e-3)

    def test_trajectory(self):
        setup = partial_swap_preset(e_s=1.0, e_a=1.0, j=1.0, beta_a=0.8, dt=0.3)
        rho0 = DensityMatrix.pure([1, 0])
        trajectory = iterate_collisions(setup, rho0, 0)
        self.assertEqual(len(trajectory), 1)
        self.assertIs(trajectory[0], rho0)
        self.assertEqual(len(iterate_collisions(setup, rho0, 30, max_stored=10)), len(trajectory_steps(30, 10)))
        steps = trajectory_steps(10 ** 6, 1000)
        self.assertEqual(steps[0], 0)
        self.assertEqual(steps[-1], 10 ** 6)
        self.assertLessEqual(len(steps), 1002)
        with self.assertRaises(ValueError):
            iterate_collisions(setup, rho0, -1)
        with self.assertRaises(DimensionError):
            iterate_collisions(setup, DensityMatrix.maximally_mixed(3), 5)

    def test_series_terms(self):
        rng = np.random.Generator(np.random.Philox(24))
        setup = random_setup(rng)
        with self.assertRaises(ValueError):
            phi_series_term(setup, 4)
        free = setup.replace(h_sa=np.zeros((4, 4)))
        self.assertLessEqual(phi_series_term(free, 1).distance(Superoperator.commutator_generator(free.h_s)), 1e-12)

    def test_series_remainder_order(self):
        rng = np.random.Generator(np.random.Philox(25))
        for _ in range(3):
            base = random_setup(rng, scale=0.5)
            terms = [Superoperator.identity(2)] + [phi_series_term(base, n) for n in (1, 2, 3)]
            for order in (1, 2, 3):
                remainders = []
                for dt in DT_GRID:
                    truncated = Superoperator.zeros(2)
                    for n in range(order + 1):
                        truncated = truncated + terms[n] * dt ** n
                    remainders.append(collision_channel(base.replace(dt=dt)).distance(truncated))
                self.assertAlmostEqual(log_slope(DT_GRID, remainders), order + 1, delta=0.3)

    def test_liouvillian(self):
        rng = np.random.Generator(np.random.Philox(26))
        setup = random_setup(rng, dt=0.1)
        generator = effective_liouvillian(setup)
        channel = collision_channel(setup)
        self.assertLessEqual(max_norm(matrix_exponential(setup.dt * generator.matrix) - channel.matrix), 1e-9)
        self.assertTrue(generator.is_trace_annihilating(1e-9))

        base = random_setup(rng, scale=0.5)
        series = liouvillian_series(base)
        remainders = [effective_liouvillian(base.replace(dt=dt)).distance(series.truncated(dt)) for dt in DT_GRID]
        self.assertAlmostEqual(log_slope(DT_GRID, remainders), 3, delta=0.3)

    def test_liouvillian_without_coupling(self):
        rng = np.random.Generator(np.random.Philox(27))
        setup = random_setup(rng, d_s=3, dt=0.1).replace(h_sa=np.zeros((6, 6)))
        series = liouvillian_series(setup)
        self.assertLessEqual(series.l0.distance(Superoperator.commutator_generator(setup.h_s)), 1e-10)
        self.assertLessEqual(max_norm(series.l1.matrix), 1e-10)
        self.assertLessEqual(max_norm(series.l2.matrix), 1e-10)
        self.assertLessEqual(effective_liouvillian(setup).distance(series.l0), 1e-9)

    def test_induced_hamiltonian(self):
        rng = np.random.Generator(np.random.Philox(28))
        for d_s, d_a in [(2, 2), (3, 2)]:
            setup = random_setup(rng, d_s, d_a)
            expected = Superoperator.commutator_generator(setup.h_s + induced_hamiltonian(setup))
            self.assertLessEqual(liouvillian_series(setup).l0.distance(expected), 1e-10)

    def test_fixed_point_of_replacer(self):
        sigma = random_density_matrix(3, np.random.Generator(np.random.Philox(29)))
        replacer = superoperator_from_action(lambda x: np.trace(x) * sigma.matrix, 3)
        report = fixed_point(replacer)
        self.assertTrue(report.unique)
        self.assertEqual(report.eigenvalue_one_multiplicity, 1)
        self.assertLessEqual(max_norm(report.state.matrix - sigma.matrix), 1e-9)
        self.assertAlmostEqual(report.spectral_gap, 1.0, places=9)
        with self.assertRaises(ValueError):
            fixed_point(replacer, mode='steady')

    def test_fixed_point_is_stationary(self):
        rng = np.random.Generator(np.random.Philox(37))
        for d_s in [2, 3]:
            setup = random_setup(rng, d_s=d_s)
            report = fixed_point(collision_channel(setup))
            self.assertTrue(report.unique)
            liouvillian = effective_liouvillian(setup)
            self.assertLessEqual(max_norm(liouvillian(report.state)), 1e-9)
            steady = fixed_point(liouvillian, mode='generator')
            self.assertLessEqual(max_norm(steady.state.matrix - report.state.matrix), 1e-8)

    def test_fixed_point_not_unique(self):
        rng = np.random.Generator(np.random.Philox(30))
        setup = random_setup(rng, d_s=3, dt=0.1).replace(h_sa=np.zeros((6, 6)))
        report = fixed_point(collision_channel(setup))
        self.assertFalse(report.unique)
        self.assertEqual(report.eigenvalue_one_multiplicity, 3)
        self.assertLessEqual(max_norm(report.state.matrix - np.eye(3) / 3), 1e-9)

    def test_truncated_fixed_point(self):
        setup = partial_swap_preset(e_s=1.0, e_a=1.0, j=1.0, beta_a=0.8, dt=0.05)
        report = truncated_fixed_point(setup)
        self.assertTrue(report.unique)
        self.assertLessEqual(max_norm(report.state.matrix - setup.rho_a.matrix), 1e-8)

        # the truncated fixed point approaches the exact one as dt shrinks
        base = random_setup(np.random.Generator(np.random.Philox(31)), scale=0.5)
        distances = []
        for dt in (0.05, 0.025):
            setup = base.replace(dt=dt)
            exact = fixed_point(collision_channel(setup)).state
            distances.append(max_norm(truncated_fixed_point(setup).state.matrix - exact.matrix))
        self.assertLess(distances[1], 0.75 * distances[0])

    def test_ancilla_audit(self):
        rng = np.random.Generator(np.random.Philox(32))
        for _ in range(50):
            setup = random_setup(rng)
            record = audit_ancilla_dependence(setup, 1.0)
            self.assertEqual(record, (0.0, 0.0, 0.0))
            record = audit_ancilla_dependence(setup, 2.5)
            self.assertLessEqual(record.delta_l0, 1e-10)
            self.assertLessEqual(record.delta_l1, 1e-10)
            self.assertGreater(record.delta_l2, 1e-4)
        with self.assertRaises(ValueError):
            audit_ancilla_dependence(setup, 0.0)

    def test_ancilla_audit_commuting_coupling(self):
        rng = np.random.Generator(np.random.Philox(33))
        setup = CollisionSetup(random_hermitian(2, rng), 0.7 * pauli('z'), tensor_product(pauli('z'), pauli('z')),
                               1.0, 0.1)
        self.assertLessEqual(audit_ancilla_dependence(setup, 2.5).delta_l2, 1e-10)
        self.assertLessEqual(max_norm(ancilla_sandwich_term(setup).matrix), 1e-10)

    def test_system_audit(self):
        rng = np.random.Generator(np.random.Philox(34))
        for _ in range(10):
            setup = random_setup(rng)
            record = audit_system_dependence(setup, 1.0)
            self.assertLessEqual(record.delta_l2, 1e-12)
            record = audit_system_dependence(setup, 2.5)
            # L2 depends on H_S, but only through a Hamiltonian term -i[K, .]
            self.assertGreater(record.delta_l2, 1e-4)
            self.assertLessEqual(record.residual_l2, 1e-9)
            # the dissipative part of L2 is not of that form
            self.assertGreater(commutator_residual(liouvillian_series(setup).l2), 1e-4)
        with self.assertRaises(ValueError):
            audit_system_dependence(setup, -1.0)

    def test_commutator_residual(self):
        rng = np.random.Generator(np.random.Philox(36))
        for d in [2, 3]:
            h = random_hermitian(d, rng)
            self.assertLessEqual(commutator_residual(Superoperator.commutator_generator(h)), 1e-12)
            dephasing = superoperator_from_action(lambda x: np.diag(np.diag(x)) - x, d)
            self.assertGreater(commutator_residual(dephasing), 0.1)

    def test_term_components(self):
        rng = np.random.Generator(np.random.Philox(35))
        setup = random_setup(rng)
        for component in phi_term_components(setup, 2):
            if component.contains_ancilla:
                self.assertNotEqual(component.reason, 'sandwiched')
                self.assertTrue(component.vanishes)
        components = {c.word: c for c in phi_term_components(setup, 3)}
        self.assertEqual(len(components), 27)
        sandwich = components[('SA', 'A', 'SA')]
        self.assertEqual(sandwich.reason, 'sandwiched')
        self.assertFalse(sandwich.vanishes)
        self.assertGreater(max_norm(ancilla_sandwich_term(setup).matrix), 1e-6)
        for word, component in components.items():
            if component.contains_ancilla and word != ('SA', 'A', 'SA'):
                self.assertTrue(component.vanishes, word)
                self.assertNotEqual(component.reason, 'sandwiched')
        self.assertFalse(components[('S', 'SA', 'S')].contains_ancilla)


if __name__ == "__main__":
    unittest.main()
