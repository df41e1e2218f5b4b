""" Gaussian (covariance matrix) treatment of a harmonic oscillator bombarded by thermal oscillators

Conventions: quadratures X = (x, p) with [x, p] = i, covariance sigma_ij = <{X_i, X_j}> - 2 <X_i><X_j> so that the
vacuum is the identity and a thermal mode has sigma = nu I with nu = coth(omega beta / 2). The joint Hamiltonian is

    H = omega_S (x_S^2 + p_S^2) / 2 + omega_A (x_A^2 + p_A^2) / 2 + X_S^T G X_A = X^T M X / 2,
    M = [[omega_S I, G], [G^T, omega_A I]]

and one collision acts on the joint covariance as sigma -> S sigma S^T with S = exp(dt Omega M).
"""
import logging
import math
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg

from .operator_core import HermitianOperator, DensityMatrix, tensor_product
from .collision_engine import CollisionSetup, collision_channel, fixed_point

UNCERTAINTY_TOL = 1e-10
SYMMETRY_TOL = 1e-12
DETERMINANT_TOL = 1e-12
NU_BOUNDARY_TOL = 1e-14
DIVERGENCE_BOUND = 1e12
MAX_COLLISIONS = 10 ** 7
PROGRESS_INTERVAL = 10 ** 5
FOCK_DIMENSION = 12
FOCK_TAIL_TOL = 1e-6

__all__ = ('GaussianMode', 'CouplingMatrix', 'GaussianFixedPoint', 'ConvergenceError', 'symplectic_form',
           'nu_of_beta', 'beta_of_nu', 'thermal_mode', 'hamiltonian_matrix', 'symplectic_propagator',
           'gaussian_collision_update', 'gaussian_fixed_point', 'fixed_point_formula', 'stationary_mode',
           'stationary_nu', 'richardson_extrapolate', 'fock_fixed_point_nu', 'fock_quadratures')


class ConvergenceError(ValueError):
    """ iteration diverged or did not settle within the collision cap """


def symplectic_form(n: int = 1):
    """ direct sum of n copies of [[0, 1], [-1, 0]] """
    return np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


class GaussianMode:
    """ single zero-mean mode: frequency and 2x2 quadrature covariance """

    def __init__(self, omega: float, cov):
        if not omega > 0:
            raise ValueError('mode frequency should be positive, got {}'.format(omega))
        cov = np.asarray(cov, dtype=float)
        if cov.shape != (2, 2):
            raise ValueError('covariance should be 2x2, got {}'.format(cov.shape))
        asymmetry = float(np.max(np.abs(cov - cov.T)))
        if asymmetry > SYMMETRY_TOL * max(1.0, float(np.max(np.abs(cov)))):
            raise ValueError('covariance is not symmetric: {}'.format(asymmetry))
        cov = (cov + cov.T) / 2
        lowest = float(np.min(np.linalg.eigvalsh(cov + 1j * symplectic_form(1))))
        if lowest < -UNCERTAINTY_TOL:
            raise ValueError('covariance violates the uncertainty relation: min eigenvalue {}'.format(lowest))
        self.omega = float(omega)
        self.cov = cov

    @property
    def nu(self):
        """ symplectic eigenvalue sqrt(det cov) """
        return math.sqrt(max(float(np.linalg.det(self.cov)), 0.0))

    def __repr__(self):
        return 'GaussianMode(omega={}, nu={})'.format(self.omega, self.nu)


class CouplingMatrix:
    """ G in H_SA = X_S^T G X_A, entries ((g_xx, g_xp), (g_px, g_pp)) """

    def __init__(self, g):
        g = np.asarray(g, dtype=float)
        if g.shape != (2, 2):
            raise ValueError('coupling matrix should be 2x2, got {}'.format(g.shape))
        self.g = g

    @classmethod
    def from_entries(cls, g_xx: float, g_xp: float, g_px: float, g_pp: float):
        return cls([[g_xx, g_xp], [g_px, g_pp]])

    @property
    def det(self):
        return float(np.linalg.det(self.g))

    @property
    def gram_trace(self):
        """ Tr(G^T G) """
        return float(np.sum(self.g ** 2))

    def __repr__(self):
        return 'CouplingMatrix({})'.format(self.g.tolist())


class GaussianFixedPoint(NamedTuple):
    nu_inf: float
    iterations: int
    cov: np.ndarray


def _as_coupling(g):
    return g if isinstance(g, CouplingMatrix) else CouplingMatrix(g)


def nu_of_beta(omega: float, beta: float):
    """ (e^{omega beta} + 1) / (e^{omega beta} - 1) = coth(omega beta / 2); beta = 0 maps to +inf """
    if not omega > 0:
        raise ValueError('mode frequency should be positive, got {}'.format(omega))
    if beta < 0:
        raise ValueError('inverse temperature should be non-negative, got {}'.format(beta))
    if beta == 0:
        return math.inf
    # 1 + 2 / expm1(x) stays accurate both for tiny and for large omega beta
    return 1.0 + 2.0 / math.expm1(omega * beta)


def beta_of_nu(omega: float, nu: float):
    """ inverse of nu_of_beta: log(1 + 2 / (nu - 1)) / omega; nu = +inf maps to 0

    nu - 1 below 1e-14 is rejected since beta is then not resolvable in double precision.
    """
    if not omega > 0:
        raise ValueError('mode frequency should be positive, got {}'.format(omega))
    if math.isinf(nu) and nu > 0:
        return 0.0
    if not nu - 1 > NU_BOUNDARY_TOL:
        raise ValueError('nu should exceed one, got {}'.format(nu))
    return math.log1p(2.0 / (nu - 1.0)) / omega


def thermal_mode(omega: float, beta: float):
    nu = nu_of_beta(omega, beta)
    if math.isinf(nu):
        raise ValueError('infinite temperature has no finite covariance')
    return GaussianMode(omega, nu * np.eye(2))


def hamiltonian_matrix(omega_s: float, omega_a: float, g):
    """ M with H = X^T M X / 2 for X = (x_S, p_S, x_A, p_A) """
    g = _as_coupling(g).g
    return np.block([[omega_s * np.eye(2), g], [g.T, omega_a * np.eye(2)]])


def symplectic_propagator(omega_s: float, omega_a: float, g, dt: float):
    """ S(dt) = exp(dt Omega_4 M) """
    return linalg.expm(dt * symplectic_form(2) @ hamiltonian_matrix(omega_s, omega_a, g))


def _collision_blocks(omega_s: float, omega_a: float, g, dt: float):
    s = symplectic_propagator(omega_s, omega_a, g, dt)
    return s[:2, :2], s[:2, 2:]


def gaussian_collision_update(s: GaussianMode, ancilla: GaussianMode, g, dt: float):
    """ One collision: sigma' = S (sigma_S (+) sigma_A) S^T with (+) the direct sum, return the system block """
    propagator = symplectic_propagator(s.omega, ancilla.omega, g, dt)
    joint = linalg.block_diag(s.cov, ancilla.cov)
    cov = (propagator @ joint @ propagator.T)[:2, :2]
    return GaussianMode(s.omega, (cov + cov.T) / 2)


def fixed_point_formula(g, nu_a: float):
    """ Tr(G^T G) / (2 det G) nu_A; a negative value means det G < 0 and no physical fixed point """
    g = _as_coupling(g)
    if abs(g.det) < DETERMINANT_TOL:
        raise ValueError('coupling determinant {} too small for the fixed point formula'.format(g.det))
    value = g.gram_trace / (2 * g.det) * nu_a
    if value < 1:
        logging.warning('formula predicts nu = {} < 1, outside the physical fixed-point regime'.format(value))
    return value


def gaussian_fixed_point(omega_s: float,
                         omega_a: float,
                         g,
                         beta_a: float,
                         dt: float,
                         tol: float = 1e-12,
                         max_iter: int = MAX_COLLISIONS,
                         cov0=None):
    """ Iterate collisions with fresh thermal ancillas until the system covariance settles

     Parameter
    -----------
    omega_s, omega_a: float
        system and ancilla frequencies
    g: CouplingMatrix or 2x2 array
    beta_a: float
        ancilla inverse temperature
    dt: float
        collision duration
    tol: float
        stop once the max-norm change of the system covariance in one collision is below `tol`
    max_iter: int
        collision cap
    cov0: 2x2 array
        initial system covariance, vacuum by default

     Return
    -----------
    GaussianFixedPoint(nu_inf, iterations, cov)
    """
    g = _as_coupling(g)
    if abs(g.det) < DETERMINANT_TOL:
        raise ValueError('coupling determinant {} below {}'.format(g.det, DETERMINANT_TOL))
    ancilla = thermal_mode(omega_a, beta_a)
    a, b = _collision_blocks(omega_s, omega_a, g, dt)
    drive = b @ ancilla.cov @ b.T
    cov = np.eye(2) if cov0 is None else np.asarray(cov0, dtype=float)
    for step in range(1, max_iter + 1):
        updated = a @ cov @ a.T + drive
        updated = (updated + updated.T) / 2
        change = float(np.max(np.abs(updated - cov)))
        cov = updated
        if not np.all(np.isfinite(cov)) or float(np.max(np.abs(cov))) > DIVERGENCE_BOUND:
            raise ConvergenceError('covariance diverges after {} collisions (det G = {})'.format(step, g.det))
        if change <= tol:
            mode = GaussianMode(omega_s, cov)
            logging.debug('gaussian fixed point after {} collisions: nu = {}'.format(step, mode.nu))
            return GaussianFixedPoint(mode.nu, step, cov)
        if step % PROGRESS_INTERVAL == 0:
            logging.debug('collision {}: change {}'.format(step, change))
    raise ConvergenceError('no convergence within {} collisions'.format(max_iter))


def stationary_mode(omega_s: float, omega_a: float, g, beta_a: float, dt: float):
    """ exact fixed point of sigma -> A sigma A^T + B sigma_A B^T by a discrete Lyapunov solve """
    ancilla = thermal_mode(omega_a, beta_a)
    a, b = _collision_blocks(omega_s, omega_a, g, dt)
    radius = float(np.max(np.abs(np.linalg.eigvals(a))))
    if radius >= 1:
        raise ConvergenceError('collision map is not contracting: spectral radius {}'.format(radius))
    cov = linalg.solve_discrete_lyapunov(a, b @ ancilla.cov @ b.T)
    return GaussianMode(omega_s, (cov + cov.T) / 2)


def stationary_nu(omega_s: float, omega_a: float, g, beta_a: float, dt: float):
    return stationary_mode(omega_s, omega_a, g, beta_a, dt).nu


def richardson_extrapolate(steps: Sequence[float], values: Sequence[float]):
    """ value at step 0 of the interpolating polynomial of degree len(steps) - 1 """
    steps, values = np.asarray(steps, dtype=float), np.asarray(values, dtype=float)
    if steps.size != values.size or steps.size < 2:
        raise ValueError('need matching steps and values, at least two: {} {}'.format(steps.size, values.size))
    return float(np.polyfit(steps, values, steps.size - 1)[-1])


def fock_quadratures(dim: int = FOCK_DIMENSION):
    """ truncated x = (a + a^dag) / sqrt 2, p = i (a^dag - a) / sqrt 2 """
    a = np.diag(np.sqrt(np.arange(1, dim)), k=1).astype(complex)
    return (a + a.conj().T) / math.sqrt(2), 1j * (a.conj().T - a) / math.sqrt(2)


def fock_fixed_point_nu(omega_s: float,
                        omega_a: float,
                        g,
                        beta_a: float,
                        dt: float,
                        dim: int = FOCK_DIMENSION,
                        tail_tol: float = FOCK_TAIL_TOL):
    """ nu_S(inf) from the collision channel of the same Hamiltonian on truncated Fock spaces

    Raise ValueError if the fixed state puts more than `tail_tol` on the highest retained level.
    """
    g = _as_coupling(g).g
    x, p = fock_quadratures(dim)
    number = np.diag(np.arange(dim)).astype(complex)
    quadratures = (x, p)
    h_sa = sum(g[i, j] * tensor_product(quadratures[i], quadratures[j]) for i in range(2) for j in range(2))
    setup = CollisionSetup(
        h_s=HermitianOperator(omega_s * (number + np.eye(dim) / 2)),
        h_a=HermitianOperator(omega_a * (number + np.eye(dim) / 2)),
        h_sa=HermitianOperator(h_sa, tol=1e-10),
        beta_e=beta_a,
        dt=dt)
    report = fixed_point(collision_channel(setup), mode='channel')
    rho = report.state
    tail = float(np.real(rho.matrix[-1, -1]))
    if tail > tail_tol:
        raise ValueError('fock truncation at dimension {} too small: tail population {}'.format(dim, tail))
    return _nu_from_state(rho, x, p)


def _nu_from_state(rho: DensityMatrix, x, p):
    means = [rho.expectation(q) for q in (x, p)]
    quadratures = (x, p)
    cov = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            anticommutator = quadratures[i] @ quadratures[j] + quadratures[j] @ quadratures[i]
            cov[i, j] = rho.expectation(anticommutator) - 2 * means[i] * means[j]
    return math.sqrt(float(np.linalg.det(cov)))
