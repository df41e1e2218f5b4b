""" Collision model: one-collision channel, its short-time series, the effective Liouvillian and fixed points

A system S with Hamiltonian H_S is bombarded by fresh ancillas A, each prepared in the Gibbs state of H_A at the
environment inverse temperature, and coupled through H_SA for a duration dt (hbar = 1):

    phi(dt)[rho] = Tr_A( exp(-i dt H) (rho kron rho_A) exp(i dt H) ),  H = H_S kron 1 + 1 kron H_A + H_SA
"""
import logging
import math
from itertools import product
from typing import NamedTuple

import numpy as np
from scipy import linalg

from .operator_core import (
    HermitianOperator, DensityMatrix, Superoperator, DimensionError, tensor_product, partial_trace,
    matrix_exponential, principal_matrix_logarithm, superoperator_from_action, nested_commutator, dagger,
    max_norm, swap_operator, pauli, vectorize, unvectorize)
from .thermal import ThermalSpec, gibbs_state, loki_transform

FIXED_POINT_TOL = 1e-8
FIXED_STATE_TOL = 1e-9
VANISHING_TOL = 1e-10
MAX_STORED_STATES = 10 ** 5
PROGRESS_INTERVAL = 10000
SUPPORTED_ORDERS = (1, 2, 3)

__all__ = ('CollisionSetup', 'LiouvillianSeries', 'FixedPointReport', 'AuditRecord', 'SystemAuditRecord',
           'TermComponent', 'FixedPointError', 'collision_channel', 'collision_unitary', 'iterate_collisions',
           'trajectory_steps', 'phi_series_term', 'effective_liouvillian', 'liouvillian_series', 'fixed_point',
           'audit_ancilla_dependence', 'audit_system_dependence', 'partial_swap_preset', 'induced_hamiltonian',
           'phi_term_components', 'ancilla_sandwich_term', 'truncated_fixed_point', 'commutator_residual')


class FixedPointError(ValueError):
    """ no Hermitian unit-trace state in the fixed space """


class CollisionSetup:
    """ One bombardment scenario (H_S, H_A, H_SA, beta_E, dt) """

    def __init__(self,
                 h_s: HermitianOperator,
                 h_a: HermitianOperator,
                 h_sa: HermitianOperator,
                 beta_e: float,
                 dt: float):
        """ One bombardment scenario

         Parameter
        -----------
        h_s: HermitianOperator
            system Hamiltonian (dimension d_S)
        h_a: HermitianOperator
            ancilla Hamiltonian (dimension d_A)
        h_sa: HermitianOperator
            interaction on d_S * d_A, system factor on the left
        beta_e: float
            environment inverse temperature, every ancilla starts in gibbs(h_a, beta_e)
        dt: float
            collision duration
        """
        h_s, h_a, h_sa = [h if isinstance(h, HermitianOperator) else HermitianOperator(h) for h in (h_s, h_a, h_sa)]
        if h_sa.dim != h_s.dim * h_a.dim:
            raise DimensionError('interaction dimension {} differs from {} x {}'.format(h_sa.dim, h_s.dim, h_a.dim))
        if not dt > 0 or not math.isfinite(dt):
            raise ValueError('collision duration should be positive, got {}'.format(dt))
        self.h_s = h_s
        self.h_a = h_a
        self.h_sa = h_sa
        self.dt = float(dt)
        self.ancilla_spec = ThermalSpec(h_a, beta_e)
        self.beta_e = self.ancilla_spec.beta
        self.rho_a = gibbs_state(self.ancilla_spec)

    @property
    def d_s(self):
        return self.h_s.dim

    @property
    def d_a(self):
        return self.h_a.dim

    def total_hamiltonian(self):
        return (tensor_product(self.h_s.matrix, np.eye(self.d_a)) + tensor_product(np.eye(self.d_s), self.h_a.matrix)
                + self.h_sa.matrix)

    def replace(self, **kwargs):
        """ copy with some of (h_s, h_a, h_sa, beta_e, dt) replaced """
        param = dict(h_s=self.h_s, h_a=self.h_a, h_sa=self.h_sa, beta_e=self.beta_e, dt=self.dt)
        param.update(kwargs)
        return CollisionSetup(**param)

    def __repr__(self):
        return 'CollisionSetup(d_s={}, d_a={}, beta_e={}, dt={})'.format(self.d_s, self.d_a, self.beta_e, self.dt)


class LiouvillianSeries(NamedTuple):
    """ L_dt = l0 + dt l1 + dt^2 l2 + O(dt^3) """
    l0: Superoperator
    l1: Superoperator
    l2: Superoperator

    def truncated(self, dt: float, order: int = 2):
        terms = [self.l0, self.l1, self.l2][:order + 1]
        out = Superoperator.zeros(self.l0.dim)
        for n, term in enumerate(terms):
            out = out + term * dt ** n
        return out


class FixedPointReport(NamedTuple):
    state: DensityMatrix
    unique: bool
    spectral_gap: float
    eigenvalue_one_multiplicity: int


class AuditRecord(NamedTuple):
    """ max-norm change of the series coefficients under the ancilla Loki rescaling """
    delta_l0: float
    delta_l1: float
    delta_l2: float


class SystemAuditRecord(NamedTuple):
    """ change of L2 under rescaling H_S, and the part of that change no commutator -i[K, .] explains """
    delta_l2: float
    residual_l2: float


class TermComponent(NamedTuple):
    """ one word of the expansion of phi_n over the pieces S, A, SA of the total Hamiltonian """
    word: tuple
    norm: float
    contains_ancilla: bool
    reason: str
    vanishes: bool


def collision_unitary(setup: CollisionSetup):
    return matrix_exponential(-1j * setup.dt * setup.total_hamiltonian())


def _reduced_action(setup: CollisionSetup, joint_map):
    """ X -> Tr_A(joint_map(X kron rho_A)) """
    dims = (setup.d_s, setup.d_a)

    def action(x):
        return partial_trace(joint_map(tensor_product(x, setup.rho_a.matrix)), dims, keep='left')

    return superoperator_from_action(action, setup.d_s)


def collision_channel(setup: CollisionSetup):
    """ phi(dt) as a superoperator on the system """
    u = collision_unitary(setup)
    u_dag = dagger(u)
    return _reduced_action(setup, lambda joint: u @ joint @ u_dag)


def trajectory_steps(n: int, max_stored: int = MAX_STORED_STATES):
    """ collision counts stored by iterate_collisions: every step up to `max_stored`, else a strided subsample
    that always ends at n """
    if n <= max_stored:
        return list(range(n + 1))
    stride = int(math.ceil(n / max_stored))
    steps = list(range(0, n + 1, stride))
    if steps[-1] != n:
        steps.append(n)
    return steps


def iterate_collisions(setup: CollisionSetup, rho0: DensityMatrix, n: int, max_stored: int = MAX_STORED_STATES):
    """ Trajectory phi(dt)^k[rho0]

    All n + 1 states are returned for n <= max_stored; beyond that the states at `trajectory_steps(n)`.
    """
    if n < 0:
        raise ValueError('number of collisions should be non-negative, got {}'.format(n))
    if rho0.dim != setup.d_s:
        raise DimensionError('initial state dimension {} differs from system dimension {}'.format(
            rho0.dim, setup.d_s))
    channel = collision_channel(setup)
    stored = set(trajectory_steps(n, max_stored))
    trajectory = [rho0]
    vector = vectorize(rho0.matrix)
    for step in range(1, n + 1):
        vector = channel.matrix @ vector
        if step in stored:
            trajectory.append(DensityMatrix(unvectorize(vector, setup.d_s), tol=FIXED_STATE_TOL))
        if step % PROGRESS_INTERVAL == 0:
            logging.debug('collision {}/{}'.format(step, n))
    return trajectory


def _hamiltonian_pieces(setup: CollisionSetup):
    return {
        'S': tensor_product(setup.h_s.matrix, np.eye(setup.d_a)),
        'A': tensor_product(np.eye(setup.d_s), setup.h_a.matrix),
        'SA': setup.h_sa.matrix}


def _series_prefactor(order: int):
    return (-1j) ** order / math.factorial(order)


def phi_series_term(setup: CollisionSetup, order: int):
    """ phi_n[X] = (-i)^n / n! Tr_A([H, [H, ... [H, X kron rho_A]]]) with n nested commutators """
    if order not in SUPPORTED_ORDERS:
        raise ValueError('unsupported series order {}, expected one of {}'.format(order, SUPPORTED_ORDERS))
    h = setup.total_hamiltonian()
    prefactor = _series_prefactor(order)
    return _reduced_action(setup, lambda joint: prefactor * nested_commutator([h] * order, joint))


def phi_term_components(setup: CollisionSetup, order: int):
    """ Split phi_n into the 3^n words over (S, A, SA) and classify the words involving H_A

    A word vanishes structurally if an A slot can be moved to the outermost position (killed by the cyclicity
    of the partial trace) or to the innermost one (killed by [H_A, rho_A] = 0), moving only past slots that
    commute with 1 kron H_A. Otherwise it is 'sandwiched' between interaction slots.
    """
    if order not in SUPPORTED_ORDERS:
        raise ValueError('unsupported series order {}, expected one of {}'.format(order, SUPPORTED_ORDERS))
    pieces = _hamiltonian_pieces(setup)
    commutes_with_a = {
        'S': True, 'A': True,
        'SA': max_norm(pieces['SA'] @ pieces['A'] - pieces['A'] @ pieces['SA']) <= VANISHING_TOL}
    prefactor = _series_prefactor(order)
    components = []
    for word in product(('S', 'A', 'SA'), repeat=order):
        operators = [pieces[w] for w in word]
        term = _reduced_action(setup, lambda joint: prefactor * nested_commutator(operators, joint))
        norm = max_norm(term.matrix)
        contains_ancilla = 'A' in word
        reason = ''
        if contains_ancilla:
            reason = 'sandwiched'
            for i, w in enumerate(word):
                if w != 'A':
                    continue
                if all(commutes_with_a[v] for v in word[:i]):
                    reason = 'outermost' if i == 0 else 'commutes-to-outermost'
                    break
                if all(commutes_with_a[v] for v in word[i + 1:]):
                    reason = 'innermost' if i == order - 1 else 'commutes-to-innermost'
                    break
        components.append(TermComponent(word, norm, contains_ancilla, reason, norm <= VANISHING_TOL))
    return components


def ancilla_sandwich_term(setup: CollisionSetup):
    """ X -> Tr_A([H_SA, [1 kron H_A, [H_SA, X kron rho_A]]]), the first H_A-carrying term that survives """
    pieces = _hamiltonian_pieces(setup)
    operators = [pieces['SA'], pieces['A'], pieces['SA']]
    return _reduced_action(setup, lambda joint: nested_commutator(operators, joint))


def induced_hamiltonian(setup: CollisionSetup):
    """ Tr_A(H_SA (1 kron rho_A)); the leading generator is -i[H_S + H_ind, .] """
    joint = setup.h_sa.matrix @ tensor_product(np.eye(setup.d_s), setup.rho_a.matrix)
    return HermitianOperator(partial_trace(joint, (setup.d_s, setup.d_a), keep='left'), tol=1e-10)


def effective_liouvillian(setup: CollisionSetup):
    """ L_dt = Log(phi(dt)) / dt on the principal branch """
    channel = collision_channel(setup)
    return Superoperator(principal_matrix_logarithm(channel.matrix) / setup.dt, setup.d_s)


def liouvillian_series(setup: CollisionSetup):
    """ l0 = phi1, l1 = phi2 - phi1^2 / 2, l2 = phi3 - (phi1 phi2 + phi2 phi1) / 2 + phi1^3 / 3 """
    phi1, phi2, phi3 = [phi_series_term(setup, n) for n in SUPPORTED_ORDERS]
    l0 = phi1
    l1 = phi2 - (phi1 @ phi1) * 0.5
    l2 = phi3 - (phi1 @ phi2 + phi2 @ phi1) * 0.5 + (phi1 @ phi1 @ phi1) * (1 / 3)
    return LiouvillianSeries(l0, l1, l2)


def _fixed_state(op: Superoperator, target: complex, fixed: np.ndarray, eigenvalues, vectors):
    d = op.dim
    if np.sum(fixed) == 1:
        # unique: right singular vector of op - target for the smallest singular value
        _, _, vh = linalg.svd(op.matrix - target * np.eye(d * d))
        candidate = np.conj(vh[-1])
    else:
        # spectral projection of the maximally mixed state onto the fixed space
        coefficients = np.linalg.solve(vectors, vectorize(np.eye(d) / d))
        candidate = vectors[:, fixed] @ coefficients[fixed]
    x = unvectorize(candidate, d)
    trace = np.trace(x)
    if abs(trace) <= FIXED_STATE_TOL:
        raise FixedPointError('fixed space has no unit-trace representative (trace {})'.format(trace))
    x = x / trace
    x = (x + dagger(x)) / 2
    try:
        return DensityMatrix(x, tol=FIXED_STATE_TOL)
    except ValueError as e:
        raise FixedPointError('fixed space representative is not a state: {}'.format(e))


def fixed_point(op: Superoperator, mode: str = 'channel', tol: float = FIXED_POINT_TOL):
    """ Fixed state of a channel (eigenvalue 1) or a generator (eigenvalue 0)

     Parameter
    -----------
    op: Superoperator
    mode: str
        'channel' or 'generator'
    tol: float
        eigenvalues within `tol` of 1 (channel) or 0 (generator) span the fixed space

     Return
    -----------
    FixedPointReport(state, unique, spectral_gap, eigenvalue_one_multiplicity)
        spectral_gap is 1 - max |lambda| (channel) or min |Re lambda| (generator) over the other eigenvalues
    """
    if mode not in ('channel', 'generator'):
        raise ValueError('unknown mode {}, expected channel or generator'.format(mode))
    target = 1.0 if mode == 'channel' else 0.0
    eigenvalues, vectors = np.linalg.eig(op.matrix)
    fixed = np.abs(eigenvalues - target) <= tol
    multiplicity = int(np.sum(fixed))
    if multiplicity == 0:
        raise FixedPointError('no eigenvalue within {} of {}: closest {}'.format(
            tol, target, eigenvalues[np.argmin(np.abs(eigenvalues - target))]))
    others = eigenvalues[~fixed]
    if others.size == 0:
        gap = math.inf
    elif mode == 'channel':
        gap = float(max(0.0, 1.0 - np.max(np.abs(others))))
    else:
        gap = float(np.min(np.abs(np.real(others))))
    state = _fixed_state(op, target, fixed, eigenvalues, vectors)
    logging.debug('fixed point ({}): multiplicity {}, gap {}'.format(mode, multiplicity, gap))
    return FixedPointReport(state, multiplicity == 1, gap, multiplicity)


def truncated_fixed_point(setup: CollisionSetup, series: LiouvillianSeries = None):
    """ fixed point of l0 + dt l1 """
    series = liouvillian_series(setup) if series is None else series
    return fixed_point(series.l0 + series.l1 * setup.dt, mode='generator')


def audit_ancilla_dependence(setup: CollisionSetup, lam: float):
    """ Compare the series of `setup` with that of (H_A / lam, lam beta_E), which leaves rho_A unchanged """
    if lam <= 0:
        raise ValueError('rescaling factor should be positive, got {}'.format(lam))
    rescaled = loki_transform(setup.ancilla_spec, lam)
    other = setup.replace(h_a=rescaled.hamiltonian, beta_e=rescaled.beta)
    series, series_other = liouvillian_series(setup), liouvillian_series(other)
    record = AuditRecord(*[a.distance(b) for a, b in zip(series, series_other)])
    logging.debug('ancilla audit (lambda={}): {}'.format(lam, record))
    return record


def commutator_residual(op: Superoperator):
    """ distance from op to the closest -i[K, .] in the least-squares sense """
    d = op.dim
    basis = [Superoperator.commutator_generator(np.eye(d)[:, [i]] @ np.eye(d)[[j], :]).matrix.reshape(-1)
             for i, j in product(range(d), range(d))]
    design = np.stack(basis, axis=1)
    target = op.matrix.reshape(-1)
    coefficients = np.linalg.lstsq(design, target, rcond=None)[0]
    return max_norm(target - design @ coefficients)


def audit_system_dependence(setup: CollisionSetup, lam: float):
    """ Rescale H_S -> H_S / lam and measure how L2 changes beyond a Hamiltonian-like commutator term """
    if lam <= 0:
        raise ValueError('rescaling factor should be positive, got {}'.format(lam))
    other = setup.replace(h_s=setup.h_s / lam)
    delta = liouvillian_series(other).l2 - liouvillian_series(setup).l2
    return SystemAuditRecord(max_norm(delta.matrix), commutator_residual(delta))


def partial_swap_preset(e_s: float, e_a: float, j: float, beta_a: float, dt: float):
    """ qubit system and ancillas: H_S = e_s sigma_z, H_A = e_a sigma_z, H_SA = J (1 + sigma_S . sigma_A) / 2

    (1 + sigma . sigma) / 2 is the SWAP, so the coupling alone generates cos(J dt) 1 - i sin(J dt) SWAP.
    The local Hamiltonians act during every collision.
    """
    h_sa = j * (np.eye(4) + sum(tensor_product(pauli(a), pauli(a)) for a in 'xyz')) / 2
    assert np.allclose(h_sa, j * swap_operator(2))
    return CollisionSetup(
        h_s=HermitianOperator(e_s * pauli('z')),
        h_a=HermitianOperator(e_a * pauli('z')),
        h_sa=HermitianOperator(h_sa),
        beta_e=beta_a,
        dt=dt)
