""" Thermal contact certification and the Loki swap-out attack

An interaction is a thermal contact if, for all initial temperatures,
 1) the final reduced states of A and B are thermal,
 2) the final temperatures agree,
 3) nothing moves if and only if A and B start at the same temperature.
The checker samples these conditions on finite temperature grids.
"""
import logging
import math
from typing import Callable, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .operator_core import (
    HermitianOperator, DensityMatrix, Superoperator, DimensionError, tensor_product, partial_trace, max_norm,
    swap_operator, superoperator_from_action, unvectorize, vectorize)
from .thermal import ThermalSpec, DegenerateSpectrumError, gibbs_state, fit_temperature, is_thermal, loki_transform
from .collision_engine import CollisionSetup, FixedPointError, collision_channel, fixed_point
from .gaussian_dynamics import (
    CouplingMatrix, GaussianMode, beta_of_nu, gaussian_collision_update, stationary_mode, thermal_mode)

DEFAULT_BETA_GRID = (0.2, 0.5, 1.0, 2.0)
DEFAULT_HORIZON = 2000
EQUAL_BETA_TOL = 1e-12

__all__ = ('ContactInput', 'CollisionEvolution', 'BipartiteEvolution', 'ContactScenario', 'ContactReport',
           'ThermalityCell', 'EqualityCell', 'StationarityCell', 'AttackRecord', 'CovarianceProbe',
           'GaussianContactCell', 'GaussianContactReport', 'check_thermal_contact', 'loki_attack',
           'lambda_a_covariance_probe', 'check_gaussian_contact', 'replacer_evolution', 'partial_swap_evolution',
           'aware_partial_swap_evolution', 'swap_mixing_evolution')


class ContactInput(NamedTuple):
    """ what an evolution builder may consume; h_a is None for Hamiltonian-blind builders """
    rho_a0: DensityMatrix
    rho_b0: DensityMatrix
    h_b: HermitianOperator
    beta_b: float
    h_a: Optional[HermitianOperator] = None


class CollisionEvolution:
    """ A bombarded by fresh B-type systems; B is a bath whose state never changes

    `builder(ContactInput)` returns the one-collision channel on A, either as a Superoperator or as a
    CollisionSetup.
    """
    kind = 'collision'

    def __init__(self, builder: Callable, hamiltonian_aware: bool, name: str):
        self.builder = builder
        self.hamiltonian_aware = hamiltonian_aware
        self.name = name

    def step(self, inputs: ContactInput):
        channel = self.builder(inputs)
        if isinstance(channel, CollisionSetup):
            channel = collision_channel(channel)
        if channel.dim != inputs.rho_a0.dim:
            raise DimensionError('channel acts on dimension {}, system has {}'.format(channel.dim, inputs.rho_a0.dim))
        return channel

    def initial(self, inputs: ContactInput):
        return inputs.rho_a0.matrix

    def reduced(self, state: np.ndarray, inputs: ContactInput):
        """ (rho_A, rho_B) from the evolved state """
        return state, inputs.rho_b0.matrix

    def __repr__(self):
        return 'CollisionEvolution({}, aware={})'.format(self.name, self.hamiltonian_aware)


class BipartiteEvolution(CollisionEvolution):
    """ one-step channel on AB (dimension d_A d_B), iterated from rho_A kron rho_B """
    kind = 'bipartite'

    def step(self, inputs: ContactInput):
        channel = self.builder(inputs)
        d = inputs.rho_a0.dim * inputs.rho_b0.dim
        if channel.dim != d:
            raise DimensionError('channel acts on dimension {}, joint system has {}'.format(channel.dim, d))
        return channel

    def initial(self, inputs: ContactInput):
        return tensor_product(inputs.rho_a0.matrix, inputs.rho_b0.matrix)

    def reduced(self, state: np.ndarray, inputs: ContactInput):
        dims = (inputs.rho_a0.dim, inputs.rho_b0.dim)
        return partial_trace(state, dims, keep='left'), partial_trace(state, dims, keep='right')

    def __repr__(self):
        return 'BipartiteEvolution({}, aware={})'.format(self.name, self.hamiltonian_aware)


class ContactScenario(NamedTuple):
    evolution: CollisionEvolution
    h_a: HermitianOperator
    h_b: HermitianOperator
    beta_grid_a: Tuple[float, ...] = DEFAULT_BETA_GRID
    beta_grid_b: Tuple[float, ...] = DEFAULT_BETA_GRID
    horizon: int = DEFAULT_HORIZON
    thermality_tol: float = 1e-5
    equality_tol: float = 1e-4
    stationarity_tol: float = 1e-8

    def validate(self):
        if len(self.beta_grid_a) == 0 or len(self.beta_grid_b) == 0:
            raise ValueError('temperature grids should be non-empty')
        if min(self.thermality_tol, self.equality_tol, self.stationarity_tol) <= 0:
            raise ValueError('tolerances should be positive')
        if self.horizon < 1:
            raise ValueError('horizon should be positive, got {}'.format(self.horizon))
        return self


class ThermalityCell(NamedTuple):
    beta_a0: float
    beta_b0: float
    beta_a_inf: Optional[float]
    beta_b_inf: Optional[float]
    passed: Optional[bool]


class EqualityCell(NamedTuple):
    beta_a0: float
    beta_b0: float
    gap: Optional[float]
    passed: Optional[bool]


class StationarityCell(NamedTuple):
    beta_a0: float
    beta_b0: float
    equal_start: bool
    motion: float
    passed: bool


class ContactReport(NamedTuple):
    """ per-cell verdicts; `passed` is None for inconclusive cells """
    condition1: Tuple[ThermalityCell, ...]
    condition2: Tuple[EqualityCell, ...]
    condition3: Tuple[StationarityCell, ...]
    overall: bool
    notes: str

    def holds(self, condition: int):
        """ True if every cell of the condition passed """
        cells = {1: self.condition1, 2: self.condition2, 3: self.condition3}[condition]
        return all(c.passed is True for c in cells)


class AttackRecord(NamedTuple):
    lam: float
    beta_a: float
    beta_c: float
    reported_equal_before: bool
    reported_equal_after: bool
    detected: bool
    true_ratio: float


class CovarianceProbe(NamedTuple):
    beta_a_inf_ratio: float
    beta_b_inf_delta: float


class _Trajectory(NamedTuple):
    final: Optional[np.ndarray]
    motion: float


def _inputs(scenario: ContactScenario, h_a: HermitianOperator, beta_a: float, beta_b: float):
    rho_a0 = gibbs_state(ThermalSpec(h_a, beta_a))
    rho_b0 = gibbs_state(ThermalSpec(scenario.h_b, beta_b))
    aware = h_a if scenario.evolution.hamiltonian_aware else None
    return ContactInput(rho_a0, rho_b0, scenario.h_b, float(beta_b), aware)


def _run(scenario: ContactScenario, inputs: ContactInput):
    """ iterate up to the horizon; the final state is None if the per-step change never drops below tolerance

    A collision channel with a unique fixed point is read out at that fixed point.
    """
    evolution = scenario.evolution
    channel = evolution.step(inputs)
    start = evolution.initial(inputs)
    d = start.shape[0]
    vector = vectorize(start)
    motion, final = 0.0, None
    for _ in range(scenario.horizon):
        updated = channel.matrix @ vector
        change = max_norm(updated - vector)
        vector = updated
        motion = max(motion, max_norm(vector - vectorize(start)))
        if change <= scenario.stationarity_tol:
            final = unvectorize(vector, d)
            break
    if evolution.kind == 'collision':
        try:
            report = fixed_point(channel, mode='channel')
            if report.unique:
                final = report.state.matrix
        except FixedPointError as e:
            logging.debug('no fixed state for {}: {}'.format(evolution.name, e))
    return _Trajectory(final, motion)


def _fit(state: np.ndarray, h: HermitianOperator, tol: float):
    try:
        fit = fit_temperature(DensityMatrix(state, tol=1e-8), h)
    except DegenerateSpectrumError as e:
        logging.debug('no temperature: {}'.format(e))
        return float('nan'), False
    return fit.beta_hat, is_thermal(fit, tol)


def _same_beta(beta_a: float, beta_b: float):
    return abs(beta_a - beta_b) <= EQUAL_BETA_TOL


def check_thermal_contact(scenario: ContactScenario):
    """ Sample the three thermal contact conditions over the temperature grids

     Parameter
    -----------
    scenario: ContactScenario

     Return
    -----------
    ContactReport
        `overall` holds only if every cell passes every condition; cells whose evolution neither reaches a unique
        fixed point nor settles before the horizon are inconclusive and count as failures
    """
    scenario.validate()
    condition1, condition2, condition3, inconclusive = [], [], [], []
    for beta_a in scenario.beta_grid_a:
        for beta_b in scenario.beta_grid_b:
            inputs = _inputs(scenario, scenario.h_a, beta_a, beta_b)
            trajectory = _run(scenario, inputs)
            equal_start = _same_beta(beta_a, beta_b)
            if equal_start:
                stationary = trajectory.motion <= scenario.stationarity_tol
            else:
                stationary = trajectory.motion > scenario.stationarity_tol
            condition3.append(StationarityCell(beta_a, beta_b, equal_start, trajectory.motion, stationary))
            if trajectory.final is None:
                inconclusive.append((beta_a, beta_b))
                condition1.append(ThermalityCell(beta_a, beta_b, None, None, None))
                condition2.append(EqualityCell(beta_a, beta_b, None, None))
                continue
            rho_a, rho_b = scenario.evolution.reduced(trajectory.final, inputs)
            beta_a_inf, thermal_a = _fit(rho_a, scenario.h_a, scenario.thermality_tol)
            beta_b_inf, thermal_b = _fit(rho_b, scenario.h_b, scenario.thermality_tol)
            thermal = thermal_a and thermal_b
            gap = abs(beta_a_inf - beta_b_inf)
            condition1.append(ThermalityCell(beta_a, beta_b, beta_a_inf, beta_b_inf, thermal))
            condition2.append(EqualityCell(beta_a, beta_b, gap, thermal and gap <= scenario.equality_tol))
            logging.debug('cell ({}, {}): beta_inf = ({}, {}), motion {}'.format(
                beta_a, beta_b, beta_a_inf, beta_b_inf, trajectory.motion))
    overall = all(c.passed is True for c in condition1 + condition2 + condition3)
    notes = 'evolution {}; grid beta_a {} x beta_b {}; horizon {}'.format(
        scenario.evolution.name, list(scenario.beta_grid_a), list(scenario.beta_grid_b), scenario.horizon)
    if inconclusive:
        notes += '; inconclusive cells {}'.format(inconclusive)
    logging.info('thermal contact ({}): overall {}'.format(scenario.evolution.name, overall))
    return ContactReport(tuple(condition1), tuple(condition2), tuple(condition3), overall, notes)


def _reported_equal(scenario: ContactScenario, h_a: HermitianOperator, beta_a: float, beta_b: float):
    """ what the protocol itself claims about A and B starting from (beta_a, beta_b)

    Every protocol reads "same temperature" off the absence of motion. A protocol that consumes H_A also fits
    the final temperatures against the Hamiltonians it knows and requires them to agree.
    """
    inputs = _inputs(scenario, h_a, beta_a, beta_b)
    trajectory = _run(scenario, inputs)
    if trajectory.motion > scenario.stationarity_tol:
        return False
    if not scenario.evolution.hamiltonian_aware:
        return True
    if trajectory.final is None:
        return False
    rho_a, rho_b = scenario.evolution.reduced(trajectory.final, inputs)
    beta_a_inf, thermal_a = _fit(rho_a, h_a, scenario.thermality_tol)
    beta_b_inf, thermal_b = _fit(rho_b, scenario.h_b, scenario.thermality_tol)
    return thermal_a and thermal_b and abs(beta_a_inf - beta_b_inf) <= scenario.equality_tol


def loki_attack(scenario: ContactScenario, lam: float):
    """ Swap A for C = Lambda_A[A] (H_A / lam at lam beta_A, same density matrix) and rerun the protocol

    A and B start at the first inverse temperature shared by both grids. The attack is detected if the protocol
    reports equal temperatures for (A, B) but not for (C, B).
    """
    if lam <= 0:
        raise ValueError('rescaling factor should be positive, got {}'.format(lam))
    scenario.validate()
    shared = [b for b in scenario.beta_grid_a if any(_same_beta(b, c) for c in scenario.beta_grid_b)]
    if not shared:
        raise ValueError('temperature grids share no inverse temperature')
    beta = shared[0]
    attacked = loki_transform(ThermalSpec(scenario.h_a, beta), lam)
    before = _reported_equal(scenario, scenario.h_a, beta, beta)
    after = _reported_equal(scenario, attacked.hamiltonian, attacked.beta, beta)
    record = AttackRecord(float(lam), beta, attacked.beta, before, after, before and not after, attacked.beta / beta)
    logging.info('loki attack on {} (lambda={}): {}'.format(scenario.evolution.name, lam, record))
    return record


def lambda_a_covariance_probe(scenario: ContactScenario, lam: float):
    """ Fitted final temperatures of (A, B) against those of (Lambda_A[A], B) for a Hamiltonian-blind protocol

    Returns beta_C(inf) / beta_A(inf) and |beta_B'(inf) - beta_B(inf)|, expected lam and 0.
    """
    if scenario.evolution.hamiltonian_aware:
        raise ValueError('covariance probe needs an evolution blind to H_A, got {}'.format(scenario.evolution.name))
    if lam <= 0:
        raise ValueError('rescaling factor should be positive, got {}'.format(lam))
    scenario.validate()
    beta_a, beta_b = scenario.beta_grid_a[0], scenario.beta_grid_b[0]
    attacked = loki_transform(ThermalSpec(scenario.h_a, beta_a), lam)
    temperatures = []
    for h_a, start in ((scenario.h_a, beta_a), (attacked.hamiltonian, attacked.beta)):
        inputs = _inputs(scenario, h_a, start, beta_b)
        trajectory = _run(scenario, inputs)
        if trajectory.final is None:
            raise ValueError('evolution {} did not settle within {} steps'.format(
                scenario.evolution.name, scenario.horizon))
        rho_a, rho_b = scenario.evolution.reduced(trajectory.final, inputs)
        temperatures.append((_fit(rho_a, h_a, scenario.thermality_tol)[0],
                             _fit(rho_b, scenario.h_b, scenario.thermality_tol)[0]))
    (beta_a_inf, beta_b_inf), (beta_c_inf, beta_b_inf_after) = temperatures
    if beta_a_inf == 0:
        raise ValueError('final temperature of A is infinite, ratio undefined')
    return CovarianceProbe(beta_c_inf / beta_a_inf, abs(beta_b_inf_after - beta_b_inf))


def replacer_evolution():
    """ Hamiltonian blind: every collision replaces A's density matrix by rho_B(0) """

    def builder(inputs: ContactInput):
        rho_b = inputs.rho_b0.matrix
        return superoperator_from_action(lambda x: np.trace(x) * rho_b, inputs.rho_a0.dim)

    return CollisionEvolution(builder, hamiltonian_aware=False, name='replacer')


def partial_swap_evolution(j: float = 1.0, dt: float = 0.3):
    """ partial swap J SWAP between A (Hamiltonian H_A) and B-type ancillas (H_B at beta_B) """

    def builder(inputs: ContactInput):
        d = inputs.h_b.dim
        return CollisionSetup(inputs.h_a, inputs.h_b, HermitianOperator(j * swap_operator(d)), inputs.beta_b, dt)

    return CollisionEvolution(builder, hamiltonian_aware=True, name='partial-swap')


def aware_partial_swap_evolution(j: float = 1.0, dt: float = 0.3):
    """ resonant partial swap with ancillas prepared as Gibbs states of the true H_A at beta_B """

    def builder(inputs: ContactInput):
        d = inputs.h_a.dim
        return CollisionSetup(inputs.h_a, inputs.h_a, HermitianOperator(j * swap_operator(d)), inputs.beta_b, dt)

    return CollisionEvolution(builder, hamiltonian_aware=True, name='aware-partial-swap')


def swap_mixing_evolution(p: float = 0.3):
    """ Hamiltonian blind, bipartite: rho -> (1 - p) rho + p SWAP rho SWAP """
    if not 0 < p < 1:
        raise ValueError('mixing probability should lie in (0, 1), got {}'.format(p))

    def builder(inputs: ContactInput):
        if inputs.rho_a0.dim != inputs.rho_b0.dim:
            raise DimensionError('swap mixing needs equal dimensions, got {} and {}'.format(
                inputs.rho_a0.dim, inputs.rho_b0.dim))
        swap = Superoperator.conjugation(swap_operator(inputs.rho_a0.dim))
        return Superoperator.identity(swap.dim) * (1 - p) + swap * p

    return BipartiteEvolution(builder, hamiltonian_aware=False, name='swap-mixing')


class GaussianContactCell(NamedTuple):
    beta_a: float
    nu_inf: float
    beta_s_inf: float
    anisotropy: float
    condition1: bool
    condition2: bool
    motion_equal: float
    motion_unequal: float
    condition3: bool


class GaussianContactReport(NamedTuple):
    cells: Tuple[GaussianContactCell, ...]
    overall: bool


def _gaussian_motion(start: GaussianMode, ancilla: GaussianMode, g: CouplingMatrix, dt: float, collisions: int):
    """ largest covariance displacement from the start over the iterated updates """
    mode, motion = start, 0.0
    for _ in range(collisions):
        mode = gaussian_collision_update(mode, ancilla, g, dt)
        motion = max(motion, max_norm(mode.cov - start.cov))
    return motion


def check_gaussian_contact(omega_s: float,
                           omega_a: float,
                           g,
                           beta_grid: Sequence[float] = DEFAULT_BETA_GRID,
                           dt: float = 0.05,
                           thermality_tol: float = 1e-5,
                           equality_tol: float = 1e-4,
                           stationarity_tol: float = 1e-8,
                           collisions: int = 10):
    """ The three contact conditions for the oscillator model

    Condition 1 asks for an isotropic fixed covariance nu I, condition 2 for beta_S(inf) = beta_A through the
    temperature monotone nu, both at the exact one-collision fixed point. Condition 3 starts the system thermal
    and iterates `collisions` updates: a start at beta_A may not move by more than `stationarity_tol`, a start
    at the next grid temperature (twice beta_A for a single-point grid) has to move.
    """
    g = g if isinstance(g, CouplingMatrix) else CouplingMatrix(g)
    cells = []
    for n, beta_a in enumerate(beta_grid):
        mode = stationary_mode(omega_s, omega_a, g, beta_a, dt)
        anisotropy = max_norm(mode.cov - mode.nu * np.eye(2))
        beta_s = beta_of_nu(omega_s, mode.nu) if mode.nu - 1 > 1e-14 else math.inf
        other = beta_grid[(n + 1) % len(beta_grid)] if len(beta_grid) > 1 else 2 * beta_a
        ancilla = thermal_mode(omega_a, beta_a)
        motion_equal = _gaussian_motion(thermal_mode(omega_s, beta_a), ancilla, g, dt, collisions)
        motion_unequal = _gaussian_motion(thermal_mode(omega_s, other), ancilla, g, dt, collisions)
        cells.append(GaussianContactCell(
            beta_a, mode.nu, beta_s, anisotropy, anisotropy <= thermality_tol, abs(beta_s - beta_a) <= equality_tol,
            motion_equal, motion_unequal, motion_equal <= stationarity_tol < motion_unequal))
    overall = all(c.condition1 and c.condition2 and c.condition3 for c in cells)
    logging.info('gaussian contact {}: overall {}'.format(g, overall))
    return GaussianContactReport(tuple(cells), overall)
