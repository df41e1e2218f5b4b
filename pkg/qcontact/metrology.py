""" How much a single collision reveals about the Loki rescaling lambda of the bath

System A meets a bath system B whose Hamiltonian and inverse temperature have been rescaled as H_B / lambda,
lambda beta_B. The Gibbs state of B is unchanged, so lambda can only leak into A through the joint evolution.
The leakage is quantified by the quantum Fisher information of rho_A(lambda, dt) built from the symmetric
logarithmic derivative.
"""
import logging
from typing import Callable, NamedTuple, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from .operator_core import (
    HermitianOperator, DensityMatrix, DimensionError, tensor_product, partial_trace, dagger, max_norm)
from .thermal import ThermalSpec, gibbs_state

KERNEL_TOL = 1e-12
DIRECTION_TOL = 1e-12
DERIVATIVE_TOL = 1e-10
SLD_RESIDUAL_TOL = 1e-9
FISHER_FLOOR = 1e-24
REGIME_BOUND = 0.3
DEFAULT_DT_MIN = 1e-2
DEFAULT_POINTS = 12
DEFAULT_CORRECTIONS = 2
DEFAULT_STEP = 1e-2

__all__ = ('PairSetup', 'FisherScan', 'SLDError', 'symmetric_log_derivative', 'fisher_information',
           'swapped_pair_state', 'joint_pair_state', 'central_difference', 'lambda_derivative', 'fisher_scan',
           'cramer_rao_bound', 'split_strategy_factor', 'total_pair_hamiltonian')


class SLDError(ValueError):
    """ derivative direction outside the support of the state, or no information at all """


class PairSetup(NamedTuple):
    """ A (system) and B (bath whose scale is probed) with their coupling """
    h_a: HermitianOperator
    h_b: HermitianOperator
    h_ab: HermitianOperator
    beta_a: float
    beta_b: float


class FisherScan(NamedTuple):
    lambda0: float
    dt_grid: Tuple[float, ...]
    f_values: Tuple[float, ...]
    fitted_slope: float
    fit_r2: float
    floor_limited: Tuple[bool, ...]


def symmetric_log_derivative(rho: DensityMatrix, drho):
    """ L with rho L + L rho = 2 drho, solved in the eigenbasis of rho

     Parameter
    -----------
    rho: DensityMatrix
    drho: (d, d) array
        hermitian and traceless

     Return
    -----------
    L: (d, d) array
        entries over pairs with p_i + p_j < 1e-12 are set to zero, which requires drho to vanish there
    """
    drho = np.asarray(drho, dtype=complex)
    if drho.shape != rho.matrix.shape:
        raise DimensionError('derivative shape {} does not match state dimension {}'.format(drho.shape, rho.dim))
    if max_norm(drho - dagger(drho)) > DERIVATIVE_TOL:
        raise ValueError('derivative is not hermitian')
    if abs(np.trace(drho)) > DERIVATIVE_TOL:
        raise ValueError('derivative is not traceless: trace {}'.format(np.trace(drho)))
    populations, vectors = np.linalg.eigh(rho.matrix)
    in_basis = dagger(vectors) @ drho @ vectors
    denominator = populations[:, None] + populations[None, :]
    kernel = denominator < KERNEL_TOL
    if np.any(np.abs(in_basis[kernel]) >= DIRECTION_TOL):
        raise SLDError('derivative has weight {} on the kernel of the state'.format(max_norm(in_basis[kernel])))
    sld_in_basis = np.zeros_like(in_basis)
    sld_in_basis[~kernel] = 2 * in_basis[~kernel] / denominator[~kernel]
    sld = vectors @ sld_in_basis @ dagger(vectors)
    residual = max_norm(rho.matrix @ sld + sld @ rho.matrix - 2 * drho)
    assert residual <= SLD_RESIDUAL_TOL, 'SLD residual {}'.format(residual)
    return sld


def fisher_information(rho: DensityMatrix, drho):
    """ Tr(L^2 rho) """
    sld = symmetric_log_derivative(rho, drho)
    return max(float(np.real(np.trace(sld @ sld @ rho.matrix))), 0.0)


def total_pair_hamiltonian(h_a: HermitianOperator, h_b: HermitianOperator, h_ab: HermitianOperator, lam: float):
    """ H(lambda) = H_A kron 1 + 1 kron H_B / lambda + H_AB """
    if h_ab.dim != h_a.dim * h_b.dim:
        raise DimensionError('coupling dimension {} differs from {} x {}'.format(h_ab.dim, h_a.dim, h_b.dim))
    return HermitianOperator(tensor_product(h_a.matrix, np.eye(h_b.dim)) +
                             tensor_product(np.eye(h_a.dim), h_b.matrix) / lam + h_ab.matrix)


def _evolved_pair(h_a, h_b, h_ab, beta_a, beta_b, lam, dt):
    if lam <= 0:
        raise ValueError('rescaling factor should be positive, got {}'.format(lam))
    if dt < 0:
        raise ValueError('collision duration should be non-negative, got {}'.format(dt))
    h_a, h_b, h_ab = [h if isinstance(h, HermitianOperator) else HermitianOperator(h) for h in (h_a, h_b, h_ab)]
    # the bath state is lambda independent, only its Hamiltonian in the evolution is rescaled
    rho_a = gibbs_state(ThermalSpec(h_a, beta_a))
    rho_b = gibbs_state(ThermalSpec(h_b, beta_b))
    h = total_pair_hamiltonian(h_a, h_b, h_ab, lam)
    u = (h.eigenvectors * np.exp(-1j * dt * h.eigenvalues)) @ dagger(h.eigenvectors)
    joint = u @ tensor_product(rho_a.matrix, rho_b.matrix) @ dagger(u)
    return joint, (h_a.dim, h_b.dim)


def joint_pair_state(h_a, h_b, h_ab, beta_a: float, beta_b: float, lam: float, dt: float):
    """ e^{-i dt H(lambda)} rho_A kron rho_B e^{i dt H(lambda)} """
    joint, _ = _evolved_pair(h_a, h_b, h_ab, beta_a, beta_b, lam, dt)
    return DensityMatrix(joint, tol=1e-10)


def swapped_pair_state(h_a, h_b, h_ab, beta_a: float, beta_b: float, lam: float, dt: float):
    """ rho_A(lambda, dt) = Tr_B(e^{-i dt H(lambda)} rho_A kron rho_B e^{i dt H(lambda)}) """
    joint, dims = _evolved_pair(h_a, h_b, h_ab, beta_a, beta_b, lam, dt)
    return DensityMatrix(partial_trace(joint, dims, keep='left'), tol=1e-10)


def central_difference(family: Callable, x0: float, h: float):
    """ fourth-order stencil (-f(x+2h) + 8 f(x+h) - 8 f(x-h) + f(x-2h)) / (12 h) """
    if not h > 0:
        raise ValueError('step should be positive, got {}'.format(h))
    f = [np.asarray(family(x0 + k * h), dtype=complex) for k in (-2, -1, 1, 2)]
    return (f[0] - 8 * f[1] + 8 * f[2] - f[3]) / (12 * h)


def lambda_derivative(h_a, h_b, h_ab, beta_a: float, beta_b: float, lam: float, dt: float,
                      step: float = DEFAULT_STEP, joint: bool = False):
    """ d rho / d lambda by the fourth-order stencil with step `step * lam`, hermitian and traceless

    With `joint` the derivative of the pre-trace AB state is returned instead of that of rho_A.
    """
    if not 0 < step < 0.5:
        raise ValueError('relative step should lie in (0, 0.5), got {}'.format(step))
    state = joint_pair_state if joint else swapped_pair_state

    def family(x):
        return state(h_a, h_b, h_ab, beta_a, beta_b, x, dt).matrix

    drho = central_difference(family, lam, step * lam)
    drho = (drho + dagger(drho)) / 2
    return drho - np.trace(drho) * np.eye(drho.shape[0]) / drho.shape[0]


def fisher_scan(pair: PairSetup,
                lambda0: float = 1.0,
                dt_grid: Sequence[float] = None,
                step: float = DEFAULT_STEP,
                floor: float = FISHER_FLOOR,
                corrections: int = DEFAULT_CORRECTIONS,
                verbose: bool = False):
    """ Fisher information of rho_A about lambda over a grid of collision durations and its power law

    The fit is log F = s log dt + c_0 + c_1 u + ... + c_k u^k with u = dt / max(dt), so the analytic higher
    orders of F are absorbed by the polynomial and s is the leading exponent.

     Parameter
    -----------
    pair: PairSetup
    lambda0: float
        point where the derivative is taken
    dt_grid: list
        ascending positive durations with max(dt) ||H|| <= 0.3; 12 log-spaced points over [1e-2, 3e-1] / ||H|| by
        default
    step: float
        relative finite-difference step
    floor: float
        values below the floor are reported but excluded from the fit
    corrections: int
        order k of the polynomial correction, capped so that at least one degree of freedom is left; 0 gives a
        plain log-log line

     Return
    -----------
    FisherScan
    """
    h_norm = total_pair_hamiltonian(pair.h_a, pair.h_b, pair.h_ab, lambda0).spectral_norm()
    if dt_grid is None:
        dt_grid = np.logspace(np.log10(DEFAULT_DT_MIN), np.log10(REGIME_BOUND), DEFAULT_POINTS) / h_norm
    dt_grid = tuple(float(dt) for dt in dt_grid)
    if any(dt <= 0 for dt in dt_grid) or list(dt_grid) != sorted(dt_grid):
        raise ValueError('duration grid should be ascending and positive: {}'.format(dt_grid))
    if corrections < 0:
        raise ValueError('number of corrections should be non-negative, got {}'.format(corrections))
    if dt_grid[-1] * h_norm > REGIME_BOUND * (1 + 1e-9):
        raise ValueError('grid leaves the rapid bombardment regime: max dt ||H|| = {}'.format(dt_grid[-1] * h_norm))

    f_values = []
    for dt in tqdm(dt_grid, disable=not verbose):
        rho = swapped_pair_state(*pair, lambda0, dt)
        drho = lambda_derivative(*pair, lambda0, dt, step=step)
        f_values.append(fisher_information(rho, drho))
        logging.debug('dt={}: F={}'.format(dt, f_values[-1]))
    floor_limited = tuple(f < floor for f in f_values)
    usable = [n for n, limited in enumerate(floor_limited) if not limited]
    if len(usable) < 2:
        raise SLDError('no information about lambda: Fisher information below {} on the grid'.format(floor))
    dt_usable = np.array([dt_grid[n] for n in usable])
    y = np.log([f_values[n] for n in usable])
    order = max(0, min(corrections, len(usable) - 3))
    u = dt_usable / dt_usable[-1]
    design = np.column_stack([np.log(dt_usable)] + [u ** k for k in range(order + 1)])
    coefficients = np.linalg.lstsq(design, y, rcond=None)[0]
    slope = float(coefficients[0])
    total = float(np.sum((y - np.mean(y)) ** 2))
    r2 = 1.0 - float(np.sum((y - design @ coefficients) ** 2)) / total if total > 0 else 1.0
    logging.info('fisher scan: slope {}, r2 {}, {} corrections, {} points below floor'.format(
        slope, r2, order, sum(floor_limited)))
    return FisherScan(float(lambda0), dt_grid, tuple(f_values), float(slope), r2, floor_limited)


def cramer_rao_bound(f: float, n: int):
    """ Var(lambda) >= 1 / (n F) """
    if not f > 0:
        raise ValueError('Fisher information should be positive, got {}'.format(f))
    if n < 1:
        raise ValueError('number of repetitions should be positive, got {}'.format(n))
    return 1.0 / (n * f)


def split_strategy_factor(slope: float):
    """ change of the bound under (N, dt) -> (2N, dt / 2) when F scales as dt^slope """
    return 2.0 ** (slope - 1)
