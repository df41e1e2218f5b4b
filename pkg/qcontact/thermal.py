""" Gibbs states, the Loki rescaling and temperature read-out through detailed balance (natural units k = hbar = 1) """
import logging
import math
from typing import NamedTuple, Tuple

import numpy as np

from .operator_core import HermitianOperator, DensityMatrix, dagger

THERMALITY_TOL = 1e-6
DEGENERACY_TOL = 1e-8
POPULATION_FLOOR = 1e-300
RESOLUTION = np.finfo(float).eps
RATIO_DENOMINATOR_TOL = 1e-10

__all__ = ('ThermalSpec', 'TemperatureFit', 'DegenerateSpectrumError', 'gibbs_state', 'loki_transform',
           'fit_temperature', 'is_thermal', 'eigenvalue_spacing_ratios', 'partition_function', 'log_partition_function',
           'energy_expectation', 'energy_blocks')


class DegenerateSpectrumError(ValueError):
    """ spectrum too degenerate for a temperature fit or a spacing ratio """


class ThermalSpec:
    """ Hamiltonian together with an inverse temperature """

    def __init__(self, hamiltonian: HermitianOperator, beta: float):
        if not isinstance(hamiltonian, HermitianOperator):
            hamiltonian = HermitianOperator(hamiltonian)
        beta = float(beta)
        if not math.isfinite(beta) or beta < 0:
            raise ValueError('inverse temperature should be finite and non-negative, got {}'.format(beta))
        self.hamiltonian = hamiltonian
        self.beta = beta

    def __repr__(self):
        return 'ThermalSpec(beta={}, hamiltonian={})'.format(self.beta, self.hamiltonian)


class TemperatureFit(NamedTuple):
    """ inverse temperature fitted from log-populations in the Hamiltonian eigenbasis """
    beta_hat: float
    residual: float
    offdiag_norm: float


def _boltzmann_weights(energies: np.ndarray, beta: float):
    # shifting the ground energy out keeps exp() from overflowing
    weights = np.exp(-beta * (energies - np.min(energies)))
    return weights / np.sum(weights)


def gibbs_state(spec: ThermalSpec):
    """ exp(-beta H) / Z built in the eigenbasis of H """
    h = spec.hamiltonian
    if spec.beta == 0:
        return DensityMatrix.maximally_mixed(h.dim)
    populations = _boltzmann_weights(h.eigenvalues, spec.beta)
    rho = (h.eigenvectors * populations) @ dagger(h.eigenvectors)
    return DensityMatrix(rho)


def log_partition_function(spec: ThermalSpec):
    """ log Tr exp(-beta H) with the ground energy shifted out, finite whenever beta and H are """
    energies = spec.hamiltonian.eigenvalues
    ground = float(np.min(energies))
    return -spec.beta * ground + float(np.log(np.sum(np.exp(-spec.beta * (energies - ground)))))


def partition_function(spec: ThermalSpec):
    """ Tr exp(-beta H); overflows to inf only when Z itself exceeds the float range """
    return float(np.exp(log_partition_function(spec)))


def energy_expectation(rho: DensityMatrix, hamiltonian: HermitianOperator):
    return rho.expectation(hamiltonian)


def loki_transform(spec: ThermalSpec, lam: float):
    """ Lambda: (H, beta) -> (H / lam, lam * beta), leaving the Gibbs state unchanged """
    if lam <= 0:
        raise ValueError('rescaling factor should be positive, got {}'.format(lam))
    if lam == 1:
        return ThermalSpec(spec.hamiltonian, spec.beta)
    return ThermalSpec(spec.hamiltonian / lam, spec.beta * lam)


def energy_blocks(energies: np.ndarray, tol: float = DEGENERACY_TOL):
    """ group ascending energies into degenerate blocks: list of index lists """
    blocks = [[0]]
    for n in range(1, len(energies)):
        if energies[n] - energies[blocks[-1][-1]] <= tol:
            blocks[-1].append(n)
        else:
            blocks.append([n])
    return blocks


def fit_temperature(rho: DensityMatrix, h: HermitianOperator, degeneracy_tol: float = DEGENERACY_TOL):
    """ Fit the inverse temperature of `rho` with respect to `h` by detailed balance

    The slope of -log<n|rho|n> against E_n (least squares over degenerate-block averages) is the inverse
    temperature. A negative slope (population inversion) is returned as is. Populations below
    dim * eps * max population are round-off of the eigenbasis rotation and are left out of the fit; if fewer
    than two levels remain the temperature is unresolvable and DegenerateSpectrumError is raised.

     Parameter
    -----------
    rho: DensityMatrix
    h: HermitianOperator
    degeneracy_tol: float
        energies closer than this share a block; coherences inside a block do not count against thermality

     Return
    -----------
    TemperatureFit(beta_hat, residual, offdiag_norm)
    """
    if rho.dim != h.dim:
        raise ValueError('state dimension {} does not match hamiltonian dimension {}'.format(rho.dim, h.dim))
    blocks = energy_blocks(h.eigenvalues, degeneracy_tol)
    if len(blocks) < 2:
        raise DegenerateSpectrumError('hamiltonian is fully degenerate, temperature is undefined')
    in_basis = dagger(h.eigenvectors) @ rho.matrix @ h.eigenvectors

    diagonal = np.real(np.diag(in_basis))
    block_population = [float(np.mean(diagonal[block])) for block in blocks]
    floor = max(POPULATION_FLOOR, RESOLUTION * h.dim * max(block_population))
    energies, populations = [], []
    for block, population in zip(blocks, block_population):
        if population > floor:
            energies.append(float(np.mean(h.eigenvalues[block])))
            populations.append(population)
    if len(energies) < 2:
        raise DegenerateSpectrumError(
            'fewer than two energy levels are populated above {}, temperature is unresolvable'.format(floor))
    energies = np.asarray(energies)
    log_population = -np.log(np.asarray(populations))
    slope, intercept = np.polyfit(energies, log_population, 1)
    residual = float(np.max(np.abs(slope * energies + intercept - log_population)))

    block_id = np.empty(h.dim, dtype=int)
    for n, block in enumerate(blocks):
        block_id[block] = n
    mask = block_id[:, None] != block_id[None, :]
    offdiag_norm = float(np.max(np.abs(in_basis[mask]))) if np.any(mask) else 0.0
    logging.debug('temperature fit: beta={}, residual={}, offdiag={}'.format(slope, residual, offdiag_norm))
    return TemperatureFit(float(slope), residual, offdiag_norm)


def is_thermal(fit: TemperatureFit, tol: float = THERMALITY_TOL):
    return fit.residual <= tol and fit.offdiag_norm <= tol


def eigenvalue_spacing_ratios(rho: DensityMatrix, indices: Tuple[int, int, int, int]):
    """ (E_n - E_m) / (E_j - E_k) read off the state alone

    Eigenvectors of `rho` are indexed by descending population, i.e. ascending energy at positive temperature.
    """
    n, m, j, k = indices
    populations = np.sort(np.linalg.eigvalsh(rho.matrix))[::-1]
    for i in indices:
        if not 0 <= i < rho.dim:
            raise IndexError('index {} out of range for dimension {}'.format(i, rho.dim))
    if np.any(populations[list(indices)] <= POPULATION_FLOOR):
        raise DegenerateSpectrumError('referenced populations vanish: {}'.format(populations[list(indices)]))
    log_p = np.log(populations)
    denominator = log_p[j] - log_p[k]
    if abs(denominator) <= RATIO_DENOMINATOR_TOL:
        raise DegenerateSpectrumError('populations {} and {} are degenerate, ratio is undefined'.format(j, k))
    return float((log_p[n] - log_p[m]) / denominator)
