""" Reproducible experiment commands: configuration schema, execution and CSV / JSON / SVG export """
import csv
import json
import logging
import math
import os
import re
from datetime import datetime
from typing import Dict, List, NamedTuple, Sequence

import numpy as np
import toml
from tqdm import tqdm

from .operator_core import (
    HermitianOperator, Superoperator, max_norm, pauli, random_hermitian, trace_distance, matrix_exponential)
from .thermal import ThermalSpec, gibbs_state, fit_temperature
from .collision_engine import (
    CollisionSetup, audit_ancilla_dependence, collision_channel, effective_liouvillian, fixed_point,
    iterate_collisions, liouvillian_series, partial_swap_preset, phi_series_term, trajectory_steps)
from .gaussian_dynamics import (
    CouplingMatrix, fixed_point_formula, gaussian_fixed_point, nu_of_beta, richardson_extrapolate, stationary_nu)
from .metrology import PairSetup, cramer_rao_bound, fisher_scan, split_strategy_factor, total_pair_hamiltonian
from .contact_checker import (
    ContactScenario, aware_partial_swap_evolution, check_thermal_contact, lambda_a_covariance_probe, loki_attack,
    partial_swap_evolution, replacer_evolution, swap_mixing_evolution)
from .run_versioning import RunArgument

BOLTZMANN = 1.380649e-23  # J / K
HBAR = 1.054572e-34  # J s
AMU = 1.660539e-27  # kg
CSV_SCHEMA = 1

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

CONTACT_PRESETS = ('partial-swap', 'aware-partial-swap', 'replacer', 'swap-mixing', 'no-coupling')
BARE_KEYWORDS = ('true', 'false', 'inf', 'nan')

SCHEMA = {
    'audit': {
        'lam': (float, 2.5), 'dt': (float, 0.1), 'd_s': (int, 2), 'd_a': (int, 2), 'beta_e': (float, 1.0),
        'scale': (float, 1.0), 'instances': (int, 10)},
    'fisher-scan': {
        'lambda0': (float, 1.0), 'dt_min': (float, 1e-2), 'dt_max': (float, 0.3), 'points': (int, 12),
        'beta_a': (float, 1.0), 'beta_b': (float, 1.0), 'step': (float, 1e-2), 'scale': (float, 1.0),
        'corrections': (int, 2), 'instances': (int, 1)},
    'partial-swap': {
        'e_s': (float, 1.0), 'e_a': (float, 1.0), 'j': (float, 1.0), 'beta_a': (float, 0.8), 'dt': (float, 0.3),
        'beta_s0': (float, 0.1), 'collisions': (int, 300)},
    'gaussian-fp': {
        'omega_s': (float, 1.0), 'omega_a': (float, 1.0), 'g_xx': (float, 0.5), 'g_xp': (float, 0.0),
        'g_px': (float, 0.0), 'g_pp': (float, 1.0), 'beta_a': (float, 1.0), 'dt': (float, 0.02),
        'tol': (float, 1e-12)},
    'check-contact': {
        'preset': (str, 'partial-swap'), 'e_a': (float, 1.0), 'e_b': (float, 1.0), 'j': (float, 1.0),
        'dt': (float, 0.3), 'p': (float, 0.3), 'horizon': (int, 2000)},
    'loki-attack': {
        'lam': (float, 2.0), 'e': (float, 1.0), 'j': (float, 1.0), 'dt': (float, 0.3), 'p': (float, 0.3),
        'horizon': (int, 2000)},
    'air-estimate': {
        't_kelvin': (float, 300.0), 'mass_amu': (float, 28.0), 'radius_angstrom': (float, 2.25),
        'energy_joule': (float, 1e-20)},
    'liouvillian': {
        'd_s': (int, 2), 'd_a': (int, 2), 'beta_e': (float, 1.0), 'scale': (float, 1.0), 'dt_min': (float, 1e-3),
        'dt_max': (float, 1e-1), 'points': (int, 7)}
}
COMMANDS = tuple(SCHEMA.keys())

__all__ = ('ExperimentConfig', 'ConfigError', 'AirEstimate', 'ExperimentResult', 'SCHEMA', 'COMMANDS',
           'air_estimate', 'run_experiment', 'run', 'schema_help', 'build_scenario', 'write_csv', 'format_value')


class ConfigError(ValueError):
    """ configuration does not match the command schema """


def schema_help():
    """ per-command schema listing for --help """
    lines = []
    for command, schema in SCHEMA.items():
        lines.append('{}: {}'.format(command, ', '.join(
            '{}={}'.format(k, default) for k, (_, default) in schema.items())))
    lines.append('string values may be written bare in a config file, e.g. `preset = replacer`')
    return '\n'.join(lines)


def _quote_bare_strings(command: str, text: str):
    """ `preset = replacer` reads as `preset = "replacer"` for the string-typed keys of the command """
    for key, (_type, _) in SCHEMA.get(command, {}).items():
        if _type is not str:
            continue
        pattern = r'^([ \t]*{}[ \t]*=[ \t]*)([A-Za-z_][A-Za-z0-9_.-]*)([ \t]*(?:#.*)?)$'.format(re.escape(key))
        text = re.sub(pattern, lambda m: m.group(0) if m.group(2) in BARE_KEYWORDS else
                      '{}"{}"{}'.format(m.group(1), m.group(2), m.group(3)), text, flags=re.MULTILINE)
    return text


def _cast(command: str, key: str, value):
    schema = SCHEMA[command]
    if key not in schema:
        raise ConfigError('unknown key `{}` for command {}, expected one of {}'.format(key, command, list(schema)))
    _type = schema[key][0]
    if _type is str:
        return str(value)
    if isinstance(value, bool):
        raise ConfigError('key `{}` expects {}, got {}'.format(key, _type.__name__, value))
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise ConfigError('key `{}` expects {}, got {!r}'.format(key, _type.__name__, value))
    if _type is int:
        if not number.is_integer():
            raise ConfigError('key `{}` expects an integer, got {!r}'.format(key, value))
        return int(number)
    return number


class ExperimentConfig:
    """ command, schema-checked parameters, seed and output path """

    def __init__(self, command: str, parameters: Dict = None, seed: int = 0, output_path: str = None):
        if command not in SCHEMA:
            raise ConfigError('unknown command {}, expected one of {}'.format(command, COMMANDS))
        resolved = {k: default for k, (_, default) in SCHEMA[command].items()}
        for k, v in (parameters or {}).items():
            resolved[k] = _cast(command, k, v)
        self.command = command
        self.parameters = resolved
        self.seed = int(seed)
        self.output_path = output_path or os.path.join('qcontact_output', command)

    @classmethod
    def resolve(cls, command: str, config_file: str = None, overrides: Sequence[str] = (), seed: int = 0,
                output_path: str = None):
        """ defaults < config file < `key=value` overrides """
        parameters = {}
        if config_file is not None:
            with open(config_file) as f:
                text = f.read()
            try:
                loaded = toml.loads(_quote_bare_strings(command, text))
            except toml.TomlDecodeError as e:
                raise ConfigError('can not parse {}: {}'.format(config_file, e))
            nested = [k for k, v in loaded.items() if isinstance(v, dict)]
            if nested:
                raise ConfigError('config file should be flat `key = value` lines, found tables {}'.format(nested))
            parameters.update(loaded)
        for item in overrides:
            if '=' not in item:
                raise ConfigError('override should read key=value, got {}'.format(item))
            k, v = item.split('=', 1)
            parameters[k.strip()] = v.strip()
        return cls(command, parameters, seed, output_path)

    def rng(self):
        """ counter-based generator, identical across platforms for a given seed """
        return np.random.Generator(np.random.Philox(self.seed))

    def to_dict(self):
        return dict(command=self.command, seed=self.seed, **self.parameters)

    def __repr__(self):
        return 'ExperimentConfig({})'.format(self.to_dict())


class AirEstimate(NamedTuple):
    v_rms: float
    dt: float
    dimensionless: float


class ExperimentResult(NamedTuple):
    columns: List[str]
    rows: List[list]
    headline: Dict
    passed: object
    plot: Dict


def air_estimate(t_kelvin: float, mass_amu: float, radius_angstrom: float, energy_joule: float):
    """ collision time of a gas molecule: v_rms = sqrt(3 k T / m), dt = 2 r / v_rms, and dt E / hbar

    Constants (SI): k = 1.380649e-23 J/K, hbar = 1.054572e-34 J s, amu = 1.660539e-27 kg.
    """
    for name, value in (('temperature', t_kelvin), ('mass', mass_amu), ('radius', radius_angstrom),
                        ('energy', energy_joule)):
        if not value > 0:
            raise ValueError('{} should be positive, got {}'.format(name, value))
    v_rms = math.sqrt(3 * BOLTZMANN * t_kelvin / (mass_amu * AMU))
    dt = 2 * radius_angstrom * 1e-10 / v_rms
    return AirEstimate(v_rms, dt, dt * energy_joule / HBAR)


def _random_setup(rng, d_s: int, d_a: int, beta_e: float, dt: float, scale: float):
    return CollisionSetup(
        random_hermitian(d_s, rng, scale), random_hermitian(d_a, rng, scale),
        random_hermitian(d_s * d_a, rng, scale), beta_e, dt)


def _loglog_slope(x, y):
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def _run_audit(p, rng, verbose):
    rows = []
    for n in tqdm(range(p['instances']), disable=not verbose):
        setup = _random_setup(rng, p['d_s'], p['d_a'], p['beta_e'], p['dt'], p['scale'])
        record = audit_ancilla_dependence(setup, p['lam'])
        rows.append([n, record.delta_l0, record.delta_l1, record.delta_l2])
    deltas = np.array([r[1:] for r in rows])
    headline = dict(max_delta_l0=float(deltas[:, 0].max()), max_delta_l1=float(deltas[:, 1].max()),
                    min_delta_l2=float(deltas[:, 2].min()), max_delta_l2=float(deltas[:, 2].max()))
    low_order = headline['max_delta_l0'] <= 1e-10 and headline['max_delta_l1'] <= 1e-10
    passed = low_order and (headline['max_delta_l2'] <= 1e-10 if p['lam'] == 1 else headline['min_delta_l2'] >= 1e-4)
    return ExperimentResult(['instance', 'delta_l0', 'delta_l1', 'delta_l2'], rows, headline, passed, {})


def _run_fisher_scan(p, rng, verbose):
    rows, slopes, r2 = [], [], []
    for n in tqdm(range(p['instances']), disable=not verbose):
        pair = PairSetup(random_hermitian(2, rng, p['scale']), random_hermitian(2, rng, p['scale']),
                         random_hermitian(4, rng, p['scale']), p['beta_a'], p['beta_b'])
        h_norm = total_pair_hamiltonian(pair.h_a, pair.h_b, pair.h_ab, p['lambda0']).spectral_norm()
        grid = np.logspace(math.log10(p['dt_min']), math.log10(p['dt_max']), p['points']) / h_norm
        scan = fisher_scan(pair, p['lambda0'], grid, step=p['step'], corrections=p['corrections'])
        slopes.append(scan.fitted_slope)
        r2.append(scan.fit_r2)
        for dt, f, limited in zip(scan.dt_grid, scan.f_values, scan.floor_limited):
            rows.append([n, dt, dt * h_norm, f, limited])
    slope = float(np.mean(slopes))
    f_last = rows[-1][3]
    headline = dict(fitted_slope=slope, min_slope=float(min(slopes)), max_slope=float(max(slopes)),
                    min_r2=float(min(r2)), split_strategy_factor=split_strategy_factor(slope))
    if f_last > 0:
        headline['cramer_rao_bound_n1'] = cramer_rao_bound(f_last, 1)
    passed = all(5.7 <= s <= 6.3 for s in slopes) and min(r2) > 0.999
    plot = dict(kind='loglog', x=[r[1] for r in rows], y=[max(r[3], 1e-300) for r in rows],
                xlabel='dt', ylabel='Fisher information')
    return ExperimentResult(['instance', 'dt', 'dt_h_norm', 'fisher', 'floor_limited'], rows, headline, passed,
                            plot)


def _run_partial_swap(p, rng, verbose):
    setup = partial_swap_preset(p['e_s'], p['e_a'], p['j'], p['beta_a'], p['dt'])
    rho0 = gibbs_state(ThermalSpec(setup.h_s, p['beta_s0']))
    trajectory = iterate_collisions(setup, rho0, p['collisions'])
    rows = []
    for step, rho in zip(trajectory_steps(p['collisions']), trajectory):
        rows.append([step, trace_distance(rho, setup.rho_a), fit_temperature(rho, setup.h_s).beta_hat])
    report = fixed_point(collision_channel(setup), mode='channel')
    beta_s_inf = fit_temperature(report.state, setup.h_s).beta_hat
    headline = dict(beta_s_inf=beta_s_inf, e_s_beta_s_inf=p['e_s'] * beta_s_inf, e_a_beta_a=p['e_a'] * p['beta_a'],
                    fixed_point_distance=trace_distance(report.state, setup.rho_a), unique=report.unique,
                    spectral_gap=report.spectral_gap, final_distance=rows[-1][1])
    passed = report.unique and abs(headline['e_s_beta_s_inf'] - headline['e_a_beta_a']) <= 1e-3
    plot = dict(kind='trajectory', x=[r[0] for r in rows], y=[max(r[1], 1e-300) for r in rows],
                xlabel='collisions', ylabel='trace distance to ancilla state')
    return ExperimentResult(['step', 'trace_distance', 'beta_s'], rows, headline, passed, plot)


def _run_gaussian_fp(p, rng, verbose):
    g = CouplingMatrix.from_entries(p['g_xx'], p['g_xp'], p['g_px'], p['g_pp'])
    nu_a = nu_of_beta(p['omega_a'], p['beta_a'])
    formula = fixed_point_formula(g, nu_a)
    steps = [p['dt'], p['dt'] / 2, p['dt'] / 4]
    stationary = [stationary_nu(p['omega_s'], p['omega_a'], g, p['beta_a'], dt) for dt in steps]
    iterated = gaussian_fixed_point(p['omega_s'], p['omega_a'], g, p['beta_a'], p['dt'], tol=p['tol'])
    rows = [[dt, nu] for dt, nu in zip(steps, stationary)]
    extrapolated = richardson_extrapolate(steps, stationary)
    headline = dict(formula=formula, nu_a=nu_a, richardson=extrapolated, error=abs(extrapolated - formula),
                    nu_iterated=iterated.nu_inf, iterations=iterated.iterations,
                    iteration_gap=abs(iterated.nu_inf - stationary[0]))
    passed = headline['error'] <= 1e-4
    plot = dict(kind='loglog', x=steps, y=[max(abs(nu - formula), 1e-300) for nu in stationary],
                xlabel='dt', ylabel='|nu(dt) - formula|')
    return ExperimentResult(['dt', 'nu_stationary'], rows, headline, passed, plot)


def build_scenario(preset: str, e_a: float, e_b: float, j: float, dt: float, p: float, horizon: int):
    """ qubit scenario with H_A = e_a sigma_z, H_B = e_b sigma_z under one of CONTACT_PRESETS """
    if preset == 'partial-swap':
        evolution = partial_swap_evolution(j, dt)
    elif preset == 'aware-partial-swap':
        evolution = aware_partial_swap_evolution(j, dt)
    elif preset == 'replacer':
        evolution = replacer_evolution()
    elif preset == 'swap-mixing':
        evolution = swap_mixing_evolution(p)
    elif preset == 'no-coupling':
        evolution = partial_swap_evolution(0.0, dt)
    else:
        raise ConfigError('unknown preset {}, expected one of {}'.format(preset, CONTACT_PRESETS))
    return ContactScenario(evolution, HermitianOperator(e_a * pauli('z')), HermitianOperator(e_b * pauli('z')),
                           horizon=horizon)


def _run_check_contact(p, rng, verbose):
    scenario = build_scenario(p['preset'], p['e_a'], p['e_b'], p['j'], p['dt'], p['p'], p['horizon'])
    report = check_thermal_contact(scenario)
    rows = []
    for c1, c2, c3 in zip(report.condition1, report.condition2, report.condition3):
        rows.append([c1.beta_a0, c1.beta_b0, c1.beta_a_inf, c1.beta_b_inf, c1.passed, c2.gap, c2.passed,
                     c3.motion, c3.passed])
    headline = dict(condition1=report.holds(1), condition2=report.holds(2), condition3=report.holds(3),
                    overall=report.overall, notes=report.notes)
    columns = ['beta_a0', 'beta_b0', 'beta_a_inf', 'beta_b_inf', 'condition1', 'beta_gap', 'condition2',
               'motion', 'condition3']
    return ExperimentResult(columns, rows, headline, report.overall, {})


def _run_loki_attack(p, rng, verbose):
    rows, dichotomy = [], True
    probe = None
    for preset in tqdm(CONTACT_PRESETS[:-1], disable=not verbose):
        scenario = build_scenario(preset, p['e'], p['e'], p['j'], p['dt'], p['p'], p['horizon'])
        record = loki_attack(scenario, p['lam'])
        aware = scenario.evolution.hamiltonian_aware
        rows.append([preset, aware, record.beta_a, record.beta_c, record.reported_equal_before,
                     record.reported_equal_after, record.detected])
        dichotomy = dichotomy and record.detected == (aware and p['lam'] != 1)
        if preset == 'replacer':
            probe = lambda_a_covariance_probe(scenario, p['lam'])
    headline = dict(dichotomy=dichotomy, true_ratio=p['lam'], probe_beta_a_inf_ratio=probe.beta_a_inf_ratio,
                    probe_beta_b_inf_delta=probe.beta_b_inf_delta)
    passed = dichotomy and abs(probe.beta_a_inf_ratio - p['lam']) <= 1e-6 * p['lam'] \
        and probe.beta_b_inf_delta <= 1e-8
    columns = ['preset', 'hamiltonian_aware', 'beta_a', 'beta_c', 'reported_equal_before', 'reported_equal_after',
               'detected']
    return ExperimentResult(columns, rows, headline, passed, {})


def _run_air_estimate(p, rng, verbose):
    estimate = air_estimate(p['t_kelvin'], p['mass_amu'], p['radius_angstrom'], p['energy_joule'])
    headline = dict(v_rms=estimate.v_rms, dt=estimate.dt, dt_ps=estimate.dt * 1e12,
                    dimensionless=estimate.dimensionless)
    return ExperimentResult(['v_rms', 'dt', 'dimensionless'], [list(estimate)], headline, None, {})


def _run_liouvillian(p, rng, verbose):
    setup = _random_setup(rng, p['d_s'], p['d_a'], p['beta_e'], p['dt_max'], p['scale'])
    phi = [phi_series_term(setup, n) for n in (1, 2, 3)]
    series = liouvillian_series(setup)
    identity = Superoperator.identity(setup.d_s)
    rows = []
    for dt in tqdm(np.logspace(math.log10(p['dt_min']), math.log10(p['dt_max']), p['points']),
                   disable=not verbose):
        current = setup.replace(dt=float(dt))
        channel = collision_channel(current)
        partial, remainders = identity, []
        for n, term in enumerate(phi, start=1):
            partial = partial + term * dt ** n
            remainders.append(channel.distance(partial))
        generator = effective_liouvillian(current)
        rows.append([float(dt)] + remainders + [generator.distance(series.truncated(float(dt))),
                                                max_norm(matrix_exponential(generator.matrix * dt) - channel.matrix)])
    dts = [r[0] for r in rows]
    slopes = [_loglog_slope(dts, [r[k] for r in rows]) for k in (1, 2, 3, 4)]
    headline = dict(slope_order1=slopes[0], slope_order2=slopes[1], slope_order3=slopes[2],
                    slope_liouvillian=slopes[3], max_exp_log_error=max(r[5] for r in rows))
    passed = all(abs(s - e) <= 0.2 for s, e in zip(slopes[:3], (2, 3, 4))) and abs(slopes[3] - 3) <= 0.3
    plot = dict(kind='loglog', x=dts, y=[r[3] for r in rows], xlabel='dt', ylabel='order-3 series remainder')
    columns = ['dt', 'remainder_order1', 'remainder_order2', 'remainder_order3', 'remainder_liouvillian',
               'exp_log_error']
    return ExperimentResult(columns, rows, headline, passed, plot)


RUNNERS = {
    'audit': _run_audit,
    'fisher-scan': _run_fisher_scan,
    'partial-swap': _run_partial_swap,
    'gaussian-fp': _run_gaussian_fp,
    'check-contact': _run_check_contact,
    'loki-attack': _run_loki_attack,
    'air-estimate': _run_air_estimate,
    'liouvillian': _run_liouvillian
}
assert set(RUNNERS) == set(SCHEMA)


def run_experiment(config: ExperimentConfig, verbose: bool = False):
    """ compute the artifacts of one command without touching the filesystem """
    logging.info('run {} (seed {})'.format(config.command, config.seed))
    return RUNNERS[config.command](config.parameters, config.rng(), verbose)


def format_value(value):
    """ CSV cell: reals with 17 significant digits, booleans as true / false, None as empty """
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return '{:.17g}'.format(float(value))
    return str(value)


def write_csv(path: str, config: ExperimentConfig, result: ExperimentResult):
    with open(path, 'w', newline='') as f:
        f.write('# schema={}\n'.format(CSV_SCHEMA))
        f.write('# timestamp={}\n'.format(datetime.now().isoformat()))
        f.write('# config={}\n'.format(json.dumps(config.to_dict(), sort_keys=True)))
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(result.columns)
        for row in result.rows:
            writer.writerow([format_value(v) for v in row])


def _json_value(value):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value) if math.isfinite(value) else str(value)
    return value


def write_summary(path: str, config: ExperimentConfig, result: ExperimentResult):
    summary = dict(command=config.command, config=config.to_dict(),
                   headline={k: _json_value(v) for k, v in result.headline.items()},
                   passed=_json_value(result.passed))
    with open(path, 'w') as f:
        json.dump(summary, f, indent=2, sort_keys=True)
    return summary


def write_svg(path: str, result: ExperimentResult):
    import matplotlib
    matplotlib.use('Agg')
    import matplotlib.pyplot as plt

    plot = result.plot
    fig, ax = plt.subplots(figsize=(6, 4))
    if plot['kind'] == 'loglog':
        ax.loglog(plot['x'], plot['y'], marker='o')
    else:
        ax.semilogy(plot['x'], plot['y'])
    ax.set_xlabel(plot['xlabel'])
    ax.set_ylabel(plot['ylabel'])
    ax.grid(True, which='both', alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, format='svg', metadata={'Date': None})
    plt.close(fig)


def run(config: ExperimentConfig, svg: bool = False, verbose: bool = False):
    """ Run one command and write its artifacts

    Return the exit status: 0 success, 2 configuration error, 3 numerical failure, 4 I/O failure.
    """
    try:
        result = run_experiment(config, verbose=verbose)
        argument = RunArgument(config.output_path, **config.to_dict())
        write_csv(os.path.join(argument.output_dir, 'result.csv'), config, result)
        if svg:
            if result.plot:
                write_svg(os.path.join(argument.output_dir, 'plot.svg'), result)
            else:
                logging.info('command {} has no plot'.format(config.command))
        summary = write_summary(os.path.join(argument.output_dir, 'summary.json'), config, result)
        logging.info('artifacts exported to {}'.format(argument.output_dir))
        logging.info('headline: {}'.format(summary['headline']))
    except ConfigError as e:
        logging.error('configuration error: {}'.format(e))
        return EXIT_CONFIG
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as e:
        logging.error('{}.{}: {}'.format(type(e).__module__, type(e).__name__, e))
        return EXIT_NUMERICAL
    except OSError as e:
        logging.error('I/O failure: {}'.format(e))
        return EXIT_IO
    return EXIT_OK
