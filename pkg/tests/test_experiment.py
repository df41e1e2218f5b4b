""" UnitTest for experiment configuration, execution and artifact export """
import unittest
import logging
import json
import os
import tempfile
logging.basicConfig(format='%(asctime)s %(levelname)-8s %(message)s', level=logging.INFO, datefmt='%Y-%m-%d %H:%M:%S')

from qcontact.experiment import (
    ExperimentConfig, ConfigError, air_estimate, run, run_experiment, format_value, schema_help, EXIT_OK,
    EXIT_CONFIG, EXIT_NUMERICAL, EXIT_IO)
from qcontact.run_versioning import RunArgument
from qcontact_cl.run import main


def read_lines(path):
    with open(path) as f:
        return f.read().splitlines()


def read_json(path):
    with open(path) as f:
        return json.load(f)


class Test(unittest.TestCase):
    """ Test experiment """

    def test_air_estimate(self):
        estimate = air_estimate(300.0, 28.0, 2.25, 1e-20)
        self.assertAlmostEqual(estimate.dt * 1e12, 0.87, delta=0.01)
        self.assertAlmostEqual(estimate.dimensionless, 83, delta=1)
        hotter = air_estimate(1200.0, 28.0, 2.25, 1e-20)
        self.assertAlmostEqual(hotter.dt / estimate.dt, 0.5, places=12)
        for args in [(0.0, 28.0, 2.25, 1e-20), (300.0, -1.0, 2.25, 1e-20), (300.0, 28.0, 2.25, 0.0)]:
            with self.assertRaises(ValueError):
                air_estimate(*args)

    def test_config_schema(self):
        config = ExperimentConfig('audit', {'lam': '3', 'instances': 4.0})
        self.assertEqual(config.parameters['lam'], 3.0)
        self.assertEqual(config.parameters['instances'], 4)
        self.assertEqual(config.parameters['dt'], 0.1)
        self.assertEqual(config.output_path, os.path.join('qcontact_output', 'audit'))
        with self.assertRaises(ConfigError):
            ExperimentConfig('bogus')
        with self.assertRaises(ConfigError):
            ExperimentConfig('audit', {'bogus': 1})
        with self.assertRaises(ConfigError):
            ExperimentConfig('audit', {'instances': '2.5'})
        with self.assertRaises(ConfigError):
            ExperimentConfig('audit', {'lam': 'large'})
        with self.assertRaises(ConfigError):
            ExperimentConfig('audit', {'lam': True})
        self.assertEqual(ExperimentConfig('check-contact', {'preset': 'replacer'}).parameters['preset'], 'replacer')
        first, second = ExperimentConfig('audit', seed=3), ExperimentConfig('audit', seed=3)
        self.assertEqual(first.rng().normal(), second.rng().normal())

    def test_config_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'audit.toml')
            with open(path, 'w') as f:
                f.write('lam = 3.0\ndt = 0.05\n')
            config = ExperimentConfig.resolve('audit', path, ['lam=1'])
            self.assertEqual(config.parameters['lam'], 1.0)
            self.assertEqual(config.parameters['dt'], 0.05)
            with open(path, 'w') as f:
                f.write('[audit]\nlam = 3.0\n')
            with self.assertRaises(ConfigError):
                ExperimentConfig.resolve('audit', path)
            with open(path, 'w') as f:
                f.write('lam = = 3\n')
            with self.assertRaises(ConfigError):
                ExperimentConfig.resolve('audit', path)
        with self.assertRaises(ConfigError):
            ExperimentConfig.resolve('audit', overrides=['lam'])

    def test_config_file_bare_string(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, 'contact.toml')
            with open(path, 'w') as f:
                f.write('# contact preset\npreset = replacer\nj = 0.5 # coupling\n')
            config = ExperimentConfig.resolve('check-contact', path)
            self.assertEqual(config.parameters['preset'], 'replacer')
            self.assertEqual(config.parameters['j'], 0.5)
            with open(path, 'w') as f:
                f.write('preset = no-coupling  # inline comment\n')
            self.assertEqual(ExperimentConfig.resolve('check-contact', path).parameters['preset'], 'no-coupling')
            with open(path, 'w') as f:
                f.write('preset = "aware-partial-swap"\n')
            self.assertEqual(ExperimentConfig.resolve('check-contact', path).parameters['preset'],
                             'aware-partial-swap')
            # numeric keys are left to the parser
            with open(path, 'w') as f:
                f.write('j = strong\n')
            with self.assertRaises(ConfigError):
                ExperimentConfig.resolve('check-contact', path)
        self.assertIn('preset = replacer', schema_help())

    def test_format_value(self):
        self.assertEqual(format_value(None), '')
        self.assertEqual(format_value(True), 'true')
        self.assertEqual(format_value(3), '3')
        self.assertEqual(format_value(0.1), '0.10000000000000001')
        self.assertEqual(format_value('replacer'), 'replacer')

    def test_run_versioning(self):
        with tempfile.TemporaryDirectory() as tmp:
            base = os.path.join(tmp, 'run')
            first = RunArgument(base, lam=1.0)
            self.assertEqual(first.output_dir, base)
            self.assertEqual(first.lam, 1.0)
            with open(os.path.join(base, 'summary.json'), 'w') as f:
                f.write('{}')
            self.assertEqual(RunArgument(base, lam=1.0).output_dir, base)
            second = RunArgument(base, lam=2.0)
            self.assertNotEqual(second.output_dir, base)
            self.assertTrue(second.output_dir.startswith(base + '_'))
            self.assertEqual(read_json(os.path.join(second.output_dir, 'parameter.json')), {'lam': 2.0})
            # the second run never completed, so it is dropped on the next call
            third = RunArgument(base, lam=3.0)
            self.assertFalse(os.path.exists(second.output_dir))
            self.assertTrue(os.path.exists(os.path.join(third.output_dir, 'parameter.json')))

    def test_run_audit(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, 'audit')
            config = ExperimentConfig('audit', {'lam': 1, 'instances': 2}, output_path=out)
            self.assertEqual(run(config), EXIT_OK)
            summary = read_json(os.path.join(out, 'summary.json'))
            self.assertTrue(summary['passed'])
            self.assertEqual(summary['headline']['max_delta_l2'], 0.0)
            lines = read_lines(os.path.join(out, 'result.csv'))
            self.assertEqual(lines[0], '# schema=1')
            self.assertTrue(lines[1].startswith('# timestamp='))
            self.assertTrue(lines[2].startswith('# config='))
            self.assertEqual(lines[3], 'instance,delta_l0,delta_l1,delta_l2')
            self.assertEqual(len(lines), 6)

            # same configuration: same directory, identical body
            self.assertEqual(run(config), EXIT_OK)
            self.assertEqual(read_lines(os.path.join(out, 'result.csv'))[2:], lines[2:])
            self.assertEqual(sorted(os.listdir(tmp)), ['audit'])

            # a different configuration never overwrites
            other = ExperimentConfig('audit', {'lam': 2.5, 'instances': 2}, output_path=out)
            self.assertEqual(run(other), EXIT_OK)
            self.assertEqual(len(os.listdir(tmp)), 2)
            self.assertEqual(read_lines(os.path.join(out, 'result.csv'))[2:], lines[2:])

    def test_run_exit_status(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = ExperimentConfig('check-contact', {'preset': 'bogus'}, output_path=os.path.join(tmp, 'a'))
            self.assertEqual(run(config), EXIT_CONFIG)
            config = ExperimentConfig('partial-swap', {'e_s': 0.0}, output_path=os.path.join(tmp, 'b'))
            self.assertEqual(run(config), EXIT_NUMERICAL)
            self.assertFalse(os.path.exists(os.path.join(tmp, 'b')))
            blocker = os.path.join(tmp, 'file')
            with open(blocker, 'w') as f:
                f.write('')
            config = ExperimentConfig('air-estimate', output_path=os.path.join(blocker, 'c'))
            self.assertEqual(run(config), EXIT_IO)

    def test_run_svg(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, 'partial-swap')
            self.assertEqual(run(ExperimentConfig('partial-swap', output_path=out), svg=True), EXIT_OK)
            self.assertTrue(read_lines(os.path.join(out, 'plot.svg'))[0].startswith('<?xml'))
            summary = read_json(os.path.join(out, 'summary.json'))
            self.assertTrue(summary['passed'])
            self.assertAlmostEqual(summary['headline']['beta_s_inf'], 0.8, delta=1e-3)
            # commands without a plot only log
            out = os.path.join(tmp, 'air-estimate')
            self.assertEqual(run(ExperimentConfig('air-estimate', output_path=out), svg=True), EXIT_OK)
            self.assertFalse(os.path.exists(os.path.join(out, 'plot.svg')))

    def test_partial_swap_detuned(self):
        result = run_experiment(ExperimentConfig('partial-swap', {'e_s': 2.0, 'dt': 0.1, 'collisions': 50}))
        self.assertTrue(result.passed)
        self.assertAlmostEqual(result.headline['beta_s_inf'], 0.4, delta=1e-3)
        self.assertEqual(len(result.rows), 51)

    def test_fisher_scan(self):
        result = run_experiment(ExperimentConfig('fisher-scan', {'instances': 2}))
        self.assertTrue(result.passed)
        self.assertAlmostEqual(result.headline['fitted_slope'], 6, delta=0.3)
        self.assertEqual(len(result.rows), 24)
        self.assertGreater(result.headline['min_r2'], 0.999)

    def test_gaussian_fp(self):
        result = run_experiment(ExperimentConfig('gaussian-fp'))
        self.assertTrue(result.passed)
        self.assertAlmostEqual(result.headline['formula'] / result.headline['nu_a'], 1.25, places=12)
        self.assertLessEqual(result.headline['iteration_gap'], 1e-6)

    def test_contact_commands(self):
        self.assertTrue(run_experiment(ExperimentConfig('check-contact')).passed)
        self.assertFalse(run_experiment(ExperimentConfig('check-contact', {'preset': 'no-coupling'})).passed)
        result = run_experiment(ExperimentConfig('loki-attack'))
        self.assertTrue(result.passed)
        detected = {row[0]: row[-1] for row in result.rows}
        self.assertEqual(detected, {'partial-swap': True, 'aware-partial-swap': True, 'replacer': False,
                                    'swap-mixing': False})

    def test_liouvillian(self):
        result = run_experiment(ExperimentConfig('liouvillian', {'scale': 0.5, 'dt_min': 3e-3}))
        for key, expected in [('slope_order1', 2), ('slope_order2', 3), ('slope_order3', 4),
                              ('slope_liouvillian', 3)]:
            self.assertAlmostEqual(result.headline[key], expected, delta=0.3)
        self.assertLessEqual(result.headline['max_exp_log_error'], 1e-9)

    def test_command_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = os.path.join(tmp, 'air')
            self.assertEqual(main(['air-estimate', '--out', out, '-s', 't_kelvin=1200']), EXIT_OK)
            summary = read_json(os.path.join(out, 'summary.json'))
            self.assertEqual(summary['config']['t_kelvin'], 1200.0)
            self.assertEqual(main(['audit', '--set', 'bogus=1', '--out', out]), EXIT_CONFIG)
            self.assertEqual(main(['audit', '--config', os.path.join(tmp, 'missing.toml')]), EXIT_CONFIG)
        with self.assertRaises(SystemExit):
            main(['bogus'])


if __name__ == "__main__":
    unittest.main()
