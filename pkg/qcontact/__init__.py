from .operator_core import HermitianOperator, DensityMatrix, Superoperator, BranchCutError, DimensionError
from .thermal import ThermalSpec, gibbs_state, loki_transform, fit_temperature, eigenvalue_spacing_ratios
from .collision_engine import CollisionSetup, collision_channel, iterate_collisions, effective_liouvillian, \
    liouvillian_series, fixed_point, audit_ancilla_dependence, partial_swap_preset
from .gaussian_dynamics import GaussianMode, CouplingMatrix, gaussian_fixed_point, nu_of_beta, beta_of_nu
from .metrology import fisher_information, fisher_scan, swapped_pair_state, cramer_rao_bound
from .contact_checker import ContactScenario, check_thermal_contact, loki_attack, lambda_a_covariance_probe
from .experiment import ExperimentConfig, ConfigError, COMMANDS, SCHEMA, run, run_experiment, air_estimate, \
    schema_help
