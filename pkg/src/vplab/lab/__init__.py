"""Configuration, experiment orchestration, reports and the command-line interface."""
from .config import ExperimentConfig, config_from_dict, load_config
from .experiments import (run_combined_limit, run_concentration_check, run_experiment,
                          run_lemma_suite, run_meanfield_convergence, run_quasineutral_sweep)
from .report import RunReport
