from .config import (DEFAULT_METHODS, OURS, ConfigError, ExperimentConfig, config_from_dict,
                     config_hash, config_to_dict, load_config, with_override)
from .experiment import MetricsReport, build_instance, ours_solver, run_experiment, run_seed
from .metrics import RunRecord, aggregate, completion_rate
from .report import emit_report, report_to_dict
