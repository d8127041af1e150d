"""Joint transmit-waveform and receive-filter design with one-bit receivers."""

from .bench import ResultsTable, SweepConfig, emit_report, run_sweep
from .covfit import FitResult, MomentEstimate, build_Q, fit, update_moment
from .crew import (ALGORITHMS, DesignOutcome, can_design, can_mmf, crew_cyclic, crew_onebit,
                   design, evaluate_true_mse)
from .exceptions import (ConditioningError, ConfigError, ConsistencyError, CrewError,
                         DegenerateFilterError, DomainError, EstimationError)
from .onebit import (NormalizedCovariance, SnapshotBatch, arcsine_recover, csign, denormalize,
                     draw_snapshots, estimate_normalized, normalize, sign_covariance)
from .radar import (clutter_matrix, golomb, interference_covariance, isl, jamming_covariance,
                    jamming_spectrum, mmf, mse, true_covariance)
from .scenario import Jamming, ScenarioConfig, jamming_scenario
from .uqp import build_T, dinkelbach_s_step, mu_estimate, power_step

__version__ = "0.1.0"
