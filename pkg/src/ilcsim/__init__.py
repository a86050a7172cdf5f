"""Iterative learning control with neural-network warm starts on a
simulated friction-laden Lorentz-force linear actuator."""

from .config import ExperimentConfig, default_config_yaml
from .errors import (ConfigError, EstimationError, FilterInstabilityError,
                     IlcSimError, InversionError, NormalizationError,
                     PoleOnUnitCircleError, SimulationDiverged,
                     StabilityRefusal)
from .estimation import (KalmanConfig, KalmanState, kalman_filter_signal,
                         kalman_step)
from .feedback import PiController
from .filters import QFilterSpec, build_q_filter, q_apply
from .ilc import (ConvergenceReport, IlcConfig, IlcMemory,
                  apply_learning_function, check_monotonic_convergence,
                  check_trial_convergence, compute_error, effort_decompose,
                  ilc_update, linear_feedforward)
from .neural import (AdamState, MlpModel, TrainingSet, TrainSpec, adam_step,
                     fit, load_model, mlp_forward, mlp_forward_batch,
                     mlp_gradients, output_bound, predict_effort_series,
                     save_model)
from .plant import (LuGreParams, PlantParams, PlantState, SensorModel,
                    lugre_g, lugre_step, measure, plant_step, stribeck_curve)
from .scenario import (ExperimentResult, IterationRecord, RunMode, Segment,
                       SimulationSetup, TaskSchedule, TrialTraces,
                       build_training_corpus, derive_seed, run_ilc_experiment,
                       run_trial, warm_start_effort)
from .signals import (DiscreteTransferFunction, ReferenceCommand, SampleSpec,
                      Signal, StateSpaceModel, c2d_zoh, generate_reference,
                      identity_tf, mse, tf_filter, tf_filtfilt,
                      tf_freq_response, tf_series)

__version__ = "0.1.0"
