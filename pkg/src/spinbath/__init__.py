"""Matrix-free spin-bath decoherence runs for small central-spin systems.

Two propagators over the same term-wise Hamiltonian application: a Chebyshev
polynomial expansion of the evolution operator that takes long leaps at
machine-tunable accuracy, and a symmetric second-order Trotter splitting as
the stepping baseline.  Observables track the central-spin reduced density
matrix, its quadratic entropy, spin expectations and same-site correlators,
and a pointer-basis decomposition.
"""

from . import chebyshev, trotter
from .config import (ExperimentConfig, OneLeapSchedule, PropagatorSpec,
                     TwoLeapSchedule, csv_text, emit_config, load_config,
                     parse_config, read_series, write_csv)
from .errors import (ConfigError, NumericError, ScheduleError, SpinbathError,
                     ZeroGenerator)
from .experiments import (CompareResult, RunReport, benchmark_compare,
                          burst_summary, comparison_table, oscillation_summary,
                          prepare_run, run_experiment, run_one_leap,
                          run_two_leap, scenario_config, series_component)
from .hilbert import (HamiltonianTerm, apply_hamiltonian, apply_term,
                      basis_dimension, basis_state, field, inner_product,
                      product_state, random_bath_state, two_spin, vector_norm,
                      WorkerPool)
from .model import (SpinModel, SpectralBound, energy_bound_e1,
                    oscillation_preset, pointer_preset, rescaled_apply)
from .observables import (ObservableRecord, PointerDecomposition,
                          central_correlator, delta_metric, pointer_analysis,
                          quadratic_entropy, record_observables,
                          reduced_density_matrix, spin_expectation)

__version__ = "0.1.0"

__all__ = [
    "chebyshev", "trotter",
    "ExperimentConfig", "OneLeapSchedule", "PropagatorSpec", "TwoLeapSchedule",
    "csv_text", "emit_config", "load_config", "parse_config", "read_series",
    "write_csv",
    "ConfigError", "NumericError", "ScheduleError", "SpinbathError",
    "ZeroGenerator",
    "CompareResult", "RunReport", "benchmark_compare", "burst_summary",
    "comparison_table", "oscillation_summary", "prepare_run", "run_experiment",
    "run_one_leap", "run_two_leap", "scenario_config", "series_component",
    "HamiltonianTerm", "apply_hamiltonian", "apply_term", "basis_dimension",
    "basis_state", "field", "inner_product", "product_state",
    "random_bath_state", "two_spin", "vector_norm", "WorkerPool",
    "SpinModel", "SpectralBound", "energy_bound_e1", "oscillation_preset",
    "pointer_preset", "rescaled_apply",
    "ObservableRecord", "PointerDecomposition", "central_correlator",
    "delta_metric", "pointer_analysis", "quadratic_entropy",
    "record_observables", "reduced_density_matrix", "spin_expectation",
    "__version__",
]
