"""Multistatic FMCW radar simulation and joint-sparse greedy recovery."""

from .analysis import TheoremCheck, TrialMetrics, fit_scaling, lee_vee, power_law_fit, theorem1_check
from .config import ExperimentConfig, load_config
from .dictionaries import CompleteDictionary, FactorizedDictionary
from .errors import (
    AmbiguousGrid,
    ConfigError,
    CountMismatch,
    DegenerateGeometry,
    FMCWError,
    GeometryError,
    HypothesisViolated,
    IndexOutOfRange,
    InsufficientData,
    InvalidSNR,
)
from .experiments import run_experiment, seed_stream
from .geometry import (
    BistaticPair,
    GridPair,
    RadarConfig,
    Target,
    bistatic_range,
    bistatic_speed,
    build_grids,
    check_geometry_conditions,
    delay_doppler,
    reference_pairs,
)
from .pursuit import (
    SparseSolution,
    bmp_run,
    bmp_select,
    fbmp_run,
    fbmp_select,
    ifbmp_run,
    ifbmp_select,
    pursue,
    update,
)
from .signals import (
    MeasurementSet,
    NoiseSpec,
    Scene,
    atom_sample,
    coupling_signal,
    inner_signal,
    outer_signal,
    sigma2_for_snr,
    synthesize,
)
