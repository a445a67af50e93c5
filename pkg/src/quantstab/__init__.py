"""Simulation and empirical stability diagnostics for adaptive quantization
schemes driven by stationary sources.

Subpackages: sources (iid/AR/MA generators), quantizers (static maps),
schemes (delta-modulation, Goodman-Gersho, zoom), control_loop (networked
control plant), diagnostics (tightness / occupation / AMS / ergodicity), and
a config-driven CLI. Hot trajectory loops run on a compiled kernel backend
with a numpy fallback (see quantstab._kernels.BACKEND).
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .errors import (BadEdgesError, ConfigError, DomainError,
                     EmptyCoefficientsError, EmptyEnsembleError,
                     NonFiniteInputError, NonpositiveNoiseError,
                     QuantstabError, UnboundedFunctionalError,
                     UnstableARError)
from .lattice import (LatticeSpacing, pow2, round_log2_to_lattice,
                      steps_coprime)
from .control_loop import LoopEnsemble, PlantSpec, moment_curve, run_ensemble
from .diagnostics import (Functional, OccupationHistogram, StabilityReport,
                          Verdict, ams_consistency, batch_means_se,
                          ergodicity_consistency, make_functional,
                          occupation_histogram, occupation_histogram_joint,
                          tightness_curve, tightness_statistic, time_average)
from .quantizers import (BinaryQuantizer, UniformQuantizer, binary_quantize,
                         uniform_quantize)
from .schemes import (DeltaModState, GGPolicy, GGState, ZoomState,
                      check_delta_mod_stability, delta_mod_ensemble,
                      delta_mod_step, gg_ensemble, gg_step,
                      lattice_reachability, make_zoom_state, required_rate,
                      zoom_step)
from .sources import (SourceKind, SourceSpec, SourceStream,
                      ar_spectral_radius, sample_paths, validate_spec)

__version__ = "0.1.0"
