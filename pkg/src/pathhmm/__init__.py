"""Hidden Markov models for path-valued observations.

The observation space is a function space rather than R^d: each observation
is a whole sample path, scored against state-dependent means through squared
distances in a norm chosen per emission family (Brownian drift,
mean-reverting, fractional drift, free-form Sobolev means, or plain
Euclidean vectors).  Fitting uses log-domain forward-backward reestimation;
decoding uses the most-probable-sequence dynamic program; seeded simulators
and clustering metrics round out the experiment loop.
"""

from .emissions import (
    B1_FLOOR,
    BmDriftEmission,
    EmissionModel,
    EuclideanEmission,
    FbmDriftEmission,
    NonparametricEmission,
    OuEmission,
    fbm_gain,
    log_emission,
    ou_objective_and_gradient,
    reestimate_bm_drift,
    reestimate_euclidean,
    reestimate_fbm_drift,
    reestimate_nonparametric,
    reestimate_ou,
)
from .engine import (
    FitReport,
    Posteriors,
    ThmmModel,
    Trellis,
    baum_welch,
    forward_backward,
    log_emission_matrix,
    posteriors,
    reestimate,
    viterbi,
)
from .errors import (
    ConfigError,
    DataFormatError,
    DegenerateStateWarning,
    DimensionMismatch,
    NumericalError,
    PathHmmError,
)
from .evaluate import adjusted_rand_index, align_labels, confusion_matrix, relabel
from .fitting import FamilySpec, fit_restarts, initial_model
from .initializers import (
    init_kmeans,
    init_markov_uniform,
    init_random_obs,
    init_spread_params,
)
from .paths import (
    DEFAULT_GRID_POINTS,
    Grid,
    Path,
    derivative,
    integrate,
    make_path,
    smooth,
    sobolev_sq_distance,
)
from .simulate import (
    MarkovSpec,
    fbm_covariance,
    sample_bm_drift,
    sample_fbm,
    sample_ou,
    sample_states,
    simulate_sequence,
    state_path_sampler,
)

__version__ = "0.1.0"
