"""gbnlearn: structure and weights of equal noise-variance Gaussian
Bayesian networks from observational data.

The learner estimates a sparse precision matrix by column-wise
L1-constrained linear programs, peels terminal vertices by a precision/
regression ratio score to recover a causal order, and fits edge weights
by least squares along that order.  Generation utilities, a two-backend
(numba / numpy) kernel layer, and an experiment harness round it out.
"""

from gbnlearn.clime import PrecisionEstimate, clime, clime_column, default_lambda
from gbnlearn.errors import GbnLearnError
from gbnlearn.model import (
    Dag,
    Gbn,
    PopulationMoments,
    check_rsaf,
    covariance_of,
    effective_influence,
    markov_blanket,
)
from gbnlearn.order import (
    CausalOrder,
    LearnedGbn,
    LearnerConfig,
    learn_gbn,
    learn_order,
    learn_structure_from_order,
    marginal_variance_order,
    structure_metrics,
)
from gbnlearn.regression import EmpiricalCovariance, empirical_covariance
from gbnlearn.synth import (
    Dataset,
    GeneratorConfig,
    generate_dataset,
    sample_data,
    sample_gbn_screened,
)

__version__ = "0.1.0"

__all__ = [
    "CausalOrder",
    "Dag",
    "Dataset",
    "EmpiricalCovariance",
    "Gbn",
    "GbnLearnError",
    "GeneratorConfig",
    "LearnedGbn",
    "LearnerConfig",
    "PopulationMoments",
    "PrecisionEstimate",
    "check_rsaf",
    "clime",
    "clime_column",
    "covariance_of",
    "default_lambda",
    "effective_influence",
    "empirical_covariance",
    "generate_dataset",
    "learn_gbn",
    "learn_order",
    "learn_structure_from_order",
    "markov_blanket",
    "marginal_variance_order",
    "sample_data",
    "sample_gbn_screened",
    "structure_metrics",
    "__version__",
]
