"""Learning junta distributions on the Boolean hypercube, with tolerant testing and LPN reductions."""

from .config import DEFAULT_CONSTANTS, Constants, load_constants
from .dist import (
    DensePmf,
    JuntaDistribution,
    LabeledSampleBatch,
    NoisyParityDistribution,
    SampleBatch,
    bias_spectrum,
    junta_l1,
    marginal,
    random_junta,
    sample,
)
from .errors import ContractError, DimensionError, InvalidPmfError, JuntaError, NoCandidate, SearchFloorReached
from .learner import LearnerConfig, learn_junta
from .rng import Rng
from .tester import TesterConfig, Verdict, tolerant_identity_test

__version__ = "0.1.0"
