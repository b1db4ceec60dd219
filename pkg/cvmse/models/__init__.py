from cvmse.models.benchmarks import (
    CentralMass,
    MajorityCovRow,
    SqConstants,
    SquareWaveParams,
    ThetaSeries,
)
from cvmse.models.experiment import ExperimentConfig, SweepResult
from cvmse.models.field import (
    FieldSpec,
    FqMatrix,
    LinearHypothesis,
    RankDistribution,
    SolutionCoset,
    UniformFieldDistribution,
)
from cvmse.models.hypothesis import (
    Hypothesis,
    HypothesisMixture,
    IntervalHypothesis,
    LearningRule,
    constant_hypothesis,
)
from cvmse.models.results import (
    BoundCheck,
    DecompositionReport,
    EstimateWithError,
    ExactValue,
    StabilityProfile,
)
from cvmse.models.sample import FiniteDistribution, FoldScheme, LabeledPoint, SampleTuple
