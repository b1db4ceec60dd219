from cvmse.engine.exact import JointMoments, exact_functional, exact_moments
from cvmse.engine.folds import cv_estimate, partition_folds, population_risk
from cvmse.engine.functionals import Functional
from cvmse.engine.montecarlo import TrialArrays, mc_functional, simulate_trials
from cvmse.engine.rules import constant_rule, label_count_rule
