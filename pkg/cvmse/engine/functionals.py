from enum import Enum


class Functional(str, Enum):
    """Expectations the engines can evaluate"""

    MSE = "mse"
    SLS = "sls"
    FOLD_COV = "fold_cov"
    PER_FOLD_NOISE = "per_fold_noise"
    CORR_HOLD = "corr_hold"
    CORR_RISK = "corr_risk"
    LOSS_VAR = "loss_var"
    MEAN = "mean"
