"""
cvmse
Exact and Monte Carlo mean-squared error of k-fold cross-validation
"""

__version__ = "0.1.0"
