"""Gabor-filtered uniform LBP texture features with k-NN and residual-network classifiers."""

__version__ = "0.1.0"
