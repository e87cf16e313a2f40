"""utg: generate likely-unsupposable test data from desk-scale generative models."""

__version__ = "0.1.0"
