"""Exact trace equivalence and refinement for labelled Markov chains and MDPs."""

__version__ = "0.1.0"
