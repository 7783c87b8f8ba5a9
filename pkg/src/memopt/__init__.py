"""Behavioral surrogate models of memory compilers and a PPA optimizer.

Feed-forward networks learn the mapping from compiler parametrizations to
PPA outputs; an exhaustive-search optimizer ranks all legal candidates in
seconds, and a Monte Carlo resampler scores how reliable each ranking is.
"""

__version__ = "0.1.0"
