"""causal-atlas: deterministic causal analysis engine.

Simulates ground-truth structural causal systems, runs a portfolio of
discovery algorithms, auto-selects and configures the best one from dataset
diagnostics, refines graphs by bootstrap confidence with a review loop, and
benchmarks everything against known structures.
"""

__version__ = "0.1.0"
