"""Hybrid meta-solving framework.

Decomposes optimization problems (VRP, TSP, QUBO, SAT, MaxCut) into trees of
sub-problems, offers interchangeable classical and simulated-quantum solvers
per step, and orchestrates stepwise, complete, and parallel execution.
"""

__version__ = "0.1.0"
