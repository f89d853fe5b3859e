"""
Execution-time opacity analysis for (parametric) timed automata.
"""

__version__ = '1.0'
