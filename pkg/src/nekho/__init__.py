"""Quasi-periodic Nekhoroshev stability laboratory.

Exact lattice algebra for resonance modules, Diophantine analysis of the
forcing frequencies, resonance-block coverings of frequency space, the
closed-form stability constants, and a symplectic integrator for checking
the stability conclusions numerically.
"""

from .errors import NekhoError

__version__ = "0.1.0"
__all__ = ["NekhoError", "__version__"]
