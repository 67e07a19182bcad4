"""Conditional-symmetry characterizations on finite Abelian groups.

Submodules: ``groups`` (groups, maps, subgroups), ``distributions`` (exact
laws and characteristic functions), ``engine`` (symmetry test, partner
solving, decompositions), ``gaussian`` (the R^n factor), ``fdm`` (finite
differences) and ``cli``.
"""

__version__ = "0.1.0"
