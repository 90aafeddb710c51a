"""Deformed frustration-free spin models with graph-state ground states.

Library layout:

* :mod:`gsdeform.linalg` -- dense/sparse Hermitian eigensolvers, kernel
  projectors, tensor embedding.
* :mod:`gsdeform.spin` -- spin operators, rotated eigenbases, total-spin
  projectors.
* :mod:`gsdeform.deform` -- deformation operators D(delta), deformed
  interaction terms, reduction POVMs, and the delta->0 limit construction.
* :mod:`gsdeform.graphstate` -- graph states, stabilizers, reduced density
  matrices, encoded graph states, GraphML/DOT export.
* :mod:`gsdeform.lattice` -- the three-colored star lattice, outcome
  configurations, domain decomposition, encoded graphs, crossing tests.
* :mod:`gsdeform.sampler` -- Metropolis sampling of the outcome distribution,
  spanning-probability scans, critical-point estimation.
* :mod:`gsdeform.chain` -- spin-1 ring: MPS ground states, two/three-body
  Hamiltonians, symmetry-resolved spectra, gap scaling, dispersion.
* :mod:`gsdeform.sectors` -- translation x flip symmetry sectors: orbit
  tables, projected bases, block Hamiltonians.
* :mod:`gsdeform.svgplot` -- dependency-free deterministic SVG line plots.
* :mod:`gsdeform.cli` -- command-line orchestration.
"""

__version__ = "0.1.0"
