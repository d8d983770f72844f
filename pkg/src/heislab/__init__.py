"""Numerics for the Heisenberg group and Hardy-space operators on the circle.

Modules:

- ``heis``: group law, dilations, Koranyi gauge, quasi-metrics, frame.
- ``geodesic``: Carnot-Caratheodory distances by discretised optimal control.
- ``symbols``: circle symbols, Holder/Besov norms, Littlewood-Paley blocks.
- ``aniso``: anisotropic blocks on a periodic box.
- ``hardy`` / ``spectra``: Szego projection, Hankel operators, commutators,
  singular values and weak-Schatten fits.
- ``dixmier``: log-Cesaro functionals and lattice sums.
- ``cli``: the ``heislab`` command.
"""

from .errors import AliasingError, ConvergenceError, HeislabError, InputError, TailBoundError
from .heis import HeisConfig, HeisPoint, standard_config

__version__ = "0.1.0"

__all__ = [
    "AliasingError",
    "ConvergenceError",
    "HeislabError",
    "InputError",
    "TailBoundError",
    "HeisConfig",
    "HeisPoint",
    "standard_config",
    "__version__",
]
