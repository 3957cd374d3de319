"""Poincare, Friedrichs and Maxwell constants of box-type domains.

Staggered-grid discretization of the grad/curl/div chain with exact integer
incidence structure, symmetric eigensolvers for the four spectral constants,
discrete Helmholtz splitting, and verification of the constant chain
cp0 <= cmt <= cmn = cp <= diam/pi.

Submodules are imported lazily so the command-line entry point can cap
numeric-library threading before anything heavy loads.
"""

import importlib

__version__ = "0.1.0"

_SUBMODULES = (
    "cli",
    "constants",
    "derham",
    "domain",
    "eigensolve",
    "errors",
    "helmholtz",
    "verify",
)


def __getattr__(name):
    if name in _SUBMODULES:
        return importlib.import_module(f".{name}", __name__)
    raise AttributeError(f"module {__name__!r} has no attribute {name!r}")


def __dir__():
    return sorted(list(globals()) + list(_SUBMODULES))
