"""Local invariants of shear-free congruence structures and their spacetimes.

Submodules:

``jets``         truncated multivariate Taylor arithmetic
``expr``         the expression language used for structure definitions
``forms``        charts, 1-forms and coframes evaluated as jets
``congruence``   structure functions and branch classification
``invariants``   Cartan invariants on each branch
``spacetime``    Lorentzian metrics, curvature, Petrov type, Bach tensor
``catalog``      named examples with expected invariant tables
``cli``          batch command line interface
"""

__version__ = "0.1.0"

from .catalog import CatalogError, catalog_get, catalog_names, catalog_verify
from .congruence import Branch, OrientedCongruence, classify_branch, structure_functions
from .expr import ParseError, parse
from .forms import Chart, OneForm
from .spacetime import Metric4, curvature, petrov, weyl_spinors

__all__ = [
    "__version__",
    "Branch",
    "CatalogError",
    "Chart",
    "Metric4",
    "OneForm",
    "OrientedCongruence",
    "ParseError",
    "catalog_get",
    "catalog_names",
    "catalog_verify",
    "classify_branch",
    "curvature",
    "parse",
    "petrov",
    "structure_functions",
    "weyl_spinors",
]
