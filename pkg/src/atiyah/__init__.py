"""Exact Atiyah/Chern forms, Čech–Dolbeault cocycles and residues."""

from .symcore import I, I_OVER_2PI, PI, Poly, RationalFn, Scalar, VarSet
from .forms import ChartMap, Form, d, dbar, del_, pullback, type_component, wedge

__version__ = "0.1.0"
