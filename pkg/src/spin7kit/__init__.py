"""Desk-scale toolkit for Spin(7) structures, McKay quivers and orbifold resolutions."""
from .exterior import AltForm, FourForm
from .octonion import Octonion, cayley0

__version__ = "0.1.0"
