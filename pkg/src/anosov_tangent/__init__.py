"""Perturbative slope of the stable manifold for a perturbed hyperbolic toral automorphism."""

from .conjugacy import NodeValueContext, SeriesTerm, h_eps, h_k, node_val, tree_val
from .errors import AnosovError
from .torus import FIBONACCI, HyperbolicAuto, PerturbedMap, TorusPoint, TrigPoly, eigen_decompose

__all__ = [
    "AnosovError",
    "FIBONACCI",
    "HyperbolicAuto",
    "NodeValueContext",
    "PerturbedMap",
    "SeriesTerm",
    "TorusPoint",
    "TrigPoly",
    "eigen_decompose",
    "h_eps",
    "h_k",
    "node_val",
    "tree_val",
]

__version__ = "0.1.0"
