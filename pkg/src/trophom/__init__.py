"""Tropical root counts and optimal homotopies for parametrized polynomial systems."""

__version__ = "0.1.0"

from .errors import TrophomError
from .exact import GaussianRational, IntMatrix, smith_normal_form
from .puiseux import LaurentPoly, PuiseuxScalar, TropicalForm, initial_form, trop_eval, trop_form
from .systems import (
    Block,
    ConcreteSystem,
    HorizontalSystem,
    PlainSystem,
    TransverseBase,
    VerticalSystem,
    horizontal_modification,
    relaxed_modification,
    specialize,
    substitute_back,
    two_stage_modification,
)
from .tropical import TropicalPoint, circuits, mixed_cells, mixed_volume, stable_intersection_points
from .start import build_homotopy, initial_system, solve_binomial, start_bundle, tropical_groebner_linear
from .tracker import TrackOptions, residual, solve_all, track_path
from .pipeline import ProblemSpec, solve, tropicalize
from .io import load_fixture, parse_input

__all__ = [
    "TrophomError", "GaussianRational", "IntMatrix", "smith_normal_form",
    "LaurentPoly", "PuiseuxScalar", "TropicalForm", "initial_form", "trop_eval", "trop_form",
    "Block", "ConcreteSystem", "HorizontalSystem", "PlainSystem", "TransverseBase", "VerticalSystem",
    "horizontal_modification", "relaxed_modification", "specialize", "substitute_back", "two_stage_modification",
    "TropicalPoint", "circuits", "mixed_cells", "mixed_volume", "stable_intersection_points",
    "build_homotopy", "initial_system", "solve_binomial", "start_bundle", "tropical_groebner_linear",
    "TrackOptions", "residual", "solve_all", "track_path",
    "ProblemSpec", "solve", "tropicalize", "load_fixture", "parse_input",
]
