"""Polar shuffles, sessions and string diagrams for monoidal theories."""

from .errors import (CycleError, LinearityError, ParseError, PolarSessionError,
                     SizeGuardError, TypeMismatchError, ValidationError)
from .signature import Generator, Polygraph, parse_polygraph, runtime_extend, session_polygraph
from .diagram import Diagram, DiagramBuilder, canonical_form, canonical_hash, is_equal
from .polar import PolarItem, PolarShuffle, Polarity, plist
from .session import Session
from .stochastic import Channel, Interpretation, evaluate

__version__ = "0.1.0"

__all__ = [
    "CycleError", "LinearityError", "ParseError", "PolarSessionError", "SizeGuardError",
    "TypeMismatchError", "ValidationError", "Generator", "Polygraph", "parse_polygraph",
    "runtime_extend", "session_polygraph", "Diagram", "DiagramBuilder", "canonical_form",
    "canonical_hash", "is_equal", "PolarItem", "PolarShuffle", "Polarity", "plist",
    "Session", "Channel", "Interpretation", "evaluate",
]
