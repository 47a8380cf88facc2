"""Product line analysis: traceability semantics, canonization and QBF encodings."""

from .model import (BOTTOM, ModelError, NamedSet, ParseError, PropVector, SplModel, Traceability,
                    load_model, parse_model, serialize_model)
from .canonize import canonize, canonize_model, is_canonical
from .encoder import EncodingContext, Query, encode_property
from .solver import CapacityError, SolverConfig, solve, solve_formula

__version__ = "0.1.0"
