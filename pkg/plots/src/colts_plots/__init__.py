"""Figure rendering for the safe-linear-bandit experiment CSV outputs."""

from .figspec import FigureSpec, SpecError, parse_spec
from .render import aggregate_traces, render
from .schemas import SchemaError

__version__ = "0.1.0"
