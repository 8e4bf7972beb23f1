"""Finite workbench for retracts of Fraisse limits."""
from .core import CategoryPair, CommutingSquare, Morphism, Span, Structure, compose, \
    mixed_pushout, verify_pushout_universal
from .fraisse import FraisseBuilder, build_fraisse_sequence
from .injectivity import bounded_injective, is_algebraically_closed, is_finitely_hyperconvex, \
    is_hom_homogeneous
from .retraction import build_retraction, left_invertible_shortcut
from .sequences import SeqMorphism, SequenceK
from .structures import Graph, GraphPair, LinOrder, LinOrderPair, MetricPair, RadiusDomain, \
    RationalMetricSpace, UnaryModel, UnaryPair

__version__ = "0.1.0"
