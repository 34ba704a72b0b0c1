"""Global identifiability analysis for linear dynamic networks."""

__version__ = "0.1.0"

from .identifiability import IdentifiabilityReport, Verdict, analyze, check_theorem1, check_theorem2, precondition_route
from .model import ModelSetStructure, NetworkModel, ThetaAssignment, build_model, instantiate, network_transfer, validate_model
from .rational import Poly, Rat, RMat, normal_rank, rm_invert
from .specfile import SpecDocument, parse_spec, serialize_spec

__all__ = [
    "IdentifiabilityReport", "ModelSetStructure", "NetworkModel", "Poly", "RMat", "Rat", "SpecDocument",
    "ThetaAssignment", "Verdict", "analyze", "build_model", "check_theorem1", "check_theorem2", "instantiate",
    "network_transfer", "normal_rank", "parse_spec", "precondition_route", "rm_invert", "serialize_spec",
    "validate_model",
]
