"""Common finite covers of graphs with fins."""
from .complex import CellMap, ComplexError, Dart, FinImage, GraphWithFins, subdivide, unsubdivide, validate
from .refine import CommonBase, MismatchCertificate, check_equivalence
from .glue import CoverComplex, n_fold_cover
from .verify import CoverCertificate, Violation, check_common, check_cover, isomorphic
from .generate import GenParams, VoltageAssignment, gen_instance, lift
from .pipeline import PipelineReport, run_cover

__version__ = "0.1.0"

__all__ = [
    "CellMap", "ComplexError", "Dart", "FinImage", "GraphWithFins", "subdivide", "unsubdivide", "validate",
    "CommonBase", "MismatchCertificate", "check_equivalence",
    "CoverComplex", "n_fold_cover",
    "CoverCertificate", "Violation", "check_common", "check_cover", "isomorphic",
    "GenParams", "VoltageAssignment", "gen_instance", "lift",
    "PipelineReport", "run_cover",
]
