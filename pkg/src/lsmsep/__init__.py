"""Exact toolkit for nonnegative Boolean function tables: tensor/contraction
algebra, log-supermodularity, the obstruction functional B and the class C,
and pps-formula evaluation."""

from .functable import (
    EQ1,
    EQ2,
    EQ3,
    IMP,
    OR,
    S,
    FuncTable,
    PinningSpec,
    apply_pinning,
    contract,
    enumerate_pinnings,
    load_table,
    make_table,
    permute,
    pin,
    tensor,
)
from .lsm import LsmVerdict, is_lsm, is_lsm_pairwise
from .obstruction import (
    BSpectrum,
    Membership,
    ObstructionCertificate,
    b_naive,
    b_spectrum,
    in_class_c,
    separation_epsilon,
    verify_certificate,
)
from .ppsformula import (
    Formula,
    FunctionLibrary,
    build_ctform_pipeline,
    evaluate,
    evaluate_eliminate,
    parse,
    sample_clone_element,
)

__version__ = "0.1.0"

__all__ = [
    "EQ1", "EQ2", "EQ3", "IMP", "OR", "S",
    "FuncTable", "PinningSpec", "make_table", "load_table",
    "tensor", "contract", "permute", "pin", "apply_pinning", "enumerate_pinnings",
    "LsmVerdict", "is_lsm", "is_lsm_pairwise",
    "BSpectrum", "Membership", "ObstructionCertificate",
    "b_naive", "b_spectrum", "in_class_c", "separation_epsilon", "verify_certificate",
    "Formula", "FunctionLibrary", "parse", "evaluate", "evaluate_eliminate",
    "build_ctform_pipeline", "sample_clone_element",
]
