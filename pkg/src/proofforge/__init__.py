"""Turing-machine tableau proofs, a Hilbert-style checker, and adjoint-checker verifiers."""

__version__ = "0.1.0"

from .encoding import TableauTheory, al_member, build_def_m, build_input, tableau
from .formula import Formula, FormulaSequence, parse_formula, serialize
from .kernel import AdjointChecker, ProofType, VerificationError, adjoint_check, check_lambda, check_zfc, verify
from .machine import TuringMachine, load_machine, parse_machine, run
from .synthesis import build_special_proof, fit_length_constants, fs_exact, fs_upper
from .verifier import GeneratedVerifier, discover, run_verifier

__all__ = [
    "AdjointChecker",
    "Formula",
    "FormulaSequence",
    "GeneratedVerifier",
    "ProofType",
    "TableauTheory",
    "TuringMachine",
    "VerificationError",
    "adjoint_check",
    "al_member",
    "build_def_m",
    "build_input",
    "build_special_proof",
    "check_lambda",
    "check_zfc",
    "discover",
    "fit_length_constants",
    "fs_exact",
    "fs_upper",
    "load_machine",
    "parse_formula",
    "parse_machine",
    "run",
    "run_verifier",
    "serialize",
    "tableau",
    "verify",
]
