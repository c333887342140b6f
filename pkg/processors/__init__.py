# Processors module for stabilizer construction and verification
from .stabilizer_builder import CertifiedStabilizer, StabilizerBuilder
from .sharpbound_verifier import SharpBoundVerifier
from .excluded_case import ExcludedCase, ExcludedCaseVerifier
from .report_formatter import ReportFormatter
