class LoopStabError(Exception):
    """Base class for all toolkit errors"""


class PreconditionError(LoopStabError, ValueError):
    """A hypothesis of a construction or theorem does not hold"""


class ParityError(PreconditionError):
    """An odd permutation was given where an even one is required"""


class NotUnimodularError(LoopStabError, ValueError):
    """Integer matrix with determinant outside {-1, +1}"""


class SingularMatrixError(LoopStabError, ValueError):
    """Matrix is not invertible over Z/lZ"""


class CertificateError(LoopStabError):
    """A constructed automorphism failed one of its own certificate checks"""


class ClosureCapExceeded(LoopStabError, RuntimeError):
    """Subgroup enumeration grew past the configured cap"""
