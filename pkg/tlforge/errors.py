from typing import Optional


class TLForgeError(Exception):
    """Base class for every error raised by tlforge."""


class DimensionError(TLForgeError, ValueError):
    pass


class ParameterError(TLForgeError, ValueError):
    pass


class CapExceededError(TLForgeError):
    def __init__(self, dim: int, cap: int):
        super().__init__(
            f"representation dimension {dim} exceeds the memory cap {cap} "
            f"(raise it with --cap or TLFORGE_CAP)"
        )
        self.dim = dim
        self.cap = cap


class NumericalError(TLForgeError):
    pass


class VerificationError(TLForgeError):
    def __init__(self, relation: str, residual: float, detail: Optional[str] = None):
        msg = f"relation {relation} failed with residual {residual:.3e}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)
        self.relation = relation
        self.residual = residual
