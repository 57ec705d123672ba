"""Shared exception types."""


class AcdkitError(Exception):
    """Base class for all toolkit errors."""


class RankDeficient(AcdkitError):
    """Input generators are linearly dependent."""


class DimensionCapExceeded(AcdkitError):
    """A lattice build would exceed the configured dimension cap."""

    def __init__(self, dim: int, cap: int, detail: str = ""):
        self.dim = dim
        self.cap = cap
        msg = f"lattice dimension {dim} exceeds cap {cap}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class BarrierError(AcdkitError):
    """The reduction-quality barrier rules out the rigorous analysis."""

    def __init__(self, beta2_log2n: float, floor: float):
        self.beta2_log2n = beta2_log2n
        self.floor = floor
        super().__init__(
            f"beta^2*log2(N) = {beta2_log2n:.4f} is not above the barrier "
            f"floor {floor:.4f}"
        )


class Infeasible(AcdkitError):
    """No parameter choice satisfies the feasibility inequality."""

    def __init__(self, msg: str, gap: float | None = None):
        self.gap = gap
        super().__init__(msg)


class NoShortVectors(AcdkitError):
    """Reduction produced no vector below the qualifying norm bound."""


class NoCandidates(AcdkitError):
    """Equation solving yielded no root candidates."""


class DependentRelations(AcdkitError):
    """The extracted relations are algebraically dependent."""

    def __init__(self, msg: str = "relations are algebraically dependent",
                 relations_used: int = 0):
        self.relations_used = relations_used
        super().__init__(msg)


class NoSolution(AcdkitError):
    """No verified solution exists for the instance."""
