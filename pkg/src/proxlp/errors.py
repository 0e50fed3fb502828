"""Exception types shared across the package."""


class ProxLPError(Exception):
    pass


class RankDeficient(ProxLPError):
    pass


class InconsistentProjection(ProxLPError):
    """No extension of the given partial vector exists in the subspace."""


class NotInSubspace(ProxLPError):
    pass


class InfeasibleBounds(ProxLPError):
    pass


class ResidualTooLarge(ProxLPError):
    pass


class NotInterior(ProxLPError):
    pass


class IterationLimit(ProxLPError):
    def __init__(self, msg, best=None):
        super().__init__(msg)
        self.best = best


class NumericalBreakdown(ProxLPError):
    pass


class ContractViolation(ProxLPError):
    pass


class InternalInconsistency(ProxLPError):
    """A step that cannot fail in exact arithmetic did fail."""


class ParseError(ProxLPError):
    def __init__(self, msg, line=None, col=None):
        loc = f"line {line}" if line is not None else ""
        if col is not None:
            loc += f", col {col}"
        super().__init__(f"{loc}: {msg}" if loc else msg)
        self.line = line
        self.col = col


class RestartLimit(ProxLPError):
    pass


class TooLarge(ProxLPError):
    pass
