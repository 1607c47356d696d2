"""Exception types raised across the package."""


class NatProofError(Exception):
    """Base class for all package errors."""


class MarkupError(NatProofError, ValueError):
    pass


class GrammarError(MarkupError):
    """Delimiter structure does not match ``({ words } [ words ] OP)*``."""


class CoverageError(MarkupError):
    """Claim spans do not partition the claim in order."""


class SpanNotFound(MarkupError):
    """An evidence span is not a contiguous part of any evidence sentence."""


class UnknownOp(MarkupError):
    pass


class EmptyClaim(NatProofError, ValueError):
    pass


class IllegalToken(NatProofError, ValueError):
    def __init__(self, token, allowed):
        self.token = token
        self.allowed = frozenset(allowed)
        super().__init__(f"token {token!r} not allowed here; expected one of {sorted(self.allowed)}")


class SchemaError(NatProofError, ValueError):
    pass


class CycleError(NatProofError, ValueError):
    pass


class NoCandidates(NatProofError):
    pass


class RegionRequired(NatProofError, ValueError):
    pass


class Identical(NatProofError, ValueError):
    """Claim and factoid do not differ."""


class CoverUnrenderable(NatProofError, ValueError):
    pass


class EmptyInput(NatProofError, ValueError):
    pass


class NoEligible(NatProofError, ValueError):
    pass
