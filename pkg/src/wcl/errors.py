"""Exception hierarchy shared by the wcl modules.

Checks that *decide* something (is this operator an isometry? is this map
proper?) return report objects. Exceptions are reserved for refusals: an
operation whose preconditions fail, or a builder that rejects its input.
Where a refusal has a witness, the exception carries it.
"""


class WclError(Exception):
    """Base class for all wcl errors."""

    #: short machine-readable reason, used by the CLI exit-code contract
    reason = "Error"

    def to_dict(self):
        out = {"reason": self.reason, "message": str(self)}
        detail = getattr(self, "detail", None)
        if detail is not None:
            out["detail"] = detail
        return out


class InvalidSpec(WclError, ValueError):
    reason = "InvalidSpec"


class TruncationTooSmall(WclError, ValueError):
    reason = "TruncationTooSmall"


class EmptyRegion(WclError, ValueError):
    reason = "EmptyRegion"


class SpaceMismatch(WclError, ValueError):
    reason = "SpaceMismatch"


class _Witnessed(WclError):
    def __init__(self, message, detail=None):
        super().__init__(message)
        self.detail = detail


class NotContinuous(_Witnessed):
    reason = "NotContinuous"


class NotProper(_Witnessed):
    reason = "NotProper"


class OutputNotC0(_Witnessed):
    reason = "OutputNotC0"


class UnboundedWeight(_Witnessed):
    reason = "UnboundedWeight"


class NotIsometry(_Witnessed):
    reason = "NotIsometry"


class NotDP(_Witnessed):
    reason = "NotDP"


class NotBijective(_Witnessed):
    reason = "NotBijective"


class EmptyPeakSet(_Witnessed):
    reason = "EmptyPeakSet"


class BlowupAmbiguous(_Witnessed):
    reason = "BlowupAmbiguous"


class ModeCheckFailed(_Witnessed):
    reason = "ModeCheckFailed"


class TooLargeForDefinitionalCheck(_Witnessed):
    reason = "TooLargeForDefinitionalCheck"


class GridTooCoarse(WclError, ValueError):
    reason = "GridTooCoarse"


class RecoveryError(_Witnessed):
    """Numerical inconsistency found while recovering a symbol."""

    reason = "RecoveryError"
