"""Exception types raised by rnet.

Every error carries a short machine-readable ``code`` so the CLI and JSON
reports can name the failure without parsing messages.
"""


class RNetError(Exception):
    code = "ERROR"


class InvalidNetwork(RNetError):
    code = "INVALID_NETWORK"


class NetworkParseError(InvalidNetwork):
    code = "PARSE_ERROR"

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class UnknownVertex(RNetError):
    code = "UNKNOWN_VERTEX"


class WindowTooSmall(RNetError):
    code = "WINDOW_TOO_SMALL"


class WindowMismatch(RNetError):
    code = "WINDOW_MISMATCH"


class BadParam(RNetError):
    code = "BAD_PARAM"


class EmptyBall(RNetError):
    code = "EMPTY_BALL"


class NotBoundaryVertex(RNetError):
    code = "NOT_BOUNDARY_VERTEX"


class Singular(RNetError):
    code = "SINGULAR"


class ChargeImbalance(RNetError):
    code = "CHARGE_IMBALANCE"


class SameVertex(RNetError):
    code = "SAME_VERTEX"


class NotHarmonic(RNetError):
    code = "NOT_HARMONIC"


class MissingSamples(RNetError):
    code = "MISSING_SAMPLES"


class GramNotPSD(RNetError):
    code = "GRAM_NOT_PSD"


class NotAPath(RNetError):
    code = "NOT_A_PATH"

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class _WithResult(RNetError):
    """Base for outcomes that still carry a partial result."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class NotConverged(_WithResult):
    code = "NOT_CONVERGED"


class Inconclusive(_WithResult):
    code = "INCONCLUSIVE"


class DepthExhausted(_WithResult):
    code = "DEPTH_EXHAUSTED"
