"""Exception hierarchy shared across the package."""


class RouteForgeError(Exception):
    """Base class for all package-specific errors."""


class SmilesSyntaxError(RouteForgeError):
    """Malformed SMILES text: unbalanced brackets/rings, unknown token."""


class ValenceError(RouteForgeError):
    """Chemically impossible atom environment (e.g. five-bonded carbon)."""


class SmartsSyntaxError(RouteForgeError):
    """Malformed SMARTS pattern text."""


class UnsupportedFeatureError(SmartsSyntaxError):
    """Recognized SMARTS/SMIRKS construct outside the supported subset.

    Carries the offending token so template authors can see exactly what
    was rejected.
    """

    def __init__(self, token: str, message: str = ""):
        self.token = token
        super().__init__(message or f"unsupported pattern feature: {token!r}")


class MapClosureError(RouteForgeError):
    """A product atom map has no unique source on the reactant side."""


class SlotCountError(RouteForgeError):
    """Reactant count does not match the template's slot count."""


class FingerprintWidthError(RouteForgeError):
    """Tanimoto over fingerprints of different bit widths."""


class EmptySlotError(RouteForgeError):
    """No library building block is compatible with a template slot."""


class IndexFormatError(RouteForgeError):
    """Index file is truncated or structurally corrupt."""


class IndexVersionError(IndexFormatError):
    """Index file was written by an incompatible format version."""


class NoViableStartError(RouteForgeError):
    """No template has a compatible building block for every slot."""


class NoBranchingFoundError(RouteForgeError):
    """Branching route sampling exhausted its attempt budget."""


class TargetParseError(RouteForgeError):
    """Reconstruction target SMILES does not parse."""


class UnknownPlanError(RouteForgeError):
    """Sampling plan name is not one of the published schedules."""


class TransportError(RouteForgeError):
    """Network-level failure talking to an inference backend."""


class BackendError(RouteForgeError):
    """Inference backend returned an error response."""

    def __init__(self, status: int, body: str):
        self.status = status
        self.body = body
        super().__init__(f"backend error {status}: {body[:200]}")
