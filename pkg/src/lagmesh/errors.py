"""Exception hierarchy and warning categories used across the package."""


class LagmeshError(Exception):
    """Base class for all errors raised by lagmesh."""


class InvalidPrecision(LagmeshError):
    """Requested working precision is below the supported floor."""


class ParseError(LagmeshError):
    """Malformed scalar literal or potential expression.

    Carries the character offset of the first offending token in
    ``position`` (``None`` when the input is not positional).
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class UnknownFunction(ParseError):
    """Function name outside the audited whitelist."""


class MultipleVariables(ParseError):
    """Expression uses more than one distinct free variable."""


class TruncationError(LagmeshError):
    """More output digits requested than the value actually carries."""


class EvaluationError(LagmeshError):
    """Expression evaluation hit a pole, branch point, or overflow.

    ``node`` holds the offending AST node.
    """

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class RootRefinementFailure(LagmeshError):
    """Newton polishing of a polynomial zero did not converge."""


class WeightComputationFailure(LagmeshError):
    """A quadrature weight came out non-positive or non-finite."""


class CacheCorruption(LagmeshError):
    """A mesh cache file exists but cannot be parsed."""


class InvalidScaling(LagmeshError):
    """Scaling parameter h violates the mapping contract."""


class DegenerateMesh(LagmeshError):
    """Reference mesh contains duplicate points."""


class BadIndex(LagmeshError):
    """Basis-function index outside 0..N-1."""


class OutOfDomain(LagmeshError):
    """Physical coordinate lies outside the open solve domain."""


class ConvergenceFailure(LagmeshError):
    """An eigensolver exhausted its iteration budget."""


class ShiftSingular(LagmeshError):
    """Inverse iteration shift is exactly singular even after perturbation."""


class UnsupportedMethod(LagmeshError):
    """Requested solver path is not available for this matrix class."""


class AssemblyFailure(LagmeshError):
    """Potential evaluation failed at a mesh node during assembly.

    ``node_index`` is the 0-based index of the offending physical point.
    """

    def __init__(self, message, node_index=None):
        super().__init__(message)
        self.node_index = node_index


class InvalidOptions(LagmeshError):
    """Solve options violate their invariants (nlevels > N, h <= 0, ...)."""


class ShiftAdvisory(UserWarning):
    """Partial solves prefer a potential shift making the diagonal positive."""


class ClusterWarning(UserWarning):
    """Partial solver could not separate a near-degenerate cluster."""


class CacheWarning(UserWarning):
    """A corrupt cache file was found and is being recomputed."""
