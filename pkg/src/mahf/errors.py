"""Exception types shared across the package."""


class MahfError(Exception):
    """Base class for all library-specific errors."""


class MeshFormatError(MahfError):
    """A mesh file is malformed or uses an unsupported variant."""


class SignalFormatError(MahfError):
    """A per-vertex signal file is malformed or inconsistent with its mesh."""


class GeometryError(MahfError):
    """Degenerate geometry: zero-area umbrellas, non-unit normals, collapsed neighborhoods."""


class OperatorError(MahfError):
    """A discrete operator cannot be assembled or is used outside its domain."""


class NumericalError(MahfError):
    """A numerical routine produced non-finite intermediates or results."""
