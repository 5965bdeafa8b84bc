"""Exception types shared across the package."""


class PoseSynthError(Exception):
    """Base class for all errors raised by this package."""


class LayoutError(PoseSynthError):
    """A joint layout failed validation."""


class DegenerateFrame(PoseSynthError):
    """A local coordinate frame could not be built (zero bone or parallel up)."""

    def __init__(self, msg, joint=None):
        super().__init__(msg)
        self.joint = joint


class RangeViolation(PoseSynthError):
    """A spherical value fell outside the layout's limit interval."""

    def __init__(self, msg, joint=None, component=None):
        super().__init__(msg)
        self.joint = joint
        self.component = component


class UnstableCoefficient(PoseSynthError):
    """Diffusion coefficient at or above the explicit-scheme stability bound."""


class EmptyRow(PoseSynthError):
    """A histogram row has no positive bin to sample from."""

    def __init__(self, msg, joint=None, component=None):
        super().__init__(msg)
        self.joint = joint
        self.component = component


class EmptyInput(PoseSynthError):
    """An operation received an empty collection where data is required."""


class NoRealSolution(PoseSynthError):
    """Head-triangle measurements admit no consistent scale."""

    def __init__(self, msg, residuals=None):
        super().__init__(msg)
        self.residuals = residuals


class MissingSign(PoseSynthError):
    """A non-root joint lacks its front/behind annotation."""

    def __init__(self, msg, joint=None):
        super().__init__(msg)
        self.joint = joint


class DatasetTooSmall(PoseSynthError):
    """Not enough poses to build a candidate seed set."""


class SetTooSmall(PoseSynthError):
    """Sample set smaller than the neighborhood size k requires."""


class ShapeMismatch(PoseSynthError):
    """Array shape inconsistent with the layout or network dimensions."""


class DegeneratePose(PoseSynthError):
    """A pose with (near-)zero norm where a normalization is required."""


class NonFiniteGradient(PoseSynthError):
    """Backpropagation produced a NaN or infinite gradient."""
