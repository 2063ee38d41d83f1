"""Exception hierarchy shared by every module."""


class QBohmError(Exception):
    """Base class for library errors."""


class DomainError(QBohmError, ValueError):
    """Argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """The deformation factor 1 + gamma*x vanishes or changes sign on the domain."""

    def __init__(self, gamma: float, where: str = ""):
        self.gamma = gamma
        self.pole = -1.0 / gamma if gamma != 0 else float("inf")
        msg = f"1 + gamma*x <= 0 inside the domain (gamma={gamma!r}, pole at x = -1/gamma = {self.pole!r})"
        if where:
            msg = f"{where}: {msg}"
        super().__init__(msg)


class GridSizeError(QBohmError, ValueError):
    """Grid has too few points for the requested stencil."""


class ResolutionError(QBohmError, ValueError):
    """Grid or time step too coarse for the requested quantity."""
