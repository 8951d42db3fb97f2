"""Exception types shared across the package."""


class RfocusError(Exception):
    """Base class for all package errors."""


class DimensionError(RfocusError):
    """A surface configuration does not match the environment's element count."""


class DegenerateBaselineError(RfocusError):
    """The all-off baseline channel has zero magnitude, so RSSI-ratios are undefined."""


class GeometryError(RfocusError):
    """A scene contains a degenerate geometric configuration (e.g. zero path length)."""


class SizeGuardError(RfocusError):
    """An exhaustive operation was requested on a problem too large to enumerate."""
