"""Exception types shared across the package."""


class HelinsError(Exception):
    """Base class for every error raised by helins."""


class FieldError(HelinsError, ValueError):
    """An operation was handed a field outside its domain (mean mode, divergence)."""


class EmptyShellError(HelinsError, ValueError):
    """A spectral shell contains no lattice wavevector of the grid."""


class CutoffWrapError(HelinsError, ValueError):
    """The cut-off support does not fit inside the periodic box."""


class NotBeltramiError(HelinsError, ValueError):
    """A field expected to be a curl eigenfunction fails the eigenrelation."""


class ConfigError(HelinsError):
    """A configuration document could not be parsed."""

    def __init__(self, message, line=None, field=None):
        self.line = line
        self.field = field
        where = []
        if line is not None:
            where.append(f"line {line}")
        if field is not None:
            where.append(f"field '{field}'")
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)


class ValidationError(HelinsError):
    """A parsed configuration violates a physical or numerical constraint."""


class BlowUpError(HelinsError, RuntimeError):
    """The solution norm exceeded the blow-up guard."""

    def __init__(self, t, h1, h1_initial, factor):
        self.t = t
        self.h1 = h1
        self.h1_initial = h1_initial
        super().__init__(
            f"blow-up guard at t={t:.6g}: H1 norm {h1:.6g} exceeds "
            f"{factor:g} x initial ({h1_initial:.6g}); refine the grid or time step"
        )


class SnapshotError(HelinsError, IOError):
    """A snapshot file is malformed, truncated or incompatible."""


class InsufficientSamplesError(HelinsError, ValueError):
    """A check needs more recorded samples than were supplied."""
