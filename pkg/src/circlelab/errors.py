"""Exception types shared across the laboratory."""


class CircleLabError(Exception):
    """Base class for all laboratory errors."""


class Blowup(CircleLabError):
    """Solution sup-norm exceeded the configured ceiling at time t."""

    def __init__(self, t, sup):
        self.t = t
        self.sup = sup
        super().__init__(f"blow-up at t={t:.6g} (sup-norm {sup:.3e})")


class NonFinite(CircleLabError):
    """Overflow or NaN encountered at time t."""

    def __init__(self, t):
        self.t = t
        super().__init__(f"non-finite state at t={t:.6g}")


class DegenerateField(CircleLabError):
    """Field is below tolerance everywhere; its zero set is not finite."""


class MismatchedTrajectories(CircleLabError):
    """Trajectories disagree on grid, forcing, step size or sample times."""


class FlatField(CircleLabError):
    """Spatially homogeneous field: the argmax is undefined."""

    def __init__(self, t=None):
        self.t = t
        msg = "flat field" if t is None else f"flat field at t={t:.6g}"
        super().__init__(msg)


class UnwrapFailure(CircleLabError):
    """Raw phase jumped by a quarter period or more between samples."""

    def __init__(self, t, jump):
        self.t = t
        self.jump = jump
        super().__init__(f"phase jump {jump:.4g} at t={t:.6g} too large to unwrap")


class NearSingular(CircleLabError):
    """Second spatial derivative at the tracked maximum is numerically zero."""

    def __init__(self, t, value, threshold):
        self.t = t
        self.value = value
        self.threshold = threshold
        super().__init__(
            f"|u_xx|={abs(value):.3e} below threshold {threshold:.3e} at t={t:.6g}"
        )


class InsufficientData(CircleLabError):
    """Not enough samples for the requested diagnostic."""


class Degenerate(CircleLabError):
    """A tangent-frame vector collapsed between re-orthonormalizations."""


class ParseError(CircleLabError):
    """Scenario text could not be parsed."""

    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class ValidationError(CircleLabError):
    """Scenario value failed validation."""

    def __init__(self, key, reason):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")
