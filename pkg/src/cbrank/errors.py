"""Exception types shared across the package.

The CLI maps these onto process exit codes: input and validation problems
exit 2, a non-convergent base power flow exits 3, and numerical failures
inside a computation exit 4.
"""

from __future__ import annotations


class CdfParseError(ValueError):
    """A CDF file could not be parsed.

    Carries the 1-based line number of the offending record so the message
    points at the exact spot in the file.
    """

    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)
        self.line_no = line_no


class ValidationError(ValueError):
    """A parsed system or sidecar is structurally unusable."""


class PowerFlowError(RuntimeError):
    """Newton-Raphson failed to converge.

    ``mismatch_trace`` holds the largest absolute mismatch (pu) after each
    iteration, so the caller can see whether the solve diverged or stalled.
    """

    def __init__(self, message: str, mismatch_trace: tuple[float, ...] = ()):
        if mismatch_trace:
            message = (
                f"{message} (mismatch trace: "
                + ", ".join(f"{m:.3e}" for m in mismatch_trace)
                + ")"
            )
        super().__init__(message)
        self.mismatch_trace = mismatch_trace


class NumericalError(RuntimeError):
    """A matrix reduction or integration step failed numerically."""


class MachineIslandedError(RuntimeError):
    """A post-fault topology left a machine without a path to the rest
    of the network.  Scenarios hitting this are rejected and counted."""
