"""Physical parameters and unit conventions shared by the whole pipeline.

All rates and frequencies are energies in ueV with hbar = 1, so times are
in hbar/ueV (about 0.658 ps).  A scenario is fixed by six real numbers:
the emitter and cavity frequencies omega_d and omega_c, their coupling g,
the cavity escape rate kappa, the emitter decay rate gamma into
non-cavity modes, and the pure dephasing rate gamma_p.

Internally all dynamics is evaluated in a frame where the cavity
frequency is zero; only the detuning omega_d - omega_c enters the
equations of motion.  The shift (= omega_c) is stored on the parameter
object and re-applied when reporting frequency-resolved quantities, so
reported frequencies round-trip exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass


class ParameterError(ValueError):
    """Invalid physical parameters.  `field` names the offending input."""

    def __init__(self, field: str, message: str):
        self.field = field
        self.message = message
        super().__init__(f"{field}: {message}")


class NegativeRate(ParameterError):
    pass


class NonFinite(ParameterError):
    pass


class RequiresGammaZero(ParameterError):
    """Raised by closed forms that are only derived for gamma = 0."""


class NoEscapeChannel(ParameterError):
    """Raised when an asymptotic observable needs kappa > 0 or gamma > 0."""


@dataclass(frozen=True)
class ComplexFrequencies:
    """Complex emitter/cavity frequencies; imaginary parts are half-widths."""

    omega_d_tilde: complex
    omega_c_tilde: complex


@dataclass(frozen=True)
class SystemParams:
    """Validated, immutable parameter set (ueV, hbar = 1)."""

    omega_d: float
    omega_c: float
    g: float
    kappa: float
    gamma: float
    gamma_p: float

    @property
    def detuning(self) -> float:
        return self.omega_d - self.omega_c

    @property
    def frame_shift(self) -> float:
        """Frequency subtracted internally so the cavity sits at zero."""
        return self.omega_c

    @property
    def complex_frequencies(self) -> ComplexFrequencies:
        """Reporting-frame complex frequencies."""
        return ComplexFrequencies(
            omega_d_tilde=self.omega_d - 0.5j * (self.gamma + 2.0 * self.gamma_p),
            omega_c_tilde=self.omega_c - 0.5j * self.kappa,
        )

    @property
    def internal(self) -> ComplexFrequencies:
        """Complex frequencies in the cavity frame (omega_c = 0)."""
        return ComplexFrequencies(
            omega_d_tilde=self.detuning - 0.5j * (self.gamma + 2.0 * self.gamma_p),
            omega_c_tilde=-0.5j * self.kappa,
        )

    @property
    def g_zero(self) -> bool:
        """Marks the decoupled trivial limit, handled by dedicated paths."""
        return self.g == 0.0

    def require_escape_channel(self) -> None:
        if self.kappa <= 0.0 and self.gamma <= 0.0:
            raise NoEscapeChannel(
                "kappa",
                "asymptotic observables need kappa > 0 or gamma > 0, "
                "otherwise the excitation never leaves the emitter-cavity pair",
            )

    def require_gamma_zero(self, context: str) -> None:
        if self.gamma != 0.0:
            raise RequiresGammaZero(
                "gamma", f"{context} is only available for gamma = 0"
            )


def make_params(
    omega_d: float,
    omega_c: float,
    g: float,
    kappa: float,
    gamma: float = 0.0,
    gamma_p: float = 0.0,
) -> SystemParams:
    """Validate inputs and build an immutable SystemParams.

    Raises NonFinite for NaN/inf inputs and NegativeRate for negative
    g, kappa, gamma or gamma_p.  g = 0 is accepted but flagged via
    SystemParams.g_zero; downstream code treats it as a trivial limit.
    """
    values = {
        "omega_d": omega_d,
        "omega_c": omega_c,
        "g": g,
        "kappa": kappa,
        "gamma": gamma,
        "gamma_p": gamma_p,
    }
    for name, value in values.items():
        if not math.isfinite(value):
            raise NonFinite(name, f"must be finite, got {value!r}")
    for name in ("g", "kappa", "gamma", "gamma_p"):
        if values[name] < 0.0:
            raise NegativeRate(name, f"must be >= 0, got {values[name]!r}")
    return SystemParams(
        omega_d=float(omega_d),
        omega_c=float(omega_c),
        g=float(g),
        kappa=float(kappa),
        gamma=float(gamma),
        gamma_p=float(gamma_p),
    )
