"""Nonclassicality witnesses computed from moment tables."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DimensionError, UndefinedForVacuumError
from .moments import MomentTable


def _require_single_mode(table: MomentTable, order: int) -> None:
    if table.modes != 1:
        raise DimensionError("witnesses are defined per mode; pass a "
                             "single-mode table")
    if table.cutoff[0] < order:
        raise DimensionError(
            f"table cutoff {table.cutoff[0]} too small; need moments "
            f"up to order {order}")


def mandel_q(table: MomentTable) -> float:
    """Photon-number statistics witness: negative means sub-Poissonian.

    Q = (<a+2 a2> - <a+ a>^2) / <a+ a>; undefined on vacuum.
    """
    _require_single_mode(table, 2)
    n_mean = table.value(1, 1).real
    if n_mean <= 0:
        raise UndefinedForVacuumError(
            "mandel q undefined: mean photon number is zero")
    n2 = table.value(2, 2).real
    return (n2 - n_mean * n_mean) / n_mean


def q_after_nla(gain: float, success_probability: float,
                table: MomentTable) -> float:
    """Mandel Q of the heralded output of a noiseless amplifier.

    Heralding renormalizes by the success probability, which rescales the
    squared first moment inside the numerator:

        Q' = gain^2 (<a+2 a2> - p <a+ a>^2) / <a+ a>

    evaluated on the input table.
    """
    _require_single_mode(table, 2)
    n_mean = table.value(1, 1).real
    if n_mean <= 0:
        raise UndefinedForVacuumError(
            "mandel q undefined: mean photon number is zero")
    n2 = table.value(2, 2).real
    return gain * gain * (n2 - success_probability * n_mean * n_mean) / n_mean


def quadrature_variance_x(table: MomentTable) -> float:
    """Variance of x = (a + a+)/2; below 1/4 means squeezed.

    Var x = (1 + 2<a+ a> + 2 Re <a^2>)/4 - (Re <a>)^2.
    """
    _require_single_mode(table, 2)
    m11 = table.value(1, 1).real
    m20 = table.value(2, 0)
    m10 = table.value(1, 0)
    return 0.25 * (1.0 + 2.0 * m11 + 2.0 * m20.real) - m10.real ** 2


def decoherence_variance(n_bath: float, gamma: float, tau: float) -> float:
    """Steady x-variance growth of vacuum under thermal contact.

    Starting from vacuum, Var x(tau) = 1/4 + (n_bath/2)(1 - exp(-2 gamma tau)).
    """
    if n_bath < 0 or gamma < 0 or tau < 0:
        raise ValueError("n_bath, gamma, tau must be nonnegative")
    nu2 = math.exp(-2.0 * gamma * tau)
    return 0.25 + 0.5 * n_bath * (1.0 - nu2)


@dataclass
class DiagnosticReport:
    """Witness values with threshold flags."""

    mandel_q: float
    quadrature_variance_x: float
    flags: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "mandel_q": self.mandel_q,
            "quadrature_variance_x": self.quadrature_variance_x,
            "flags": dict(self.flags),
        }


def diagnose(table: MomentTable) -> DiagnosticReport:
    """Evaluate all witnesses on one single-mode table."""
    q = mandel_q(table)
    var_x = quadrature_variance_x(table)
    return DiagnosticReport(
        mandel_q=q,
        quadrature_variance_x=var_x,
        flags={
            "sub_poissonian": bool(q < 0),
            "squeezed_x": bool(var_x < 0.25),
        },
    )
