"""Generalized CHSH operators, scores, and bounds.

The one-parameter family of tests is indexed by theta in [0, pi/2]:

    S_theta = sqrt(2) * (cos(theta) * <A0 (B0 + B1)> + sin(theta) * <A1 (B0 - B1)>)

with theta = pi/4 reducing to the usual CHSH expression. Measurement settings
live on the two-qubit Jordan reduction: Alice's observables sit on the h/m
diagonals, Bob's on the z/x axes, each pair parameterized by one angle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import SQRT2, Array, pauli, tensor

TSIRELSON_BOUND = 2.0 * SQRT2

_HALF_PI = 0.5 * math.pi


def validate_theta(theta: float) -> float:
    theta = float(theta)
    if not 0.0 <= theta <= _HALF_PI:
        raise ValueError(f"theta = {theta:.12g} outside [0, pi/2]")
    return theta


def validate_angle(angle: float, name: str = "angle") -> float:
    """Measurement angles are restricted to [0, pi/2]; out of range is an error, not wrapped."""
    angle = float(angle)
    if not 0.0 <= angle <= _HALF_PI:
        raise ValueError(f"{name} = {angle:.12g} outside [0, pi/2]")
    return angle


def observables(a: float, b: float) -> tuple[Array, Array, Array, Array]:
    """Measurement operators (A0, A1, B0, B1) at setting angles (a, b).

    A_x = cos(a) h + (-1)^x sin(a) m, B_y = cos(b) z + (-1)^y sin(b) x.
    At a = pi/4 Alice measures z and x exactly.
    """
    a = validate_angle(a, "a")
    b = validate_angle(b, "b")
    sigma_h, sigma_m = pauli("h"), pauli("m")
    sigma_z, sigma_x = pauli("z"), pauli("x")
    a0 = math.cos(a) * sigma_h + math.sin(a) * sigma_m
    a1 = math.cos(a) * sigma_h - math.sin(a) * sigma_m
    b0 = math.cos(b) * sigma_z + math.sin(b) * sigma_x
    b1 = math.cos(b) * sigma_z - math.sin(b) * sigma_x
    return a0, a1, b0, b1


def bell_operator(theta: float, a: float, b: float) -> Array:
    """The generalized CHSH operator at test angle theta and settings (a, b)."""
    theta = validate_theta(theta)
    a0, a1, b0, b1 = observables(a, b)
    return SQRT2 * (
        math.cos(theta) * tensor(a0, b0 + b1) + math.sin(theta) * tensor(a1, b0 - b1)
    )


def chsh_coefficient_matrix(a: float, b: float) -> Array:
    """Coefficients M of the CHSH operator in the product basis (h, m) x (z, x).

    Satisfies bell_operator(pi/4, a, b) = 2 * sum_kl M[k, l] * tensor(s_k, s_l)
    with s_0, s_1 = (h, m) on Alice and (z, x) on Bob.
    """
    a = validate_angle(a, "a")
    b = validate_angle(b, "b")
    ca, sa = math.cos(a), math.sin(a)
    cb, sb = math.cos(b), math.sin(b)
    return np.array([[ca * cb, ca * sb], [sa * cb, -sa * sb]])


def local_bound(theta: float) -> float:
    """Largest score reachable by local deterministic strategies."""
    theta = validate_theta(theta)
    return TSIRELSON_BOUND * max(math.cos(theta), math.sin(theta))


def score_from_correlators(theta: float, x: float, y: float) -> float:
    """Score sqrt(2) (cos(theta) X + sin(theta) Y) from the two observed correlators.

    X aggregates <A0 B0> + <A0 B1>, Y aggregates <A1 B0> - <A1 B1>; each is
    bounded by 2 in magnitude.
    """
    theta = validate_theta(theta)
    x, y = float(x), float(y)
    if abs(x) > 2.0 or abs(y) > 2.0:
        raise ValueError(f"correlators ({x:.12g}, {y:.12g}) outside [-2, 2]")
    return SQRT2 * (math.cos(theta) * x + math.sin(theta) * y)


@dataclass(frozen=True)
class FrameQuantities:
    """Geometry of the Bell operator along Bob's edge of the settings square."""

    f: float                # half the top eigenvalue of the a = 0 operator
    sigma_plus: Array       # Bob direction paired with the + eigenvalue
    sigma_minus: Array


def frame_quantities(theta: float, b: float) -> FrameQuantities:
    """f(b) and the split Bob directions sigma^(+/-)(b) for the a = 0 edge.

    f(b) = sqrt(1 + cos(2b) cos(2theta)); f(0) = sqrt(2) cos(theta) and
    f(pi/2) = sqrt(2) sin(theta) recover the two frame scores / (2 sqrt 2).
    """
    theta = validate_theta(theta)
    b = validate_angle(b, "b")
    f = math.sqrt(max(0.0, 1.0 + math.cos(2.0 * b) * math.cos(2.0 * theta)))
    cz = math.cos(b) * math.cos(theta)
    cx = math.sin(b) * math.sin(theta)
    norm = math.hypot(cz, cx)
    if norm == 0.0:
        raise ValueError("sigma^(+/-) undefined: both direction weights vanish")
    sigma_z, sigma_x = pauli("z"), pauli("x")
    plus = (cz * sigma_z + cx * sigma_x) / norm
    minus = (cz * sigma_z - cx * sigma_x) / norm
    return FrameQuantities(f=f, sigma_plus=plus, sigma_minus=minus)
