"""Dispersive phase functions of a given order, with gradients.

A phase of order s is a real function on frequency space, smooth away
from the origin, whose derivatives obey |d^a phi(xi)| <= c_a |xi|^(s-|a|).
The builtin catalogue covers the dispersive staples: water waves
(s = 1/2), waves (s = 1), capillary waves (s = 3/2), the Schroedinger
group (s = 2), Airy (s = 3) and the Klein-Gordon bracket <xi>.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

_BUILTIN_ORDERS = {
    "water_wave": 0.5,
    "wave": 1.0,
    "capillary": 1.5,
    "schrodinger": 2.0,
    "airy": 3.0,
}


@dataclass(frozen=True)
class Phase:
    """Real-valued frequency function with declared order and gradient.

    ``fn`` and ``grad_fn`` act on arrays of shape (..., n); ``fn`` returns
    shape (...) and ``grad_fn`` shape (..., n).  ``grad_fn`` may be None
    for custom phases, in which case gradients fall back to central
    differences with step 1e-5 * max(1, |xi|).
    """

    order: float
    kind: str  # homogeneous_power | klein_gordon | zero | custom
    fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Callable[[np.ndarray], np.ndarray] | None
    smooth_at_origin: bool
    label: str = ""


def _radius(xi: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1))


def homogeneous_power(s: float, label: str = "") -> Phase:
    """phi(xi) = |xi|^s, with phi(0) = 0 (the continuous extension)."""
    if s <= 0:
        raise ValueError(f"phase order must be positive, got {s}")
    # |xi|^s is a polynomial (hence smooth at 0) exactly for even integer s
    smooth = float(s).is_integer() and int(s) % 2 == 0

    def fn(xi):
        if s == 2.0:
            return np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1)
        r = _radius(xi)
        return np.where(r > 0, r, 1.0) ** s * (r > 0)

    def grad_fn(xi):
        xi = np.asarray(xi, dtype=float)
        if s == 2.0:
            return 2.0 * xi
        r = _radius(xi)
        safe = np.where(r > 0, r, 1.0)
        return s * safe[..., None] ** (s - 2.0) * xi

    return Phase(order=float(s), kind="homogeneous_power", fn=fn, grad_fn=grad_fn,
                 smooth_at_origin=smooth, label=label or f"|xi|^{s}")


def klein_gordon() -> Phase:
    """phi(xi) = <xi> = sqrt(1 + |xi|^2); smooth everywhere, phi(0) = 1."""

    def fn(xi):
        return np.sqrt(1.0 + np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1))

    def grad_fn(xi):
        xi = np.asarray(xi, dtype=float)
        return xi / fn(xi)[..., None]

    return Phase(order=1.0, kind="klein_gordon", fn=fn, grad_fn=grad_fn,
                 smooth_at_origin=True, label="<xi>")


def zero_phase() -> Phase:
    def fn(xi):
        return np.zeros(np.asarray(xi).shape[:-1])

    def grad_fn(xi):
        return np.zeros_like(np.asarray(xi, dtype=float))

    return Phase(order=1.0, kind="zero", fn=fn, grad_fn=grad_fn,
                 smooth_at_origin=True, label="0")


def custom_phase(fn, s: float, grad_fn=None, smooth_at_origin: bool = False,
                 label: str = "custom") -> Phase:
    return Phase(order=float(s), kind="custom", fn=fn, grad_fn=grad_fn,
                 smooth_at_origin=smooth_at_origin, label=label)


def scale_phase(phase: Phase, c: float) -> Phase:
    """c * phi; order is preserved (the derivative constants scale by |c|)."""

    def fn(xi):
        return c * phase.fn(xi)

    grad_fn = None
    if phase.grad_fn is not None:
        def grad_fn(xi):  # noqa: F811 - deliberate rebind
            return c * phase.grad_fn(xi)

    return Phase(order=phase.order, kind=phase.kind if phase.kind != "custom" else "custom",
                 fn=fn, grad_fn=grad_fn, smooth_at_origin=phase.smooth_at_origin,
                 label=f"{c}*({phase.label})")


def builtin_phase(name: str, s: float | None = None) -> Phase:
    """Look up a phase by config name.

    Accepted names: water_wave, wave, capillary, schrodinger, airy,
    klein_gordon, zero, homogeneous_power (requires s).
    """
    if name in _BUILTIN_ORDERS:
        return homogeneous_power(_BUILTIN_ORDERS[name], label=name)
    if name == "klein_gordon":
        return klein_gordon()
    if name == "zero":
        return zero_phase()
    if name == "homogeneous_power":
        if s is None:
            raise ValueError("homogeneous_power requires the order parameter s")
        return homogeneous_power(s)
    raise ValueError(f"unknown phase kind {name!r}")


def eval_phase(phase: Phase, xi) -> np.ndarray | float:
    """Evaluate the phase at arbitrary real frequency vectors."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    out = phase.fn(xi)
    if out.ndim == 0:
        return float(out)
    return out


def grad_phase(phase: Phase, xi) -> np.ndarray:
    """Gradient of the phase; central differences when no analytic form.

    Rejects xi = 0 for phases that are not smooth at the origin.
    """
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    r = _radius(xi)
    if not phase.smooth_at_origin and np.any(r == 0):
        raise ValueError("gradient requested at xi = 0 for a phase singular there")
    if phase.grad_fn is not None:
        return phase.grad_fn(xi)
    step = 1e-5 * np.maximum(1.0, r)[..., None]
    n = xi.shape[-1]
    out = np.empty_like(xi)
    for i in range(n):
        e = np.zeros(n)
        e[i] = 1.0
        out[..., i] = (phase.fn(xi + step * e) - phase.fn(xi - step * e)) / (2.0 * step[..., 0])
    return out


def _fd_derivative(fn, xi: np.ndarray, alpha: tuple[int, ...], scale: np.ndarray):
    """Nested central differences for the mixed partial d^alpha fn.

    The step grows with the differentiation level to keep round-off and
    truncation balanced (1e-5, ~3e-4, 1e-2 relative at levels 1..3).
    """
    order = int(sum(alpha))
    if order == 0:
        return fn(xi)
    steps = {1: 1e-5, 2: 3.2e-4, 3: 1e-2}
    h = steps.get(order, 1e-2) * scale
    i = next(k for k, a in enumerate(alpha) if a > 0)
    lower = list(alpha)
    lower[i] -= 1
    lower = tuple(lower)
    e = np.zeros(xi.shape[-1])
    e[i] = 1.0
    hi = _fd_derivative(fn, xi + h[..., None] * e, lower, scale)
    lo = _fd_derivative(fn, xi - h[..., None] * e, lower, scale)
    return (hi - lo) / (2.0 * h)


@dataclass(frozen=True)
class OrderBoundReport:
    """Empirical constants c_alpha = sup |d^alpha phi| * |xi|^(|alpha|-s)."""

    order: float
    max_derivative_order: int
    n_samples: int
    constants: dict[tuple[int, ...], float]

    def max_constant(self) -> float:
        return max(self.constants.values())


def verify_order_bounds(phase: Phase, s: float, max_order: int,
                        sample_set: np.ndarray) -> OrderBoundReport:
    """Certify the order-s derivative bounds on a sample set numerically.

    For every multi-index |alpha| <= max_order (<= 3), reports the sampled
    supremum of |d^alpha phi(xi)| * |xi|^(|alpha| - s).  The sample set has
    to stay away from the origin and carry at least 8 points.
    """
    xi = np.asarray(sample_set, dtype=float)
    if xi.ndim != 2:
        raise ValueError("sample_set must have shape (m, n)")
    if xi.shape[0] < 8:
        raise ValueError("degenerate sample set: need at least 8 points")
    r = _radius(xi)
    if np.any(r == 0):
        raise ValueError("sample_set must exclude the origin")
    if max_order > 3:
        raise ValueError("derivative bounds are certified only up to order 3")
    n = xi.shape[1]
    scale = np.maximum(1.0, r)
    constants: dict[tuple[int, ...], float] = {}
    for total in range(max_order + 1):
        for alpha in itertools.product(range(total + 1), repeat=n):
            if sum(alpha) != total:
                continue
            deriv = _fd_derivative(phase.fn, xi, alpha, scale)
            constants[alpha] = float(np.max(np.abs(deriv) * r ** (total - s)))
    return OrderBoundReport(order=float(s), max_derivative_order=max_order,
                            n_samples=xi.shape[0], constants=constants)
