"""Smooth radial cutoffs and the Littlewood-Paley family.

Everything here derives from one base bump built by the classical
exp(-1/t) gluing:

    H(t) = exp(-1/t) for t > 0, 0 otherwise
    bump(xi) = H(2 - |xi|) / (H(2 - |xi|) + H(|xi| - 1))

which equals 1 for |xi| <= 1, 0 for |xi| >= 2, is radial, radially
non-increasing and smooth.  The dyadic annulus pieces
theta_j(xi) = bump(2^-j xi) - bump(2^-(j-1) xi) sum to 1 pointwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _glue(t: np.ndarray) -> np.ndarray:
    # H(t) = exp(-1/t) extended by 0; exact zeros for t <= 0.
    t = np.asarray(t, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    return out


def smooth_down_step(t, lo: float, hi: float) -> np.ndarray:
    """Smooth monotone function equal to 1 for t <= lo and 0 for t >= hi.

    The argument is normalised to the unit transition window before the
    gluing so that narrow windows (hi - lo << 1) do not underflow both
    glue terms at once.
    """
    if not lo < hi:
        raise ValueError(f"need lo < hi, got ({lo}, {hi})")
    u = (np.asarray(t, dtype=float) - lo) / (hi - lo)
    a = _glue(1.0 - u)
    b = _glue(u)
    denom = a + b
    # deep in the underflow fringe of either end, assign the nearer plateau
    fallback = np.where(u < 0.5, 1.0, 0.0)
    with np.errstate(invalid="ignore"):
        out = np.where(denom > 0, a / np.where(denom > 0, denom, 1.0), fallback)
    return out


def smooth_up_step(t, lo: float, hi: float) -> np.ndarray:
    """Smooth monotone function equal to 0 for t <= lo and 1 for t >= hi."""
    return 1.0 - smooth_down_step(t, lo, hi)


@dataclass(frozen=True)
class BaseBump:
    """Radial profile of the mollifier bump; callable on vectors or radii."""

    inner: float = 1.0
    outer: float = 2.0

    def profile(self, r) -> np.ndarray:
        return smooth_down_step(r, self.inner, self.outer)

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return self.profile(np.sqrt(np.sum(xi**2, axis=-1)))


def base_bump() -> BaseBump:
    """The standard bump: 1 on {|xi| <= 1}, 0 outside {|xi| < 2}."""
    return BaseBump()


@dataclass(frozen=True)
class CutoffFamily:
    """Dyadically shifted cutoffs derived from one base bump.

    Members (all radial, evaluated on vectors of shape (..., n)):

    - ``lp(j, xi)``      annulus piece theta_j of the dyadic partition of unity
    - ``theta(k, xi)``   bump(2^(3-k) xi): 1 up to 2^(k-3), dead beyond 2^(k-2)
    - ``psi(k, xi)``     sqrt(bump(2^(-1-k) xi)^2 - bump(2^(2-k) xi)^2)
    - ``phi_band(k, xi)``sqrt(bump(2^(-3-k) xi)^2 - bump(2^(4-k) xi)^2)
    - ``omega(k, xi)``   theta_k(xi/2), equal to 1 on the support of theta_k
    - ``zeta(k, xi)``    widened annulus with half-width parameter k1
    - ``chi0(xi)``       high-pass: 1 for |xi| >= 2^(k0-4), 0 below 2^(k0-5)

    ``k0`` anchors the high-pass cutoff and ``k1`` the zeta width.
    """

    base: BaseBump = BaseBump()
    k0: int = 0
    k1: int = 2

    def lp(self, j: int, xi) -> np.ndarray:
        if j < 0:
            raise ValueError("Littlewood-Paley index must be >= 0")
        if j == 0:
            return self.base(xi)
        xi = np.asarray(xi, dtype=float)
        return self.base(2.0**-j * xi) - self.base(2.0 ** -(j - 1) * xi)

    def theta(self, k: int, xi) -> np.ndarray:
        return self.base(2.0 ** (3 - k) * np.asarray(xi, dtype=float))

    def _sq_diff(self, xi, a_exp: float, b_exp: float) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        d = self.base(2.0**a_exp * xi) ** 2 - self.base(2.0**b_exp * xi) ** 2
        if np.any(d < -1e-14):
            raise ValueError("squared cutoff difference fell below -1e-14")
        return np.sqrt(np.clip(d, 0.0, None))

    def psi(self, k: int, xi) -> np.ndarray:
        return self._sq_diff(xi, -1 - k, 2 - k)

    def phi_band(self, k: int, xi) -> np.ndarray:
        return self._sq_diff(xi, -3 - k, 4 - k)

    def omega(self, k: int, xi) -> np.ndarray:
        return self.theta(k, np.asarray(xi, dtype=float) / 2.0)

    def zeta(self, k: int, xi) -> np.ndarray:
        return self._sq_diff(xi, -k - self.k1 - 2, 3 + self.k1 - k)

    def chi0(self, xi) -> np.ndarray:
        return 1.0 - self.base(2.0 ** (5 - self.k0) * np.asarray(xi, dtype=float))


_DEFAULT_FAMILY = CutoffFamily()


def lp_component(j: int, xi) -> np.ndarray:
    """theta_j(xi) of the dyadic partition of unity (sums to 1 over j)."""
    return _DEFAULT_FAMILY.lp(j, xi)


def lp_partition_sum(xi, j_max: int | None = None) -> np.ndarray:
    """Partial sum of the partition of unity; equals 1 once j_max resolves |xi|."""
    xi = np.asarray(xi, dtype=float)
    if j_max is None:
        r = np.sqrt(np.sum(xi**2, axis=-1))
        j_max = int(np.ceil(np.log2(1.0 + np.max(r)))) + 1
    total = np.zeros(xi.shape[:-1])
    for j in range(j_max + 1):
        total = total + lp_component(j, xi)
    return total


def cutoff(kind: str, k: int, xi, k0: int = 0, k1: int = 2) -> np.ndarray:
    """Evaluate a named cutoff family member at xi.

    ``kind`` is one of theta, psi, phi_k, omega, zeta, chi0 (chi0 ignores k).
    """
    fam = CutoffFamily(k0=k0, k1=k1)
    if kind == "theta":
        return fam.theta(k, xi)
    if kind == "psi":
        return fam.psi(k, xi)
    if kind == "phi_k":
        return fam.phi_band(k, xi)
    if kind == "omega":
        return fam.omega(k, xi)
    if kind == "zeta":
        return fam.zeta(k, xi)
    if kind == "chi0":
        return fam.chi0(xi)
    raise ValueError(f"unknown cutoff kind {kind!r}")


def lp_multiplier(j: int):
    """theta_j as a frequency function usable with apply_multiplier."""
    return lambda xi: lp_component(j, xi)


def max_lp_index(radius: float) -> int:
    """Smallest J with theta_j identically 0 for j > J on {|xi| <= radius}."""
    if radius <= 0:
        return 0
    return max(0, int(np.ceil(np.log2(radius))) + 1)


def highpass_power(exponent: float, family: CutoffFamily | None = None):
    """(1 - bump(xi)) * |xi|^exponent as a frequency function, 0 near 0.

    The high-pass factor vanishes for |xi| <= 1, so negative exponents
    never see the origin.
    """
    fam = family or _DEFAULT_FAMILY

    def fn(xi):
        xi = np.asarray(xi, dtype=float)
        r = np.sqrt(np.sum(xi**2, axis=-1))
        cut = 1.0 - fam.base(xi)
        safe = np.where(r > 0, r, 1.0)
        return np.where(cut > 0, cut * safe**exponent, 0.0)

    return fn
