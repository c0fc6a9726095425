"""Counterexample constructions probing the critical operator order.

The bilinear operator under test is

    B(f, g)(x) = T(f, g) with amplitude a(xi, eta) =
        sum_k theta_k(xi) theta_k(-eta) b1(xi) b2(-eta),
    b_j = (1 - bump)|.|^(m_j),  phases (0, phi, -phi),  phi = |.|^s.

Fed with Miyachi-type inputs fhat = (1 - bump)|xi|^(-lambda) (optionally
chirped by exp(-i|xi|^s)), B(f, conj g) collapses to the square function
sum_k |theta_k(D) F|^2 of a single profile F.  The exponent tables below
choose (lambda_1, lambda_2, m_1, m_2) so that m_1 + m_2 sits exactly
epsilon above the critical total order; the norm ratio
||B||_r / (||f||_p ||g||_q) then grows with the input bandwidth for
epsilon > 0 and stays flat at epsilon = 0.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amplitudes import MultilinearAmplitude
from .cutoffs import CutoffFamily, highpass_power, max_lp_index
from .grid import (
    Field,
    Grid,
    apply_multiplier,
    conj_field,
    field_from_spectrum,
    make_grid,
    transform,
)
from .operators import OperatorSpec, eval_multilinear_oio
from .phases import homogeneous_power, scale_phase, zero_phase
from .reporting import RatioTable, fit_loglog_slope
from .spaces import lebesgue, norm

_FAMILY = CutoffFamily()


@dataclass(frozen=True)
class MiyachiProfile:
    """Spectral profile (1 - bump(xi)) |xi|^(-decay) [exp(-i tau |xi|^s)].

    ``chirp_scale`` (tau) dilates the chirp so that the profile's spatial
    spread (|x| up to tau * s * R^(s-1) for order s) stays inside the
    period cell; the whole-space norm asymptotics then survive the
    periodisation.
    """

    decay: float
    order: float
    chirp: bool
    grid: Grid
    chirp_scale: float = 1.0

    def spectrum(self, xi: np.ndarray) -> np.ndarray:
        vals = highpass_power(-self.decay)(xi).astype(np.complex128)
        if self.chirp:
            r = np.sqrt(np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1))
            vals = vals * np.exp(-1j * self.chirp_scale * r**self.order)
        return vals

    def build(self, bandwidth: float | None = None) -> Field:
        xi = self.grid.frequency_lattice()
        vals = self.spectrum(xi)
        if bandwidth is not None:
            r = np.sqrt(np.sum(xi**2, axis=-1))
            vals = np.where(r <= bandwidth + 1e-12, vals, 0.0)
        return field_from_spectrum(self.grid, vals)


def build_miyachi_function(lam: float, s: float, chirp: bool, grid: Grid,
                           bandwidth: float | None = None,
                           chirp_scale: float = 1.0) -> Field:
    """Field with fhat = (1-bump)|xi|^(-lam) exp(-i tau chirp |xi|^s)."""
    if grid.nyquist < 4:
        raise ValueError("grid bandwidth must reach at least 4")
    return MiyachiProfile(decay=lam, order=s, chirp=chirp, grid=grid,
                          chirp_scale=chirp_scale).build(bandwidth)


def build_sharpness_amplitude(m1: float, m2: float, n: int = 1) -> MultilinearAmplitude:
    """Diagonal-band bilinear amplitude of order m1 + m2 (see module doc)."""
    b1 = highpass_power(m1)
    b2 = highpass_power(m2)

    def fn(x, Xi):
        Xi = np.asarray(Xi, dtype=float)
        xi, eta = Xi[..., 0, :], Xi[..., 1, :]
        r = np.maximum(np.sqrt(np.sum(xi**2, axis=-1)),
                       np.sqrt(np.sum(eta**2, axis=-1)))
        kmax = max_lp_index(float(np.max(r)) if r.size else 1.0) + 1
        band = np.zeros(Xi.shape[:-2])
        for k in range(kmax + 1):
            band = band + _FAMILY.lp(k, xi) * _FAMILY.lp(k, -eta)
        return band * b1(xi) * b2(-eta)

    return MultilinearAmplitude(arity=2, dim=n, order=float(m1 + m2), fn=fn,
                                label=f"diagonal-band({m1},{m2})")


@dataclass(frozen=True)
class SharpnessCase:
    """One exponent configuration of the counterexample construction."""

    p: float
    q: float
    r: float
    eps: float
    s: float
    regime: str  # "high" (p,q >= 2) or "low" (p,q <= 2)
    lam1: float
    lam2: float
    m1: float
    m2: float
    chirp: bool

    @property
    def total_order(self) -> float:
        return self.m1 + self.m2

    def critical_order(self, n: int = 1) -> float:
        factor = (n - 1) if self.s == 1.0 else n * self.s
        return -factor * (abs(1.0 / self.p - 0.5) + abs(1.0 / self.q - 0.5))


def sharpness_case(p: float, q: float, r: float, eps: float, s: float,
                   n: int = 1) -> SharpnessCase:
    """Exponent tables for the four construction families.

    Families: degree-one phase vs general order s, crossed with
    p, q >= 2 ("high") or p, q <= 2 ("low").  Requires the scaling
    relation 1/p + 1/q = 1/r and eps >= 0; mixed p < 2 < q lies outside
    all four families and is refused.
    """
    if abs(1.0 / p + 1.0 / q - 1.0 / r) > 1e-12:
        raise ValueError(f"exponents must satisfy 1/p + 1/q = 1/r, got p={p} q={q} r={r}")
    if eps < 0:
        raise ValueError("eps must be >= 0")
    if p >= 2 and q >= 2:
        regime = "high"
    elif p <= 2 and q <= 2:
        regime = "low"
    else:
        raise ValueError(
            "mixed exponents (one of p, q below 2 and the other above) lie outside "
            "the constructed counterexample families")
    if s == 1.0:
        if regime == "high":
            lam1 = (n + 1) / 2.0 - 1.0 / p + eps / 4.0
            lam2 = (n + 1) / 2.0 - 1.0 / q + eps / 4.0
            m1 = -(n - 1) / 2.0 + n / (2.0 * r) - 1.0 / p + eps / 2.0
            m2 = -(n - 1) / 2.0 + n / (2.0 * r) - 1.0 / q + eps / 2.0
            chirp = True
        else:
            lam1 = n * (1.0 - 1.0 / p) + eps / 4.0
            lam2 = n * (1.0 - 1.0 / q) + eps / 4.0
            m1 = (n - 1) / 2.0 - n / p + 1.0 / (2.0 * r) + eps / 2.0
            m2 = (n - 1) / 2.0 - n / q + 1.0 / (2.0 * r) + eps / 2.0
            chirp = False
    else:
        if regime == "high":
            lam1 = n * (1.0 - s / 2.0) - n * (1.0 - s) / p + eps / 4.0
            lam2 = n * (1.0 - s / 2.0) - n * (1.0 - s) / q + eps / 4.0
            m1 = -s * n * (0.5 - 1.0 / p) - n * (1.0 / p - 1.0 / (2.0 * r)) + eps / 2.0
            m2 = -s * n * (0.5 - 1.0 / q) - n * (1.0 / q - 1.0 / (2.0 * r)) + eps / 2.0
            chirp = True
        else:
            lam1 = n * (1.0 - 1.0 / p) + eps / 4.0
            lam2 = n * (1.0 - 1.0 / q) + eps / 4.0
            m1 = -s * n * (1.0 / (2.0 * r) - 0.5) - n * (1.0 / p - 1.0 / (2.0 * r)) + eps / 2.0
            m2 = -s * n * (1.0 / (2.0 * r) - 0.5) - n * (1.0 / q - 1.0 / (2.0 * r)) + eps / 2.0
            chirp = False
    return SharpnessCase(p=p, q=q, r=r, eps=eps, s=s, regime=regime,
                         lam1=lam1, lam2=lam2, m1=m1, m2=m2, chirp=chirp)


def _profile_f_exponent(case: SharpnessCase) -> float:
    # F-hat carries |xi|^(m1 - lam1) times the squared high-pass cutoff
    return case.m1 - case.lam1


def shared_profile_field(case: SharpnessCase, grid: Grid,
                         bandwidth: float | None = None,
                         chirp_scale: float = 1.0) -> Field:
    """F with Fhat = b1 fhat e^(i phi) = (1-bump)^2 |xi|^(m1-lam1) [chirp]."""
    expnt = _profile_f_exponent(case)

    def spec(xi):
        base = highpass_power(0.0)(xi)  # (1 - bump)
        mag = highpass_power(expnt)(xi)
        vals = (base * mag).astype(np.complex128)
        if not case.chirp:
            # chirpless inputs meet exp(i phi) only once: F keeps the phase
            r = np.sqrt(np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1))
            vals = vals * np.exp(1j * chirp_scale * r**case.s)
        if bandwidth is not None:
            r = np.sqrt(np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1))
            vals = np.where(r <= bandwidth + 1e-12, vals, 0.0)
        return vals

    return field_from_spectrum(grid, spec)


def square_function_sum(F: Field) -> Field:
    """sum_k |theta_k(D) F|^2, the diagonal-band route for B(f, conj g)."""
    g = F.grid
    kmax = max_lp_index(np.sqrt(g.dim) * g.nyquist)
    total = np.zeros(g.shape)
    for k in range(kmax + 1):
        piece = apply_multiplier(lambda xi, kk=k: _FAMILY.lp(kk, xi), F)
        total = total + np.abs(transform(piece, "physical").samples) ** 2
    return Field(grid=g, representation="physical", samples=total)


def square_function_check(case: SharpnessCase, grid: Grid) -> float:
    """Relative L^1 discrepancy between the two routes to B(f, conj g).

    Route one evaluates the bilinear operator by direct quadrature on the
    product lattice; route two evaluates the square-function sum of the
    shared profile.  Profiles are truncated just below the Nyquist radius
    so that the frequency reflection eta -> -eta maps the support onto
    itself (the Nyquist row has no mirror on an even lattice).
    """
    bw = grid.nyquist - 0.5 * grid.freq_step
    f = build_miyachi_function(case.lam1, case.s, case.chirp, grid, bandwidth=bw)
    gg = build_miyachi_function(case.lam2, case.s, case.chirp, grid, bandwidth=bw)
    amp = build_sharpness_amplitude(case.m1, case.m2, n=grid.dim)
    phi = homogeneous_power(case.s)
    spec = OperatorSpec(amplitude=amp, phases=(zero_phase(), phi, scale_phase(phi, -1.0)))
    direct = eval_multilinear_oio(spec, f, conj_field(gg), method="direct")
    square = square_function_sum(shared_profile_field(case, grid, bandwidth=bw))
    cell = grid.spacing**grid.dim
    diff = np.sum(np.abs(direct.samples - square.samples)) * cell
    ref = np.sum(np.abs(square.samples)) * cell
    if ref == 0:
        return 0.0 if diff == 0 else np.inf
    return float(diff / ref)


BLOWUP_SLOPE_THRESHOLD = 0.1  # artifact convention for "blow-up detected"


def blowup_experiment(p: float, q: float, r: float, eps: float, s: float,
                      bandwidths, grid: Grid | None = None,
                      grid_factor: int = 8) -> RatioTable:
    """Norm-ratio growth scan over input bandwidths.

    For each bandwidth R the inputs are truncated at |xi| <= R and the
    ratio ||B(f, conj g)||_r / (||f||_p ||g||_q) recorded; all rows share
    one grid (sized grid_factor * max R when not supplied) so that the
    Riemann resolution is common across R and resolves the finest 1/R
    concentration scale.  The chirp is dilated so the profile's spatial
    spread at the largest bandwidth fits the period cell.  B is evaluated
    through the square-function route; the identity behind it is
    certified separately by ``square_function_check``.
    """
    case = sharpness_case(p, q, r, eps, s)
    bandwidths = sorted(float(R) for R in bandwidths)
    if grid is None:
        G = int(grid_factor * 2 ** np.ceil(np.log2(max(bandwidths))))
        grid = make_grid(1, max(G, 64), np.pi)
    # chirp scale: for s = 1 the front sits at radius tau (antipodal at L/2);
    # otherwise the stationary spread tau*s*R^(s-1) is held to a quarter cell
    if s == 1.0:
        tau = grid.half_width / 2.0
    else:
        tau = grid.half_width / (4.0 * s * max(bandwidths) ** (s - 1.0))
    rows = []
    for R in bandwidths:
        f = build_miyachi_function(case.lam1, case.s, case.chirp, grid,
                                   bandwidth=R, chirp_scale=tau)
        gg = build_miyachi_function(case.lam2, case.s, case.chirp, grid,
                                    bandwidth=R, chirp_scale=tau)
        B = square_function_sum(shared_profile_field(case, grid, bandwidth=R,
                                                     chirp_scale=tau))
        ratio = norm(B, lebesgue(r)) / (norm(f, lebesgue(p)) * norm(gg, lebesgue(q)))
        rows.append((R, float(ratio), case.lam1, case.lam2, case.m1, case.m2))
    table = RatioTable(columns=("R", "ratio", "lambda1", "lambda2", "m1", "m2"),
                       rows=rows)
    slope = fit_loglog_slope([row[0] for row in rows], [row[1] for row in rows])
    table.meta.update({
        "slope": slope,
        "case": case,
        "blowup_detected": slope > BLOWUP_SLOPE_THRESHOLD,
        "monotone": all(rows[i + 1][1] >= rows[i][1] for i in range(len(rows) - 1)),
    })
    return table
