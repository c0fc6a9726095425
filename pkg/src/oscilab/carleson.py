"""Dyadic band measures from oscillatory band outputs and their decay.

For a phase of order s and a linear symbol d of order -ns/2, the measure

    dmu_k(x, t) = sum_l |(Q^u_(k+l) T^phi_d f)(x)|^2 delta_(2^-l)(t) dx

(with Q^u_j the shifted annulus projection built from psi_j) is expected
to carry a Carleson norm decaying geometrically in the base level k.
``decay_experiment`` fits the observed decay slope; the theoretical
reference exponent is reported alongside, never asserted.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amplitudes import MultilinearAmplitude
from .cutoffs import CutoffFamily
from .grid import Field, apply_multiplier, philox_rng, random_field
from .operators import eval_linear_oio
from .phases import Phase
from .spaces import DyadicMeasure, bmo, carleson_norm, norm
from .reporting import RatioTable


@dataclass(frozen=True)
class BandMeasureSpec:
    """Inputs for one dyadic band measure.

    ``amplitude`` must be an arity-1 amplitude of order exactly -n*s/2
    (the decay that makes the band outputs square to a Carleson family).
    ``level_count`` may exceed what the lattice supports only up to the
    Nyquist cap; bands entirely beyond Nyquist raise.
    """

    phase: Phase
    amplitude: MultilinearAmplitude
    shift: np.ndarray
    base_level: int
    level_count: int
    test_field: Field

    def __post_init__(self):
        n = self.test_field.grid.dim
        expected = -n * self.phase.order / 2.0
        if abs(self.amplitude.order - expected) > 1e-12:
            raise ValueError(
                f"amplitude order {self.amplitude.order} must equal -n*s/2 = {expected}")
        if self.amplitude.arity != 1:
            raise ValueError("band measures use an arity-1 amplitude")


def _band_projection(j: int, shift: np.ndarray, family: CutoffFamily):
    u = np.asarray(shift, dtype=float)

    def m(xi):
        mod = np.exp(1j * 2.0**-j * np.tensordot(xi, u, axes=([-1], [0])))
        return family.psi(j, xi) * mod

    return m


def build_band_measure(spec: BandMeasureSpec,
                       family: CutoffFamily | None = None) -> DyadicMeasure:
    """Densities |Q^u_(k+l) T^phi_d f|^2 for l = 0 .. level_count-1."""
    fam = family or CutoffFamily()
    g = spec.test_field.grid
    max_r = np.sqrt(g.dim) * g.nyquist
    Tf = eval_linear_oio(spec.amplitude, spec.phase, spec.test_field)
    levels = {}
    for l in range(spec.level_count):
        j = spec.base_level + l
        # psi_j rises from 2^(j-2); at or beyond the lattice radius the band
        # is identically zero on the lattice
        if 2.0 ** (j - 2) >= max_r:
            raise ValueError(
                f"band level {j} lies beyond the lattice Nyquist radius {max_r:.3g}")
        piece = apply_multiplier(_band_projection(j, spec.shift, fam), Tf)
        dens = np.abs(piece.to("physical").samples) ** 2
        levels[l] = dens
    return DyadicMeasure(grid=g, levels=levels)


@dataclass(frozen=True)
class DecayReport:
    base_levels: tuple[int, ...]
    carleson_norms: tuple[float, ...]
    slope_log2: float | None
    reference_decay: float
    degenerate: bool

    def rows(self):
        return [(k, c) for k, c in zip(self.base_levels, self.carleson_norms)]


def decay_experiment(make_spec, base_levels, reference_order: float | None = None,
                     family: CutoffFamily | None = None) -> DecayReport:
    """Fit log2(Carleson norm) against the base level k.

    ``make_spec(k)`` builds the BandMeasureSpec for each base level; at
    least 4 levels are required.  The reference decay exponent
    min(n*s/2, n) (the upper end of the theoretical range) is recorded
    for comparison; an all-zero family is reported as degenerate.
    """
    base_levels = list(base_levels)
    if len(base_levels) < 4:
        raise ValueError("need at least 4 base levels to fit a slope")
    norms = []
    spec0 = make_spec(base_levels[0])
    n = spec0.test_field.grid.dim
    s = spec0.phase.order
    for k in base_levels:
        mu = build_band_measure(make_spec(k), family=family)
        norms.append(carleson_norm(mu))
    if all(c == 0 for c in norms):
        return DecayReport(tuple(base_levels), tuple(norms), None,
                           reference_decay=min(n * s / 2.0, float(n)), degenerate=True)
    if any(c == 0 for c in norms):
        raise ValueError(
            "Carleson norm vanished at some base levels only; the bands do "
            "not all meet the test field's spectrum")
    ks = np.asarray(base_levels, dtype=float)
    logs = np.log2(np.asarray(norms))
    slope = float(np.polyfit(ks, logs, 1)[0])
    return DecayReport(tuple(base_levels), tuple(norms), slope,
                       reference_decay=min(n * s / 2.0, float(n)), degenerate=False)


def builtin_band_family(grid, phase: Phase, seed: int, base_level: int,
                        level_count: int | None = None,
                        family: CutoffFamily | None = None) -> BandMeasureSpec:
    """The stock decay family: d = chi0(xi) <xi>^(-ns/2), f random bmo-normalised."""
    fam = family or CutoffFamily()
    n = grid.dim
    s = phase.order
    m = -n * s / 2.0

    def d_fn(x, Xi):
        xi = Xi[..., 0, :]
        return fam.chi0(xi) * (1.0 + np.sum(xi**2, axis=-1)) ** (m / 2.0)

    d = MultilinearAmplitude(arity=1, dim=n, order=m, fn=d_fn, label="chi0*<xi>^m")
    rng = philox_rng(seed)
    f = random_field(grid, rng)
    f_norm = norm(f, bmo())
    f = Field(grid=grid, representation="physical",
              samples=f.to("physical").samples / f_norm)
    if level_count is None:
        max_r = np.sqrt(n) * grid.nyquist
        level_count = max(1, int(np.floor(np.log2(max_r))) + 2 - base_level)
    return BandMeasureSpec(phase=phase, amplitude=d, shift=np.zeros(n),
                           base_level=base_level, level_count=level_count,
                           test_field=f)


def decay_table(report: DecayReport) -> RatioTable:
    rows = [(float(k), c, report.slope_log2 if report.slope_log2 is not None else np.nan)
            for k, c in report.rows()]
    return RatioTable(columns=("k", "carleson_norm", "fitted_slope"), rows=rows)
