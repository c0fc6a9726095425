"""Oscillatory integral operators: quadrature oracle and FFT fast paths.

The multilinear operator acts on fields f_1, ..., f_N through

    T(x) = sum_Xi sigma(x, Xi) prod_j fhat_j(xi_j)
           * exp(i Phi(x, Xi)) * (freq_step / 2pi)^(nN)

with total phase Phi(x, Xi) = phi_0(xi_1 + ... + xi_N)
+ sum_j (x.xi_j + phi_j(xi_j)).  Three evaluation routes:

- ``direct``: the literal sum over the product lattice, promoted as the
  test oracle.  The only route for x-dependent amplitudes.
- ``fast``: for separable x-independent amplitudes, exp(i phi_0(D))
  applied to the pointwise product of the per-slot multiplier outputs.
  Exact (it is the same finite sum regrouped) whenever the frequency
  sumset of the inputs stays inside the lattice.
- ``grouped``: for any x-independent amplitude, the direct sum binned by
  total output frequency, evaluated with one inverse transform.  This is
  an exact regrouping of the direct sum, including lattice aliasing of
  the output exponentials, at O(G^(nN)) instead of O(G^(n(N+1))) cost.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .amplitudes import MultilinearAmplitude
from .grid import Field, Grid, apply_multiplier, multiply_fields, transform
from .phases import Phase

DIRECT_BUDGET = 1.3e9  # max product-lattice terms for the literal quadrature


class BudgetExceededError(ValueError):
    """Raised when the direct quadrature would exceed the desk-scale budget."""


@dataclass(frozen=True)
class OperatorSpec:
    """Amplitude, the N+1 phases, and optional per-slot modulation vectors.

    ``shift_vectors`` (one vector u_j per slot, or None) multiply the slot
    spectra by exp(i xi_j . u_j); band-localised projections pass their
    2^-k-scaled shifts through this hook.
    """

    amplitude: MultilinearAmplitude
    phases: tuple[Phase, ...]
    shift_vectors: tuple | None = None

    def __post_init__(self):
        if len(self.phases) != self.amplitude.arity + 1:
            raise ValueError(
                f"need {self.amplitude.arity + 1} phases (outer + one per slot), "
                f"got {len(self.phases)}")
        if self.shift_vectors is not None and len(self.shift_vectors) != self.amplitude.arity:
            raise ValueError("shift_vectors must have one entry per slot")


def free_propagator(t: float, phase: Phase, f: Field) -> Field:
    """exp(i t phi(D)) f: the exact free evolution on the lattice."""
    return apply_multiplier(lambda xi: np.exp(1j * t * phase.fn(xi)), f)


def eval_linear_oio(a, phase: Phase, f: Field) -> Field:
    """Linear operator with amplitude a(x, xi) (or a(xi)) and one phase.

    x-independent amplitudes reduce to the multiplier a * exp(i phi);
    otherwise the double sum over (x, xi) is evaluated literally.
    """
    if isinstance(a, MultilinearAmplitude):
        if a.arity != 1:
            raise ValueError("linear operator needs an arity-1 amplitude")
        if a.x_independent:
            amp_fn = lambda xi: a(None, xi[..., None, :])
            return apply_multiplier(lambda xi: amp_fn(xi) * np.exp(1j * phase.fn(xi)), f)
        return _linear_direct(a, phase, f)
    return apply_multiplier(lambda xi: np.asarray(a(xi)) * np.exp(1j * phase.fn(xi)), f)


def _linear_direct(a: MultilinearAmplitude, phase: Phase, f: Field) -> Field:
    g = f.grid
    xi = g.frequency_lattice().reshape(-1, g.dim)
    fhat = transform(f, "spectral").samples.reshape(-1)
    weight = (g.freq_step / (2.0 * np.pi)) ** g.dim
    base = fhat * np.exp(1j * phase.fn(xi)) * weight
    xs = g.physical_lattice().reshape(-1, g.dim)
    out = np.empty(xs.shape[0], dtype=np.complex128)
    for i, x in enumerate(xs):
        amp = a(x, xi[:, None, :])
        out[i] = np.sum(amp * base * np.exp(1j * (xi @ x)))
    return Field(grid=g, representation="physical", samples=out.reshape(g.shape))


def _check_common_grid(fields) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise ValueError("all input fields must share one grid")
    return g


def _slot_data(spec: OperatorSpec, fields):
    """Per-slot spectra multiplied by exp(i phi_j) and the shift modulation."""
    g = fields[0].grid
    xi = g.frequency_lattice()
    data = []
    for j, f in enumerate(fields):
        fac = transform(f, "spectral").samples * np.exp(1j * spec.phases[j + 1].fn(xi))
        if spec.shift_vectors is not None and spec.shift_vectors[j] is not None:
            u = np.asarray(spec.shift_vectors[j], dtype=float)
            fac = fac * np.exp(1j * np.tensordot(xi, u, axes=([-1], [0])))
        data.append(fac)
    return data


def _amplitude_on_lattice(sigma: MultilinearAmplitude, x, Xi_flat: np.ndarray,
                          chunk: int = 1 << 18) -> np.ndarray:
    out = np.empty(Xi_flat.shape[0], dtype=np.complex128)
    for start in range(0, Xi_flat.shape[0], chunk):
        out[start:start + chunk] = sigma(x, Xi_flat[start:start + chunk])
    return out


def _product_lattice(g: Grid, N: int):
    """Stacked slot frequencies (M, N, n) and integer indices (M, N, n)."""
    G = g.points_per_dim
    axis = g.frequency_axis()
    idx_axes = [np.arange(G)] * (g.dim * N)
    mesh = np.meshgrid(*idx_axes, indexing="ij")
    idx = np.stack([m.reshape(-1) for m in mesh], axis=-1)  # (M, N*n)
    Xi = axis[idx].reshape(-1, N, g.dim)
    return Xi, idx.reshape(-1, N, g.dim)


def eval_multilinear_oio(spec: OperatorSpec, *fields: Field,
                         method: str = "auto") -> Field:
    """Apply the multilinear oscillatory operator to N fields.

    ``method`` is one of auto, direct, fast, grouped (see module docstring).
    ``auto`` picks fast for separable amplitudes, grouped for other
    x-independent amplitudes, and direct otherwise.
    """
    sigma = spec.amplitude
    if len(fields) != sigma.arity:
        raise ValueError(f"expected {sigma.arity} fields, got {len(fields)}")
    g = _check_common_grid(fields)
    if sigma.dim != g.dim:
        raise ValueError(f"amplitude dimension {sigma.dim} does not match grid dim {g.dim}")

    if method == "auto":
        if sigma.x_independent and sigma.separable_factors is not None:
            method = "fast"
        elif sigma.x_independent:
            method = "grouped"
        else:
            method = "direct"

    if method == "fast":
        return _fast_path(spec, fields)
    if method == "grouped":
        return _grouped_path(spec, fields)
    if method == "direct":
        return _direct_path(spec, fields)
    raise ValueError(f"unknown evaluation method {method!r}")


def _fast_path(spec: OperatorSpec, fields) -> Field:
    sigma = spec.amplitude
    if not (sigma.x_independent and sigma.separable_factors is not None):
        raise ValueError(
            "fast path requires an x-independent amplitude with separable factors")
    g = fields[0].grid
    xi = g.frequency_lattice()
    slots = _slot_data(spec, fields)
    prod = None
    for a, fac in zip(sigma.separable_factors, slots):
        spectral = Field(grid=g, representation="spectral",
                         samples=np.asarray(a(xi)) * fac)
        phys = transform(spectral, "physical")
        prod = phys if prod is None else multiply_fields(prod, phys)
    out = apply_multiplier(lambda z: np.exp(1j * spec.phases[0].fn(z)), prod)
    return transform(out, "physical")


def _grouped_path(spec: OperatorSpec, fields) -> Field:
    sigma = spec.amplitude
    if not sigma.x_independent:
        raise ValueError("grouped path requires an x-independent amplitude")
    g = fields[0].grid
    N = sigma.arity
    G = g.points_per_dim
    Xi, idx = _product_lattice(g, N)
    amp = _amplitude_on_lattice(sigma, None, Xi)
    slots = _slot_data(spec, fields)
    total = amp * np.exp(1j * spec.phases[0].fn(np.sum(Xi, axis=1)))
    for j, fac in enumerate(slots):
        flat = fac.reshape(-1)
        lin = np.zeros(Xi.shape[0], dtype=np.int64)
        for d in range(g.dim):
            lin = lin * G + idx[:, j, d]
        total = total * flat[lin]
    # bin by total output frequency, folded onto the lattice
    out_idx = np.zeros(Xi.shape[0], dtype=np.int64)
    for d in range(g.dim):
        k = np.zeros(Xi.shape[0], dtype=np.int64)
        for j in range(N):
            raw = idx[:, j, d]
            k = k + np.where(raw >= G // 2, raw - G, raw)
        out_idx = out_idx * G + (k % G)
    weight = (g.freq_step / (2.0 * np.pi)) ** (g.dim * N)
    binned = np.zeros(G**g.dim, dtype=np.complex128)
    np.add.at(binned, out_idx, total * weight)
    # inverse transform supplies one (freq_step/2pi)^n factor; remove it
    coeffs = binned.reshape(g.shape) * (2.0 * np.pi / g.freq_step) ** g.dim
    return transform(Field(grid=g, representation="spectral", samples=coeffs), "physical")


def _direct_path(spec: OperatorSpec, fields) -> Field:
    sigma = spec.amplitude
    g = fields[0].grid
    N = sigma.arity
    cost = float(g.size) * float(g.size) ** N
    if cost > DIRECT_BUDGET:
        raise BudgetExceededError(
            f"direct quadrature needs {cost:.2e} lattice terms (budget {DIRECT_BUDGET:.0e}); "
            "use the fast or grouped path")
    Xi, idx = _product_lattice(g, N)
    G = g.points_per_dim
    slots = _slot_data(spec, fields)
    weight = (g.freq_step / (2.0 * np.pi)) ** (g.dim * N)
    base = np.exp(1j * spec.phases[0].fn(np.sum(Xi, axis=1))) * weight
    for j, fac in enumerate(slots):
        flat = fac.reshape(-1)
        lin = np.zeros(Xi.shape[0], dtype=np.int64)
        for d in range(g.dim):
            lin = lin * G + idx[:, j, d]
        base = base * flat[lin]
    S = np.sum(Xi, axis=1)  # (M, n) total frequency per lattice tuple
    xs = g.physical_lattice().reshape(-1, g.dim)
    out = np.empty(xs.shape[0], dtype=np.complex128)
    if sigma.x_independent:
        amp = _amplitude_on_lattice(sigma, None, Xi)
        contrib = amp * base
        chunk = max(1, int(2**22 // max(S.shape[0], 1)))
        for start in range(0, xs.shape[0], chunk):
            block = xs[start:start + chunk]
            out[start:start + chunk] = np.exp(1j * block @ S.T) @ contrib
    else:
        for i, x in enumerate(xs):
            amp = _amplitude_on_lattice(sigma, x, Xi)
            out[i] = np.sum(amp * base * np.exp(1j * (S @ x)))
    return Field(grid=g, representation="physical", samples=out.reshape(g.shape))


def eval_paraproduct(zeta: MultilinearAmplitude, *fields: Field,
                     method: str = "auto") -> Field:
    """Phase-free multilinear multiplier T_zeta (all phases zero)."""
    from .phases import zero_phase

    spec = OperatorSpec(amplitude=zeta,
                        phases=tuple(zero_phase() for _ in range(zeta.arity + 1)))
    return eval_multilinear_oio(spec, *fields, method=method)
