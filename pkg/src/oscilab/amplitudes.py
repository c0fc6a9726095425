"""Multilinear amplitudes, seminorm estimation and the three-regime split.

An amplitude of order m and arity N is a function sigma(x, Xi) on
R^n x R^(nN), Xi = (xi_1, ..., xi_N), whose Xi-derivatives of order a
decay like <Xi>^(m - |a|).  ``decompose_amplitude`` splits such a sigma
into a compactly supported piece, N pieces on which a single frequency
slot dominates the whole of Xi, and up to N(N-1) pieces on which two
designated slots carry comparable norms.  All cutoffs are built from the
smooth bump recipe in :mod:`oscilab.cutoffs`, so the pieces have exact
(hard-zero) supports and reconstruct sigma pointwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .cutoffs import smooth_down_step, smooth_up_step

#: eval convention: fn(x, Xi) with Xi of shape (..., N, n), x None or (n,);
#: returns shape (...)
AmplitudeFunction = Callable[[np.ndarray | None, np.ndarray], np.ndarray]


def bracket(Xi: np.ndarray) -> np.ndarray:
    """<Xi> = (1 + sum_j |xi_j|^2)^(1/2) over the stacked slot axis."""
    Xi = np.asarray(Xi, dtype=float)
    return np.sqrt(1.0 + np.sum(Xi**2, axis=(-2, -1)))


@dataclass(frozen=True)
class MultilinearAmplitude:
    """Callable amplitude sigma(x, Xi) with declared order and arity.

    ``separable_factors``, when present, lists N frequency functions
    a_j with sigma(x, Xi) = prod_j a_j(xi_j); that structure unlocks the
    FFT fast path in the operator engine.
    """

    arity: int
    dim: int
    order: float
    fn: AmplitudeFunction
    x_independent: bool = True
    separable_factors: tuple | None = None
    label: str = ""

    def __call__(self, x, Xi) -> np.ndarray:
        Xi = np.asarray(Xi, dtype=float)
        if Xi.shape[-2:] != (self.arity, self.dim):
            raise ValueError(
                f"Xi has slot shape {Xi.shape[-2:]}, expected {(self.arity, self.dim)}"
            )
        return np.asarray(self.fn(x, Xi))


def constant_amplitude(N: int, n: int, value: float = 1.0) -> MultilinearAmplitude:
    factors = None
    if value > 0:
        root = value ** (1.0 / N)
        factors = tuple([lambda xi, v=root: v * np.ones(np.asarray(xi).shape[:-1])
                         for _ in range(N)])
    return MultilinearAmplitude(
        arity=N, dim=n, order=0.0,
        fn=lambda x, Xi: np.full(np.asarray(Xi).shape[:-2], value, dtype=float),
        separable_factors=factors, label=f"constant({value})")


def bracket_power_amplitude(m: float, N: int, n: int) -> MultilinearAmplitude:
    """sigma(Xi) = <Xi>^m; the canonical order-m amplitude (not separable)."""
    return MultilinearAmplitude(
        arity=N, dim=n, order=float(m),
        fn=lambda x, Xi: bracket(Xi) ** m,
        label=f"<Xi>^{m}")


def separable_amplitude(factors: Sequence, m: float, n: int,
                        label: str = "separable") -> MultilinearAmplitude:
    """sigma(Xi) = prod_j a_j(xi_j) from per-slot frequency functions."""
    factors = tuple(factors)
    N = len(factors)

    def fn(x, Xi):
        out = np.ones(np.asarray(Xi).shape[:-2], dtype=complex)
        for j, a in enumerate(factors):
            out = out * a(Xi[..., j, :])
        return out

    return MultilinearAmplitude(arity=N, dim=n, order=float(m), fn=fn,
                                separable_factors=factors, label=label)


# ---------------------------------------------------------------------------
# critical orders
# ---------------------------------------------------------------------------

def critical_order(p: float, s: float, n: int) -> float:
    """Largest admissible single-exponent order: -(n-1)|1/p - 1/2| for the
    degree-one (wave) regime, -ns|1/p - 1/2| for a general order-s phase."""
    gap = abs(1.0 / p - 0.5)
    if s == 1.0:
        return -(n - 1) * gap
    return -n * s * gap


def critical_order_total(s: float, n: int, exponents: Sequence[float],
                         include_target: bool = True) -> float:
    """Critical total order for exponents (p_0, p_1, ..., p_N).

    ``include_target`` keeps the |1/p_0 - 1/2| term; drop it for operators
    whose outer phase vanishes.
    """
    ps = list(exponents)
    gaps = [abs(1.0 / p - 0.5) for p in ps] if include_target else \
        [abs(1.0 / p - 0.5) for p in ps[1:]]
    factor = (n - 1) if s == 1.0 else n * s
    return -factor * sum(gaps)


# ---------------------------------------------------------------------------
# seminorm estimation
# ---------------------------------------------------------------------------

def seminorm_estimate(sigma: MultilinearAmplitude, m: float,
                      alpha: Sequence[int], beta: Sequence[int],
                      samples) -> float:
    """Sampled seminorm sup |d_Xi^alpha d_x^beta sigma| * <Xi>^(|alpha| - m).

    ``alpha`` is a multi-index over the nN stacked frequency components,
    ``beta`` over the n spatial components; |alpha| + |beta| <= 2 since
    derivatives come from nested central differences.
    """
    alpha = tuple(int(a) for a in alpha)
    beta = tuple(int(b) for b in beta)
    N, n = sigma.arity, sigma.dim
    if len(alpha) != N * n or len(beta) != n:
        raise ValueError(f"need |alpha| index length {N * n} and |beta| length {n}")
    if sum(alpha) + sum(beta) > 2:
        raise ValueError("seminorms are certified only for |alpha| + |beta| <= 2")
    xs, Xis = samples
    Xis = np.asarray(Xis, dtype=float)
    if Xis.size == 0:
        raise ValueError("empty sample set")
    if Xis.ndim == 2:
        Xis = Xis.reshape(Xis.shape[0], N, n)
    xs = None if xs is None else np.asarray(xs, dtype=float)

    scale = np.maximum(1.0, bracket(Xis))
    values = _mixed_fd(sigma, xs, Xis, alpha, beta, scale)
    return float(np.max(np.abs(values) * bracket(Xis) ** (sum(alpha) - m)))


def _mixed_fd(sigma, xs, Xis, alpha, beta, scale):
    order = sum(alpha) + sum(beta)
    if order == 0:
        return _eval_batch(sigma, xs, Xis)
    steps = {1: 1e-5, 2: 3.2e-4}
    h = steps[order] * scale
    if any(a > 0 for a in alpha):
        i = next(k for k, a in enumerate(alpha) if a > 0)
        lower = list(alpha)
        lower[i] -= 1
        slot, comp = divmod(i, Xis.shape[-1])
        e = np.zeros_like(Xis)
        e[..., slot, comp] = 1.0
        hi = _mixed_fd(sigma, xs, Xis + h[..., None, None] * e, tuple(lower), beta, scale)
        lo = _mixed_fd(sigma, xs, Xis - h[..., None, None] * e, tuple(lower), beta, scale)
        return (hi - lo) / (2.0 * h)
    i = next(k for k, b in enumerate(beta) if b > 0)
    lower = list(beta)
    lower[i] -= 1
    if xs is None:
        raise ValueError("x-derivative requested but no x samples supplied")
    e = np.zeros_like(xs)
    e[..., i] = 1.0
    hx = steps[order] * np.ones(xs.shape[:-1])
    hi = _mixed_fd(sigma, xs + hx[..., None] * e, Xis, alpha, tuple(lower), scale)
    lo = _mixed_fd(sigma, xs - hx[..., None] * e, Xis, alpha, tuple(lower), scale)
    return (hi - lo) / (2.0 * hx)


def _eval_batch(sigma, xs, Xis):
    if sigma.x_independent or xs is None:
        return sigma(None, Xis)
    out = np.empty(Xis.shape[:-2], dtype=complex)
    for idx in range(Xis.shape[0]):
        out[idx] = sigma(xs[idx], Xis[idx][None, ...])[0]
    return out


# ---------------------------------------------------------------------------
# frequency-regime decomposition
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DecompositionConstants:
    """Support geometry recorded by the decomposition.

    - chi is 1 inside |Xi| <= chi_inner and 0 outside |Xi| >= chi_outer;
    - the dominance window (c1, c2) are the squared-ratio thresholds of
      the transition |xi_j| in [32, 64]*sqrt(N-1)*|rest|;
    - domination_c > 1 bounds c * |xi_j|^2 >= |Xi|^2 on dominant pieces;
    - comparability_C bounds |xi_j|/|xi_k| within [1/C, C] on pair pieces.
    """

    chi_inner: float
    chi_outer: float
    c1: float
    c2: float
    domination_c: float
    comparability_C: float


@dataclass(frozen=True)
class DecomposedAmplitude:
    sigma0: MultilinearAmplitude
    sigma_j: tuple[MultilinearAmplitude, ...]
    sigma_jk: dict = field(default_factory=dict)  # (j, k) -> MultilinearAmplitude
    constants: DecompositionConstants | None = None

    def pieces(self):
        yield self.sigma0
        yield from self.sigma_j
        yield from self.sigma_jk.values()

    def reconstruct(self, x, Xi) -> np.ndarray:
        total = None
        for piece in self.pieces():
            v = piece(x, Xi)
            total = v if total is None else total + v
        return total


def _slot_norms(Xi: np.ndarray) -> np.ndarray:
    return np.sqrt(np.sum(np.asarray(Xi, dtype=float) ** 2, axis=-1))


def _chi_compact(Xi: np.ndarray) -> np.ndarray:
    # 1 for |Xi| <= 1/8, 0 for |Xi| >= 1/4 (base bump rescaled by 8)
    r = np.sqrt(np.sum(np.asarray(Xi, dtype=float) ** 2, axis=(-2, -1)))
    return smooth_down_step(8.0 * r, 1.0, 2.0)


def _dominance(Xi: np.ndarray, j: int, c1: float, c2: float) -> np.ndarray:
    """nu_j(Xi): 0 unless slot j dominates, 1 once it does by a factor 64."""
    norms = _slot_norms(Xi)
    total_sq = np.sum(norms**2, axis=-1)
    safe = np.where(total_sq > 0, total_sq, 1.0)
    t = norms[..., j] ** 2 / safe
    return smooth_up_step(t, c1, c2)


def _soft_greater(a_sq: np.ndarray, b_sq: np.ndarray) -> np.ndarray:
    # smooth indicator of a >~ b via t = a^2/(a^2+b^2); 0 below t=0.4, 1 above 0.6
    denom = a_sq + b_sq
    t = np.where(denom > 0, a_sq / np.where(denom > 0, denom, 1.0), 0.5)
    return smooth_up_step(t, 0.4, 0.6)


def _pair_weights(Xi: np.ndarray, N: int) -> dict:
    """Smooth partition of unity over ordered pairs (j, k), subordinate to
    the cones where xi_j and xi_k carry the two largest slot norms."""
    sq = _slot_norms(Xi) ** 2
    raw = {}
    for j, k in itertools.permutations(range(N), 2):
        w = _soft_greater(sq[..., j], sq[..., k])
        for l in range(N):
            if l in (j, k):
                continue
            w = w * _soft_greater(sq[..., k], sq[..., l])
        raw[(j, k)] = w
    denom = sum(raw.values())
    denom = np.where(denom > 0, denom, 1.0)
    return {jk: w / denom for jk, w in raw.items()}


def decompose_amplitude(sigma: MultilinearAmplitude) -> DecomposedAmplitude:
    """Split sigma into compact / single-dominant / comparable-pair pieces.

    The split is exact pointwise: sigma0 + sum_j sigma_j + sum_jk sigma_jk
    reproduces sigma wherever it is evaluated.  Recorded constants certify
    the support geometry (see :class:`DecompositionConstants`).
    """
    N, n = sigma.arity, sigma.dim
    if N < 2:
        raise ValueError("the frequency-regime decomposition needs arity N >= 2")

    c1 = 1.0 / (1.0 + 1.0 / (32.0**2 * (N - 1)))
    c2 = 1.0 / (1.0 + 1.0 / (64.0**2 * (N - 1)))
    domination_c = 1.0 + 1.0 / (32.0**2 * (N - 1))
    comparability_C = 64.0 * np.sqrt(N - 1) * np.sqrt(1.0 + 1.5 * max(N - 2, 0))
    constants = DecompositionConstants(
        chi_inner=0.125, chi_outer=0.25, c1=c1, c2=c2,
        domination_c=domination_c, comparability_C=comparability_C)

    def make(fn, label):
        return MultilinearAmplitude(arity=N, dim=n, order=sigma.order, fn=fn,
                                    x_independent=sigma.x_independent, label=label)

    sigma0 = make(lambda x, Xi: _chi_compact(Xi) * sigma(x, Xi),
                  f"{sigma.label}:compact")

    def total_dominance(Xi):
        s = np.zeros(np.asarray(Xi).shape[:-2])
        for j in range(N):
            s = s + _dominance(Xi, j, c1, c2)
        return s

    def make_dominant(j):
        def fn(x, Xi):
            nu = _dominance(Xi, j, c1, c2)
            s = total_dominance(Xi)
            share = nu / np.where(s > 1.0, s, 1.0)
            return (1.0 - _chi_compact(Xi)) * share * sigma(x, Xi)
        return make(fn, f"{sigma.label}:dominant[{j}]")

    sigma_j = tuple(make_dominant(j) for j in range(N))

    def make_pair(j, k):
        def fn(x, Xi):
            s = total_dominance(Xi)
            residual = 1.0 - np.minimum(s, 1.0)
            w = _pair_weights(Xi, N)[(j, k)]
            return (1.0 - _chi_compact(Xi)) * residual * w * sigma(x, Xi)
        return make(fn, f"{sigma.label}:pair[{j},{k}]")

    sigma_jk = {(j, k): make_pair(j, k)
                for j, k in itertools.permutations(range(N), 2)}

    return DecomposedAmplitude(sigma0=sigma0, sigma_j=sigma_j,
                               sigma_jk=sigma_jk, constants=constants)
