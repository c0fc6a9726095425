"""Norms, maximal functions and Carleson-measure machinery on the torus.

The norm scale covers Lebesgue L^p (quasi-norms for p < 1), Bessel
Sobolev H^(sigma,p), Goldberg's local Hardy space h^p through its
square-function characterisation, local bmo (mean oscillation over
dyadic subcubes plus a low-frequency sup), and Triebel-Lizorkin
F^s_(p,q).  All integrals are Riemann sums with weight h^n, and every
"<=" from the underlying theory is reported as a measured constant, never
asserted with a theoretical value.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .cutoffs import lp_component, max_lp_index
from .grid import Field, Grid, apply_multiplier, transform


@dataclass(frozen=True)
class NormKind:
    """Tagged norm selector; build via lebesgue/sobolev/local_hardy/bmo/..."""

    tag: str
    params: tuple = ()

    def __str__(self):
        if not self.params:
            return self.tag
        return self.tag + "(" + ", ".join(str(p) for p in self.params) + ")"


def lebesgue(p: float) -> NormKind:
    if not p > 0:
        raise ValueError(f"Lebesgue exponent must be positive, got {p}")
    return NormKind("lebesgue", (float(p),))


def sobolev(sigma: float, p: float) -> NormKind:
    if not p > 0:
        raise ValueError(f"Sobolev integrability exponent must be positive, got {p}")
    return NormKind("sobolev", (float(sigma), float(p)))


def local_hardy(p: float) -> NormKind:
    if not p > 0:
        raise ValueError(f"local Hardy exponent must be positive, got {p}")
    return NormKind("local_hardy", (float(p),))


def bmo() -> NormKind:
    return NormKind("bmo")


def triebel_lizorkin(s: float, p: float, q: float) -> NormKind:
    if not (p > 0 and q > 0):
        raise ValueError("Triebel-Lizorkin exponents must be positive")
    return NormKind("triebel_lizorkin", (float(s), float(p), float(q)))


def parse_norm_kind(name: str) -> NormKind:
    """Parse config names: L<p>, H:<sigma>:<p>, hp:<p>, bmo, F:<s>:<p>:<q>."""
    if name == "bmo":
        return bmo()
    if name.startswith("L"):
        tail = name[1:]
        return lebesgue(np.inf if tail in ("inf", "oo") else float(tail))
    parts = name.split(":")
    if parts[0] == "H" and len(parts) == 3:
        return sobolev(float(parts[1]), float(parts[2]))
    if parts[0] == "hp" and len(parts) == 2:
        return local_hardy(float(parts[1]))
    if parts[0] == "F" and len(parts) == 4:
        return triebel_lizorkin(float(parts[1]), float(parts[2]), float(parts[3]))
    raise ValueError(f"cannot parse norm kind {name!r}")


def _lp(values: np.ndarray, p: float, cell: float) -> float:
    a = np.abs(values)
    if np.isinf(p):
        return float(np.max(a))
    return float(np.sum(a**p) * cell) ** (1.0 / p)


def _lp_pieces(f: Field) -> list[np.ndarray]:
    """Physical samples of theta_j(D) f for j = 0..j_max of the lattice."""
    g = f.grid
    j_max = max_lp_index(np.sqrt(g.dim) * g.nyquist)
    return [transform(apply_multiplier(lambda xi, jj=j: lp_component(jj, xi), f),
                      "physical").samples
            for j in range(j_max + 1)]


def _dyadic_block_views(arr: np.ndarray, G: int, n: int, m: int):
    """Reshape so that axis pairs (cube, offset) expose the 2^m-per-axis cubes."""
    c = 2**m
    b = G // c
    shape = []
    for _ in range(n):
        shape.extend([c, b])
    view = arr.reshape(shape)
    order = list(range(0, 2 * n, 2)) + list(range(1, 2 * n, 2))
    view = np.transpose(view, order)
    return view.reshape((c**n, b**n))


def _max_dyadic_level(G: int) -> int:
    # cubes of side 2L/2^m with side >= 2h, i.e. 2^m <= G/2
    return int(np.log2(G)) - 1


def norm(f: Field, kind: NormKind) -> float:
    """Evaluate the selected norm of a field."""
    g = f.grid
    cell = g.spacing**g.dim
    if kind.tag == "lebesgue":
        (p,) = kind.params
        return _lp(transform(f, "physical").samples, p, cell)
    if kind.tag == "sobolev":
        sig, p = kind.params
        bessel = apply_multiplier(
            lambda xi: (1.0 + np.sum(xi**2, axis=-1)) ** (sig / 2.0), f)
        return _lp(transform(bessel, "physical").samples, p, cell)
    if kind.tag == "local_hardy":
        (p,) = kind.params
        pieces = _lp_pieces(f)
        low = _lp(pieces[0], p, cell)
        square = np.sqrt(sum(np.abs(pc) ** 2 for pc in pieces[1:]))
        return low + _lp(square, p, cell)
    if kind.tag == "bmo":
        phys = transform(f, "physical").samples
        G, n = g.points_per_dim, g.dim
        osc = 0.0
        for m in range(_max_dyadic_level(G) + 1):
            blocks = _dyadic_block_views(phys, G, n, m)
            means = blocks.mean(axis=1, keepdims=True)
            osc = max(osc, float(np.max(np.mean(np.abs(blocks - means), axis=1))))
        low = apply_multiplier(lambda xi: lp_component(0, xi), f)
        return osc + float(np.max(np.abs(transform(low, "physical").samples)))
    if kind.tag == "triebel_lizorkin":
        s, p, q = kind.params
        pieces = _lp_pieces(f)
        if np.isinf(q):
            inner = np.max(
                np.stack([2.0 ** (j * s) * np.abs(pc) for j, pc in enumerate(pieces)]),
                axis=0)
        else:
            inner = sum(2.0 ** (j * q * s) * np.abs(pc) ** q
                        for j, pc in enumerate(pieces)) ** (1.0 / q)
        return _lp(inner, p, cell)
    raise ValueError(f"unknown norm kind {kind.tag!r}")


# ---------------------------------------------------------------------------
# maximal functions
# ---------------------------------------------------------------------------

def _periodic_distance_sq(grid: Grid) -> np.ndarray:
    """|y|^2 on the lattice of offsets, with the periodic min-image metric."""
    G, L = grid.points_per_dim, grid.half_width
    axis = grid.physical_axis() + L  # offsets 0, h, ..., 2L-h
    axis = np.minimum(axis, 2.0 * L - axis)
    out = np.zeros(grid.shape)
    for ax in range(grid.dim):
        shape = [1] * grid.dim
        shape[ax] = G
        out = out + (axis**2).reshape(shape)
    return out


def _circular_convolve(values: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    return np.real(np.fft.ifftn(np.fft.fftn(values) * np.fft.fftn(kernel)))


def hl_maximal(f: Field, r: float) -> Field:
    """Centred Hardy-Littlewood maximal function M_r over dyadic ball radii.

    Averages |f|^r over open periodic lattice balls {dist < rho} of radii
    h, 2h, 4h, ... up to the half-width L, takes the sup, then the 1/r
    power.  The smallest ball is the singleton, so M_r f >= |f|.
    """
    if not r > 0:
        raise ValueError(f"exponent r must be positive, got {r}")
    g = f.grid
    dist_sq = _periodic_distance_sq(g)
    power = np.abs(transform(f, "physical").samples) ** r
    radii = [g.spacing * 2.0**j
             for j in range(int(np.floor(np.log2(g.points_per_dim / 2))) + 1)]
    if radii[-1] < g.half_width:
        radii.append(g.half_width)
    best = np.zeros(g.shape)
    for rho in radii:
        ball = (dist_sq < rho**2 - 1e-12).astype(float)
        avg = _circular_convolve(power, ball) / np.sum(ball)
        best = np.maximum(best, avg)
    return Field(grid=g, representation="physical",
                 samples=np.maximum(best, 0.0) ** (1.0 / r))


def peetre_maximal(f: Field, a: float, b: float) -> Field:
    """Peetre maximal function: sup_y |f(x - y)| / (1 + b|y|)^a."""
    if not (a > 0 and b > 0):
        raise ValueError("Peetre parameters a, b must be positive")
    g = f.grid
    phys = np.abs(transform(f, "physical").samples)
    weight = (1.0 + b * np.sqrt(_periodic_distance_sq(g))) ** (-a)
    best = np.zeros(g.shape)
    it = np.ndindex(g.shape)
    for offset in it:
        w = weight[offset]
        shifted = np.roll(phys, shift=offset, axis=tuple(range(g.dim)))
        np.maximum(best, w * shifted, out=best)
    return Field(grid=g, representation="physical", samples=best)


def park_maximal(f: Field, s: float, j: int, p: float) -> Field:
    """Park maximal function 2^(jn/p) || f(x-.) / (1+2^j|.|)^s ||_(L^p).

    The lattice sum uses the cell weight h^n, matching the L^p integral
    form of the definition.
    """
    if not (s > 0 and p > 0):
        raise ValueError("Park parameters s, p must be positive")
    g = f.grid
    phys = np.abs(transform(f, "physical").samples) ** p
    kernel = (1.0 + 2.0**j * np.sqrt(_periodic_distance_sq(g))) ** (-s * p)
    conv = _circular_convolve(phys, kernel) * g.spacing**g.dim
    return Field(grid=g, representation="physical",
                 samples=2.0 ** (j * g.dim / p) * np.maximum(conv, 0.0) ** (1.0 / p))


# ---------------------------------------------------------------------------
# Carleson measures
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DyadicMeasure:
    """Nonnegative densities indexed by dyadic level l (time t = 2^-l).

    Represents a measure on torus x (0, 1] supported on the slices
    t = 2^-l; each density is a physical-representation field integrated
    with the cell weight h^n.
    """

    grid: Grid
    levels: dict = dc_field(default_factory=dict)  # level l -> ndarray (physical)

    def __post_init__(self):
        checked = {}
        for l, dens in self.levels.items():
            arr = np.asarray(dens, dtype=float)
            if int(l) < 0:
                raise ValueError("dyadic levels must be nonnegative integers")
            if arr.shape != self.grid.shape:
                raise ValueError("density shape does not match the grid")
            if np.any(arr < 0):
                raise ValueError(f"negative density at level {l}")
            checked[int(l)] = arr
        object.__setattr__(self, "levels", checked)

    def scaled(self, c: float) -> "DyadicMeasure":
        return DyadicMeasure(self.grid, {l: c * d for l, d in self.levels.items()})


def carleson_norm(mu: DyadicMeasure) -> float:
    """sup over dyadic subcubes Q of mu(Q x (0, side(Q)]) / |Q|.

    The cube family consists of the dyadic subcubes of the period cell
    with side between 2h and 2L; a level t = 2^-l contributes to Q
    whenever 2^-l <= side(Q).
    """
    g = mu.grid
    if not mu.levels:
        return 0.0
    G, n = g.points_per_dim, g.dim
    cell = g.spacing**n
    best = 0.0
    for m in range(_max_dyadic_level(G) + 1):
        side = 2.0 * g.half_width / 2**m
        admissible = [d for l, d in mu.levels.items() if 2.0**-l <= side + 1e-12]
        if not admissible:
            continue
        total = sum(admissible)
        blocks = _dyadic_block_views(total, G, n, m)
        mass = blocks.sum(axis=1) * cell
        best = max(best, float(np.max(mass)) / side**n)
    return best


@dataclass(frozen=True)
class EmbeddingReport:
    variant: str
    lhs: float
    reference: float
    ratio: float


def carleson_embedding_check(phi, f: Field, mu: DyadicMeasure,
                             variant: str = "l2") -> EmbeddingReport:
    """Measure the constant in a Carleson embedding inequality.

    variants:
      - ``l2``:  sum_l int |phi(2^-l D) f|^2 dmu_l  vs  ||mu||_C ||f||_2^2
      - ``h1``:  sum_l int |phi(2^-l D) f|   dmu_l  vs  ||mu||_C ||f||_h1
      - ``quadratic``: sum_l ||phi(2^-l D) f||_2^2  vs  ||f||_2^2
        (requires phi(0) = 0; the measure fixes the level range only)

    Returns the measured ratio lhs / reference; the reference must be
    nonzero.
    """
    g = f.grid
    cell = g.spacing**g.dim
    if variant == "quadratic":
        zero = np.zeros((1, g.dim))
        if abs(float(np.asarray(phi(zero))[0])) > 1e-12:
            raise ValueError("quadratic variant requires phi(0) = 0")
        levels = sorted(mu.levels) or list(range(max_lp_index(g.nyquist) + 1))
    else:
        levels = sorted(mu.levels)
    lhs = 0.0
    for l in levels:
        piece = transform(
            apply_multiplier(lambda xi, ll=l: phi(2.0**-ll * xi), f), "physical").samples
        if variant == "l2":
            lhs += float(np.sum(np.abs(piece) ** 2 * mu.levels[l]) * cell)
        elif variant == "h1":
            lhs += float(np.sum(np.abs(piece) * mu.levels[l]) * cell)
        elif variant == "quadratic":
            lhs += float(np.sum(np.abs(piece) ** 2) * cell)
        else:
            raise ValueError(f"unknown embedding variant {variant!r}")
    if variant == "l2":
        ref = carleson_norm(mu) * norm(f, lebesgue(2)) ** 2
    elif variant == "h1":
        ref = carleson_norm(mu) * norm(f, local_hardy(1))
    else:
        ref = norm(f, lebesgue(2)) ** 2
    if norm(f, lebesgue(2)) == 0:
        raise ValueError("zero-norm input field")
    if ref == 0:
        if lhs <= 1e-300:
            return EmbeddingReport(variant=variant, lhs=0.0, reference=0.0, ratio=0.0)
        raise ValueError("reference norm vanishes but the left side does not")
    return EmbeddingReport(variant=variant, lhs=lhs, reference=ref, ratio=lhs / ref)
