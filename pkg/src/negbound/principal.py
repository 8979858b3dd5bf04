"""Lower principal representations and the negativity estimates built on them.

After the backstep the sequence ``c_0..c_n`` is either well-constrained
(``n`` odd, even count) or ill-constrained (``n`` even, odd count). The
characteristic determinant gives the roots of the lower principal
representation; in the ill-constrained case one root is pinned at ``a``.
Weights follow from a square Vandermonde system, and the negativity estimate
is the mass-weighted sum of ``|lambda|`` over the negative roots.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.polynomial import polynomial as P

from .backstep import BackstepResult, mu0_lower_bound
from .errors import (
    AmbiguousKernel,
    ComplexRoots,
    DegeneratePolynomial,
    InconsistentWeights,
    InputError,
    RootOutOfRange,
    VandermondeConditioning,
)
from .existence import hadamard_scale
from .moments import MomentSequence, SpectralRange

LOWER = "lower"
UPPER = "upper"

STRICT = "strict"
SINGULAR_EXACT = "singular-exact"
DEGRADED = "degraded"

MAX_VANDERMONDE_COND = 1e12


@dataclass(frozen=True)
class Tolerances:
    det: float = 1e-10
    root: float = 1e-8
    residual: float = 1e-8

    def __post_init__(self):
        if min(self.det, self.root, self.residual) <= 0:
            raise InputError("tolerances must be positive")


@dataclass(frozen=True)
class CharPolynomial:
    """Characteristic polynomial, coefficients in ascending powers.

    ``interior`` is the determinant factor; ``coefficients`` includes the
    ``(lambda - a)`` factor when ``has_endpoint_root`` is set.
    """

    coefficients: tuple[float, ...]
    interior: tuple[float, ...]
    has_endpoint_root: bool
    endpoint: float


@dataclass(frozen=True)
class PrincipalRepresentation:
    roots: tuple[float, ...]
    weights: tuple[float, ...]
    has_endpoint_root: bool = False
    residuals: tuple[float, ...] = ()

    def moment(self, k: int) -> float:
        return float(sum(w * r**k for r, w in zip(self.roots, self.weights)))

    def to_dict(self):
        return {
            "roots": list(self.roots),
            "weights": list(self.weights),
            "has_endpoint_root": self.has_endpoint_root,
            "residuals": list(self.residuals),
        }


@dataclass(frozen=True)
class NegativityBound:
    direction: str
    order: int
    negativity: float
    one_norm: float
    log_negativity: float
    representation: Optional[PrincipalRepresentation]
    quality: str = STRICT
    method: str = "generic"
    mu0: Optional[float] = None
    stderr: Optional[float] = None
    extra: dict = field(default_factory=dict, compare=False)

    def to_dict(self):
        return {
            "direction": self.direction,
            "order": self.order,
            "negativity": self.negativity,
            "one_norm": self.one_norm,
            "log_negativity": self.log_negativity,
            "quality": self.quality,
            "method": self.method,
            "mu0": self.mu0,
            "stderr": self.stderr,
            "representation": None if self.representation is None else self.representation.to_dict(),
            **({"extra": self.extra} if self.extra else {}),
        }


def make_bound(negativity, direction, order, representation=None, **kw) -> NegativityBound:
    negativity = max(0.0, float(negativity))
    one_norm = 1.0 + 2.0 * negativity
    return NegativityBound(direction, order, negativity, one_norm, math.log(one_norm),
                           representation, **kw)


def direction_for(order: int) -> str:
    return LOWER if order % 2 == 1 else UPPER


# -- characteristic determinant ----------------------------------------------

def _last_column_expansion(m_left: np.ndarray, tol: float):
    """Coefficients of ``det([m_left | (1, x, ..., x^m)])`` in ascending powers."""
    rows, cols = m_left.shape
    m = cols
    coeffs, scales = [], []
    for i in range(rows):
        minor = np.delete(m_left, i, axis=0)
        coeffs.append((-1.0) ** (i + m) * float(np.linalg.det(minor)))
        scales.append(hadamard_scale(minor))
    coeffs = np.array(coeffs)
    scales = np.array(scales)
    negligible = np.abs(coeffs) <= tol * scales
    if negligible[-1]:
        kind = "identically" if negligible.all() else "in its leading coefficient"
        raise DegeneratePolynomial(f"characteristic determinant vanishes {kind}")
    return coeffs


def char_polynomial(seq: MomentSequence, rng: SpectralRange = SpectralRange(),
                    tol: float = 1e-10) -> CharPolynomial:
    """Characteristic polynomial of the lower principal representation.

    Odd ``n = 2m - 1``: ``det[c_{i+j} | lambda^i]`` with ``m`` moment columns.
    Even ``n = 2m``: ``(lambda - a) det[c_{i+j+1} - a c_{i+j} | lambda^i]``.
    """
    if seq.n_max < 3:
        raise InputError("characteristic polynomial needs n_max >= 3")
    c = seq.extended()
    n = seq.n_max
    a = rng.a
    if n % 2 == 1:
        m = (n + 1) // 2
        left = np.array([[c[i + j] for j in range(m)] for i in range(m + 1)])
        interior = _last_column_expansion(left, tol)
        return CharPolynomial(tuple(interior), tuple(interior), False, a)
    m = n // 2
    left = np.array([[c[i + j + 1] - a * c[i + j] for j in range(m)] for i in range(m + 1)])
    interior = _last_column_expansion(left, tol)
    full = P.polymul([-a, 1.0], interior)
    return CharPolynomial(tuple(full), tuple(interior), True, a)


def find_roots(poly, rng: SpectralRange = SpectralRange(), tol: float = 1e-8) -> tuple[float, ...]:
    """Real roots in ``[a, b]``, ascending, via companion-matrix eigenvalues.

    Accepts a :class:`CharPolynomial` (endpoint root appended exactly) or a
    plain ascending coefficient sequence.
    """
    if isinstance(poly, CharPolynomial):
        coeffs, endpoint = np.asarray(poly.interior, float), poly.has_endpoint_root
    else:
        coeffs, endpoint = np.asarray(poly, float), False
    coeffs = np.trim_zeros(coeffs, "b")
    if len(coeffs) < 2:
        raise DegeneratePolynomial("polynomial has no roots to find")
    monic = coeffs / coeffs[-1]
    raw = P.polyroots(monic)
    imag_tol = tol * (1.0 + np.abs(monic[:-1]).max())
    if np.abs(raw.imag).max() > imag_tol:
        raise ComplexRoots(f"complex roots {raw}")
    roots = raw.real
    lo, hi = rng.a - tol, rng.b + tol
    if roots.min() < lo or roots.max() > hi:
        raise RootOutOfRange(f"roots {roots} leave [{rng.a}, {rng.b}]")
    roots = np.clip(roots, rng.a, rng.b)
    if endpoint:
        roots = np.append(roots, rng.a)
    return tuple(float(r) for r in np.sort(roots))


# -- weights -------------------------------------------------------------------

def solve_weights(roots, seq: MomentSequence, tol: float = 1e-8,
                  has_endpoint_root: bool = False) -> PrincipalRepresentation:
    """Weights from the ``r`` highest-order moment equations; residuals on the rest."""
    roots = np.asarray(roots, dtype=float)
    r = len(roots)
    c = seq.extended()
    n = seq.n_max
    if r == 0 or r > n + 1:
        raise InputError(f"cannot fit {r} roots to {n + 1} moments")
    if r > 1 and np.diff(np.sort(roots)).min() <= tol:
        raise VandermondeConditioning(f"roots {roots} are not separated beyond {tol}")
    orders = np.arange(n - r + 1, n + 1)
    vander = roots[None, :] ** orders[:, None]
    if np.linalg.cond(vander) > MAX_VANDERMONDE_COND:
        raise VandermondeConditioning(f"Vandermonde system for roots {roots} is ill-conditioned")
    weights = np.linalg.solve(vander, c[orders])
    floor = -tol * max(1.0, float(np.abs(weights).sum()))
    if weights.min() < floor:
        raise InconsistentWeights(f"negative weight in {weights}")
    residuals = tuple(
        float(np.dot(weights, roots**k) - c[k]) for k in range(n + 1)
    )
    return PrincipalRepresentation(tuple(float(r) for r in roots),
                                   tuple(float(w) for w in weights),
                                   has_endpoint_root, residuals)


def residual_scale(rep: PrincipalRepresentation, k: int) -> float:
    return max(1.0, sum(abs(w) * abs(r) ** k for r, w in zip(rep.roots, rep.weights)))


def max_relative_residual(rep: PrincipalRepresentation) -> float:
    if not rep.residuals:
        return 0.0
    return max(abs(res) / residual_scale(rep, k) for k, res in enumerate(rep.residuals))


def representation_negativity(rep: PrincipalRepresentation) -> float:
    total = sum(w * -r for r, w in zip(rep.roots, rep.weights) if r < 0)
    return max(0.0, float(total))


def assemble_bound(rep: PrincipalRepresentation, order: int,
                   rng: SpectralRange = SpectralRange(), quality: str = STRICT,
                   **kw) -> NegativityBound:
    """Negativity of a representation, with its bound direction from ``order``.

    Odd orders give a lower bound. Even orders give an upper bound, as the
    endpoint-pinned representation pushes weight toward ``a``.
    """
    return make_bound(representation_negativity(rep), direction_for(order), order, rep,
                      quality=quality, **kw)


# -- singular systems ------------------------------------------------------

def singular_recovery(seq: MomentSequence, rng: SpectralRange = SpectralRange(),
                      tol: Tolerances = Tolerances()) -> PrincipalRepresentation:
    """Recover the unique point-mass measure of a singularly positive system.

    Finds the smallest ``r`` whose ``(r+1)``-square Hankel ``[c_{i+j}]`` is
    numerically singular and reads the support polynomial off its kernel.
    """
    c = seq.extended()
    n = seq.n_max
    for r in range(1, n // 2 + 1):
        h = np.array([[c[i + j] for j in range(r + 1)] for i in range(r + 1)])
        _, s, vt = np.linalg.svd(h)
        if s[-1] > tol.det * s[0]:
            continue
        if r + 1 > 1 and s[-2] <= tol.det * s[0]:
            raise AmbiguousKernel(f"Hankel block of size {r + 1} has a multi-dimensional kernel")
        kernel = vt[-1]
        roots = find_roots(kernel, rng, tol.root)
        rep = solve_weights(roots, seq, tol.residual)
        if max_relative_residual(rep) > tol.residual:
            raise AmbiguousKernel(
                f"recovered measure misses moments by {max_relative_residual(rep):.3e}"
            )
        return rep
    raise AmbiguousKernel("no singular Hankel block: system is not singularly positive")


# -- generic order-n estimate -------------------------------------------------

@dataclass(frozen=True)
class OrderResult:
    backstep: BackstepResult
    bound: NegativityBound
    recovered: bool
    note: str = ""


def generic_bound(seq: MomentSequence, rng: SpectralRange = SpectralRange(),
                  tol: Tolerances = Tolerances()) -> OrderResult:
    """Backstep, characteristic roots, weights and bound at order ``seq.n_max``.

    Falls back to :func:`singular_recovery` when the characteristic
    determinant degenerates or its roots collide.
    """
    if seq.n_max < 3:
        raise InputError("a principal bound needs at least three moments")
    step = mu0_lower_bound(seq, rng, tol.det)
    ext = seq.with_mu0(step.mu0_bound)
    order = seq.n_max
    try:
        poly = char_polynomial(ext, rng, tol.det)
        roots = find_roots(poly, rng, tol.root)
        rep = solve_weights(roots, ext, tol.residual, poly.has_endpoint_root)
    except (DegeneratePolynomial, VandermondeConditioning) as exc:
        rep = singular_recovery(ext, rng, tol)
        bound = assemble_bound(rep, order, rng, quality=SINGULAR_EXACT, method="singular",
                               mu0=step.mu0_bound)
        return OrderResult(step, bound, True, f"{type(exc).__name__}: {exc}")
    bound = assemble_bound(rep, order, rng, method="generic", mu0=step.mu0_bound)
    return OrderResult(step, bound, False)


# -- closed forms ----------------------------------------------------------

def _positive_slope_thresholds(pairs):
    """Thresholds ``-A/B`` for affine constraints ``A + B mu0 >= 0`` with ``B > 0``."""
    return [-a_ / b_ for a_, b_ in pairs if b_ > 0]


def _quadratic_roots(c0, c1, c2, tol):
    """Real roots of ``c2 x^2 + c1 x + c0``, ascending."""
    disc = c1 * c1 - 4.0 * c2 * c0
    scale = c1 * c1 + abs(4.0 * c2 * c0)
    if disc < -tol * scale:
        raise ComplexRoots(f"discriminant {disc:.3e} < 0")
    sq = math.sqrt(max(disc, 0.0))
    q = -0.5 * (c1 + math.copysign(sq, c1)) if c1 != 0 else -0.5 * sq
    if q == 0.0:
        x = (0.0, 0.0)
    else:
        x = (q / c2, c0 / q)
    return tuple(sorted(x))


def _check_range(roots, rng, tol):
    if min(roots) < rng.a - tol or max(roots) > rng.b + tol:
        raise RootOutOfRange(f"roots {roots} leave [{rng.a}, {rng.b}]")
    return tuple(min(max(r, rng.a), rng.b) for r in roots)


def _singular_fallback(seq, mu0, order, rng, tol):
    rep = singular_recovery(seq.with_mu0(mu0), rng, tol)
    return assemble_bound(rep, order, rng, quality=SINGULAR_EXACT, method="singular", mu0=mu0)


def bound_order3(mu2: float, nu3: float, rng: SpectralRange = SpectralRange(),
                 tol: Tolerances = Tolerances()) -> NegativityBound:
    """Three-replica lower bound, entirely in closed form.

    The two 2x2 backstep determinants fix ``mu0``; the quadratic
    ``(mu0 mu2 - 1) x^2 + (mu2 - mu0 nu3) x + (nu3 - mu2^2)`` gives the roots,
    and ``(mu2 l2 - nu3) / (l1 (l1 - l2))`` is the bound when ``l1 < 0``.
    """
    a, b = rng.a, rng.b
    d1 = nu3 - a * mu2
    e2 = b * mu2 - nu3
    # (1 - a mu0) d1 - (mu2 - a)^2 >= 0  and  (b mu0 - 1) e2 - (b - mu2)^2 >= 0
    pairs = [
        (1.0, -a),
        (d1 - (mu2 - a) ** 2, -a * d1),
        (-1.0, b),
        (-e2 - (b - mu2) ** 2, b * e2),
    ]
    mu0 = max([1.0] + _positive_slope_thresholds(pairs))
    seq = MomentSequence((1.0, mu2, nu3))
    c2, c1, c0 = mu0 * mu2 - 1.0, mu2 - mu0 * nu3, nu3 - mu2 * mu2
    lead_scale = math.hypot(mu0, 1.0) * math.hypot(1.0, mu2)
    if abs(c2) <= tol.det * lead_scale:
        return _singular_fallback(seq, mu0, 3, rng, tol)
    l1, l2 = _check_range(_quadratic_roots(c0, c1, c2, tol.root), rng, tol.root)
    if l2 - l1 <= tol.root:
        return _singular_fallback(seq, mu0, 3, rng, tol)
    m1 = (mu2 * l2 - nu3) / (l1 * l1 * (l2 - l1)) if l1 != 0 else 0.0
    m2 = (nu3 - mu2 * l1) / (l2 * l2 * (l2 - l1)) if l2 != 0 else 0.0
    rep = PrincipalRepresentation((l1, l2), (m1, m2))
    negativity = (mu2 * l2 - nu3) / (l1 * (l1 - l2)) if l1 < 0 else 0.0
    return make_bound(negativity, LOWER, 3, rep, method="closed_form", mu0=mu0)


def bound_order4(mu2: float, nu3: float, mu4: float, rng: SpectralRange = SpectralRange(),
                 tol: Tolerances = Tolerances()) -> NegativityBound:
    """Four-replica estimate from the endpoint-pinned representation, in closed form.

    The endpoint weight enters as ``|a| M_a``; with ``a = -1/2`` this is the
    familiar ``(1/2)((|l1| - l1) M_1 + M_a)``.
    """
    a, b = rng.a, rng.b
    ab, apb = a * b, a + b
    # plain Hankel [mu0 1 mu2; 1 mu2 nu3; mu2 nu3 mu4]
    hdet = mu2 * mu4 - nu3 * nu3
    pairs = [
        (0.0, 1.0),
        (-1.0, mu2),
        (-(mu4 - mu2 * nu3) + mu2 * (nu3 - mu2 * mu2), hdet),
    ]
    # localizing matrix of (lambda - a)(b - lambda)
    p = apb - mu2
    r = apb * mu2 - ab - nu3
    s = apb * nu3 - ab * mu2 - mu4
    pairs += [(p, -ab), (p * s - r * r, -ab * s)]
    mu0 = max([1.0] + _positive_slope_thresholds(pairs))
    seq = MomentSequence((1.0, mu2, nu3, mu4))
    big_p, big_q = 1.0 - a * mu0, mu2 - a
    big_r, big_s = nu3 - a * mu2, mu4 - a * nu3
    c0 = big_q * big_s - big_r * big_r
    c1 = -(big_p * big_s - big_q * big_r)
    c2 = big_p * big_r - big_q * big_q
    lead_scale = math.hypot(big_p, big_q) * math.hypot(big_q, big_r)
    if abs(c2) <= tol.det * lead_scale:
        return _singular_fallback(seq, mu0, 4, rng, tol)
    l1, l2 = _check_range(_quadratic_roots(c0, c1, c2, tol.root), rng, tol.root)
    if l2 - l1 <= tol.root or min(l1 - a, l2 - a) <= tol.root:
        return _singular_fallback(seq, mu0, 4, rng, tol)
    ma_a = (l1 * l1 * (l2 - mu2) - l2 * nu3 + mu4) / ((a - l2) * (a * a - l1 * l1))
    m1_l1 = (l2 * nu3 - mu4 - a * a * (l2 - mu2)) / ((l2 - l1) * (l1 * l1 - a * a))
    m_a = ma_a / a if a != 0 else 0.0
    m1 = m1_l1 / l1 if l1 != 0 else 0.0
    endpoint_term = abs(a) * m_a if a < 0 else 0.0
    negativity = endpoint_term + (abs(l1) - l1) / (2.0 * l1) * m1_l1 if l1 != 0 else endpoint_term
    # weight of l2 from the normalisation c_1 = 1
    m2 = (1.0 - ma_a - m1_l1) / l2 if l2 != 0 else 0.0
    rep = PrincipalRepresentation((a, l1, l2), (m_a, m1, m2), has_endpoint_root=True)
    return make_bound(negativity, UPPER, 4, rep, method="closed_form", mu0=mu0,
                      extra={"endpoint_weight": m_a, "M1_lambda1": m1_l1, "Ma_a": ma_a})


def exp_fit_lower(mu2: float, mu4: float) -> NegativityBound:
    """Lower bound from the two-point fit ``g(n) = M L^n`` through ``mu_2, mu_4``.

    Log-convexity of ``n -> sum |lambda|^n`` puts ``g(1) = mu2^(3/2) / mu4^(1/2)``
    below the one-norm.
    """
    if mu2 <= 0 or mu4 <= 0:
        raise InputError("exponential fit needs positive mu_2 and mu_4")
    lam = math.sqrt(mu4 / mu2)
    weight = mu2 * mu2 / mu4
    one_norm_bound = weight * lam
    nb = make_bound((one_norm_bound - 1.0) / 2.0, LOWER, 4, None, method="exp_fit",
                    extra={"Lambda": lam, "M": weight, "one_norm_bound": one_norm_bound})
    return nb
