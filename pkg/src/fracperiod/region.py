"""Stability region of the fractional two-periodic linear map.

The zero solution of ``x(t+1) = x(0) + sum_j k_{t-j} (c_j - 1) x(j)`` with
``c_j = a`` for even ``j`` and ``b`` for odd ``j`` is asymptotically stable
when ``(a, b)`` lies inside a bounded region whose boundary is made of three
curves:

* ``G1`` (root of the characteristic function at ``z = 1``), the hyperbola
  ``(a - c1)(b - c1) = 4^(alpha-1)`` with ``c1 = 1 - 2^(alpha-1)``;
* ``G2`` (root at ``z = -1``), the hyperbola
  ``(a - c2)(b - c2) = -2^alpha cos^2(alpha pi/4)`` with
  ``c2 = 1 - 2^(alpha/2) sin(alpha pi/4)``;
* ``G3`` (root at ``z = e^{it}``), a parametric arc in ``t``.

The closed boundary is assembled as a polygon and queried with a
crossing-number test.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from fracperiod.kernel import FractionalOrder, as_order


class UndefinedValueError(ArithmeticError):
    """A boundary curve is undefined at the requested parameter."""


class SingularityError(ArithmeticError):
    """The characteristic function was evaluated at its branch point."""


class RegionError(ValueError):
    """The region cannot be assembled for this order."""


Point = tuple[float, float]

#: default number of samples on each boundary arc
DEFAULT_SAMPLES = 512
#: points closer than this to a polygon edge are treated as outside
BOUNDARY_EPS = 1e-9
#: longest run done with the direct O(T^2) batch in the simulation oracle
DIRECT_STEPS = 4096
#: closer than this to an asymptote, b is too large to be meaningful
ASYMPTOTE_TOL = 1e-6
#: below this t, G3 is sampled from its small-t expansion
G3_SWITCH_T = 1e-20
#: G3 is not evaluated this close to t = pi
G3_PI_GAP = 1e-8
#: G3 samples closer than this to the diagonal are dropped
G3_MIN_GAP = 1e-6
#: beyond this the corners run off past 1e5 and the ring loses simplicity
ALPHA_MAX = 1.0 - 1e-5


# {{{ curve constants

def gamma1_center(alpha: float) -> float:
    return 1.0 - 2.0 ** (alpha - 1.0)


def gamma1_product(alpha: float) -> float:
    return 4.0 ** (alpha - 1.0)


def gamma2_center(alpha: float) -> float:
    return 1.0 - 2.0 ** (alpha / 2.0) * math.sin(alpha * math.pi / 4.0)


def gamma2_product(alpha: float) -> float:
    return -(2.0**alpha) * math.cos(alpha * math.pi / 4.0) ** 2


def gamma1_residual(alpha: float, a, b):
    c = gamma1_center(alpha)
    return (a - c) * (b - c) - gamma1_product(alpha)


def gamma2_residual(alpha: float, a, b):
    c = gamma2_center(alpha)
    return (a - c) * (b - c) - gamma2_product(alpha)

# }}}


# {{{ boundary curves

def gamma1(alpha: FractionalOrder | float, a: float) -> float:
    """Return ``b`` on the ``z = 1`` boundary for the given ``a``."""
    al = as_order(alpha).alpha
    c = gamma1_center(al)
    if abs(a - c) <= ASYMPTOTE_TOL * max(1.0, abs(c)):
        raise UndefinedValueError(f"a = {a} is the asymptote of G1")
    return c + gamma1_product(al) / (a - c)


def gamma1_explicit(alpha: float, a: float) -> float:
    """Same curve as :func:`gamma1`, written as a single quotient."""
    h = 2.0 ** (alpha - 1.0)
    return (2.0 * (2.0**alpha - 1.0) + 2.0 * a * (1.0 - h)) / (2.0 * (a - 1.0 + h))


def gamma2(alpha: FractionalOrder | float, a: float) -> float:
    """Return ``b`` on the ``z = -1`` boundary for the given ``a``."""
    al = as_order(alpha).alpha
    c = gamma2_center(al)
    if abs(a - c) <= ASYMPTOTE_TOL * max(1.0, abs(c)):
        raise UndefinedValueError(f"a = {a} is the asymptote of G2")
    return c + gamma2_product(al) / (a - c)


def gamma2_explicit(alpha: float, a: float) -> float:
    r = 2.0 ** (alpha / 2.0) * math.sin(alpha * math.pi / 4.0)
    return -(1.0 + 2.0**alpha - a + (a - 2.0) * r) / (a - 1.0 + r)


def gamma3(alpha: FractionalOrder | float, t: float) -> Point:
    """Parametric ``z = e^{it}`` boundary point ``(a(t), b(t))``.

    Defined for ``t`` in ``(0, pi)`` and ``(pi, 2 pi)``; the two halves are
    mirror images across ``a = b``.  At ``t = 0`` and ``t = pi`` the formula
    is ``0/0`` and an :class:`UndefinedValueError` is raised; the limits are
    ``(1 - 2^alpha, 1 - 2^alpha)`` and ``(b3, a3)``.
    """
    al = as_order(alpha).alpha
    if not 0.0 < t < 2.0 * math.pi:
        raise UndefinedValueError(f"G3 needs 0 < t < 2 pi, got t = {t}")
    if abs(t - math.pi) < G3_PI_GAP:
        # 0/0 that rounding turns into a wrong finite value
        raise UndefinedValueError(f"G3 is 0/0 at t = pi (got t = {t})")
    s1 = _pos_pow(math.sin(t / 2.0), al)
    s2 = math.sin(t + al * (math.pi - t) / 2.0)
    s3 = _pos_pow(math.sin(t / 4.0), al)
    s4 = math.sin(t * (al - 2.0) / 4.0)
    s5 = _pos_pow(math.cos(t / 4.0), al)
    s6 = math.sin(((al - 2.0) * t - 2.0 * al * math.pi) / 4.0)

    den = s5 * s4 - s3 * s6
    if not math.isfinite(den) or den == 0.0:
        raise UndefinedValueError(f"G3 denominator vanishes at t = {t}")
    lhs = 2.0**al * (-s3 * s4 + s5 * s6) * den
    rhs = s1 * s2**2
    inner = lhs + rhs
    # the two terms cancel as t -> 0; a negative sum at rounding level is zero
    if inner < 0.0 and -inner <= 64.0 * np.finfo(float).eps * (abs(lhs) + abs(rhs)):
        inner = 0.0
    rad = s1 * inner
    if not rad >= 0.0:
        raise UndefinedValueError(f"G3 radicand is negative at t = {t}")
    root = math.sqrt(rad)
    a = 1.0 + (-s1 * s2 + root) / den
    b = 1.0 - (s1 * s2 + root) / den
    if not (math.isfinite(a) and math.isfinite(b)):
        raise UndefinedValueError(f"G3 is not finite at t = {t}")
    return a, b


def gamma3_small_t(alpha: FractionalOrder | float, tau: float) -> Point:
    """G3 near ``t = 0`` in the variable ``tau = t^(1 - alpha)``.

    Expanding the characteristic equation at ``z = e^{it}`` and dropping
    terms that are ``O(t)`` and ``O(t^alpha)`` relative to the kept ones gives

        a + b - 2 = S = sin(alpha pi/2) / (2^(alpha-3) (2-alpha) tau - 2^(-alpha-1) sin(alpha pi/2)),
        (a - 1)(b - 1) = -2^(alpha-1) S.

    For ``alpha`` close to one the exact formula needs ``t`` far below the
    double range to reach the diagonal corner; in ``tau`` it is reached
    smoothly.  ``tau = 0`` gives the corner ``(1 - 2^alpha, 1 - 2^alpha)``.
    """
    al = as_order(alpha).alpha
    if not tau >= 0.0:
        raise ValueError(f"tau must be non-negative, got {tau}")
    sn = math.sin(al * math.pi / 2.0)
    den = 2.0 ** (al - 3.0) * (2.0 - al) * tau - 2.0 ** (-al - 1.0) * sn
    if den >= 0.0:
        raise UndefinedValueError(f"small-t expansion is not valid at tau = {tau}")
    S = sn / den
    # S^2 - 4P = S (S + 2^(alpha+1)), with the second factor in cancellation-free form
    disc = S * (2.0 ** (2.0 * al - 2.0) * (2.0 - al) * tau / den)
    root = math.sqrt(max(disc, 0.0))
    return 1.0 + 0.5 * (S + root), 1.0 + 0.5 * (S - root)


def _pos_pow(x: float, p: float) -> float:
    # sin/cos of the quarter angles are >= 0 on [0, 2 pi] up to rounding
    return max(x, 0.0) ** p


def boundary_equations(alpha: float, t: float, a: float, b: float) -> tuple[float, float]:
    """Real and imaginary parts of the characteristic function on ``|z| = 1``.

    Both vanish exactly when ``(a, b)`` places a root at ``z = e^{it}``.
    """
    al = alpha
    st2 = _pos_pow(math.sin(t / 2.0), al)
    st4 = _pos_pow(math.sin(t / 4.0), al)
    ct4 = _pos_pow(math.cos(t / 4.0), al)
    w = t * (0.5 + 0.75 * al)
    s = a + b - 2.0
    p = (a - 1.0) * (b - 1.0)
    h = 2.0 ** (al - 1.0)
    re = (
        -(2.0**al) * st2 * math.cos(al * (math.pi + t) / 2.0 + t)
        + p * math.cos(al * t)
        - h * s * st4 * math.cos(al * math.pi / 2.0 + w)
        + h * s * ct4 * math.cos(w)
    )
    im = (
        -(2.0**al) * st2 * math.sin(al * (math.pi + t) / 2.0 + t)
        + p * math.sin(al * t)
        - h * s * st4 * math.sin(al * math.pi / 2.0 + w)
        + h * s * ct4 * math.sin(w)
    )
    return re, im

# }}}


# {{{ intersections

class Corners(NamedTuple):
    """Corner points of the stability region.

    ``p1`` and ``p2`` join G1 and G2 (``p1`` above the diagonal), ``p3 = (a3,
    b3)`` and its mirror ``p4 = (b3, a3)`` join G2 and G3.
    """

    p1: Point
    p2: Point
    p3: Point
    p4: Point


def curve_intersections(alpha: FractionalOrder | float) -> Corners:
    al = as_order(alpha).alpha
    if al >= 1.0:
        raise RegionError("G1 and G2 do not intersect for alpha = 1")
    if al > ALPHA_MAX:
        raise RegionError(f"alpha = {al!r} is too close to 1 for a bounded region in double precision")

    sn = math.sin(al * math.pi / 4.0)
    cs = math.cos(al * math.pi / 4.0)
    root = math.sqrt(2.0**al + 4.0**al - 2.0 ** (1.0 + 1.5 * al) * sn)

    num_a = 2.0 ** (1.0 + al / 2.0) - 2.0 * sn
    den_a = 2.0 ** (al / 2.0) - 2.0 * sn
    num_b = 2.0 ** (1.0 + al / 2.0) - 2.0 ** (1.0 + al) * sn
    den_b = 2.0 ** (1.0 + al / 2.0) + 2.0 ** (1.5 * al) - 2.0 ** (1.0 + al) * sn

    a1 = (num_a - root) / den_a
    b1 = (num_b - (2.0 - 2.0**al) * root) / (den_b - 2.0 * root)
    a2 = (num_a + root) / den_a
    b2 = (num_b + (2.0 - 2.0**al) * root) / (den_b + 2.0 * root)

    q = math.sqrt(2.0 * (2.0 - 2.0 * al + al * al) * cs * cs)
    den3 = al * cs + (al - 2.0) * sn
    a3 = 1.0 + 2.0 ** (al / 2.0) * (2.0 - al + q) / den3
    b3 = 1.0 + 2.0 ** (al / 2.0) * (2.0 - al - q) / den3

    return Corners((a1, b1), (a2, b2), (a3, b3), (b3, a3))

# }}}


# {{{ characteristic function

def char_eq(z: complex, a: float, b: float, alpha: FractionalOrder | float) -> complex:
    """Characteristic function of the two-periodic linear system.

    Returns ``-z (z-1)^alpha + (a+b-2)/2 z^((1+alpha)/2) [(sqrt z + 1)^alpha -
    (sqrt z - 1)^alpha] + (a-1)(b-1) z^alpha``.  The middle term is evaluated
    as ``(a+b-2) z^alpha (1-1/z)^alpha K_odd(z)`` with ``K_odd`` the odd part
    of the kernel generating function, which is independent of the branch of
    ``sqrt z`` and continuous across the negative real axis for ``|z| >= 1``.
    """
    al = as_order(alpha).alpha
    z = complex(z)
    if z == 0:
        raise ValueError("z must be non-zero")
    if abs(z - 1.0) < 1e-300:
        raise SingularityError("z = 1 is a branch point of the characteristic function")
    za = z**al
    lead = -z * (z - 1.0) ** al
    last = (a - 1.0) * (b - 1.0) * za
    if a + b - 2.0 == 0.0:
        return lead + last
    s = cmath.sqrt(z)
    odd = 0.5 * s * ((1.0 - 1.0 / s) ** (-al) - (1.0 + 1.0 / s) ** (-al))
    mid = (a + b - 2.0) * za * (1.0 - 1.0 / z) ** al * odd
    return lead + mid + last

# }}}


# {{{ region

@dataclass(frozen=True)
class BoundaryCurve:
    """Samples of one boundary arc; ``params`` is ``a`` for G1/G2, ``t`` for G3."""

    label: str
    params: np.ndarray = field(repr=False)
    points: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class StabilityRegion:
    alpha: FractionalOrder
    polygon: np.ndarray = field(repr=False)
    anchor: Point
    intersections: Corners
    curves: tuple[BoundaryCurve, ...] = field(repr=False, default=())

    def contains(self, a: float, b: float) -> bool:
        return contains(self, a, b)


def _hyperbola_arc(center: float, product: float, p_from: Point, p_to: Point, n: int) -> np.ndarray:
    # (a - c)(b - c) = product, sampled uniformly in log|a - c| so both the
    # flat and the steep parts of the branch are resolved
    r = math.sqrt(abs(product))
    s_from = math.log(abs(p_from[0] - center) / r)
    s_to = math.log(abs(p_to[0] - center) / r)
    sign = math.copysign(1.0, p_from[0] - center)
    s = np.linspace(s_from, s_to, n)
    a = center + sign * r * np.exp(s)
    b = center + product / (a - center)
    pts = np.column_stack([a, b])
    pts[0] = p_from
    pts[-1] = p_to
    return pts


def _gamma3_half(alpha: float, n: int, corner_diag: Point, corner_end: Point) -> tuple[np.ndarray, np.ndarray]:
    """Samples of G3 for ``t`` in ``(0, pi)``: from the diagonal point to ``(b3, a3)``.

    The curve approaches the diagonal corner only like ``t^((1 - alpha)/2)``,
    so below ``G3_SWITCH_T`` it is sampled through :func:`gamma3_small_t`,
    log-spaced in ``tau = t^(1 - alpha)``.  Their ``t`` values may underflow
    to zero for ``alpha`` near one.
    """
    n_small = n // 4
    n_log = n // 4
    n_lin = n - n_small - n_log
    tau_sw = G3_SWITCH_T ** (1.0 - alpha)
    taus = np.logspace(-30.0, math.log10(tau_sw), n_small, endpoint=False)
    small = np.array([gamma3_small_t(alpha, tau) for tau in taus])
    t_small = np.exp(np.log(taus) / (1.0 - alpha))

    t_hi = math.pi - 1e-4
    ts = np.concatenate([
        np.logspace(math.log10(G3_SWITCH_T), math.log10(0.5), n_log, endpoint=False),
        np.linspace(0.5, t_hi, n_lin),
    ])
    pts = np.array([gamma3(alpha, t) for t in ts])
    ts = np.concatenate([t_small, ts])
    pts = np.vstack([small.reshape(-1, 2), pts])
    # near the corner the curve crosses the diagonal at right angles and the
    # gap a - b drowns in rounding; the corner vertex closes that sliver
    keep = pts[:, 0] - pts[:, 1] > G3_MIN_GAP
    return ts[keep], pts[keep]


def build_region(alpha: FractionalOrder | float, samples_per_arc: int = DEFAULT_SAMPLES) -> StabilityRegion:
    """Assemble the closed boundary of the stable region, counterclockwise.

    The vertices run along G1 from ``p2`` through ``(1, 1)`` to ``p1``, along
    the upper-left G2 branch to ``p3``, along G3 through the diagonal point
    ``(1 - 2^alpha, 1 - 2^alpha)`` to ``p4``, and back along the lower-right G2
    branch to ``p2``.
    """
    order = as_order(alpha)
    al = order.alpha
    if al >= 1.0:
        raise RegionError("the bounded region requires 0 < alpha < 1")
    if samples_per_arc < 16:
        raise ValueError(f"samples_per_arc must be at least 16, got {samples_per_arc}")

    corners = curve_intersections(order)
    p1, p2, p3, p4 = corners
    c1, k1 = gamma1_center(al), gamma1_product(al)
    c2, k2 = gamma2_center(al), gamma2_product(al)
    diag = (1.0 - 2.0**al, 1.0 - 2.0**al)

    # sample G1 from (1, 1) out to p2 and mirror, so (1, 1) is a vertex
    half1 = _hyperbola_arc(c1, k1, (1.0, 1.0), p2, samples_per_arc // 2 + 1)
    g1 = np.vstack([half1[::-1], half1[1:, ::-1]])
    g1[-1] = p1
    g2_upper = _hyperbola_arc(c2, k2, p1, p3, samples_per_arc)
    g2_lower = _hyperbola_arc(c2, k2, p4, p2, samples_per_arc)

    ts, half = _gamma3_half(al, max(samples_per_arc // 2, 8), diag, p4)
    # the sampled tail can overshoot p4 when alpha is near one
    past = half[:, 1] <= p4[1] + 1e-12 * abs(p4[1])
    ts, half = ts[~past], half[~past]
    # t in (pi, 2 pi) mirrors t in (0, pi); walk p3 -> diag -> p4
    g3_pts = np.vstack([half[::-1, ::-1], [diag], half])
    g3_par = np.concatenate([2.0 * math.pi - ts[::-1], [0.0], ts])
    g3_pts = np.vstack([[p3], g3_pts, [p4]])
    g3_par = np.concatenate([[math.pi], g3_par, [math.pi]])

    ring = np.vstack([g1[:-1], g2_upper[:-1], g3_pts[:-1], g2_lower[:-1]])
    ring = _drop_repeats(ring)

    curves = (
        BoundaryCurve("G1", g1[:, 0].copy(), g1),
        BoundaryCurve("G2", g2_upper[:, 0].copy(), g2_upper),
        BoundaryCurve("G2", g2_lower[:, 0].copy(), g2_lower),
        BoundaryCurve("G3", g3_par, g3_pts),
    )
    # midpoint of (1, 1) and the diagonal corner; the midpoint of p1 and p2
    # lies beyond the convex G1 branch and is outside
    anchor = (c1, c1)
    ring.setflags(write=False)
    return StabilityRegion(order, ring, anchor, corners, curves)


def _drop_repeats(ring: np.ndarray, tol: float = 1e-12) -> np.ndarray:
    step = np.linalg.norm(np.diff(ring, axis=0, append=ring[:1]), axis=1)
    return ring[step > tol]


def points_in_polygon(polygon: np.ndarray, pts: np.ndarray, eps: float = BOUNDARY_EPS) -> np.ndarray:
    """Even-odd crossing test for many points; points within ``eps`` of an edge are outside."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    x0 = polygon[:, 0][None, :]
    y0 = polygon[:, 1][None, :]
    x1 = np.roll(polygon[:, 0], -1)[None, :]
    y1 = np.roll(polygon[:, 1], -1)[None, :]

    straddles = (y0 <= y) != (y1 <= y)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_cross = x0 + (y - y0) * (x1 - x0) / (y1 - y0)
    crossings = np.count_nonzero(straddles & (x < x_cross), axis=1)
    inside = crossings % 2 == 1

    # distance to each edge segment
    dx = x1 - x0
    dy = y1 - y0
    seg2 = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        u = np.clip(((x - x0) * dx + (y - y0) * dy) / seg2, 0.0, 1.0)
    u = np.where(seg2 > 0.0, u, 0.0)
    dist = np.hypot(x - (x0 + u * dx), y - (y0 + u * dy)).min(axis=1)
    return inside & (dist > eps)


def distance_to_boundary(polygon: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    out = np.empty(len(pts))
    x0, y0 = polygon[:, 0], polygon[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    dx, dy = x1 - x0, y1 - y0
    seg2 = np.where(dx * dx + dy * dy > 0.0, dx * dx + dy * dy, 1.0)
    for i, (x, y) in enumerate(pts):
        u = np.clip(((x - x0) * dx + (y - y0) * dy) / seg2, 0.0, 1.0)
        out[i] = np.hypot(x - (x0 + u * dx), y - (y0 + u * dy)).min()
    return out


def contains(region: StabilityRegion, a: float, b: float) -> bool:
    """Whether ``(a, b)`` lies strictly inside the stable region."""
    if not (math.isfinite(a) and math.isfinite(b)):
        return False
    return bool(points_in_polygon(region.polygon, np.array([[a, b]]))[0])

# }}}


# {{{ simulation oracle

def classify_by_simulation(
    a: float,
    b: float,
    alpha: FractionalOrder | float,
    T: int = 500,
    tol: float = 1e-2,
) -> str:
    """Classify ``(a, b)`` by iterating the linear map from ``x(0) = 1``.

    Returns ``"stable"`` if ``|x(T)| < tol``, ``"unstable"`` if the overflow
    guard trips, ``"inconclusive"`` otherwise.
    """
    return classify_grid_by_simulation(np.array([[a, b]]), alpha, T, tol)[0]


def classify_grid_by_simulation(
    ab: np.ndarray,
    alpha: FractionalOrder | float,
    T: int = 500,
    tol: float = 1e-2,
) -> list[str]:
    """Vectorized :func:`classify_by_simulation` over rows of ``ab``."""
    from fracperiod.simulator import simulate_linear_batch, simulate_linear_fft

    if T < 500:
        raise ValueError(f"T must be at least 500, got {T}")
    ab = np.atleast_2d(np.asarray(ab, dtype=float))
    # a short direct run weeds out the fast divergers; only the survivors
    # pay for the long run
    final, diverged = simulate_linear_batch(ab[:, 0], ab[:, 1], alpha, min(T, DIRECT_STEPS), x0=1.0)
    if T > DIRECT_STEPS:
        alive = np.flatnonzero(~diverged)
        if alive.size:
            f2, d2 = simulate_linear_fft(ab[alive, 0], ab[alive, 1], alpha, T, x0=1.0)
            final[alive] = f2
            diverged[alive] = d2
    out = []
    for xf, div in zip(final, diverged):
        if div:
            out.append("unstable")
        elif abs(xf) < tol:
            out.append("stable")
        else:
            out.append("inconclusive")
    return out

# }}}

# vim: foldmethod=marker
