"""Asymptotic period-2 limit cycles of nonlinear fractional maps.

A trajectory that alternates between ``u`` (even times) and ``v`` (odd
times) in the limit must satisfy

    f(u) = u + 2^(alpha-1) (v - u),
    f(v) = v + 2^(alpha-1) (u - v),

and the cycle is stable when ``(f'(u), f'(v))`` lies inside the stability
region of the linear two-periodic map.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from fracperiod.kernel import FractionalOrder, as_order
from fracperiod.maps import MapDomainError, MapSpec, builtin, eval_with_derivative, evaluate
from fracperiod.region import (
    ALPHA_MAX,
    DEFAULT_SAMPLES,
    StabilityRegion,
    build_region,
    contains,
    gamma2_center,
)

logger = logging.getLogger(__name__)

#: |u - v| below this is a fixed point, not a cycle
DEGENERATE_GAP = 1e-8


class NoRealCycleError(ValueError):
    """The cycle conditions have no real non-degenerate solution."""


class DegenerateCycleError(NoRealCycleError):
    """Newton converged to a fixed point (``u == v``)."""


class ConvergenceError(NoRealCycleError):
    """Newton did not converge within the iteration budget."""


class WindowError(ValueError):
    pass


@dataclass(frozen=True)
class PeriodTwoCycle:
    u: float
    v: float
    a: float
    b: float
    alpha: FractionalOrder
    verdict: str

    @property
    def degenerate(self) -> bool:
        return self.verdict == "degenerate"

    def as_dict(self) -> dict:
        return {
            "alpha": self.alpha.alpha,
            "u": self.u,
            "v": self.v,
            "a": self.a,
            "b": self.b,
            "verdict": self.verdict,
        }


@dataclass(frozen=True)
class LocusPoint:
    param: float
    u: float
    v: float
    a: float
    b: float
    inside: bool


@dataclass(frozen=True)
class ParametricLocus:
    """``(f'(u), f'(v))`` along a parameter grid; missing cycles are NaN rows."""

    label: str
    alpha: FractionalOrder
    points: tuple[LocusPoint, ...] = field(repr=False)

    @property
    def params(self) -> np.ndarray:
        return np.array([p.param for p in self.points])

    @property
    def ab(self) -> np.ndarray:
        return np.array([[p.a, p.b] for p in self.points])

    @property
    def inside(self) -> np.ndarray:
        return np.array([p.inside for p in self.points], dtype=bool)


# {{{ helpers

@lru_cache(maxsize=16)
def region_for(alpha: float, samples: int = DEFAULT_SAMPLES) -> StabilityRegion:
    return build_region(alpha, samples)


def is_stable_pair(a: float, b: float, alpha: FractionalOrder | float) -> bool:
    """Membership of the unordered pair ``{a, b}`` in the stability region.

    For ``alpha = 1`` this is the classical condition ``|ab| < 1``, which is
    also used as the limit for orders too close to one to build the region.
    """
    al = as_order(alpha).alpha
    if al > ALPHA_MAX:
        return abs(a * b) < 1.0
    return contains(region_for(al), a, b)


def _coupling(alpha: float) -> float:
    return 2.0 ** (alpha - 1.0)


def _make_cycle(spec: MapSpec, u: float, v: float, order: FractionalOrder) -> PeriodTwoCycle:
    if u < v:
        u, v = v, u
    a = eval_with_derivative(spec, u).derivative
    b = eval_with_derivative(spec, v).derivative
    if abs(u - v) < DEGENERATE_GAP:
        verdict = "degenerate"
    elif is_stable_pair(a, b, order):
        verdict = "stable"
    else:
        verdict = "unstable"
    return PeriodTwoCycle(u, v, a, b, order, verdict)

# }}}


# {{{ cycle conditions and Newton

def cycle_residual(spec: MapSpec, u: float, v: float, alpha: FractionalOrder | float) -> tuple[float, float]:
    """Residuals of the two cycle conditions at ``(u, v)``."""
    h = _coupling(as_order(alpha).alpha)
    r1 = evaluate(spec, u) - u - h * (v - u)
    r2 = evaluate(spec, v) - v - h * (u - v)
    return r1, r2


def solve_period2(
    spec: MapSpec,
    alpha: FractionalOrder | float,
    guess: Sequence[float],
    maxiter: int = 100,
) -> PeriodTwoCycle:
    """Damped Newton iteration on the cycle conditions.

    Raises :class:`DegenerateCycleError` when the root found is a fixed point
    and :class:`ConvergenceError` when ``maxiter`` iterations do not suffice.
    """
    order = as_order(alpha)
    h = _coupling(order.alpha)
    u, v = (float(g) for g in guess)
    if not (math.isfinite(u) and math.isfinite(v)):
        raise ValueError(f"guess must be finite, got {guess!r}")

    def residual(u, v):
        fu, du = eval_with_derivative(spec, u)
        fv, dv = eval_with_derivative(spec, v)
        r = np.array([fu - u - h * (v - u), fv - v - h * (u - v)])
        jac = np.array([[du - 1.0 + h, -h], [-h, dv - 1.0 + h]])
        return r, jac

    try:
        r, jac = residual(u, v)
        norm = float(np.hypot(*r))
        for _ in range(maxiter):
            if norm < 1e-12:
                break
            try:
                step = np.linalg.solve(jac, -r)
            except np.linalg.LinAlgError:
                # singular Jacobian; nudge off the degenerate point
                step = -r
            lam = 1.0
            while True:
                un, vn = u + lam * step[0], v + lam * step[1]
                rn, jn = residual(un, vn)
                nn = float(np.hypot(*rn))
                if (math.isfinite(nn) and nn < (1.0 - 1e-4 * lam) * norm) or lam < 1e-10:
                    break
                lam *= 0.5
            converged_step = abs(lam * step).max() < 1e-14 * max(1.0, abs(un), abs(vn))
            u, v, r, jac, norm = un, vn, rn, jn, nn
            if not math.isfinite(norm):
                raise ConvergenceError("Newton iterates left the domain")
            if converged_step:
                break
        else:
            if norm >= 1e-12:
                raise ConvergenceError(f"no convergence after {maxiter} iterations (residual {norm:.3g})")
    except MapDomainError as exc:
        raise ConvergenceError(f"map evaluation failed during Newton: {exc}") from exc

    if norm > 1e-10:
        raise ConvergenceError(f"Newton stalled with residual {norm:.3g}")
    if abs(u - v) < DEGENERATE_GAP:
        raise DegenerateCycleError(f"Newton converged to the fixed point x = {u:.12g}")
    return _make_cycle(spec, u, v, order)


def find_cycles(
    spec: MapSpec,
    alpha: FractionalOrder | float,
    seeds: Iterable[tuple[float, float]],
) -> list[PeriodTwoCycle]:
    """Distinct non-degenerate cycles reached by Newton from ``seeds``."""
    found: list[PeriodTwoCycle] = []
    for seed in seeds:
        try:
            cyc = solve_period2(spec, alpha, seed)
        except NoRealCycleError:
            continue
        if not any(abs(c.u - cyc.u) < 1e-7 and abs(c.v - cyc.v) < 1e-7 for c in found):
            found.append(cyc)
    found.sort(key=lambda c: (c.verdict != "stable", -c.u))
    return found


def default_seeds(spec: MapSpec, lo: float = -3.0, hi: float = 3.0, n: int = 9) -> list[tuple[float, float]]:
    """Grid of starting pairs with ``u > v`` covering ``[lo, hi]^2``."""
    if spec.kind == "gauss":
        lo, hi = spec.parameter - 0.5, spec.parameter + 1.5
    elif spec.kind == "logistic":
        lo, hi = -0.5, 1.5
    g = np.linspace(lo, hi, n)
    return [(float(x), float(y)) for x in g for y in g if x > y]

# }}}


# {{{ closed forms

def logistic_cycle_closed_form(lam: float, alpha: FractionalOrder | float) -> tuple[float, float]:
    """Cycle of ``lam x (1 - x)`` in closed form, ``u >= v``."""
    al = as_order(alpha).alpha
    if lam == 0.0:
        raise ValueError("lambda must be non-zero")
    p = 2.0**al
    rad = (lam - (1.0 - p)) * (lam - (1.0 + p))
    if rad < 0.0:
        raise NoRealCycleError(f"no real cycle for lambda = {lam} (needs lambda > {1.0 + p:.6g})")
    root = math.sqrt(rad)
    u = ((p - 1.0) + lam + root) / (2.0 * lam)
    v = ((p - 1.0) + lam - root) / (2.0 * lam)
    return (u, v) if u >= v else (v, u)


def cubic_cycle_closed_form(beta: float, alpha: FractionalOrder | float) -> list[tuple[float, float]]:
    """Real cycles of ``beta x (6 - x^2)``.

    Returns whichever of ``(u0, -u0)``, ``(u1, v1)`` and ``(-u1, -v1)`` are
    real, in that order.
    """
    al = as_order(alpha).alpha
    if beta >= 0.0:
        raise ValueError("the cubic cycle formulas need beta < 0")
    p = 2.0**al
    out: list[tuple[float, float]] = []

    r0 = (6.0 * beta + p - 1.0) / beta
    if r0 >= 0.0:
        u0 = math.sqrt(r0)
        out.append((u0, -u0))

    q = 4.0 - 2.0 ** (2.0 + al) - 3.0 * 4.0**al + 24.0 * (p - 2.0) * beta + 144.0 * beta**2
    if q >= 0.0:
        z = -math.sqrt(q) / beta
        w = 12.0 + (p - 2.0) / beta - z
        if w >= 0.0:
            u1 = 0.5 * math.sqrt(w)
            v1 = 2.0 ** (-1.0 - al) * u1 * ((p - 2.0) * beta + (12.0 + z) * beta**2) / beta
            out.append((u1, v1))
            out.append((-u1, -v1))
    return out


def cubic_thresholds(alpha: FractionalOrder | float) -> tuple[float, float]:
    """``(beta0, beta1)``: where the symmetric branch crosses the two G1 branches."""
    p = 2.0 ** as_order(alpha).alpha
    return (2.0 - 3.0 * p) / 12.0, (1.0 - p) / 6.0


def logistic_window(alpha: FractionalOrder | float) -> tuple[float, float]:
    al = as_order(alpha).alpha
    lo = 1.0 + 2.0**al
    hi = 1.0 + math.sqrt(2.0**al + 2.0 ** (1.0 + 2.0 * al)
                         - 2.0 ** (1.0 + 1.5 * al) * math.sin(al * math.pi / 4.0))
    return lo, hi

# }}}


# {{{ cycles for a parameter value

def cycles_at(spec: MapSpec, alpha: FractionalOrder | float,
              seeds: Iterable[tuple[float, float]] | None = None) -> list[PeriodTwoCycle]:
    """All cycles at the map's current parameter, stable ones first.

    Closed forms are used for the logistic and cubic families; other maps go
    through Newton from ``seeds`` (a coarse grid by default).
    """
    order = as_order(alpha)
    if spec.kind == "logistic":
        try:
            u, v = logistic_cycle_closed_form(spec.parameter, order)
        except NoRealCycleError:
            return []
        cyc = _make_cycle(spec, u, v, order)
        return [] if cyc.degenerate else [cyc]
    if spec.kind == "cubic" and spec.parameter < 0.0:
        out = []
        for u, v in cubic_cycle_closed_form(spec.parameter, order):
            cyc = _make_cycle(spec, u, v, order)
            if not cyc.degenerate:
                out.append(cyc)
        out.sort(key=lambda c: c.verdict != "stable")
        return out
    if spec.kind == "linear2":
        raise ValueError("the two-periodic linear map has no period-2 limit cycles to solve for")
    return find_cycles(spec, order, default_seeds(spec) if seeds is None else seeds)


def cubic_branch(beta: float, alpha: FractionalOrder | float, branch: str) -> tuple[float, float] | None:
    forms = cubic_cycle_closed_form(beta, alpha)
    if branch == "u0":
        return next(((u, v) for u, v in forms if u == -v), None)
    if branch == "u1":
        rest = [(u, v) for u, v in forms if u != -v]
        return rest[0] if rest else None
    raise ValueError(f"unknown cubic branch {branch!r}")

# }}}


# {{{ loci and windows

def _nan_point(param: float) -> LocusPoint:
    nan = float("nan")
    return LocusPoint(param, nan, nan, nan, nan, False)


def locus(
    family: str | MapSpec,
    alpha: FractionalOrder | float,
    grid: Iterable[float],
    branch: str | None = None,
) -> ParametricLocus:
    """Trace ``(f'(u), f'(v))`` over a parameter grid.

    ``branch`` picks ``"u0"`` or ``"u1"`` for the cubic family; without it
    (and for all other families) the first stable cycle is recorded, falling
    back to the first real one.  Parameters without a real cycle give NaN
    rows with ``inside = False``.
    """
    order = as_order(alpha)
    spec = builtin(family, 0.0) if isinstance(family, str) else family
    label = {"logistic": "L1", "gauss": "L4"}.get(spec.kind, spec.kind)
    if spec.kind == "cubic":
        label = {"u0": "L2", "u1": "L3"}.get(branch or "", "cubic")

    points = []
    previous: list[tuple[float, float]] = []
    for param in grid:
        param = float(param)
        s = spec.with_parameter(param)
        if spec.kind == "cubic" and branch is not None:
            uv = cubic_branch(param, order, branch) if param < 0.0 else None
            cycles = [] if uv is None else [_make_cycle(s, *uv, order)]
            cycles = [c for c in cycles if not c.degenerate]
        elif spec.kind in ("logistic", "cubic"):
            cycles = cycles_at(s, order)
        else:
            # continuation: last solutions first, then the coarse grid
            seeds = previous + default_seeds(s)
            cycles = find_cycles(s, order, seeds)
            previous = [(c.u, c.v) for c in cycles]
        if not cycles:
            points.append(_nan_point(param))
            continue
        c = cycles[0]
        points.append(LocusPoint(param, c.u, c.v, c.a, c.b, c.verdict == "stable"))
    return ParametricLocus(label, order, tuple(points))


def has_stable_cycle(spec: MapSpec, alpha: FractionalOrder | float) -> bool:
    return any(c.verdict == "stable" for c in cycles_at(spec, alpha))


def _bisect_edge(pred, inside: float, outside: float, tol: float = 1e-6) -> float:
    """Boundary of ``pred`` between a parameter where it holds and one where it fails."""
    while abs(outside - inside) > tol:
        mid = 0.5 * (inside + outside)
        if pred(mid):
            inside = mid
        else:
            outside = mid
    return 0.5 * (inside + outside)


def cubic_beta2(alpha: FractionalOrder | float, tol: float = 1e-6) -> float:
    """Parameter where the asymmetric cubic branch leaves the region through G2.

    Bisection on region membership of ``(f'(u1), f'(v1))``, bracketed between
    ``beta0`` (inside just below it) and the parameter where the branch stops
    being real.
    """
    order = as_order(alpha)
    beta0, _ = cubic_thresholds(order)

    def inside(beta: float) -> bool:
        uv = cubic_branch(beta, order, "u1")
        if uv is None:
            return False
        c = _make_cycle(builtin("cubic", beta), *uv, order)
        return c.verdict == "stable"

    start = beta0 - 1e-4
    if not inside(start):
        raise WindowError("asymmetric cubic branch is not inside the region below beta0")
    lo = start
    step = 1e-3
    while inside(lo - step):
        lo -= step
        if lo < -10.0:
            raise WindowError("asymmetric cubic branch never leaves the region")
    return _bisect_edge(inside, lo, lo - step, tol)


def parameter_window(
    family: str | MapSpec,
    alpha: FractionalOrder | float,
    grid: Sequence[float] | None = None,
    tol: float = 1e-6,
) -> tuple[float, float]:
    """Parameter interval on which a stable period-2 cycle exists.

    Logistic uses its closed form, the cubic map combines the closed-form
    ``beta1`` with a numeric ``beta2``, and any other map is scanned on
    ``grid`` with bisection refinement of both edges.
    """
    order = as_order(alpha)
    spec = builtin(family, 0.0) if isinstance(family, str) else family
    if spec.kind == "logistic":
        return logistic_window(order)
    if spec.kind == "cubic":
        return cubic_beta2(order, tol), cubic_thresholds(order)[1]
    if spec.kind == "linear2":
        raise WindowError("no parameter window for the two-periodic linear map")
    if grid is None:
        if spec.kind != "gauss":
            raise WindowError("a parameter grid is required for expression maps")
        grid = np.round(np.arange(-0.3, 0.8 + 1e-9, 0.01), 10)
    return scan_window(spec, order, grid, tol)


def scan_window(spec: MapSpec, alpha: FractionalOrder | float, grid: Sequence[float],
                tol: float = 1e-6) -> tuple[float, float]:
    order = as_order(alpha)
    loc = locus(spec, order, grid)
    flags = loc.inside
    if not flags.any():
        raise WindowError("scan found no parameter with a stable period-2 cycle")
    params = loc.params
    # longest run of consecutive stable grid points
    best = (0, 0)
    i = 0
    while i < len(flags):
        if flags[i]:
            j = i
            while j + 1 < len(flags) and flags[j + 1]:
                j += 1
            if j - i > best[1] - best[0] or not flags[best[0]]:
                best = (i, j)
            i = j + 1
        else:
            i += 1
    i, j = best

    def pred(p: float) -> bool:
        s = spec.with_parameter(p)
        seeds = [(pt.u, pt.v) for pt in loc.points if math.isfinite(pt.u) and abs(pt.param - p) < 0.05]
        return any(c.verdict == "stable" for c in find_cycles(s, order, seeds + default_seeds(s)))

    if spec.kind in ("logistic", "cubic"):
        def pred(p: float) -> bool:  # noqa: F811
            return has_stable_cycle(spec.with_parameter(p), order)

    lo = params[i] if i == 0 else _bisect_edge(pred, params[i], params[i - 1], tol)
    hi = params[j] if j == len(params) - 1 else _bisect_edge(pred, params[j], params[j + 1], tol)
    return float(lo), float(hi)

# }}}


# {{{ simulation cross-check

def reached_by_simulation(
    cycle: PeriodTwoCycle,
    spec: MapSpec,
    x0: float,
    T: int = 2000,
    tail: int = 100,
    tol: float = 1e-2,
) -> bool:
    """Whether the orbit from ``x0`` settles on ``{cycle.u, cycle.v}`` within ``tol``."""
    from fracperiod.simulator import detect_asymptotic_period2, iterate_direct

    traj = iterate_direct(spec, x0, cycle.alpha, T)
    if traj.diverged:
        return False
    found = detect_asymptotic_period2(traj, tail, tol)
    if found is None:
        return False
    hi, lo = max(found), min(found)
    return abs(hi - cycle.u) < tol and abs(lo - cycle.v) < tol


def cross_check(
    cycle: PeriodTwoCycle,
    spec: MapSpec,
    seeds: Iterable[float],
    T: int = 2000,
    tail: int = 100,
) -> bool:
    """Compare the linearized verdict with simulation from ``seeds``.

    A stable verdict that no seed reproduces, or an unstable one that some
    seed does reproduce, is logged as a warning; the verdict is left as is.
    """
    reached = any(reached_by_simulation(cycle, spec, x0, T, tail) for x0 in seeds)
    agrees = reached == (cycle.verdict == "stable")
    if not agrees:
        logger.warning(
            "cycle (%.6g, %.6g) is %s by linearization but %s reached by simulation",
            cycle.u, cycle.v, cycle.verdict, "is" if reached else "is not",
        )
    return agrees

# }}}

# vim: foldmethod=marker
