"""Direct and even/odd-split iteration of the fractional-order map.

The state obeys

    x(t+1) = x(0) + sum_{j=0}^{t} k_{t-j} (f(x(j)) - x(j)),

with ``k`` from :func:`fracperiod.kernel.kernel_table`.  Every step revisits
the whole history, so a run of ``T`` steps costs ``O(T^2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from fracperiod.kernel import FractionalOrder, as_order, kernel_table
from fracperiod.maps import MapDomainError, MapSpec, evaluate

#: ``|x|`` above this value is treated as divergence
OVERFLOW_GUARD = 1e12


@dataclass(frozen=True)
class Trajectory:
    """States ``x(0..T)``; truncated at ``diverged_at`` if the run blew up."""

    alpha: FractionalOrder
    x: np.ndarray = field(repr=False)
    diverged_at: int | None = None
    reason: str | None = None

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None

    def __len__(self) -> int:
        return len(self.x)


@dataclass(frozen=True)
class SplitTrajectory:
    """Even states ``p(t) = x(2t)`` and odd states ``q(t) = x(2t+1)``."""

    alpha: FractionalOrder
    p: np.ndarray = field(repr=False)
    q: np.ndarray = field(repr=False)
    diverged_at: int | None = None
    reason: str | None = None

    @property
    def diverged(self) -> bool:
        return self.diverged_at is not None

    def interleave(self) -> np.ndarray:
        n = len(self.p) + len(self.q)
        x = np.empty(n)
        x[0::2] = self.p
        x[1::2] = self.q
        return x


def _check(x0: float, T: int) -> None:
    if T < 1:
        raise ValueError(f"T must be at least 1, got {T}")
    if not math.isfinite(x0):
        raise ValueError(f"x0 must be finite, got {x0}")


def _increment(spec: MapSpec, x: float, t: int) -> float:
    try:
        return evaluate(spec, x, t) - x
    except (MapDomainError, OverflowError) as exc:
        raise _Blowup(f"map evaluation failed: {exc}") from exc


class _Blowup(Exception):
    pass


def _blown(value: float) -> str | None:
    if not math.isfinite(value):
        return "non-finite state"
    if abs(value) > OVERFLOW_GUARD:
        return "overflow guard exceeded"
    return None


def iterate_direct(spec: MapSpec, x0: float, alpha: FractionalOrder | float, T: int) -> Trajectory:
    """Iterate the full-history recurrence for ``T`` steps.

    For ``alpha = 1`` the kernel is identically one and the recurrence
    telescopes to ``x(t+1) = f(x(t))``, which is evaluated directly so that
    the classical orbit is reproduced bit for bit.
    """
    order = as_order(alpha)
    _check(x0, T)
    x = np.empty(T + 1)
    x[0] = x0

    if order.is_classical:
        for t in range(T):
            try:
                nxt = evaluate(spec, x[t], t)
            except (MapDomainError, OverflowError) as exc:
                return Trajectory(order, x[: t + 1].copy(), t + 1, f"map evaluation failed: {exc}")
            x[t + 1] = nxt
            reason = _blown(nxt)
            if reason:
                return Trajectory(order, x[: t + 2].copy(), t + 1, reason)
        return Trajectory(order, x)

    k = kernel_table(order, T).coeffs
    g = np.empty(T + 1)
    for t in range(T):
        try:
            g[t] = _increment(spec, x[t], t)
        except _Blowup as exc:
            return Trajectory(order, x[: t + 1].copy(), t + 1, str(exc))
        # ascending-j sum of k_{t-j} g_j
        nxt = x0 + np.cumsum(k[t::-1] * g[: t + 1])[-1]
        x[t + 1] = nxt
        reason = _blown(nxt)
        if reason:
            return Trajectory(order, x[: t + 2].copy(), t + 1, reason)
    return Trajectory(order, x)


def iterate_from_history(spec: MapSpec, history, alpha: FractionalOrder | float, T: int) -> Trajectory:
    """Continue the full-history recurrence from prescribed states.

    ``history`` fixes ``x(0), ..., x(n-1)`` (``x(0)`` doubles as the initial
    value of the sum); states from ``x(n)`` to ``x(T)`` are computed.  This
    lets an orbit be forced onto a candidate cycle and then released.
    """
    order = as_order(alpha)
    h = np.asarray(history, dtype=float)
    if h.ndim != 1 or h.size == 0:
        raise ValueError("history must be a non-empty 1-d sequence")
    _check(float(h[0]), T)
    if h.size > T + 1:
        raise ValueError(f"history of length {h.size} exceeds T + 1 = {T + 1}")
    x = np.empty(T + 1)
    x[: h.size] = h
    x0 = float(h[0])
    k = kernel_table(order, T).coeffs
    g = np.empty(T + 1)
    try:
        for t in range(h.size - 1):
            g[t] = _increment(spec, x[t], t)
        for t in range(h.size - 1, T):
            g[t] = _increment(spec, x[t], t)
            nxt = x0 + np.cumsum(k[t::-1] * g[: t + 1])[-1]
            x[t + 1] = nxt
            reason = _blown(nxt)
            if reason:
                return Trajectory(order, x[: t + 2].copy(), t + 1, reason)
    except _Blowup as exc:
        return Trajectory(order, x[: t + 1].copy(), t + 1, str(exc))
    return Trajectory(order, x)


def iterate_split(spec: MapSpec, x0: float, alpha: FractionalOrder | float, T: int) -> SplitTrajectory:
    """Iterate the even/odd split form of the recurrence.

    With ``gp(k) = f(p(k)) - p(k)`` and ``gq(k) = f(q(k)) - q(k)``::

        p(t+1) = x0 + sum_k k_{2t+1-2k} gp(k) + sum_k k_{2t-2k} gq(k)
        q(t+1) = x0 + sum_k k_{2t+2-2k} gp(k) + gp(t+1) + sum_k k_{2t+1-2k} gq(k)

    Interleaving ``p`` and ``q`` reproduces ``x(0..T)``.
    """
    order = as_order(alpha)
    _check(x0, T)
    n_p = T // 2 + 1
    n_q = (T + 1) // 2
    k = kernel_table(order, T + 1).coeffs
    k_even = k[0::2]  # k_{2m}
    k_odd = k[1::2]  # k_{2m+1}

    p = np.empty(n_p)
    q = np.empty(n_q)
    gp = np.empty(n_p)
    gq = np.empty(n_q)

    def done(np_, nq_, index, reason):
        return SplitTrajectory(order, p[:np_].copy(), q[:nq_].copy(), index, reason)

    p[0] = x0
    try:
        gp[0] = _increment(spec, p[0], 0)
    except _Blowup as exc:
        return done(1, 0, 1, str(exc))
    if n_q:
        q[0] = x0 + gp[0]
        if reason := _blown(q[0]):
            return done(1, 1, 1, reason)

    for t in range(n_q):
        # q(t) is known; p(t+1) needs gq(0..t)
        try:
            gq[t] = _increment(spec, q[t], 1)
        except _Blowup as exc:
            return done(t + 1, t + 1, 2 * t + 2, str(exc))
        if t + 1 >= n_p:
            break
        s_p = np.cumsum(k_odd[t::-1] * gp[: t + 1])[-1]
        s_q = np.cumsum(k_even[t::-1] * gq[: t + 1])[-1]
        p[t + 1] = x0 + s_p + s_q
        if reason := _blown(p[t + 1]):
            return done(t + 2, t + 1, 2 * t + 2, reason)
        if t + 1 >= n_q:
            break
        try:
            gp[t + 1] = _increment(spec, p[t + 1], 0)
        except _Blowup as exc:
            return done(t + 2, t + 1, 2 * t + 3, str(exc))
        s_p = np.cumsum(k_even[t + 1:0:-1] * gp[: t + 1])[-1]
        s_q = np.cumsum(k_odd[t::-1] * gq[: t + 1])[-1]
        q[t + 1] = x0 + s_p + gp[t + 1] + s_q
        if reason := _blown(q[t + 1]):
            return done(t + 2, t + 2, 2 * t + 3, reason)

    return SplitTrajectory(order, p, q)


def classical_orbit(spec: MapSpec, x0: float, T: int) -> np.ndarray:
    """``x(t+1) = f(x(t))`` for reference."""
    x = np.empty(T + 1)
    x[0] = x0
    for t in range(T):
        x[t + 1] = evaluate(spec, x[t], t)
    return x


def simulate_linear_batch(
    a: np.ndarray,
    b: np.ndarray,
    alpha: FractionalOrder | float,
    T: int,
    x0: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Run many two-periodic linear maps side by side.

    Returns ``(x(T), diverged)``; for diverged entries ``x(T)`` is ``inf``.
    Rows are dropped from the working set once they trip the overflow guard.
    """
    order = as_order(alpha)
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n = a.shape[0]
    k = kernel_table(order, T).coeffs

    final = np.full(n, np.inf)
    diverged = np.zeros(n, dtype=bool)
    active = np.arange(n)
    # g is stored time-major so each step is one matrix-vector product
    g = np.empty((T + 1, n))
    xt = np.full(n, float(x0))
    for t in range(T):
        c = a[active] if t % 2 == 0 else b[active]
        g[t, : active.size] = (c - 1.0) * xt
        xt = x0 + k[t::-1] @ g[: t + 1, : active.size]
        bad = ~np.isfinite(xt) | (np.abs(xt) > OVERFLOW_GUARD)
        if bad.any():
            diverged[active[bad]] = True
            keep = ~bad
            active = active[keep]
            g[: t + 1, : active.size] = g[: t + 1][:, np.flatnonzero(keep)]
            xt = xt[keep]
            if active.size == 0:
                break
    final[active] = xt
    return final, diverged


def simulate_linear_fft(
    a: np.ndarray,
    b: np.ndarray,
    alpha: FractionalOrder | float,
    T: int,
    x0: float = 1.0,
    block: int = 64,
) -> tuple[np.ndarray, np.ndarray]:
    """Same contract as :func:`simulate_linear_batch`, in ``O(T log^2 T)``.

    The history sum is split recursively: once the states on ``[l, m)`` are
    known, their contribution to every state on ``[m, r)`` is added with one
    FFT convolution.  No kernel coefficient is dropped, so the result agrees
    with the direct sum up to rounding.
    """
    from scipy import fft as sfft

    order = as_order(alpha)
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    n = a.shape[0]
    k = kernel_table(order, T).coeffs
    cm1 = (a - 1.0, b - 1.0)

    # y[t] accumulates sum_{j < t} k_{t-1-j} g_j, so x(t) = x0 + y[t]
    y = np.zeros((T + 1, n))
    g = np.zeros((T + 1, n))
    xt = np.full(n, float(x0))
    dead = np.zeros(n, dtype=bool)
    kernel_ffts: dict[tuple[int, int], np.ndarray] = {}

    def leaf(lo: int, hi: int) -> None:
        nonlocal xt
        stop = min(hi, T + 1)
        for t in range(lo, stop):
            xt = x0 + y[t]
            bad = ~np.isfinite(xt) | (np.abs(xt) > OVERFLOW_GUARD)
            if bad.any():
                dead[bad] = True
                xt = np.where(bad, 0.0, xt)
            if t == T:
                return
            g[t] = cm1[t % 2] * xt
            if t + 1 < stop:
                y[t + 1:stop] += k[: stop - t - 1, None] * g[t]

    def solve(lo: int, hi: int) -> None:
        if lo > T:
            return
        if hi - lo <= block:
            leaf(lo, hi)
            return
        mid = (lo + hi) // 2
        solve(lo, mid)
        hi_c = min(hi, T + 1)
        if mid < hi_c:
            # y[t] += sum_{j in [lo, mid)} k_{t-1-j} g_j  for t in [mid, hi_c)
            n_src = mid - lo
            n_ker = hi_c - lo - 1
            size = sfft.next_fast_len(n_src + n_ker, real=True)
            key = (size, n_ker)
            kf = kernel_ffts.get(key)
            if kf is None:
                kf = kernel_ffts[key] = sfft.rfft(k[:n_ker], size)[:, None]
            conv = sfft.irfft(sfft.rfft(g[lo:mid], size, axis=0) * kf, size, axis=0)
            y[mid:hi_c] += conv[n_src - 1: n_ker]
        solve(mid, hi)

    solve(0, 1 << int(np.ceil(np.log2(T + 1))))

    final = np.where(dead, np.inf, xt)
    return final, dead


def detect_asymptotic_period2(traj: Trajectory | np.ndarray, tail: int, tol: float) -> tuple[float, float] | None:
    """Detect an asymptotic two-cycle from the tail of a trajectory.

    Returns ``(u, v)``, the means of the last ``tail`` even-indexed and odd-indexed
    states, when each of those subsequences spreads less than ``tol`` and the
    two means differ by more than ``tol``.  Returns ``None`` for a fixed point
    or a tail that has not settled.
    """
    x = traj.x if isinstance(traj, Trajectory) else np.asarray(traj, dtype=float)
    T = len(x) - 1
    if tail < 1 or 2 * tail >= T:
        raise ValueError(f"tail must satisfy 1 <= tail < T/2, got tail={tail}, T={T}")
    if isinstance(traj, Trajectory) and traj.diverged:
        return None
    even = x[0::2][-tail:]
    odd = x[1::2][-tail:]
    if np.ptp(even) >= tol or np.ptp(odd) >= tol:
        return None
    u = float(even.mean())
    v = float(odd.mean())
    if abs(u - v) <= tol:
        return None
    return u, v


def classify_behavior(traj: Trajectory, spec: MapSpec | None = None, tail: int = 100, tol: float = 1e-3) -> dict:
    """Summarize a trajectory as fixed point, period-2, divergent or undetermined.

    Fractional orbits approach a stable fixed point only algebraically, so a
    tail that is still moving is accepted as converging when both parity
    subsequences move monotonically towards the fixed point of ``spec``
    nearest the last state.
    """
    if traj.diverged:
        return {"behavior": "divergent", "index": traj.diverged_at, "reason": traj.reason}
    x = traj.x
    tail = min(tail, (len(x) - 2) // 2)
    cycle = detect_asymptotic_period2(traj, tail, tol)
    if cycle is not None:
        return {"behavior": "period-2", "u": cycle[0], "v": cycle[1]}
    window = x[-2 * tail:]
    if np.ptp(window) < tol:
        return {"behavior": "fixed-point", "value": float(window.mean())}
    if spec is None:
        return {"behavior": "undetermined"}
    star = _fixed_point_near(spec, float(x[-1]))
    if star is None:
        return {"behavior": "undetermined"}
    for sub in (window[0::2], window[1::2]):
        gap = np.abs(sub - star)
        if not np.all(np.diff(gap) <= 0.0):
            return {"behavior": "undetermined"}
    return {"behavior": "fixed-point", "value": star, "converging": True, "last": float(x[-1])}


def _fixed_point_near(spec: MapSpec, guess: float, maxiter: int = 50) -> float | None:
    from fracperiod.maps import eval_with_derivative

    x = guess
    for _ in range(maxiter):
        try:
            val, der = eval_with_derivative(spec, x, 0)
        except MapDomainError:
            return None
        h = val - x
        dh = der - 1.0
        if dh == 0.0:
            return None
        step = h / dh
        x -= step
        if not math.isfinite(x):
            return None
        if abs(step) <= 1e-14 * max(1.0, abs(x)):
            return x
    return None
