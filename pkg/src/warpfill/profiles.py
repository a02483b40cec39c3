"""Warping profiles and the radial tradeoff kernel.

A profile is a function psi >= 0 on [0, inf) with growth parameter
alpha > 0 satisfying psi <= psi' / alpha, so psi grows at least like
e^{alpha t} wherever it is positive. Every distance, Gromov product and
boundary formula in this package reduces to minimizing the tradeoff

    F(rho) = psi(rho) * d - 2 * rho

over an interval [0, tmax]: descending/ascending legs pay 2*rho while the
horizontal crossing at level rho costs psi(rho)*d. `minimize_F` returns
the largest minimizer, which is the canonical horizontal level of the
corresponding down-across-up curve.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DomainError, SchemaError, UnboundedError

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class WarpProfile:
    """Warping function with derivative access.

    Builtin kinds: "exp" (psi = e^{alpha t}) and "sinh" (psi = sinh^alpha t).
    Custom profiles must supply both psi and its derivative; the kernel
    never differentiates numerically, since the growth condition is
    checked against the supplied derivative.
    """

    def __init__(self, kind: str, alpha: float,
                 psi: Callable | None = None, dpsi: Callable | None = None):
        alpha = float(alpha)
        if not math.isfinite(alpha) or alpha <= 0.0:
            raise DomainError(f"profile requires alpha > 0, got {alpha}")
        if kind not in ("exp", "sinh", "custom"):
            raise DomainError(f"unknown profile kind {kind!r}")
        if kind == "custom" and (psi is None or dpsi is None):
            raise DomainError("custom profiles need both psi and dpsi callables")
        self.kind = kind
        self.alpha = alpha
        self._psi = psi
        self._dpsi = dpsi

    @staticmethod
    def exp(alpha: float) -> "WarpProfile":
        return WarpProfile("exp", alpha)

    @staticmethod
    def sinh_pow(alpha: float) -> "WarpProfile":
        return WarpProfile("sinh", alpha)

    @staticmethod
    def custom(psi: Callable, dpsi: Callable, alpha: float) -> "WarpProfile":
        return WarpProfile("custom", alpha, psi=psi, dpsi=dpsi)

    @staticmethod
    def parse(spec: str) -> "WarpProfile":
        """Parse a selection string: exp:<alpha> | sinh:<alpha>."""
        spec = spec.strip()
        if spec.startswith("exp:"):
            return WarpProfile.exp(float(spec[4:]))
        if spec.startswith("sinh:"):
            return WarpProfile.sinh_pow(float(spec[5:]))
        raise SchemaError(f"unknown profile selection {spec!r}")

    def label(self) -> str:
        return f"{self.kind}:{self.alpha:g}"

    def psi(self, t):
        if self.kind == "exp":
            return np.exp(self.alpha * np.asarray(t, float)) if np.ndim(t) else math.exp(self.alpha * t)
        if self.kind == "sinh":
            if np.ndim(t):
                return np.sinh(np.asarray(t, float)) ** self.alpha
            return math.sinh(t) ** self.alpha
        out = self._psi(t)
        return out if np.ndim(t) else float(out)

    def dpsi(self, t):
        if self.kind == "exp":
            return self.alpha * self.psi(t)
        if self.kind == "sinh":
            # alpha * sinh^{alpha-1} * cosh; diverges at 0 when alpha < 1
            with np.errstate(divide="ignore"):
                if np.ndim(t):
                    tt = np.asarray(t, float)
                    return self.alpha * np.sinh(tt) ** (self.alpha - 1.0) * np.cosh(tt)
                if t == 0.0 and self.alpha < 1.0:
                    return math.inf
                if t == 0.0 and self.alpha > 1.0:
                    return 0.0
                return self.alpha * math.sinh(t) ** (self.alpha - 1.0) * math.cosh(t)
        out = self._dpsi(t)
        return out if np.ndim(t) else float(out)

    @property
    def psi0(self) -> float:
        return float(self.psi(0.0))


@dataclass(frozen=True)
class FMinResult:
    """Largest minimizer of F(rho) = psi(rho)*d - 2*rho over [0, tmax]."""

    tau: float
    fmin: float
    interior: bool


@dataclass(frozen=True)
class SupremizerBounds:
    exact: float
    lower: float
    upper: float


@dataclass
class ProfileValidation:
    passed: bool
    violations: list


def golden_section(f: Callable, a: float, b: float, tol: float = 1e-12):
    """Golden-section search for a minimum of f on [a, b].

    Returns (x, f(x)) at the center of the final bracket. f should be
    unimodal on [a, b]; on flat stretches the result is the bracket center.
    """
    if b < a:
        a, b = b, a
    if b - a <= tol:
        x = 0.5 * (a + b)
        return x, f(x)
    x1 = b - _INVPHI * (b - a)
    x2 = a + _INVPHI * (b - a)
    f1, f2 = f(x1), f(x2)
    while b - a > tol:
        if f1 <= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _INVPHI * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _INVPHI * (b - a)
            f2 = f(x2)
    x = 0.5 * (a + b)
    return x, f(x)


def _bisect_root(g: Callable, lo: float, hi: float, increasing: bool,
                 iters: int = 120) -> float:
    """Root of a monotone g with g(lo), g(hi) of opposite signs."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        gm = g(mid)
        below = gm < 0.0 if increasing else gm > 0.0
        if below:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-14 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def _sinh_stationary(alpha: float, d: float) -> float:
    """Largest stationary point of F for psi = sinh^alpha, alpha >= 1,
    i.e. the unique root of alpha*sinh^{alpha-1}(r)*cosh(r)*d = 2
    (0 if the derivative is already nonnegative at 0)."""
    if alpha == 1.0:
        return math.acosh(2.0 / d) if d < 2.0 else 0.0
    if alpha == 2.0:
        return 0.5 * math.asinh(2.0 / d)
    hi = math.asinh((2.0 / (d * alpha)) ** (1.0 / alpha)) + 1.0

    def fprime(r):
        return d * alpha * math.sinh(r) ** (alpha - 1.0) * math.cosh(r) - 2.0

    if fprime(0.0) >= 0.0:
        return 0.0
    return _bisect_root(fprime, 0.0, hi, increasing=True)


def _sinh_argmin_shallow(alpha: float, d: float, tmax: float) -> float:
    """Largest minimizer for psi = sinh^alpha with alpha < 1.

    F' = d*alpha*sinh^{alpha-1}*cosh - 2 starts at +inf, may dip negative
    and then grows again, so F can have two local minima: rho = 0 (where
    F = 0) and an interior point. Candidates are compared directly; ties
    go to the larger rho.
    """
    rho_c = math.acosh(1.0 / math.sqrt(alpha))

    def h(r):
        return alpha * math.sinh(r) ** (alpha - 1.0) * math.cosh(r)

    def fprime(r):
        return d * h(r) - 2.0

    if d * h(rho_c) >= 2.0:
        return 0.0  # F' >= 0 everywhere: F nondecreasing
    # descending branch root (log-refined bracket near 0, first knot 1e-8)
    if fprime(1e-8) <= 0.0:
        rho1 = 0.0
    else:
        rho1 = _bisect_root(fprime, 1e-8, rho_c, increasing=False)
    # ascending branch root
    hi = max(rho_c + 1.0, math.asinh((2.0 / (d * alpha)) ** (1.0 / alpha)) + 1.0)
    rho2 = _bisect_root(fprime, rho_c, hi, increasing=True)
    if tmax <= rho1:
        return 0.0
    cand = min(rho2, tmax)
    f_cand = math.sinh(cand) ** alpha * d - 2.0 * cand
    return cand if f_cand <= 0.0 else 0.0


def _scan_argmin(profile: WarpProfile, d: float, tmax: float) -> float:
    """Generic largest-minimizer search: bracketing grid scan followed by
    golden-section refinement to 1e-10 in rho. Used for custom profiles."""
    def F(r):
        return float(profile.psi(r)) * d - 2.0 * r

    if math.isinf(tmax):
        # double the bracket until F has turned and is increasing
        T = 1.0
        f0 = F(0.0)
        while not (F(T) > F(T / 2.0) and F(T / 2.0) > F(T / 4.0) and F(T) > f0):
            T *= 2.0
            if T > 2.0 ** 200:
                raise UnboundedError("tradeoff objective does not turn upward")
    else:
        T = tmax
    if T <= 0.0:
        return 0.0
    knots = np.unique(np.concatenate([
        [0.0],
        np.geomspace(min(1e-8, T / 2.0), T, 512),
        np.linspace(0.0, T, 1024),
    ]))
    vals = profile.psi(knots) * d - 2.0 * knots
    idx = int(np.where(vals <= vals.min())[0][-1])  # ties toward larger rho
    lo = knots[max(idx - 1, 0)]
    hi = knots[min(idx + 1, knots.size - 1)]
    x, fx = golden_section(F, float(lo), float(hi), tol=1e-10)
    candidates = [(F(0.0), 0.0), (fx, x)]
    if not math.isinf(tmax):
        candidates.append((F(T), T))
    fbest = min(c[0] for c in candidates)
    return max(r for f, r in candidates if f <= fbest + 1e-15 * max(1.0, abs(fbest)))


def minimize_F(profile: WarpProfile, d: float, tmax: float) -> FMinResult:
    """Largest minimizer of F(rho) = psi(rho)*d - 2*rho over [0, tmax].

    tmax may be math.inf when d > 0; for d = 0 the objective -2*rho is
    unbounded below on [0, inf) and the call is rejected.
    """
    if not (d >= 0.0) or not (tmax >= 0.0):
        raise DomainError(f"minimize_F requires d >= 0 and tmax >= 0, got d={d}, tmax={tmax}")
    if d == 0.0:
        if math.isinf(tmax):
            raise UnboundedError("F(rho) = -2*rho has no minimum over [0, inf)")
        return FMinResult(tmax, -2.0 * tmax, tmax > 0.0)
    if profile.kind == "exp":
        alpha = profile.alpha
        tau = min(max(math.log(2.0 / (alpha * d)) / alpha, 0.0), tmax)
    elif profile.kind == "sinh":
        if profile.alpha >= 1.0:
            tau = min(_sinh_stationary(profile.alpha, d), tmax)
        else:
            tau = _sinh_argmin_shallow(profile.alpha, d, tmax)
    else:
        tau = _scan_argmin(profile, d, tmax)
    fmin = float(profile.psi(tau)) * d - 2.0 * tau
    return FMinResult(tau, fmin, tau > 0.0)


def _sinh_stationary_batch(alpha: float, d: np.ndarray) -> np.ndarray:
    """Vectorized `_sinh_stationary` (alpha >= 1, all d > 0)."""
    if alpha == 1.0:
        return np.arccosh(np.maximum(2.0 / d, 1.0))
    if alpha == 2.0:
        return 0.5 * np.arcsinh(2.0 / d)
    hi = np.arcsinh((2.0 / (d * alpha)) ** (1.0 / alpha)) + 1.0
    lo = np.zeros_like(d)
    # F' is increasing; F'(0+) = -2 for alpha > 1, so the root is interior
    for _ in range(90):
        mid = 0.5 * (lo + hi)
        neg = d * alpha * np.sinh(mid) ** (alpha - 1.0) * np.cosh(mid) < 2.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    return 0.5 * (lo + hi)


def minimize_F_batch(profile: WarpProfile, d, tmax):
    """Vectorized `minimize_F`: returns (tau, fmin) arrays.

    Evaluation order of the batch never affects the results. Shallow sinh
    profiles (alpha < 1) and custom profiles fall back to the scalar path
    per element.
    """
    d = np.asarray(d, dtype=float)
    tmax = np.broadcast_to(np.asarray(tmax, dtype=float), d.shape).copy()
    if np.any(d < 0.0) or np.any(tmax < 0.0):
        raise DomainError("minimize_F_batch requires d >= 0 and tmax >= 0")
    if np.any((d == 0.0) & np.isinf(tmax)):
        raise UnboundedError("F(rho) = -2*rho has no minimum over [0, inf)")

    if profile.kind == "exp":
        alpha = profile.alpha
        with np.errstate(divide="ignore"):
            star = np.where(d > 0.0, np.log(2.0 / (alpha * np.where(d > 0.0, d, 1.0))) / alpha, np.inf)
        tau = np.clip(star, 0.0, tmax)
        psi_tau = np.exp(alpha * tau)
    elif profile.kind == "sinh" and profile.alpha >= 1.0:
        pos = d > 0.0
        star = np.where(pos, _sinh_stationary_batch(profile.alpha, np.where(pos, d, 1.0)), np.inf)
        tau = np.clip(star, 0.0, tmax)
        psi_tau = np.sinh(tau) ** profile.alpha
    else:
        flat_d = d.ravel()
        flat_t = tmax.ravel()
        tau = np.empty_like(flat_d)
        for i in range(flat_d.size):
            tau[i] = minimize_F(profile, float(flat_d[i]), float(flat_t[i])).tau
        tau = tau.reshape(d.shape)
        psi_tau = np.asarray(profile.psi(tau), dtype=float)
    # guard inf * 0 at d == 0 entries whose tau is a huge tmax
    fmin = np.where(d > 0.0, psi_tau, 0.0) * d - 2.0 * tau
    return tau, fmin


def sup_G(profile: WarpProfile, d: float) -> float:
    """sup over rho in [0, inf) of (2*rho - psi(rho)*d), for d > 0.

    Finite because psi eventually dominates any e^{alpha t} lower bound;
    custom profiles locate the turning point by doubling the bracket
    until the tradeoff objective increases.
    """
    if not (d > 0.0):
        raise DomainError(f"sup_G requires d > 0, got {d}")
    return -minimize_F(profile, d, math.inf).fmin


def sup_G_batch(profile: WarpProfile, d) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0.0):
        raise DomainError("sup_G_batch requires d > 0")
    _, fmin = minimize_F_batch(profile, d, np.full(d.shape, math.inf))
    return -fmin


def exp_supremizer_bounds(K: float, D: float, alpha: float, d: float) -> SupremizerBounds:
    """Exact value and two-sided bounds of sup_{rho>=0} (2*rho - K*d*e^{alpha*rho}).

    The derivative is decreasing with a single zero; for d < 2/(K*alpha)
    the supremum is (2/alpha)(ln(2/(K*alpha*d)) - 1), otherwise the value
    at rho = 0, namely -K*d. The enclosure is -C - (2/alpha)ln d <= exact
    <= C - (2/alpha)ln d with C the maximum of the three branch constants.
    """
    if K <= 0.0 or D <= 0.0 or alpha <= 0.0:
        raise DomainError("exp_supremizer_bounds requires positive K, D, alpha")
    if not (0.0 < d <= D):
        raise DomainError(f"exp_supremizer_bounds requires 0 < d <= D, got d={d}, D={D}")
    if d < 2.0 / (K * alpha):
        exact = (2.0 / alpha) * (math.log(2.0 / (K * alpha * d)) - 1.0)
    else:
        exact = -K * d
    C = max(
        (2.0 / alpha) * abs(math.log(2.0 / (K * alpha)) - 1.0),
        K * D * math.exp(alpha) + (2.0 / alpha) * math.log(K * alpha / 2.0),
        (2.0 / alpha) * math.log(D),
    )
    shift = -(2.0 / alpha) * math.log(d)
    # the enclosure can be an exact equality; pad a few ulps so rounding
    # never puts the exact value outside it
    pad = 8.0 * np.finfo(float).eps * max(1.0, abs(C) + abs(shift))
    return SupremizerBounds(exact, -C + shift - pad, C + shift + pad)


def validate_profile(profile: WarpProfile, grid) -> ProfileValidation:
    """Check the growth condition psi <= psi'/alpha, monotonicity, and the
    exponential lower bound psi(r) >= psi(b) e^{alpha (r-b)} on a grid.

    Violations beyond 1e-9 relative tolerance are reported with the
    offending sample.
    """
    grid = np.unique(np.asarray(grid, dtype=float))
    if grid.size == 0 or np.any(grid < 0.0) or not np.all(np.isfinite(grid)):
        raise DomainError("validation grid must be nonempty, finite and within [0, inf)")
    rtol = 1e-9
    violations = []
    psi = np.asarray(profile.psi(grid), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        dpsi = np.asarray(profile.dpsi(grid), dtype=float)

    if np.any(psi < -rtol):
        k = int(np.argmin(psi))
        violations.append(("nonnegative", float(grid[k]), float(psi[k])))

    bound = dpsi / profile.alpha
    scale = np.maximum(1.0, np.maximum(np.abs(psi), np.abs(bound)))
    undefined = np.isnan(bound) & (grid > 0.0)  # C^1 is only required on (0, inf)
    if np.any(undefined):
        k = int(np.argmax(undefined))
        violations.append(("derivative_undefined", float(grid[k])))
    with np.errstate(invalid="ignore"):
        bad = psi - bound > rtol * scale
    bad &= ~np.isnan(bound)  # an infinite derivative satisfies the condition
    if np.any(bad):
        k = int(np.argmax(np.where(bad, psi - bound, -np.inf)))
        violations.append(("growth_condition", float(grid[k]), float(psi[k]), float(bound[k])))

    dec = psi[1:] - psi[:-1] < -rtol * np.maximum(1.0, np.abs(psi[:-1]))
    if np.any(dec):
        k = int(np.argmax(dec))
        violations.append(("nondecreasing", float(grid[k]), float(psi[k]), float(psi[k + 1])))

    # exponential lower bound over sampled pairs b < r with psi(b) > 0
    pos = psi > 0.0
    if np.any(pos):
        idx = np.flatnonzero(pos)
        if idx.size > 256:
            idx = idx[np.linspace(0, idx.size - 1, 256).astype(int)]
        b, r = grid[idx][:, None], grid[idx][None, :]
        pb, pr = psi[idx][:, None], psi[idx][None, :]
        with np.errstate(over="ignore"):
            floor = pb * np.exp(profile.alpha * (r - b))
        bad = (r > b) & (pr < floor * (1.0 - rtol))
        if np.any(bad):
            i, j = np.unravel_index(int(np.argmax(bad)), bad.shape)
            violations.append(("exponential_lower_bound",
                               float(b[i, 0]), float(r[0, j]),
                               float(pr[0, j]), float(floor[i, j])))

    return ProfileValidation(not violations, violations)
