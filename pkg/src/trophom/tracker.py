"""Predictor-corrector path tracking for homotopies in ``s``.

The path parameter ``τ ∈ [0, 1]`` enters through the complex detour
``s(τ) = τ·(1 + iκ(1 − τ))``, which keeps ``|s| ≤ 1`` and generically avoids the
finitely many singular parameter values on the real segment. The predictor is
a classical fourth-order Runge-Kutta step on ``dx/dτ = −H_x⁻¹·H_τ``; the
corrector is Newton's method.
"""

from __future__ import annotations

import enum
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .puiseux import LaurentPoly, evaluate_numeric, scalar_to_complex, term_magnitudes
from .start import Homotopy, StartBundle

KAPPA = 0.3819660112501051
DIVERGENCE_BOUND = 1e12
SINGULAR_COND = 1e14
CLUSTER_TOL = 1e-8


class PathStatus(enum.Enum):
    SUCCESS = "success"
    DIVERGED = "diverged"
    SINGULAR = "singular"
    STEP_UNDERFLOW = "step_underflow"
    MAX_STEPS = "max_steps"


@dataclass(frozen=True)
class TrackOptions:
    initial_step: float = 1e-2
    min_step: float = 1e-14
    newton_tol: float = 1e-12
    max_newton_iters: int = 10
    max_steps: int = 100_000
    start_parameter: float = 0.0
    epsilon: float = 1e-4
    endpoint_residual_tol: float = 1e-8

    def __post_init__(self):
        for name in ("initial_step", "min_step", "newton_tol", "epsilon", "endpoint_residual_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.min_step < self.initial_step:
            raise ValueError("min_step must be smaller than initial_step")
        if not 0 <= self.start_parameter < 1:
            raise ValueError("start_parameter must lie in [0, 1)")


@dataclass(frozen=True)
class PathResult:
    status: PathStatus
    endpoint: tuple[complex, ...] | None
    residual: float
    steps: int
    w: tuple[Fraction, ...] = ()
    start: tuple[complex, ...] = ()


@dataclass
class SolutionSet:
    solutions: list[tuple[tuple[complex, ...], int]]
    diagnostics: dict = field(default_factory=dict)
    paths: list[PathResult] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Numeric evaluation
# ---------------------------------------------------------------------------


class CompiledSystem:
    """Polynomials in ``x`` with polynomial coefficients in ``s``, vectorized."""

    def __init__(self, polys: Sequence[LaurentPoly]):
        self.m = len(polys)
        self.n = polys[0].nvars if polys else 0
        exps, owner, t_idx, t_pow, t_coef = [], [], [], [], []
        for i, f in enumerate(polys):
            for a, c in f.terms.items():
                k = len(exps)
                exps.append(a)
                owner.append(i)
                for e, v in c.terms:
                    if e.denominator != 1 or e < 0:
                        raise ValueError("homotopy coefficients must be polynomials in s")
                    t_idx.append(k)
                    t_pow.append(int(e))
                    t_coef.append(scalar_to_complex(v))
        self.exps = np.array(exps, dtype=float).reshape(len(exps), self.n)
        self.owner = np.array(owner, dtype=int)
        self.t_idx = np.array(t_idx, dtype=int)
        self.t_pow = np.array(t_pow, dtype=float)
        self.t_coef = np.array(t_coef, dtype=complex)
        self.nterms = len(exps)
        self.constant_in_s = not np.any(self.t_pow)

    def _coefficients(self, s: complex):
        powers = np.power(s, self.t_pow)
        vals = np.zeros(self.nterms, dtype=complex)
        np.add.at(vals, self.t_idx, self.t_coef * powers)
        safe = np.where(self.t_pow > 0, self.t_pow - 1, 0)
        dvals = np.zeros(self.nterms, dtype=complex)
        np.add.at(dvals, self.t_idx, self.t_coef * self.t_pow * np.power(s, safe))
        return vals, dvals

    def evaluate(self, s: complex, x: np.ndarray):
        """``(H, H_x, H_s, Σ|terms|)`` at ``(s, x)``."""
        c, dc = self._coefficients(s)
        mono = np.prod(np.power(x[None, :], self.exps), axis=1)
        terms = c * mono
        H = np.zeros(self.m, dtype=complex)
        np.add.at(H, self.owner, terms)
        Hs = np.zeros(self.m, dtype=complex)
        np.add.at(Hs, self.owner, dc * mono)
        J = np.zeros((self.m, self.n), dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            scaled = terms[:, None] * self.exps / x[None, :]
        np.add.at(J, self.owner, scaled)
        mags = np.zeros(self.m)
        np.add.at(mags, self.owner, np.abs(terms))
        return H, J, Hs, mags


def _s_of(tau: float) -> complex:
    return complex(tau, KAPPA * tau * (1.0 - tau))


def _ds_dtau(tau: float) -> complex:
    return complex(1.0, KAPPA * (1.0 - 2.0 * tau))


def residual(system: Sequence[LaurentPoly], point: Sequence[complex], t0: float = 1.0) -> float:
    """``max |f(x)| / (1 + Σ |term values|)`` over the polynomials."""
    out = 0.0
    for f in system:
        out = max(out, abs(evaluate_numeric(f, t0, point)) / (1.0 + term_magnitudes(f, t0, point)))
    return out


# ---------------------------------------------------------------------------
# Single path
# ---------------------------------------------------------------------------


class _Segment:
    def __init__(self, system: CompiledSystem):
        self.system = system

    def velocity(self, tau: float, x: np.ndarray) -> np.ndarray:
        H, J, Hs, _ = self.system.evaluate(_s_of(tau), x)
        return -np.linalg.solve(J, Hs * _ds_dtau(tau))

    def newton(self, tau: float, x: np.ndarray, tol: float, iters: int):
        """Returns ``(x, converged, iterations, condition estimate)``."""
        s = _s_of(tau)
        cond = 1.0
        for k in range(1, iters + 1):
            H, J, _, _ = self.system.evaluate(s, x)
            try:
                dx = np.linalg.solve(J, H)
            except np.linalg.LinAlgError:
                return x, False, k, np.inf
            x = x - dx
            if not np.all(np.isfinite(x)):
                return x, False, k, np.inf
            if np.linalg.norm(dx) <= tol * (1.0 + np.linalg.norm(x)):
                cond = np.linalg.cond(J)
                return x, True, k, cond
        return x, False, iters, np.linalg.cond(J)


def _track_segment(seg: _Segment, x: np.ndarray, tau0: float, tau1: float, opts: TrackOptions, budget: int):
    """Track from ``tau0`` to ``tau1``; returns ``(status or None, x, steps)``."""
    if seg.system.constant_in_s:
        # The path is stationary: one step, and the caller's polish at the end.
        return None, x, 1
    tau = tau0
    h = opts.initial_step
    easy = 0
    steps = 0
    singular_run = 0
    while tau < tau1:
        if steps >= budget:
            return PathStatus.MAX_STEPS, x, steps
        if h < opts.min_step:
            if np.max(np.abs(x)) > 1e8:
                return PathStatus.DIVERGED, x, steps
            return PathStatus.STEP_UNDERFLOW, x, steps
        h_eff = min(h, tau1 - tau)
        steps += 1
        try:
            k1 = seg.velocity(tau, x)
            k2 = seg.velocity(tau + h_eff / 2, x + h_eff / 2 * k1)
            k3 = seg.velocity(tau + h_eff / 2, x + h_eff / 2 * k2)
            k4 = seg.velocity(tau + h_eff, x + h_eff * k3)
            pred = x + h_eff / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        except np.linalg.LinAlgError:
            h /= 2
            easy = 0
            continue
        if not np.all(np.isfinite(pred)):
            h /= 2
            easy = 0
            continue
        new, ok, iters, cond = seg.newton(tau + h_eff, pred, max(opts.newton_tol, 1e-10), 3)
        if ok and np.linalg.norm(new - pred) <= 0.1 * (1.0 + np.linalg.norm(new)):
            tau = tau + h_eff if h_eff < tau1 - tau else tau1
            x = new
            if np.max(np.abs(x)) > DIVERGENCE_BOUND:
                return PathStatus.DIVERGED, x, steps
            singular_run = singular_run + 1 if cond > SINGULAR_COND else 0
            if singular_run >= 5:
                return PathStatus.SINGULAR, x, steps
            easy = easy + 1 if iters <= 2 else 0
            if easy >= 2:
                h *= 2
                easy = 0
        else:
            h /= 2
            easy = 0
    return None, x, steps


def track_path(H: Homotopy, start: Sequence[complex], opts: TrackOptions = TrackOptions(),
               target: Sequence[LaurentPoly] | None = None) -> PathResult:
    """Follow one start solution from the start parameter to ``τ = 1``.

    The endpoint is polished by Newton's method on the main polynomials at
    ``s = 1`` and validated against ``target`` (default: the homotopy at ``s = 1``).
    """
    target = list(target) if target is not None else H.at_end()
    main = _Segment(CompiledSystem(H.polynomials))
    early = _Segment(CompiledSystem(H.early)) if H.early is not None else None
    x = np.array(start, dtype=complex)
    first = early if early is not None else main
    tau0 = opts.start_parameter
    _, J, _, _ = first.system.evaluate(_s_of(tau0), x)
    if tau0 == 0.0 and not np.linalg.cond(J) < SINGULAR_COND:
        tau0 = opts.epsilon
    x, ok, _, _ = first.newton(tau0, x, opts.newton_tol, opts.max_newton_iters)
    if not ok:
        return PathResult(PathStatus.SINGULAR, None, float("inf"), 0, H.w, tuple(start))
    steps = 0
    segments = [(first, tau0, H.handoff if early is not None else 1.0)]
    if early is not None and H.handoff < 1.0:
        segments.append((main, H.handoff, 1.0))
    for seg, a, b in segments:
        if a >= b:
            continue
        status, x, k = _track_segment(seg, x, a, b, opts, opts.max_steps - steps)
        steps += k
        if status is not None:
            return PathResult(status, None, float("inf"), steps, H.w, tuple(start))
    x, ok, _, _ = main.newton(1.0, x, opts.newton_tol, opts.max_newton_iters)
    end = tuple(complex(v) for v in x)
    if not np.all(np.isfinite(x)):
        return PathResult(PathStatus.DIVERGED, None, float("inf"), steps, H.w, tuple(start))
    if np.max(np.abs(x)) > DIVERGENCE_BOUND or np.min(np.abs(x)) < 1.0 / DIVERGENCE_BOUND:
        return PathResult(PathStatus.DIVERGED, None, float("inf"), steps, H.w, tuple(start))
    r = residual(target, end, 1.0)
    if not r <= opts.endpoint_residual_tol:
        return PathResult(PathStatus.SINGULAR, end, r, steps, H.w, tuple(start))
    return PathResult(PathStatus.SUCCESS, end, r, steps, H.w, tuple(start))


# ---------------------------------------------------------------------------
# All paths
# ---------------------------------------------------------------------------


def _canonical_key(x: Sequence[complex]) -> tuple:
    return tuple(v for z in x for v in (round(z.real, 12) + 0.0, round(z.imag, 12) + 0.0))


def cluster_endpoints(points: Sequence[Sequence[complex]], tol: float = CLUSTER_TOL):
    """Merge endpoints whose relative distance is at most ``tol``."""
    clusters: list[list] = []
    for p in sorted(points, key=_canonical_key):
        v = np.array(p)
        for c in clusters:
            if np.linalg.norm(v - c[0]) <= tol * (1.0 + np.linalg.norm(c[0])):
                c[1] += 1
                break
        else:
            clusters.append([v, 1])
    out = [(tuple(complex(z) for z in c[0]), c[1]) for c in clusters]
    out.sort(key=lambda item: _canonical_key(item[0]))
    return out


def solve_all(bundles: Sequence[StartBundle], homotopies: Sequence[Homotopy],
              target: Sequence[LaurentPoly] | None = None, opts: TrackOptions = TrackOptions(),
              threads: int = 1) -> SolutionSet:
    """Track every start solution of every bundle along its homotopy."""
    if len(bundles) != len(homotopies):
        raise ValueError("bundles and homotopies must be aligned")
    jobs = [(H, x) for b, H in zip(bundles, homotopies) for x in b.solutions]

    def run(job):
        H, x = job
        return track_path(H, x, opts, target)

    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(j) for j in jobs]
    ok = [r.endpoint for r in results if r.status is PathStatus.SUCCESS]
    per_point = []
    k = 0
    for b in bundles:
        mine = results[k:k + len(b.solutions)]
        k += len(b.solutions)
        counts: dict[str, int] = {}
        for r in mine:
            counts[r.status.value] = counts.get(r.status.value, 0) + 1
        per_point.append({
            "w": [str(x) for x in b.point.w],
            "paths": len(mine),
            "statuses": dict(sorted(counts.items())),
            "steps": sum(r.steps for r in mine),
        })
    diagnostics = {
        "paths": len(results),
        "successes": len(ok),
        "per_point": per_point,
    }
    return SolutionSet(cluster_endpoints(ok), diagnostics, results)
