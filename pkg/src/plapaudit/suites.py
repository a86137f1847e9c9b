"""Verification suites behind the command-line subcommands.

Each suite splits into independent units; a unit is a module-level function
of plain arguments that returns a list of :class:`CheckRecord`, so units can
run in a process pool.  Unit seeds derive from the run seed and the unit key,
making every record independent of scheduling.
"""

from __future__ import annotations

import math
import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction

import numpy as np

from . import exponents as ex
from .bubbles import (
    Bubble,
    bubble_source_constant,
    bubble_v,
    bubble_v_closed_form,
    check_decay_bounds,
)
from .errors import DomainError
from .fields import TestField, eval_jet2, random_smooth_field, sample_noncritical_points
from .identities import check_divergence_identities, check_source_gradient_identity, check_weighted_identities
from .integrals import (
    WEIGHTS,
    Cutoff,
    check_cutoff_flux_identity,
    check_divergence_theorem,
    check_growth,
    cutoff_identity_q_grid,
    divergence_test_field,
    growth_q_grid,
    radial_integral,
)
from .matrix import (
    check_frame_bound,
    check_gradient_direction_bound,
    check_weighted_trace_bound,
    frame_constant,
    random_trace_triples,
)
from .params import EqParams
from .report import CheckRecord, record
from .shooting import core_radii, radial_pde_residual, shoot, shoot_value_at
from .tensors import build_frame

DEFAULT_SEED = 20240601

COMMANDS = ("verify-bubbles", "verify-identities", "verify-matrix", "shoot", "growth", "exponents")

DEFAULT_GRIDS = {
    "verify-bubbles": ((4, 2.0, 1.0), (3, 1.5, 0.5), (5, 3.0, 2.0), (2, 1.4, 1.0), (8, 4.0, 1.0)),
    "verify-identities": ((2, 1.5), (3, 1.7), (4, 2.5), (5, 3.5)),
    "verify-matrix": ((2, 1.2), (3, 1.5), (3, 2.0), (4, 3.0), (5, 4.0)),
    "shoot": ((4, 2.0), (3, 1.5), (5, 3.0)),
    "growth": ((4, 2.0), (3, 1.5), (5, 3.0), (8, 4.0)),
    "exponents": tuple((n, None) for n in range(2, 11)),
}

DIVERGENCE_GRID = ((2, 1.5), (3, 1.7))
DIVERGENCE_M = (0.0, -0.4, 0.3)


@dataclass(frozen=True)
class Tolerances:
    identity: float = 1e-9
    fd: float = 1e-5
    quad: float = 1e-6
    slope: float = 0.05
    ode: float = 1e-10

    def __post_init__(self):
        for name, val in asdict(self).items():
            if not (isinstance(val, (int, float)) and val > 0 and math.isfinite(val)):
                raise DomainError(f"--tol-{name} must be a positive number, got {val!r}")


@dataclass(frozen=True)
class RunConfig:
    command: str
    grid: tuple | None = None  # (n, p) or (n, p, lambda) tuples; None selects defaults
    seed: int = DEFAULT_SEED
    tol: Tolerances = field(default_factory=Tolerances)
    jobs: int = 1
    resolution: float = 1e-3  # exponent scan spacing in p
    fields: int = 10  # random fields per (n, p) in the identity and matrix suites
    points: int = 200  # points per field

    def __post_init__(self):
        if self.command not in COMMANDS + ("all",):
            raise DomainError(f"unknown command {self.command!r}")
        if self.jobs < 1:
            raise DomainError("--jobs must be at least 1")
        if not self.resolution > 0:
            raise DomainError("--resolution must be positive")
        if self.fields < 1 or self.points < 1:
            raise DomainError("--fields and --points must be positive")

    def grid_for(self, command: str) -> tuple:
        if self.grid is None:
            return DEFAULT_GRIDS[command]
        if command == "exponents":
            return tuple(sorted({(int(g[0]), None) for g in self.grid}))
        out = []
        for g in self.grid:
            n, p = int(g[0]), float(g[1])
            EqParams(n, p)  # validates
            if command == "verify-bubbles":
                lam = float(g[2]) if len(g) > 2 else 1.0
                Bubble.centered(lam, n)  # validates
                out.append((n, p, lam))
            else:
                out.append((n, p))
        return tuple(out)

    def echo(self) -> dict:
        d = {
            "command": self.command,
            "grid": None if self.grid is None else [list(g) for g in self.grid],
            "seed": self.seed,
            "tolerances": asdict(self.tol),
            "resolution": self.resolution,
            "fields": self.fields,
            "points": self.points,
        }
        return d


def unit_rng(seed: int, key: str) -> np.random.Generator:
    return np.random.default_rng([int(seed), zlib.crc32(key.encode())])


def _tag(n, p, lam=None) -> str:
    base = f"n={n},p={p:g}"
    return base if lam is None else f"{base},lam={lam:g}"


# -- bubbles -------------------------------------------------------------------


def bubble_unit(n: int, p: float, lam: float, seed: int, tol: Tolerances) -> list[CheckRecord]:
    params = EqParams(n, p)
    tag = _tag(n, p, lam)
    rng = unit_rng(seed, "bubbles/" + tag)
    out = []
    centered = Bubble.centered(lam, n)
    res = radial_pde_residual(params, centered, core_radii(centered, 1000, rng))
    out.append(record(f"bubbles/pde-residual/{tag}", "bubble-family", res, tol.identity, samples=1000))
    wide = lam * np.logspace(-3, 6, 200)
    res_terms = radial_pde_residual(params, centered, wide, normalize="terms")
    out.append(record(f"bubbles/pde-residual-term-scaled/{tag}", "bubble-family", res_terms, 1e-12, samples=200))

    x0 = tuple(rng.uniform(-1.0, 1.0, size=n))
    bubble = Bubble(lam, x0)
    fieldspec = TestField.bubble_v(bubble)
    pts = sample_noncritical_points(fieldspec, params, 1000, rng, box=2.0 * max(1.0, lam))
    frame = build_frame(params, eval_jet2(fieldspec, params, pts))
    e_ratio = float(np.max(np.max(np.abs(frame.E), axis=(-2, -1)) / (1.0 + np.abs(frame.g))))
    rho_ratio = float(np.max(np.abs(frame.rho) / np.abs(frame.g)))
    out.append(record(f"bubbles/tensor-vanishes/{tag}", "transformed-bubble", e_ratio, 1e-8, samples=1000))
    out.append(record(f"bubbles/residual-vanishes/{tag}", "transformed-bubble", rho_ratio, 1e-9, samples=1000))
    g0 = bubble_source_constant(params, bubble)
    g_err = float(np.max(np.abs(frame.g - g0)) / g0)
    out.append(record(f"bubbles/source-constant/{tag}", "transformed-bubble", g_err, tol.identity, g=g0))
    pts100 = rng.uniform(-3.0, 3.0, size=(100, n)) * max(1.0, lam)
    vt, vc = bubble_v(params, bubble, pts100), bubble_v_closed_form(params, bubble, pts100)
    out.append(
        record(f"bubbles/closed-form/{tag}", "transformed-bubble", float(np.max(np.abs(vt - vc) / vc)), 1e-12)
    )
    rep = check_decay_bounds(params, centered, max(1.0, lam) * np.logspace(2, 6, 20), seed=int(rng.integers(2**31)))
    out.append(
        record(
            f"bubbles/decay/{tag}",
            "decay-bounds",
            max(rep.u_slope_error, rep.v_slope_error),
            rep.slope_tol,
            passed=rep.passed,
            u_slope=rep.u_slope,
            v_slope=rep.v_slope,
            u_bound_ok=rep.u_bound_ok,
            v_bound_ok=rep.v_bound_ok,
        )
    )
    return out


# -- identities ----------------------------------------------------------------


IDENTITY_ANCHORS = {
    "source-gradient": "source-gradient-identity",
    "tensor-divergence": "tensor-divergence-identity",
    "contracted-divergence": "contracted-divergence-identity",
    "weighted-flux-divergence": "weighted-flux-divergence",
    "weighted-tensor-divergence": "weighted-tensor-divergence",
}


def identity_unit(n: int, p: float, seed: int, tol: Tolerances, fields: int, points: int) -> list[CheckRecord]:
    params = EqParams(n, p)
    tag = _tag(n, p)
    rng = unit_rng(seed, "identities/" + tag)
    q, m = 1.0 - n, -(p - 1.0) / p + 0.1
    out = []
    for i in range(fields):
        f = random_smooth_field(n, rng)
        pts = sample_noncritical_points(f, params, points, rng)
        reps = [check_source_gradient_identity(params, f, pts, tol.identity)]
        reps += list(check_divergence_identities(params, f, pts, tol=tol.fd))
        reps += list(check_weighted_identities(params, f, pts, q, m, tol=tol.fd))
        for rep in reps:
            out.append(
                record(
                    f"identities/{rep.name}/{tag}/field={i:02d}",
                    IDENTITY_ANCHORS[rep.name],
                    rep.max_relative,
                    rep.tol,
                    points=rep.points,
                )
            )
    # bubble corpus: every residual-correction term must vanish
    for i in range(3):
        lam = float(np.exp(rng.uniform(np.log(0.5), np.log(2.0))))
        f = TestField.bubble_v(Bubble(lam, tuple(rng.uniform(-0.5, 0.5, size=n))))
        pts = sample_noncritical_points(f, params, points, rng)
        reps = list(check_divergence_identities(params, f, pts, tol=tol.fd))
        reps += list(check_weighted_identities(params, f, pts, q, m, tol=tol.fd))
        for rep in reps:
            out.append(
                record(
                    f"identities/{rep.name}/{tag}/bubble={i}/correction",
                    IDENTITY_ANCHORS[rep.name],
                    float(np.max(rep.correction)),
                    1e-9,
                    max_term=rep.max_term,
                )
            )
    return out


# -- matrix inequalities -------------------------------------------------------


def trace_bound_unit(seed: int, samples: int = 10_000) -> list[CheckRecord]:
    rng = unit_rng(seed, "matrix/trace")
    violations = total = 0
    min_slack = math.inf
    for A, B, C in random_trace_triples(samples, rng):
        rep = check_weighted_trace_bound(A, B, C)
        violations += rep.violations
        total += rep.samples
        min_slack = min(min_slack, float(np.min(rep.slack / (np.abs(rep.lhs) + np.abs(rep.rhs)))))
    out = [record("matrix/weighted-trace-bound/random", "weighted-trace-bound", violations, 0, samples=total, min_relative_slack=min_slack)]
    eye = np.eye(3)[None]
    eq = check_weighted_trace_bound(np.ones((1, 3)), eye, eye)
    out.append(
        record("matrix/weighted-trace-bound/equality", "weighted-trace-bound", abs(float(eq.slack[0])), 1e-12, gap=float(eq.slack[0]))
    )
    return out


def matrix_unit(n: int, p: float, seed: int, fields: int, points: int) -> list[CheckRecord]:
    params = EqParams(n, p)
    tag = _tag(n, p)
    rng = unit_rng(seed, "matrix/" + tag)
    c = frame_constant(p)
    totals = {"frame": 0, "coef": 0, "dir": 0}
    viol = {"frame": 0, "coef": 0, "dir": 0}
    gap_res = 0.0
    asym = 0.0
    for _ in range(fields):
        f = random_smooth_field(n, rng)
        pts = sample_noncritical_points(f, params, points, rng)
        frame = build_frame(params, eval_jet2(f, params, pts))
        scale = np.linalg.norm(frame.E, axis=(-2, -1))[:, None, None]
        half = len(pts) // 2
        B = rng.normal(size=(len(pts), n, n)) * scale / n
        # near-extremal directions B = t E^T / (2c)
        t = rng.uniform(0.5, 1.5, size=(len(pts) - half, 1, 1))
        B[half:] = t * np.swapaxes(frame.E[half:], -1, -2) / (2.0 * c)
        main, inter = check_frame_bound(params, f, pts, B)
        direc = check_gradient_direction_bound(params, f, pts)
        for key, rep in (("frame", main), ("coef", inter), ("dir", direc)):
            totals[key] += rep.samples
            viol[key] += rep.violations
        gap_res = max(gap_res, direc.gap_residual)
        asym = max(asym, float(np.max(frame.asymmetry / (1.0 + np.linalg.norm(frame.E, axis=(-2, -1))))))
    out = [
        record(f"matrix/frame-bound/{tag}", "frame-bound", viol["frame"], 0, samples=totals["frame"], c=c, max_asymmetry=asym),
        record(f"matrix/frame-coefficient-bound/{tag}", "frame-bound", viol["coef"], 0, samples=totals["coef"]),
        record(f"matrix/gradient-direction-bound/{tag}", "gradient-direction-bound", viol["dir"], 0, samples=totals["dir"]),
        record(f"matrix/gap-formula/{tag}", "gradient-direction-bound", gap_res, 1e-9),
    ]
    if p == 2.0:
        # A = I at p = 2, so E is a symmetric matrix
        out.append(record(f"matrix/symmetric-at-p2/{tag}", "frame-bound", asym, 1e-12, flagged="p=2 symmetric E"))
    return out


# -- shooting --------------------------------------------------------------------


def shoot_unit(n: int, p: float, seed: int, tol: Tolerances) -> list[CheckRecord]:
    params = EqParams(n, p)
    tag = _tag(n, p)
    out = []
    u0s = np.logspace(-1.0, 1.0, 10)
    lams = []
    for u0 in u0s:
        res = shoot(params, float(u0), r_max=50.0, tol=tol.ode)
        lams.append(res.matched_lambda)
        out.append(
            record(
                f"shoot/match/{tag}/u0={u0:.4g}",
                "radial-classification",
                res.max_rel_error,
                1e-3,
                matched_lambda=res.matched_lambda,
                accepted_steps=res.accepted_steps,
            )
        )
        out.append(
            record(
                f"shoot/flux-positivity/{tag}/u0={u0:.4g}",
                "radial-classification",
                0.0 if (res.flux_monotone and res.positive) else 1.0,
                0.0,
            )
        )
    e = -p / (n - p)
    scaling = max(abs(lams[i] / lams[0] / (u0s[i] / u0s[0]) ** e - 1.0) for i in range(1, len(u0s)))
    out.append(record(f"shoot/scaling-law/{tag}", "radial-classification", scaling, 1e-12))
    return out


def shoot_reference_unit(tol: Tolerances) -> list[CheckRecord]:
    params = EqParams(4, 2.0)
    u0 = 2.0 * math.sqrt(2.0)
    res = shoot(params, u0, tol=tol.ode)
    out = [
        record("shoot/reference/lambda", "radial-classification", abs(res.matched_lambda - 1.0), 1e-12),
        record("shoot/reference/max-error", "radial-classification", res.max_rel_error, 1e-4),
        record(
            "shoot/reference/value-at-1",
            "radial-classification",
            abs(shoot_value_at(params, u0, 1.0, tol.ode) / math.sqrt(2.0) - 1.0),
            1e-4,
        ),
    ]
    # step-doubling RK4 with local control: global error ~ tol^(4/5)
    expected = 2.0**0.8
    for hi_tol in (1e-6, 1e-8):
        e1 = shoot(params, u0, tol=hi_tol).max_rel_error
        e2 = shoot(params, u0, tol=hi_tol / 2.0).max_rel_error
        ratio = e1 / e2
        out.append(
            record(
                f"shoot/reference/order-tol={hi_tol:g}",
                "radial-classification",
                abs(math.log(ratio / expected)),
                math.log(4.0),
                ratio=ratio,
                expected=expected,
            )
        )
    return out


# -- integrals -------------------------------------------------------------------


def cutoff_unit(n: int, p: float, tol: Tolerances) -> list[CheckRecord]:
    params = EqParams(n, p)
    tag = _tag(n, p)
    bubble = Bubble.centered(1.0, n)
    out = []
    for R in (5.0, 10.0, 20.0):
        cut = Cutoff(R)
        out.append(record(f"cutoff/gradient/{tag}/R={R:g}", "cutoff-flux-identity", cut.max_gradient() * R, 2.5))
        for j, q in enumerate(cutoff_identity_q_grid(params)):
            rep = check_cutoff_flux_identity(params, bubble, q, cut, tol=tol.quad)
            out.append(
                record(
                    f"cutoff/identity/{tag}/R={R:g}/q{j}",
                    "cutoff-flux-identity",
                    rep.relative,
                    tol.quad,
                    q=q,
                    lhs=rep.lhs,
                    rhs=rep.rhs,
                )
            )
    # adaptivity self-consistency: a 10x tighter tolerance moves values by < 10x the old one
    for q in (params.p, params.a + 1.0):
        f = lambda r, v, dv, q=q: v ** (-q) * np.abs(dv) ** p
        coarse = radial_integral(params, bubble, f, 20.0, rtol=1e-9)
        fine = radial_integral(params, bubble, f, 20.0, rtol=1e-10)
        out.append(
            record(f"cutoff/refinement/{tag}/q={q:g}", "plumbing", abs(coarse - fine) / abs(fine), 1e-8)
        )
    return out


def hand_check_unit() -> list[CheckRecord]:
    """Polynomial case ``n = 4, p = 2, q = 0, theta = 2`` on ``v = 1 + r^2/8``.

    Both sides reduce to ``2 pi^2 R^4 (4973 R^2 + 18150) / 18480``; the
    rational coefficient is recomputed here by exact polynomial integration.
    """
    params = EqParams(4, 2.0)
    bubble = Bubble.centered(2.0 * math.sqrt(2.0), 4)  # C1 = 1, C2 = 1/8
    R = 10
    exact = _hand_check_exact(R)
    rep = check_cutoff_flux_identity(params, bubble, 0.0, Cutoff(float(R), 2.0))
    value = 2.0 * math.pi**2 * float(exact)
    err = max(abs(rep.lhs - value), abs(rep.rhs - value)) / value
    expected = Fraction(R**4 * (4973 * R**2 + 18150), 18480)
    return [
        record("cutoff/hand-check/quadrature", "cutoff-flux-identity", err, 1e-12, exact=str(exact)),
        record("cutoff/hand-check/closed-form", "cutoff-flux-identity", 0.0 if exact == expected else 1.0, 0.0),
    ]


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        for j, y in enumerate(b):
            out[i + j] += x * y
    return out


def _poly_int(c, lo, hi):
    return sum(x * (Fraction(hi) ** (k + 1) - Fraction(lo) ** (k + 1)) / (k + 1) for k, x in enumerate(c))


def _hand_check_exact(R: int) -> Fraction:
    """Exact left side per unit sphere area, with ``a = 2``, ``b = 1``."""
    R = Fraction(R)
    dv = [Fraction(0), Fraction(1, 4)]  # v' = r/4
    r3 = [0, 0, 0, Fraction(1)]
    t = [Fraction(2), -1 / R]  # (2R - r)/R
    t2 = _poly_mul(t, t)
    eta = [3 * x for x in t2] + [Fraction(0)]
    t3 = _poly_mul(t2, t)
    eta = [e - 2 * x for e, x in zip(eta, t3)]
    psi = _poly_mul(eta, eta)
    grad_core = _poly_mul(_poly_mul(dv, dv), r3)
    inner = 3 * _poly_int(grad_core, 0, R) + _poly_int(r3, 0, R)
    outer = 3 * _poly_int(_poly_mul(grad_core, psi), R, 2 * R) + _poly_int(_poly_mul(r3, psi), R, 2 * R)
    return inner + outer


def growth_unit(n: int, p: float, tol: Tolerances) -> list[CheckRecord]:
    params = EqParams(n, p)
    tag = _tag(n, p)
    bubble = Bubble.centered(1.0, n)
    v_unit = float(bubble_v_closed_form(params, bubble, np.eye(n)[:1])[0])
    out = []
    for weight in WEIGHTS:
        for j, q in enumerate(growth_q_grid(params, weight)):
            fit = check_growth(params, bubble, q, weight, slope_tol=tol.slope)
            base = f"growth/{weight}/{tag}/q{j}"
            info = dict(
                q=q,
                fitted_slope=fit.fitted_slope,
                tail_slope=fit.tail_slope,
                predicted_slope=fit.predicted_slope,
                bound_slope=fit.bound_slope,
                # measured constant of the bound and the sphere maximum it depends on
                bound_constant=float(np.max(fit.values / fit.radii**fit.bound_slope)),
                v_max_unit_sphere=v_unit,
            )
            out.append(
                record(base + "/bound", "growth-bounds", fit.fitted_slope - fit.bound_slope, tol.slope, **info)
            )
            if fit.compares_prediction:
                out.append(record(base + "/ball-slope", "growth-bounds", fit.prediction_error, tol.slope, **info))
                out.append(
                    record(
                        base + "/shell-slope",
                        "growth-bounds",
                        abs(fit.tail_slope - fit.predicted_slope),
                        tol.slope,
                        **info,
                    )
                )
            if fit.equality_case:
                out.append(
                    record(
                        base + "/equality-case",
                        "growth-bounds",
                        abs(fit.fitted_slope - fit.bound_slope),
                        tol.slope,
                        **info,
                    )
                )
    return out


def divergence_unit(index: int, seed: int, tol: Tolerances) -> list[CheckRecord]:
    n, p = DIVERGENCE_GRID[index % len(DIVERGENCE_GRID)]
    m = DIVERGENCE_M[index % len(DIVERGENCE_M)]
    params = EqParams(n, p)
    rng = unit_rng(seed, f"divergence/{index}")
    f = divergence_test_field(n, rng, params=params)
    rep = check_divergence_theorem(params, f, m, tol=100.0 * tol.quad)
    return [
        record(
            f"divergence/{_tag(n, p)}/field={index:02d}",
            "integration-by-parts",
            rep.relative,
            rep.tol,
            m=m,
            volume=rep.volume_refined,
            flux=rep.flux_refined,
            convergence=rep.convergence,
        )
    ]


def divergence_bubble_unit() -> list[CheckRecord]:
    out = []
    for n, p in DIVERGENCE_GRID:
        params = EqParams(n, p)
        f = TestField.bubble_v(Bubble(1.0, (3.0,) + (0.0,) * (n - 1)))
        rep = check_divergence_theorem(params, f, 0.0)
        out.append(
            record(
                f"divergence/{_tag(n, p)}/bubble",
                "integration-by-parts",
                max(abs(rep.volume_refined), abs(rep.flux_refined)),
                1e-12,
            )
        )
    return out


# -- exponents --------------------------------------------------------------------


def scan_unit(ns: tuple, resolution: float, variant: str) -> list[CheckRecord]:
    scan = ex.scan_admissible_region(ns, resolution, variant)
    counts = scan.violation_counts
    base = f"exponents/scan-{variant}"
    info = dict(points=scan.points, n_values=list(ns), resolution=resolution)
    out = [
        record(base + "/s-positive", "decay-rate", counts.get("s-nonpositive", 0), 0, min_s=scan.min_s, **info),
        record(base + "/s-corrected-positive", "decay-rate", counts.get("s-corrected-nonpositive", 0), 0, **info),
        record(base + "/q-sign", "exponent-window", counts.get("q-sign", 0), 0, **info),
        record(base + "/m-range", "exponent-window", counts.get("m-range", 0), 0, **info),
        record(base + "/hoelder-exponent", "exponent-window", counts.get("hoelder-exponent", 0), 0, **info),
        record(
            base + "/window-positive",
            "exponent-window",
            counts.get("empty-window", 0),
            0,
            case_ii_rule="sign-of-q term dropped where 3p^2 - 2(n+1)p + n >= 0",
            **info,
        ),
    ]
    for name in ex.STATED_IDENTITIES + tuple(k for k in ex.EXACT_IDENTITIES if k not in ex.STATED_IDENTITIES):
        out.append(record(f"{base}/algebra/{name}", "exponent-algebra", scan.algebra_residuals[name], 1e-11))
    if 2 in ns:
        split = scan.case_split(2)
        thr = ex.case_threshold(2)
        ok = split is not None and split[0] < thr <= split[1]
        out.append(record(base + "/case-split-n2", "hypothesis-region", 0.0 if ok else 1.0, 0.0, threshold=thr, bracket=split))
    return out


def exponent_checks_unit(seed: int) -> list[CheckRecord]:
    out = []
    # threshold at n = 2 by bisection on the sign of the quadratic
    lo, hi = 1.0 + 1e-9, 2.0 - 1e-9
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ex.classify_case(2, mid).tag == ex.CASE_I:
            lo = mid
        else:
            hi = mid
    out.append(record("exponents/threshold-n2", "hypothesis-region", abs(hi - 1.5773502691896257), 1e-6, bisection=hi))
    t10 = ex.case_threshold(10)
    info = ex.classify_case(10, t10)
    out.append(
        record(
            "exponents/threshold-n10-boundary",
            "hypothesis-region",
            abs(info.quadratic),
            1e-12,
            passed=abs(info.quadratic) <= 1e-12 and info.tag == ex.CASE_II,
            case=info.tag,
        )
    )
    probes = [row for n in range(2, 11) for row in ex.boundary_probe(n)]
    flagged = sum(1 for row in probes if row["below_lower_limit"])
    out.append(
        record("exponents/boundary-probe", "hypothesis-region", len(probes) - flagged, 0, probes=len(probes))
    )
    w = ex.eps0_window(4, 2.0)
    out.append(record("exponents/window-n4-p2", "exponent-window", abs(w.eps0_max - 0.25), 1e-15, binding=w.binding_term))
    out.append(record("exponents/s-n4-p2", "decay-rate", abs(ex.s_exponent(4, 2.0, 0.1) - 0.4), 1e-15))
    # random sweep of the exact identities over the admissible region
    rng = unit_rng(seed, "exponents/sweep")
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 11))
        lo_p = max((n + 1.0) / 3.0, 1.0 + 1e-3)  # terms grow like 1/(p-1)
        p = float(rng.uniform(lo_p, n))
        e = float(rng.uniform(0.0, ex.eps0_window(n, p).eps0_max))
        a = ex.audit_exponent_algebra(n, p, e)
        worst = max(worst, max(a.residuals[k] for k in ex.EXACT_IDENTITIES))
    out.append(record("exponents/random-sweep-exact", "exponent-algebra", worst, 1e-11, samples=1000))
    return out


# -- orchestration ------------------------------------------------------------------


def plan(cfg: RunConfig, command: str) -> list[tuple]:
    """``(function, args)`` units for one command."""
    t = cfg.tol
    grid = cfg.grid_for(command)
    if command == "verify-bubbles":
        return [(bubble_unit, (n, p, lam, cfg.seed, t)) for n, p, lam in grid]
    if command == "verify-identities":
        return [(identity_unit, (n, p, cfg.seed, t, cfg.fields, cfg.points)) for n, p in grid]
    if command == "verify-matrix":
        return [(trace_bound_unit, (cfg.seed,))] + [
            (matrix_unit, (n, p, cfg.seed, cfg.fields, cfg.points)) for n, p in grid
        ]
    if command == "shoot":
        return [(shoot_reference_unit, (t,))] + [(shoot_unit, (n, p, cfg.seed, t)) for n, p in grid]
    if command == "growth":
        units = [(cutoff_unit, (n, p, t)) for n, p in grid] + [(growth_unit, (n, p, t)) for n, p in grid]
        units += [(hand_check_unit, ()), (divergence_bubble_unit, ())]
        units += [(divergence_unit, (i, cfg.seed, t)) for i in range(20)]
        return units
    if command == "exponents":
        ns = tuple(n for n, _ in grid)
        return [(scan_unit, (ns, cfg.resolution, v)) for v in ex.VARIANTS] + [(exponent_checks_unit, (cfg.seed,))]
    raise DomainError(f"unknown command {command!r}")


def _call(unit):
    fn, args = unit
    return fn(*args)


def run_units(units: list, jobs: int = 1) -> list[CheckRecord]:
    if jobs > 1 and len(units) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_call, units))
    else:
        results = [_call(u) for u in units]
    records = [r for batch in results for r in batch]
    return sorted(records, key=lambda r: r.check_id)


def run_command(cfg: RunConfig, command: str | None = None) -> list[CheckRecord]:
    command = command or cfg.command
    if command == "all":
        units = [u for c in COMMANDS for u in plan(replace(cfg, command=c), c)]
    else:
        units = plan(cfg, command)
    return run_units(units, cfg.jobs)


# -- tables for CSV output ------------------------------------------------------------


def growth_table(cfg: RunConfig) -> list[dict]:
    rows = []
    for n, p in cfg.grid_for("growth"):
        params = EqParams(n, p)
        bubble = Bubble.centered(1.0, n)
        for weight in WEIGHTS:
            for q in growth_q_grid(params, weight):
                fit = check_growth(params, bubble, q, weight, slope_tol=cfg.tol.slope)
                rows.append(
                    {
                        "n": n,
                        "p": p,
                        "weight": weight,
                        "q": q,
                        "fitted_slope": fit.fitted_slope,
                        "tail_slope": fit.tail_slope,
                        "predicted_slope": fit.predicted_slope,
                        "bound_slope": fit.bound_slope,
                        "bound_ok": fit.bound_ok,
                        "prediction_ok": fit.prediction_ok,
                    }
                )
    return rows


def region_table(cfg: RunConfig, variant: str = "displayed") -> str:
    ns = tuple(n for n, _ in cfg.grid_for("exponents"))
    return ex.scan_admissible_region(ns, cfg.resolution, variant).to_csv()
