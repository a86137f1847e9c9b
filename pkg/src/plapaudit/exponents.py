"""Exponent bookkeeping for the decay estimate of the weighted ``Tr E^2``
integral.

With ``m = (p-1)/p - eps0`` the argument needs

    p~ = 2 - n - 1/p + eps0 - (eps0 - a - 1)(p - 1 + p eps0)/p,
    q  = p~ p / (1 - p eps0),

and splits on the sign of ``Q(n, p) = 3p^2 - 2(n+1)p + n``: case (i) when
``Q < 0`` (then ``-a-1 < q < 0``), case (ii) otherwise (then ``q > 0``).  The
resulting decay rate is

    s = 1/p - eps0                                                  (i)
    s = (2p-1)(n-p)/(p^2(p-1)) - (a + 1 + 1/p - eps0) eps0/(p-1)    (ii)

``eps0`` must lie below a min-list window.  Its fourth term guards the sign
of ``q`` in case (i) and comes in two variants:

``displayed``
    ``-Q / (p [(3p-(n+1))/(2p) + 1])``, the form of the final min-list.
``derived``
    ``-Q / (p [2p(3p-(n+1)) + 1])``.  ``q < 0`` is equivalent to
    ``eps0 [ (3p-(n+1))/(1/p - eps0) + 1 ] < -Q/p``, and ``eps0 < 1/(2p)``
    gives ``1/(1/p - eps0) <= 2p``, so this term is sufficient.

The displayed term is larger than the derived one whenever ``3p > n+1``;
near the case threshold it admits ``eps0`` with ``q > 0``, which
:func:`scan_admissible_region` reports.

Expanding the case (ii) growth exponent exactly gives
``2 - (2p-1)(n-p)/(p^2(p-1)) + (a + p + 1/p - eps0) eps0/(p-1)``, which
exceeds the simplified form with ``a + 1`` in place of ``a + p`` by exactly
``eps0``.  The corrected rate ``s - eps0`` is carried alongside ``s``, and
the ``derived`` variant also replaces ``a + 2`` by ``a + p + 1/p`` in the
last window term so that the corrected rate stays positive on the whole
window.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import AdmissibilityError, DomainError
from .params import derived_constants

CASE_I = "i"
CASE_II = "ii"
VARIANTS = ("displayed", "derived")
BOUNDARY_TOL = 1e-12
# identities as simplified by hand, and the exact forms they should reduce to
STATED_IDENTITIES = ("flux-growth", "volume-growth", "hoelder-power", "power-integral")
EXACT_IDENTITIES = (
    "flux-growth",
    "volume-growth-expanded",
    "volume-growth-corrected",
    "hoelder-power",
    "power-integral",
    "q-closed-form",
)
REGION_COLUMNS = ("n", "p", "case", "eps0_max", "binding_term", "s", "q", "p_tilde", "m")


def case_quadratic(n: float, p: float) -> float:
    """``3p^2 - 2(n+1)p + n``."""
    return 3.0 * p * p - 2.0 * (n + 1.0) * p + n


def case_threshold(n: float) -> float:
    """Larger root ``(n + 1 + sqrt((n+1)^2 - 3n)) / 3`` of the case quadratic."""
    return (n + 1.0 + math.sqrt((n + 1.0) ** 2 - 3.0 * n)) / 3.0


def _check_region(n: float, p: float) -> None:
    if n < 2 or int(n) != n:
        raise DomainError(f"n must be an integer >= 2, got {n!r}")
    if not ((n + 1.0) / 3.0 <= p < n) or p <= 1.0:
        raise DomainError(f"p = {p!r} outside [(n+1)/3, n) with p > 1 for n = {n}")


@dataclass(frozen=True)
class CaseInfo:
    tag: str
    quadratic: float
    threshold: float


def classify_case(n: int, p: float, boundary_tol: float = BOUNDARY_TOL, check_region: bool = True) -> CaseInfo:
    """Case (i) iff the quadratic is negative.

    ``|Q| <= boundary_tol`` counts as the boundary, which belongs to case (ii).
    """
    if check_region:
        _check_region(n, p)
    Q = case_quadratic(n, p)
    tag = CASE_I if Q < -boundary_tol else CASE_II
    return CaseInfo(tag, Q, case_threshold(n))


@dataclass(frozen=True)
class Window:
    eps0_max: float
    terms: dict
    binding_term: str
    variant: str


def window_terms(n: int, p: float, case: str, variant: str = "displayed") -> dict:
    """The min-list terms by name; the sign-of-q term only in case (i)."""
    if variant not in VARIANTS:
        raise DomainError(f"unknown window variant {variant!r}")
    a, _, _ = derived_constants(n, p)
    decay_den = a + 2.0 if variant == "displayed" else a + p + 1.0 / p
    terms = {
        "m-positive": (p - 1.0) / p,
        "hoelder-split": 1.0 / (2.0 * p),
        "gradient-growth": (p - 1.0) / p * (n - p),
        "decay-positive": (2.0 * p - 1.0) * (n - p) / (p * p * decay_den),
    }
    if case == CASE_I:
        Q = case_quadratic(n, p)
        c = 3.0 * p - (n + 1.0)
        denom = c / (2.0 * p) + 1.0 if variant == "displayed" else 2.0 * p * c + 1.0
        terms["negative-q"] = -Q / (p * denom)
    return terms


def eps0_window(n: int, p: float, variant: str = "displayed", check_region: bool = True) -> Window:
    """Upper end of the admissible ``eps0`` interval with the term breakdown."""
    case = classify_case(n, p, check_region=check_region).tag
    terms = window_terms(n, p, case, variant)
    binding = min(terms, key=terms.get)
    return Window(terms[binding], terms, binding, variant)


def p_tilde(n: int, p: float, eps0: float) -> float:
    a, _, _ = derived_constants(n, p)
    return 2.0 - n - 1.0 / p + eps0 - (eps0 - a - 1.0) * (p - 1.0 + p * eps0) / p


def q_exponent(n: int, p: float, eps0: float) -> float:
    """``p~ p / (1 - p eps0)``."""
    return p_tilde(n, p, eps0) * p / (1.0 - p * eps0)


def s_formula(n: int, p: float, eps0: float, case: str, corrected: bool = False) -> float:
    """Decay rate by case; ``corrected`` uses the exact case (ii) expansion."""
    a, _, _ = derived_constants(n, p)
    if case == CASE_I:
        return 1.0 / p - eps0
    s = (2.0 * p - 1.0) * (n - p) / (p * p * (p - 1.0)) - (a + 1.0 + 1.0 / p - eps0) * eps0 / (p - 1.0)
    return s - eps0 if corrected else s


def s_exponent(n: int, p: float, eps0: float, variant: str = "displayed", corrected: bool = False) -> float:
    """Decay rate ``s(eps0)``; ``eps0`` must lie strictly inside the window."""
    win = eps0_window(n, p, variant)
    if not 0.0 < eps0 < win.eps0_max:
        raise AdmissibilityError(f"eps0 = {eps0!r} outside (0, {win.eps0_max!r})")
    s = s_formula(n, p, eps0, classify_case(n, p).tag, corrected)
    if not s > 0.0:
        raise AdmissibilityError(f"s = {s!r} is not positive")
    return s


@dataclass
class ExponentProfile:
    n: int
    p: float
    a: float
    b: float
    m: float
    eps0: float
    p_tilde: float
    q: float
    case_tag: str
    s: float
    eps0_max: float
    binding_term: str
    quadratic: float
    variant: str = "displayed"
    s_corrected: float = float("nan")

    @property
    def q_sign_ok(self) -> bool:
        if self.case_tag == CASE_I:
            return -self.a - 1.0 < self.q < 0.0
        return self.q > 0.0

    @property
    def violations(self) -> list[str]:
        out = []
        if not self.s > 0.0:
            out.append("s-nonpositive")
        if not self.s_corrected > 0.0:
            out.append("s-corrected-nonpositive")
        if not self.q_sign_ok:
            out.append("q-sign")
        if not 0.0 < self.m < (self.p - 1.0) / self.p:
            out.append("m-range")
        if not 1.0 - self.p * self.eps0 > 0.5:
            out.append("hoelder-exponent")
        if not self.eps0_max > 0.0:
            out.append("empty-window")
        return out

    def row(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "case": self.case_tag,
            "eps0_max": self.eps0_max,
            "binding_term": self.binding_term,
            "s": self.s,
            "q": self.q,
            "p_tilde": self.p_tilde,
            "m": self.m,
        }


def exponent_profile(
    n: int, p: float, eps0: float | None = None, variant: str = "displayed", check_region: bool = True
) -> ExponentProfile:
    """All exponents at ``eps0`` (default: half the window)."""
    info = classify_case(n, p, check_region=check_region)
    win = eps0_window(n, p, variant, check_region=check_region)
    e = 0.5 * win.eps0_max if eps0 is None else float(eps0)
    a, b, _ = derived_constants(n, p)
    return ExponentProfile(
        n=int(n),
        p=float(p),
        a=a,
        b=b,
        m=(p - 1.0) / p - e,
        eps0=e,
        p_tilde=p_tilde(n, p, e),
        q=q_exponent(n, p, e),
        case_tag=info.tag,
        s=s_formula(n, p, e, info.tag),
        s_corrected=s_formula(n, p, e, info.tag, corrected=True),
        eps0_max=win.eps0_max,
        binding_term=win.binding_term,
        quadratic=info.quadratic,
        variant=variant,
    )


# -- algebra audit ----------------------------------------------------------


@dataclass
class AlgebraAudit:
    n: int
    p: float
    eps0: float
    residuals: dict
    tol: float = 1e-11

    @property
    def max_residual(self) -> float:
        return max(self.residuals.values())

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tol


def audit_exponent_algebra(n: int, p: float, eps0: float, tol: float = 1e-11) -> AlgebraAudit:
    """Evaluate both sides of each hand-simplified exponent identity.

    * ``flux-growth``: ``(n+e-a-1)(p-1+pe)/p + n(1-pe)/p + p~ = 2 - 1/p + e``
    * ``volume-growth-expanded``: ``(n+e-a-1)(p-1+pe)/p + (n + q p/(p-1))(1-pe)/p``
      equals ``n + (e-a-1)(p-1+pe)/p + p~ + p~/(p-1)``
    * ``volume-growth-intermediate``: the latter equals
      ``2 - 1/p + Q/(p^2(p-1)) + (a+1+1/p-e) e/(p-1)``
    * ``volume-growth``: and equals
      ``2 - (2p-1)(n-p)/(p^2(p-1)) + (a+1+1/p-e) e/(p-1)``
    * ``volume-growth-corrected``: the exact value
      ``2 - (2p-1)(n-p)/(p^2(p-1)) + (a+p+1/p-e) e/(p-1)``
    * ``hoelder-power``: ``q (1-pe)/p = p~``
    * ``power-integral``: ``(n+q)(1-pe)/p = n(1-pe)/p + p~``
    * ``q-closed-form``: ``q = Q/p + [(3p-(n+1))/(1/p - e) + 1] e``

    Residuals are absolute.  The two simplified volume-growth forms are off
    by exactly ``e``; the corrected form holds.
    """
    a, _, _ = derived_constants(n, p)
    e = float(eps0)
    pt = p_tilde(n, p, e)
    q = q_exponent(n, p, e)
    Q = case_quadratic(n, p)
    h = (p - 1.0 + p * e) / p  # Hoelder exponent on the gradient factor
    k = (1.0 - p * e) / p  # Hoelder exponent on the power factor
    tail = (a + 1.0 + 1.0 / p - e) * e / (p - 1.0)
    expanded = n + (e - a - 1.0) * h + pt + pt / (p - 1.0)
    res = {
        "flux-growth": (n + e - a - 1.0) * h + n * k + pt - (2.0 - 1.0 / p + e),
        "volume-growth-expanded": (n + e - a - 1.0) * h + (n + q * p / (p - 1.0)) * k - expanded,
        "volume-growth-intermediate": expanded - (2.0 - 1.0 / p + Q / (p * p * (p - 1.0)) + tail),
        "volume-growth": expanded - (2.0 - (2.0 * p - 1.0) * (n - p) / (p * p * (p - 1.0)) + tail),
        "volume-growth-corrected": expanded
        - (2.0 - (2.0 * p - 1.0) * (n - p) / (p * p * (p - 1.0)) + (a + p + 1.0 / p - e) * e / (p - 1.0)),
        "hoelder-power": q * k - pt,
        "power-integral": (n + q) * k - (n * k + pt),
        "q-closed-form": q - (Q / p + ((3.0 * p - (n + 1.0)) / (1.0 / p - e) + 1.0) * e),
    }
    return AlgebraAudit(int(n), float(p), e, {key: abs(v) for key, v in res.items()}, tol)


# -- region scan --------------------------------------------------------------


@dataclass
class RegionScan:
    variant: str
    resolution: float
    profiles: list = field(default_factory=list)
    violations: list = field(default_factory=list)  # (n, p, [names])
    algebra_residuals: dict = field(default_factory=dict)  # identity -> max residual

    @property
    def points(self) -> int:
        return len(self.profiles)

    @property
    def violation_counts(self) -> dict:
        counts: dict = {}
        for _, _, names in self.violations:
            for name in names:
                counts[name] = counts.get(name, 0) + 1
        return dict(sorted(counts.items()))

    def max_algebra_residual(self, identities=None) -> float:
        keys = self.algebra_residuals if identities is None else identities
        return max(self.algebra_residuals[k] for k in keys)

    @property
    def min_s(self) -> float:
        return min(pr.s for pr in self.profiles) if self.profiles else float("nan")

    def case_split(self, n: int) -> tuple[float, float] | None:
        """Last case-(i) and first case-(ii) grid point for ``n``."""
        ps_i = [pr.p for pr in self.profiles if pr.n == n and pr.case_tag == CASE_I]
        ps_ii = [pr.p for pr in self.profiles if pr.n == n and pr.case_tag == CASE_II]
        if not ps_i or not ps_ii:
            return None
        return max(ps_i), min(ps_ii)

    def rows(self) -> list[dict]:
        return [pr.row() for pr in self.profiles]

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=REGION_COLUMNS, lineterminator="\n")
        writer.writeheader()
        for row in self.rows():
            writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
        return buf.getvalue()


def p_grid(n: int, resolution: float) -> np.ndarray:
    """Grid on ``[(n+1)/3, n)`` with spacing ``resolution``, dropping ``p <= 1``."""
    lo = (n + 1.0) / 3.0
    count = int(math.ceil((n - lo) / resolution))
    ps = lo + resolution * np.arange(count)
    return ps[(ps > 1.0) & (ps < n)]


def scan_admissible_region(n_range, resolution: float = 1e-3, variant: str = "displayed") -> RegionScan:
    """Profiles at ``eps0 = window/2`` over the hypothesis region.

    Violations of ``s > 0``, the ``q`` sign, the range of ``m`` and the
    Hoelder exponent are collected, not raised.
    """
    if not resolution > 0.0:
        raise DomainError("resolution must be positive")
    scan = RegionScan(variant=variant, resolution=resolution)
    for n in sorted(set(int(x) for x in n_range)):
        for p in p_grid(n, resolution):
            pr = exponent_profile(n, float(p), variant=variant)
            scan.profiles.append(pr)
            bad = pr.violations
            audit = audit_exponent_algebra(n, float(p), pr.eps0)
            for key, val in audit.residuals.items():
                scan.algebra_residuals[key] = max(scan.algebra_residuals.get(key, 0.0), val)
            if bad:
                scan.violations.append((n, float(p), bad))
    return scan


def boundary_probe(n: int, offsets=(1e-3, 1e-2, 5e-2), eps0: float = 1e-6) -> list[dict]:
    """Profiles just below ``p = (n+1)/3``, outside the hypothesis region.

    There ``Q/p + a + 1 = 3p - (n+1) < 0``, so for small ``eps0`` the
    exponent ``q`` drops below ``-a-1``.
    """
    out = []
    for d in offsets:
        p = (n + 1.0) / 3.0 - d
        if p <= 1.0:
            continue
        pr = exponent_profile(n, p, eps0=eps0, check_region=False)
        row = asdict(pr)
        row["below_lower_limit"] = pr.q <= -pr.a - 1.0
        out.append(row)
    return out
