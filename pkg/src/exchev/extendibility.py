"""Conditionally iid extreme-value copulas and extendibility diagnostics.

A decomposition ``(b, lambda)`` with ``b`` in [0, 1] and ``lambda`` a finite
mixture of unit-mean distribution functions defines

    ell(x) = b * sum_k x_k
             + (1 - b) * sum_j w_j * int_0^inf 1 - prod_k F_j(s / x_k) ds.

For discrete ``F`` the inner integrand is a step function of ``s`` and the
integral is evaluated exactly by summing over its breakpoints.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy import integrate

from .errors import CapacityError, InvariantError, QuadratureError
from .spectral import (
    ATOM_TOL,
    DiscreteSpectralMeasure,
    NuMeasure,
    QLaw,
    merge_atoms,
    merge_simplex_atoms,
)

MASS_TOL = 1e-12
MEAN_TOL = 1e-10
CONTINUOUS_TOL = 1e-8
AF_TOL = 1e-9
DENSITY_TOL = 1e-8
QUAD_LIMIT = 20_000
ENUMERATION_CAP = 1_000_000


# ---------------------------------------------------------------------------
# unit-mean distribution functions
# ---------------------------------------------------------------------------

class DiscreteUnitMeanDF:
    """Distribution function of a non-negative discrete variable with mean one.

    Parameters
    ----------
    x : array_like
        Atom locations (non-negative). Sorted and merged on construction.
    p : array_like
        Positive probabilities.
    """

    def __init__(self, x, p):
        x = np.asarray(x, dtype=float).reshape(-1)
        p = np.asarray(p, dtype=float).reshape(-1)
        if x.shape != p.shape or x.size == 0:
            raise InvariantError("shape", "x and p must be non-empty and of equal length")
        if np.any(~np.isfinite(x)) or np.any(x < 0):
            raise InvariantError("support", "atoms must be finite and non-negative")
        if np.any(~np.isfinite(p)) or np.any(p <= 0):
            raise InvariantError("mass", "atom probabilities must be positive")
        x, p = merge_atoms(x, p)
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise InvariantError("mass", f"probabilities sum to {p.sum()!r}, not 1")
        if abs(p @ x - 1.0) > MEAN_TOL:
            raise InvariantError("unit-mean", f"mean is {p @ x!r}, not 1")
        x.setflags(write=False)
        p.setflags(write=False)
        self.x = x
        self.p = p

    @classmethod
    def point_mass(cls):
        return cls([1.0], [1.0])

    @classmethod
    def cuadras_auge(cls, theta):
        """``F = 1 - theta + theta * 1{x >= 1/theta}``, theta in (0, 1]."""
        if not (0.0 < theta <= 1.0):
            raise InvariantError("theta", "Cuadras-Auge parameter must lie in (0, 1]")
        if theta == 1.0:
            return cls.point_mass()
        return cls([0.0, 1.0 / theta], [1.0 - theta, theta])

    @property
    def n_atoms(self):
        return self.x.size

    @property
    def zero_mass(self):
        return float(self.p[0]) if self.x[0] == 0.0 else 0.0

    def cdf(self, y):
        """Right-continuous ``F(y) = sum_{x_i <= y} p_i``."""
        cum = np.concatenate(([0.0], np.cumsum(self.p)))
        return cum[np.searchsorted(self.x, y, side="right")]

    def cdf_left(self, y):
        """Left limit ``F(y-) = sum_{x_i < y} p_i``."""
        cum = np.concatenate(([0.0], np.cumsum(self.p)))
        return cum[np.searchsorted(self.x, y, side="left")]

    def to_dict(self):
        return {"atoms": [{"x": float(a), "p": float(b)} for a, b in zip(self.x, self.p)]}

    @classmethod
    def from_dict(cls, doc):
        try:
            atoms = doc["atoms"]
            return cls([float(a["x"]) for a in atoms], [float(a["p"]) for a in atoms])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvariantError("schema", f"malformed distribution document: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, DiscreteUnitMeanDF):
            return NotImplemented
        return self.x.shape == other.x.shape and bool(
            np.all(np.abs(self.x - other.x) <= ATOM_TOL)
            and np.all(np.abs(self.p - other.p) <= MASS_TOL))

    __hash__ = None

    def __repr__(self):
        pairs = ", ".join(f"{a:.6g}: {b:.6g}" for a, b in zip(self.x, self.p))
        return f"DiscreteUnitMeanDF({{{pairs}}})"


def _quad(func, a, b, epsabs, points=None):
    """``scipy.integrate.quad`` with a hard subdivision cap and loud failure."""
    kwargs = {"epsabs": epsabs, "epsrel": 0.0, "limit": QUAD_LIMIT, "full_output": 1}
    if points is not None and np.isfinite(b):
        kwargs["points"] = points
    res = integrate.quad(func, a, b, **kwargs)
    value, abserr, info = res[0], res[1], res[2]
    if len(res) > 3 and abserr > epsabs:
        raise QuadratureError(
            f"quadrature on [{a}, {b}] failed after {info.get('last', '?')} "
            f"subdivisions (error estimate {abserr:.3g}): {res[3]}"
        )
    return value


class ContinuousUnitMeanDF:
    """Absolutely continuous unit-mean distribution given by its density.

    Parameters
    ----------
    density : callable
        Density ``f`` on ``[0, upper]``.
    upper : float
        Support bound; ``np.inf`` for unbounded support.
    cdf : callable, optional
        Distribution function. Obtained by quadrature when omitted.
    """

    def __init__(self, density, upper=np.inf, cdf=None, name="custom"):
        self.density = density
        self.upper = float(upper)
        self._cdf = cdf
        self.name = name
        total = _quad(density, 0.0, self.upper, CONTINUOUS_TOL / 10)
        mean = _quad(lambda t: t * density(t), 0.0, self.upper, CONTINUOUS_TOL / 10)
        if abs(total - 1.0) > CONTINUOUS_TOL:
            raise InvariantError("mass", f"density integrates to {total!r}")
        if abs(mean - 1.0) > CONTINUOUS_TOL:
            raise InvariantError("unit-mean", f"mean is {mean!r}, not 1")

    @classmethod
    def exponential(cls):
        return cls(lambda t: math.exp(-t), np.inf, cdf=lambda t: -math.expm1(-t),
                   name="exponential")

    @classmethod
    def gamma(cls, shape):
        """Gamma law with the given shape and mean one."""
        k = float(shape)
        const = k * math.log(k) - math.lgamma(k)

        def dens(t):
            if t <= 0.0:
                return 0.0 if k > 1 else (math.inf if k < 1 else k)
            return math.exp(const + (k - 1) * math.log(t) - k * t)

        from scipy.special import gammainc

        return cls(dens, np.inf, cdf=lambda t: float(gammainc(k, k * t)) if t > 0 else 0.0,
                   name=f"gamma({k:g})")

    @classmethod
    def uniform(cls):
        """Uniform law on [0, 2]."""
        return cls(lambda t: 0.5 if 0.0 <= t <= 2.0 else 0.0, 2.0,
                   cdf=lambda t: min(max(t / 2.0, 0.0), 1.0), name="uniform(0,2)")

    def cdf(self, y):
        if y <= 0.0:
            return 0.0
        if y >= self.upper:
            return 1.0
        if self._cdf is not None:
            return self._cdf(y)
        return min(1.0, _quad(self.density, 0.0, y, CONTINUOUS_TOL / 10))

    def __repr__(self):
        return f"ContinuousUnitMeanDF({self.name})"


# ---------------------------------------------------------------------------
# Q_F and A_F
# ---------------------------------------------------------------------------

def qf_discrete(F, exact=False, max_denominator=10**9):
    """Law of ``Q_F``: mass ``(x_i + x_j)/2 * p_i p_j`` at ``x_i/(x_i + x_j)``.

    With ``exact=True`` atoms and probabilities are rationalized (via
    ``Fraction.limit_denominator``) so coinciding ratios merge exactly.
    """
    if exact:
        xs = [Fraction(v).limit_denominator(max_denominator) for v in F.x]
        ps = [Fraction(v).limit_denominator(max_denominator) for v in F.p]
        acc = {}
        for xi, pi in zip(xs, ps):
            for xj, pj in zip(xs, ps):
                if xi + xj == 0:
                    continue
                key = xi / (xi + xj)
                acc[key] = acc.get(key, Fraction(0)) + (xi + xj) / 2 * pi * pj
        keys = sorted(acc)
        mass = np.array([float(acc[k]) for k in keys])
        return QLaw([float(k) for k in keys], mass / mass.sum())
    xi = F.x[:, None]
    xj = F.x[None, :]
    tot = xi + xj
    live = tot > 0
    ratio = np.divide(xi, tot, out=np.zeros_like(tot), where=live)
    mass = (tot / 2.0) * F.p[:, None] * F.p[None, :]
    # merge on [0, 1/2] and mirror, since snapping to the smallest member of a
    # cluster is not reflection invariant
    folded = np.minimum(ratio[live], 1.0 - ratio[live])
    lo, m = merge_atoms(folded, mass[live])
    return NuMeasure(lo, m / m.sum()).to_qlaw()


def _ell_discrete(xs, ps, vec):
    """``int_0^inf 1 - prod_k F(s / vec_k) ds`` for a discrete ``F`` (exact)."""
    vec = np.asarray(vec, dtype=float)
    active = vec[vec > 0]
    if active.size == 0:
        return 0.0
    cum = np.concatenate(([0.0], np.cumsum(ps)))
    brk = xs[None, :] * active[:, None]      # row k: breakpoints of F(s / vec_k)
    grid = np.unique(np.concatenate(([0.0], brk.ravel())))
    left = grid[:-1]
    prod = np.ones(left.size)
    for row in brk:
        prod = prod * cum[np.searchsorted(row, left, side="right")]
    return math.fsum(np.diff(grid) * (1.0 - prod))


def af_discrete_integral(F, x):
    """``A_F(x) = int_0^inf 1 - F(s/x) F(s/(1-x)) ds`` by breakpoint summation."""
    xx = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any((xx < 0) | (xx > 1)):
        raise InvariantError("domain", "A_F is defined on [0, 1]")
    vals = np.array([_ell_discrete(F.x, F.p, (v, 1.0 - v)) for v in xx])
    return float(vals[0]) if np.ndim(x) == 0 else vals


def af_discrete(F, check_tol=1e-12):
    """Piecewise-linear ``A_F`` for a discrete unit-mean ``F``.

    Built from ``qf_discrete(F)`` and cross-checked against the breakpoint
    integral at every kink and midpoint.
    """
    A = qf_discrete(F).pickands()
    mids = 0.5 * (A.kinks[:-1] + A.kinks[1:])
    grid = np.concatenate((A.kinks, mids))
    gap = np.max(np.abs(A(grid) - af_discrete_integral(F, grid)))
    if gap > check_tol:
        raise InvariantError("af-agreement", f"Q_F and integral paths differ by {gap:.3g}")
    return A


def af_continuous(F, x):
    """``A_F(x)`` for a continuous ``F`` by adaptive quadrature (abs. tol 1e-9)."""
    x = float(x)
    if not (0.0 <= x <= 1.0):
        raise InvariantError("domain", "A_F is defined on [0, 1]")
    if x == 0.0 or x == 1.0:
        return 1.0

    def integrand(s):
        return 1.0 - F.cdf(s / x) * F.cdf(s / (1.0 - x))

    top = F.upper * max(x, 1.0 - x)
    if np.isfinite(top):
        knots = sorted({F.upper * x, F.upper * (1.0 - x)} - {top})
        return _quad(integrand, 0.0, top, AF_TOL, points=knots or None)
    # split so the infinite-range transform only sees the tail
    scale = max(x, 1.0 - x)
    return _quad(integrand, 0.0, scale, AF_TOL / 2) + _quad(integrand, scale, np.inf, AF_TOL / 2)


def qf_density(F, q):
    """Density of ``Q_F``: ``(1/2) int_0^inf t^2 f(q t) f((1-q) t) dt``."""
    q = float(q)
    if not (0.0 < q < 1.0):
        raise InvariantError("domain", "the density of Q_F is evaluated on (0, 1)")
    f = F.density

    def integrand(t):
        return t * t * f(q * t) * f((1.0 - q) * t)

    top = F.upper / max(q, 1.0 - q)
    if np.isfinite(top):
        return 0.5 * _quad(integrand, 0.0, top, 2 * DENSITY_TOL)
    scale = 1.0 / max(q, 1.0 - q)
    return 0.5 * (_quad(integrand, 0.0, scale, DENSITY_TOL)
                  + _quad(integrand, scale, np.inf, DENSITY_TOL))


# ---------------------------------------------------------------------------
# necessary conditions for extendibility
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Verdict:
    """Outcome of a necessary-condition check.

    When the check fails, ``witness_q`` is the smallest violating point and
    ``lhs``/``rhs`` are both sides of the bound there; on success they
    describe the tightest point.
    """

    passed: bool
    witness_q: float | None
    lhs: float
    rhs: float
    details: dict = field(default_factory=dict, compare=False)

    def to_dict(self, extended=False):
        doc = {"pass": self.passed, "witness_q": self.witness_q,
               "lhs": self.lhs, "rhs": self.rhs}
        if extended:
            doc.update(self.details)
        return doc

    def to_json(self, extended=False):
        return json.dumps(self.to_dict(extended))


def check_necessary_discrete(law, rtol=1e-12):
    """Bound ``P(Q=q) <= P(Q=1/2) / (2 sqrt(q(1-q)))`` at every atom of `law`.

    ``law`` must be a symmetric :class:`QLaw`; atoms at 0 and 1 never
    violate the bound.
    """
    if not isinstance(law, QLaw):
        raise InvariantError("type", "check_necessary_discrete takes a finitely supported QLaw")
    if not law.is_symmetric():
        raise InvariantError("symmetry", "Q must be equal in law to 1 - Q")
    p_half = law.mass_at(0.5)
    worst = None
    for q, p in zip(law.q, law.p):
        if q <= ATOM_TOL or q >= 1 - ATOM_TOL:
            continue
        rhs = p_half / (2.0 * math.sqrt(q * (1.0 - q)))
        if p > rhs * (1 + rtol) + 1e-15:
            return Verdict(False, float(q), float(p), float(rhs),
                           {"p_half": p_half, "n_atoms": law.n_atoms})
        ratio = p / rhs if rhs > 0 else math.inf
        if worst is None or ratio > worst[0]:
            worst = (ratio, float(p), float(rhs))
    if worst is None:
        # only boundary atoms: the bound is +inf everywhere
        return Verdict(True, None, 0.0, math.inf, {"p_half": p_half, "n_atoms": law.n_atoms})
    return Verdict(True, None, worst[1], worst[2], {"p_half": p_half, "n_atoms": law.n_atoms})


def check_necessary_continuous(q_grid, f_values, atol=1e-9):
    """Bound ``f(q) <= f(1/2) / (8 (q(1-q))^{3/2})`` on a sampled density grid.

    Parameters
    ----------
    q_grid : array_like
        Points in (0, 1); must contain 1/2.
    f_values : array_like
        Non-negative density values (exact or estimated) on the grid.
    atol : float
        Absolute slack for noisy density evaluations.
    """
    q = np.asarray(q_grid, dtype=float).reshape(-1)
    f = np.asarray(f_values, dtype=float).reshape(-1)
    if q.shape != f.shape or q.size == 0:
        raise InvariantError("shape", "grid and values must be non-empty and of equal length")
    if np.any((q <= 0) | (q >= 1)):
        raise InvariantError("domain", "grid points must lie in (0, 1)")
    if np.any(f < 0) or np.any(~np.isfinite(f)):
        raise InvariantError("density", "density values must be finite and non-negative")
    at_half = np.flatnonzero(np.abs(q - 0.5) <= ATOM_TOL)
    if at_half.size == 0:
        raise InvariantError("grid", "the grid must contain q = 1/2")
    f_half = float(f[at_half[0]])
    order = np.argsort(q)
    q, f = q[order], f[order]
    w = (q * (1.0 - q)) ** 1.5
    bound = f_half / (8.0 * w)
    details = {
        "f_half": f_half,
        "implied_lower_bound": float(8.0 * np.max(f * w)),
        "grid_size": int(q.size),
        "grid_resolution": float(np.max(np.diff(q))) if q.size > 1 else None,
    }
    bad = np.flatnonzero(f > bound + atol)
    if bad.size:
        i = bad[0]
        return Verdict(False, float(q[i]), float(f[i]), float(bound[i]), details)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(bound > 0, f / bound, np.where(f > 0, np.inf, 0.0))
    i = int(np.argmax(ratio))
    return Verdict(True, None, float(f[i]), float(bound[i]), details)


# ---------------------------------------------------------------------------
# (b, lambda) models
# ---------------------------------------------------------------------------

class CondIIDSpec:
    """Pair ``(b, lambda)`` with ``lambda`` a finite mixture of discrete
    unit-mean distribution functions.

    Parameters
    ----------
    b : float
        Weight of the independence part, in [0, 1].
    components : sequence of (float, DiscreteUnitMeanDF)
        Mixture weights and distribution functions.
    """

    def __init__(self, b, components):
        b = float(b)
        if not (0.0 <= b <= 1.0):
            raise InvariantError("drift", f"b must lie in [0, 1], got {b}")
        comps = list(components)
        if not comps:
            raise InvariantError("mixture", "lambda needs at least one component")
        w = np.array([float(c[0]) for c in comps])
        if np.any(w <= 0) or abs(w.sum() - 1.0) > MASS_TOL:
            raise InvariantError("mixture", "weights must be positive and sum to 1")
        dfs = [c[1] for c in comps]
        if not all(isinstance(F, DiscreteUnitMeanDF) for F in dfs):
            raise InvariantError("mixture", "components must be DiscreteUnitMeanDF")
        w.setflags(write=False)
        self.b = b
        self.weights = w
        self.dfs = tuple(dfs)

    @classmethod
    def single(cls, F, b=0.0):
        return cls(b, [(1.0, F)])

    def to_dict(self):
        return {
            "b": self.b,
            "lambda": [{"w": float(w), "F": F.to_dict()} for w, F in zip(self.weights, self.dfs)],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            comps = [(float(c["w"]), DiscreteUnitMeanDF.from_dict(c["F"])) for c in doc["lambda"]]
            return cls(float(doc["b"]), comps)
        except (KeyError, TypeError, ValueError) as exc:
            raise InvariantError("schema", f"malformed condiid document: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, CondIIDSpec):
            return NotImplemented
        return (self.b == other.b and self.weights.shape == other.weights.shape
                and bool(np.all(np.abs(self.weights - other.weights) <= MASS_TOL))
                and all(a == c for a, c in zip(self.dfs, other.dfs)))

    __hash__ = None

    def __repr__(self):
        return f"CondIIDSpec(b={self.b:g}, n_components={len(self.dfs)})"


def ell_from_condiid(spec, x):
    """Exact stable tail dependence function of a ``(b, lambda)`` model."""
    pts = np.asarray(x, dtype=float)
    scalar = pts.ndim == 1
    pts = np.atleast_2d(pts)
    if np.any(pts < 0) or np.any(np.isnan(pts)):
        raise InvariantError("domain", "ell is defined on non-negative vectors")
    out = np.empty(pts.shape[0])
    for r, vec in enumerate(pts):
        mix = math.fsum(w * _ell_discrete(F.x, F.p, vec) for w, F in zip(spec.weights, spec.dfs))
        out[r] = spec.b * math.fsum(vec) + (1.0 - spec.b) * mix
    return float(out[0]) if scalar else out


def spectral_from_condiid(spec, d):
    """Discrete spectral measure of the d-variate ``(b, lambda)`` model.

    Uses ``int 1 - prod_k F(s/x_k) ds = E[max_k x_k X_k]`` with ``X_k`` iid
    from ``F``: each atom tuple ``X`` with sum ``S > 0`` becomes the simplex
    atom ``X / S`` with mass ``P(X) * S / d``.
    """
    d = int(d)
    if d < 2:
        raise InvariantError("dimension", "spectral measures need d >= 2")
    count = sum(F.n_atoms ** d for F in spec.dfs)
    if count > ENUMERATION_CAP:
        raise CapacityError("enumeration-cap",
                            f"{count} atom tuples exceed the cap of {ENUMERATION_CAP}")
    pts_all, mass_all = [], []
    if spec.b > 0:
        pts_all.append(np.eye(d))
        mass_all.append(np.full(d, spec.b / d))
    if spec.b < 1:
        for w, F in zip(spec.weights, spec.dfs):
            idx = np.indices((F.n_atoms,) * d).reshape(d, -1).T
            X = F.x[idx]
            prob = np.prod(F.p[idx], axis=1)
            S = X.sum(axis=1)
            keep = S > 0
            pts_all.append(X[keep] / S[keep, None])
            mass_all.append((1.0 - spec.b) * w * prob[keep] * S[keep] / d)
    pts, masses = merge_simplex_atoms(np.vstack(pts_all), np.concatenate(mass_all))
    return DiscreteSpectralMeasure(pts, masses, symmetric=True)
