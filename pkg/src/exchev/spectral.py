"""Discrete spectral measures, stable tail dependence functions and
bivariate Pickands dependence functions.

A stable tail dependence function is represented through the law of a
simplex-valued random vector ``Q`` with ``E[Q_k] = 1/d``:

    ell(x) = d * E[max_k x_k Q_k].

The law of ``Q`` is kept finitely supported (:class:`DiscreteSpectralMeasure`).
In the bivariate case the same object is a law on ``[0, 1]`` with mean 1/2
(:class:`QLaw`) and the Pickands dependence function

    A(x) = 2 * E[max(x Q, (1 - x)(1 - Q))]

is piecewise linear (:class:`PiecewiseLinearPickands`).
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, InvariantError

ATOM_TOL = 1e-12
MASS_TOL = 1e-12
BARYCENTER_TOL = 1e-10
MAX_PERM_DIM = 9
SLOPE_TOL = 1e-9
# q_from_A drops slope jumps below this (rounding noise from kink values)
_JUMP_NOISE = 1e-13
# absolute rounding allowed in stored Pickands values
_VALUE_NOISE = 1e-14
# rows whose sums are off by less than this are left alone, which keeps
# re-normalization idempotent under JSON round trips
_ROW_SUM_TOL = 1e-14


# ---------------------------------------------------------------------------
# atom merging
# ---------------------------------------------------------------------------

def _fix_row_sums(pts):
    sums = pts.sum(axis=1, keepdims=True)
    off = np.abs(sums - 1.0) > _ROW_SUM_TOL
    return np.where(off, pts / sums, pts)


def merge_simplex_atoms(points, masses, tol=ATOM_TOL):
    """:func:`merge_atoms` for simplex points, with row sums restored.

    Snapping moves each entry by up to `tol`, so a merged row may sum to
    ``1 +- d * tol``; such rows are renormalized.
    """
    pts, m = merge_atoms(points, masses, tol)
    return _fix_row_sums(pts), m


def _snap_1d(values, tol):
    """Replace every value by the smallest member of its tolerance cluster."""
    values = np.asarray(values, dtype=float)
    if values.size == 0:
        return values.copy()
    order = np.argsort(values, kind="stable")
    v = values[order]
    starts = np.concatenate(([True], np.diff(v) > tol))
    group = np.cumsum(starts) - 1
    reps = v[starts]
    out = np.empty_like(values)
    out[order] = reps[group]
    return out


def merge_atoms(points, masses, tol=ATOM_TOL):
    """Merge atoms whose locations agree entrywise within `tol`.

    Parameters
    ----------
    points : array_like, shape (k, d) or (k,)
    masses : array_like, shape (k,)
    tol : float

    Returns
    -------
    points, masses : ndarray
        Unique locations in lexicographic order and their summed masses.
    """
    pts = np.asarray(points, dtype=float)
    flat = pts.ndim == 1
    if flat:
        pts = pts[:, None]
    m = np.asarray(masses, dtype=float).reshape(-1)
    if pts.shape[0] != m.shape[0]:
        raise InvariantError("shape", "points and masses differ in length")
    if pts.shape[0] == 0:
        return (pts[:, 0] if flat else pts), m
    snapped = np.column_stack([_snap_1d(pts[:, k], tol) for k in range(pts.shape[1])])
    uniq, inverse = np.unique(snapped, axis=0, return_inverse=True)
    inverse = np.asarray(inverse).reshape(-1)
    summed = np.bincount(inverse, weights=m, minlength=uniq.shape[0])
    if flat:
        uniq = uniq[:, 0]
    return uniq, summed


def _permutations(d):
    if d > MAX_PERM_DIM:
        raise CapacityError(
            "permutation-cap",
            f"d = {d} exceeds the permutation enumeration cap d <= {MAX_PERM_DIM}",
        )
    return np.array(list(itertools.permutations(range(d))), dtype=np.intp)


def _n_distinct_perms(sorted_row):
    counts = []
    run = 1
    for a, b in zip(sorted_row[:-1], sorted_row[1:]):
        if b == a:
            run += 1
        else:
            counts.append(run)
            run = 1
    counts.append(run)
    total = math.factorial(len(sorted_row))
    for c in counts:
        total //= math.factorial(c)
    return total


def _sorted_sum(terms):
    # order-independent result: permuted inputs give bitwise-equal sums
    return np.sort(terms, axis=-1).sum(axis=-1)


# ---------------------------------------------------------------------------
# simplex points and classes
# ---------------------------------------------------------------------------

def as_simplex_vector(q, tol=ATOM_TOL):
    """Validate `q` as a point of the unit simplex and return it as an array."""
    q = np.asarray(q, dtype=float).reshape(-1)
    if q.size < 2:
        raise InvariantError("dimension", "simplex vectors need d >= 2")
    if np.any(~np.isfinite(q)) or np.any(q < -tol):
        raise InvariantError("simplex", f"negative or non-finite entry in {q}")
    if abs(q.sum() - 1.0) > tol:
        raise InvariantError("simplex", f"entries sum to {q.sum()!r}, not 1")
    return np.clip(q, 0.0, None)


class EquivClass:
    """Permutation class ``[q]`` of a simplex point, stored as its sorted
    representative."""

    __slots__ = ("representative",)

    def __init__(self, q):
        rep = np.sort(as_simplex_vector(q))
        rep.setflags(write=False)
        self.representative = rep

    @property
    def d(self):
        return self.representative.size

    def __eq__(self, other):
        if not isinstance(other, EquivClass):
            return NotImplemented
        return self.d == other.d and bool(
            np.all(np.abs(self.representative - other.representative) <= ATOM_TOL)
        )

    __hash__ = None

    def __repr__(self):
        return f"EquivClass({self.representative.tolist()})"


# ---------------------------------------------------------------------------
# discrete spectral measures
# ---------------------------------------------------------------------------

class DiscreteSpectralMeasure:
    """Finitely supported law of the simplex vector ``Q``.

    Parameters
    ----------
    points : array_like, shape (k, d)
        Atom locations on the unit simplex.
    masses : array_like, shape (k,)
        Positive probabilities summing to one.
    symmetric : bool
        Declare the law exchangeable. The claim is verified and the atoms
        are canonicalized so that every permutation class is stored as
        exact permutations of one representative with equal masses.

    Notes
    -----
    The Pickands measure is ``d`` times this law. Atoms closer than
    ``ATOM_TOL`` entrywise are merged.
    """

    def __init__(self, points, masses, symmetric=False):
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        m = np.asarray(masses, dtype=float).reshape(-1)
        if pts.shape[0] != m.shape[0]:
            raise InvariantError("shape", "points and masses differ in length")
        if pts.shape[0] == 0:
            raise InvariantError("support", "a spectral measure needs at least one atom")
        d = pts.shape[1]
        if d < 2:
            raise InvariantError("dimension", "spectral measures need d >= 2")
        if np.any(~np.isfinite(pts)) or np.any(pts < -ATOM_TOL):
            raise InvariantError("simplex", "atom with negative or non-finite entry")
        if np.any(np.abs(pts.sum(axis=1) - 1.0) > ATOM_TOL):
            raise InvariantError("simplex", "atom entries do not sum to 1")
        if np.any(~np.isfinite(m)) or np.any(m <= 0):
            raise InvariantError("mass", "atom masses must be positive")
        if abs(m.sum() - 1.0) > MASS_TOL:
            raise InvariantError("mass", f"masses sum to {m.sum()!r}, not 1")
        pts = np.clip(pts, 0.0, None)
        pts, m = merge_simplex_atoms(pts, m)
        bary = m @ pts
        if np.any(np.abs(bary - 1.0 / d) > BARYCENTER_TOL):
            raise InvariantError(
                "barycenter", f"E[Q] = {bary.tolist()} differs from 1/{d}"
            )
        if symmetric:
            pts, m = _canonicalize_symmetric(pts, m)
        pts.setflags(write=False)
        m.setflags(write=False)
        self.points = pts
        self.masses = m
        self.symmetric = bool(symmetric)

    # -- constructors --------------------------------------------------------

    @classmethod
    def extremal(cls, q):
        """Symmetrized point mass at `q`: the law behind ``eval_extremal_ell(q, .)``."""
        return symmetrize(q)

    @classmethod
    def comonotone(cls, d):
        return cls(np.full((1, d), 1.0 / d), [1.0], symmetric=True)

    @classmethod
    def independence(cls, d):
        return cls(np.eye(d), np.full(d, 1.0 / d), symmetric=True)

    @classmethod
    def from_qlaw(cls, law):
        """Bivariate measure with atoms ``(q, 1 - q)``."""
        pts = np.column_stack([law.q, 1.0 - law.q])
        return cls(pts, law.p, symmetric=law.is_symmetric())

    # -- properties ----------------------------------------------------------

    @property
    def d(self):
        return self.points.shape[1]

    @property
    def n_atoms(self):
        return self.points.shape[0]

    def is_exchangeable(self, tol=ATOM_TOL):
        """Check permutation invariance without modifying the measure."""
        try:
            _canonicalize_symmetric(self.points, self.masses, tol)
        except InvariantError:
            return False
        return True

    def as_symmetric(self):
        """Return the same law flagged symmetric (raises if not exchangeable)."""
        if self.symmetric:
            return self
        return DiscreteSpectralMeasure(self.points, self.masses, symmetric=True)

    def to_qlaw(self):
        if self.d != 2:
            raise InvariantError("dimension", "only bivariate measures reduce to a QLaw")
        return QLaw(self.points[:, 0], self.masses)

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "d": int(self.d),
            "symmetric": self.symmetric,
            "atoms": [
                {"q": [float(v) for v in q], "p": float(p)}
                for q, p in zip(self.points, self.masses)
            ],
        }

    @classmethod
    def from_dict(cls, doc):
        try:
            d = int(doc["d"])
            atoms = doc["atoms"]
            pts = [a["q"] for a in atoms]
            ps = [float(a["p"]) for a in atoms]
            symmetric = bool(doc.get("symmetric", False))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvariantError("schema", f"malformed spectral measure document: {exc}") from exc
        if any(len(q) != d for q in pts):
            raise InvariantError("dimension", "atom length differs from d")
        return cls(pts, ps, symmetric=symmetric)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def __eq__(self, other):
        if not isinstance(other, DiscreteSpectralMeasure):
            return NotImplemented
        return (
            self.symmetric == other.symmetric
            and self.points.shape == other.points.shape
            and bool(np.all(np.abs(self.points - other.points) <= ATOM_TOL))
            and bool(np.all(np.abs(self.masses - other.masses) <= MASS_TOL))
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"DiscreteSpectralMeasure(d={self.d}, n_atoms={self.n_atoms}, "
            f"symmetric={self.symmetric})"
        )


def _first_of(cls):
    """Index of the first member of every class label."""
    first = np.full(cls.max() + 1, cls.size)
    np.minimum.at(first, cls, np.arange(cls.size))
    return first


def _canonicalize_symmetric(points, masses, tol=ATOM_TOL):
    """Verify exchangeability and rebuild every class from one representative.

    A finitely supported law is permutation invariant iff, for every class,
    all distinct permutations of the representative carry equal mass.
    """
    k, d = points.shape
    srt = np.sort(points, axis=1)
    snapped = np.column_stack([_snap_1d(srt[:, j], tol) for j in range(d)])
    # ties inside a row: entries within tol become exactly equal
    for j in range(1, d):
        close = snapped[:, j] - snapped[:, j - 1] <= tol
        snapped[close, j] = snapped[close, j - 1]
    snapped = _fix_row_sums(snapped)
    reps, cls = np.unique(snapped, axis=0, return_inverse=True)
    cls = np.asarray(cls).reshape(-1)
    ranks = np.argsort(np.argsort(points, axis=1, kind="stable"), axis=1, kind="stable")
    rebuilt = np.take_along_axis(reps[cls], ranks, axis=1)
    # closeness is not transitive, so distinct input atoms may rebuild to the
    # same point; merge those before counting permutations
    pts, inv = np.unique(rebuilt, axis=0, return_inverse=True)
    inv = np.asarray(inv).reshape(-1)
    masses = np.bincount(inv, weights=masses, minlength=pts.shape[0])
    cls = cls[_first_of(inv)]
    counts = np.bincount(cls, minlength=reps.shape[0])
    class_mass = np.bincount(cls, weights=masses, minlength=reps.shape[0])
    for c in range(reps.shape[0]):
        expected = _n_distinct_perms(reps[c].tolist())
        if counts[c] != expected:
            raise InvariantError(
                "symmetry",
                f"class {reps[c].tolist()} has {counts[c]} of {expected} permutations",
            )
        mc = masses[cls == c]
        if mc.max() - mc.min() > MASS_TOL:
            raise InvariantError(
                "symmetry", f"unequal masses inside class {reps[c].tolist()}"
            )
    new_m = class_mass[cls] / counts[cls]
    # classes that already carry one exact mass keep it bit for bit
    lead = masses[_first_of(cls)][cls]
    uniform = np.bincount(cls, weights=(masses == lead).astype(float),
                          minlength=reps.shape[0]) == counts
    new_m = np.where(uniform[cls], lead, new_m)
    # np.unique already returns rows in lexicographic order
    return np.ascontiguousarray(pts), new_m


# ---------------------------------------------------------------------------
# operations on measures
# ---------------------------------------------------------------------------

def symmetrize(m):
    """Law of ``(Q_S(1), ..., Q_S(d))`` for a uniform random permutation S.

    `m` is a :class:`DiscreteSpectralMeasure`, an :class:`EquivClass` or a
    single simplex point; a point mass need not have barycenter 1/d since
    symmetrization restores it.
    """
    if isinstance(m, DiscreteSpectralMeasure):
        src_pts, src_m = m.points, m.masses
    else:
        rep = m.representative if isinstance(m, EquivClass) else as_simplex_vector(m)
        src_pts, src_m = rep[None, :], np.ones(1)
    d = src_pts.shape[1]
    perms = _permutations(d)
    pts = src_pts[:, perms].reshape(-1, d)
    masses = np.repeat(src_m / perms.shape[0], perms.shape[0])
    pts, masses = merge_simplex_atoms(pts, masses)
    return DiscreteSpectralMeasure(pts, masses, symmetric=True)


def _as_eval_points(x, d):
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != d:
        raise InvariantError("dimension", f"expected vectors of length {d}, got {x.shape[-1]}")
    if np.any(x < 0) or np.any(np.isnan(x)):
        raise InvariantError("domain", "ell is defined on non-negative vectors")
    return x, scalar


def eval_ell(m, x, chunk=4096):
    """Stable tail dependence function ``d * sum_j p_j max_k x_k q_jk``.

    `x` may be a single vector of length d or an array of shape (n, d).
    """
    pts, scalar = _as_eval_points(x, m.d)
    out = np.empty(pts.shape[0])
    step = max(1, chunk * 64 // max(1, m.n_atoms))
    for lo in range(0, pts.shape[0], step):
        block = pts[lo:lo + step]
        terms = (block[:, None, :] * m.points[None, :, :]).max(axis=2) * m.masses
        out[lo:lo + step] = m.d * _sorted_sum(terms)
    return float(out[0]) if scalar else out


def eval_extremal_ell(q, x):
    """Extremal symmetric function ``(1/(d-1)!) sum_s max_k x_k q_s(k)``.

    Computed by direct enumeration of all permutations.
    """
    rep = q.representative if isinstance(q, EquivClass) else as_simplex_vector(q)
    d = rep.size
    perms = _permutations(d)
    pts, scalar = _as_eval_points(x, d)
    permuted = rep[perms]
    vals = np.array([
        _sorted_sum((row[None, :] * permuted).max(axis=1)) for row in pts
    ]) / math.factorial(d - 1)
    return float(vals[0]) if scalar else vals


def copula_value(m, u):
    """Extreme-value copula ``C(u) = exp(-ell(-log u))``; zero if any u_k = 0."""
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 1
    u = np.atleast_2d(u)
    if u.shape[-1] != m.d:
        raise InvariantError("dimension", f"expected vectors of length {m.d}")
    if np.any((u < 0) | (u > 1)) or np.any(np.isnan(u)):
        raise InvariantError("domain", "copula arguments must lie in [0, 1]")
    out = np.zeros(u.shape[0])
    live = np.all(u > 0, axis=1)
    if np.any(live):
        out[live] = np.exp(-eval_ell(m, -np.log(u[live])))
    return float(out[0]) if scalar else out


def margin_measure(m, n, auto_symmetrize=False):
    """Spectral law of the first-`n` margin of an exchangeable measure.

    Each atom ``q`` with ``S = q_1 + ... + q_n > 0`` contributes the atom
    ``q[:n] / S`` with mass ``(d/n) * S * p``.

    Parameters
    ----------
    m : DiscreteSpectralMeasure
    n : int
        Target dimension, ``2 <= n < d``.
    auto_symmetrize : bool
        Symmetrize a non-exchangeable input instead of rejecting it.
    """
    if not (2 <= n < m.d):
        raise InvariantError("margin-dimension", f"need 2 <= n < d = {m.d}, got n = {n}")
    if not m.symmetric:
        if auto_symmetrize:
            m = symmetrize(m)
        elif m.is_exchangeable():
            m = m.as_symmetric()
        else:
            raise InvariantError("symmetry", "margin_measure requires an exchangeable measure")
    s = m.points[:, :n].sum(axis=1)
    masses = (m.d / n) * s * m.masses
    # atoms whose contribution underflows carry no representable mass
    keep = masses > 0
    pts = m.points[keep, :n] / s[keep, None]
    masses = masses[keep]
    pts, masses = merge_simplex_atoms(pts, masses)
    return DiscreteSpectralMeasure(pts, masses, symmetric=True)


@dataclass(frozen=True)
class ObstructionReport:
    """Support count of an n-margin against the ``n!`` atoms of an extremal
    n-variate element."""

    n: int
    support_size: int
    n_factorial: int
    has_distinct_positive_atom: bool

    @property
    def exceeds(self):
        return self.support_size > self.n_factorial

    def to_dict(self):
        return {
            "n": self.n,
            "support_size": self.support_size,
            "n_factorial": self.n_factorial,
            "has_distinct_positive_atom": self.has_distinct_positive_atom,
            "exceeds": self.exceeds,
        }


def _has_distinct_positive_atom(points, tol=ATOM_TOL):
    srt = np.sort(points, axis=1)
    positive = srt[:, 0] > tol
    distinct = np.all(np.diff(srt, axis=1) > tol, axis=1)
    return bool(np.any(positive & distinct))


def embedding_obstruction_check(m, n):
    """Count the support of the n-margin of `m`.

    When `m` has an atom with pairwise distinct, strictly positive entries
    the margin support must exceed ``n!``, so that margin can never be an
    extremal n-variate symmetric function. A violation raises
    ``AssertionError`` since it can only come from a defect.
    """
    marg = margin_measure(m, n)
    rep = ObstructionReport(
        n=n,
        support_size=marg.n_atoms,
        n_factorial=math.factorial(n),
        has_distinct_positive_atom=_has_distinct_positive_atom(m.points),
    )
    if rep.has_distinct_positive_atom and not rep.exceeds:
        raise AssertionError(
            f"margin support {rep.support_size} does not exceed {n}! = {rep.n_factorial}"
        )
    return rep


# ---------------------------------------------------------------------------
# bivariate: laws of Q on [0, 1]
# ---------------------------------------------------------------------------

class QLaw:
    """Finitely supported law of a random variable ``Q`` on [0, 1] with mean 1/2.

    Parameters
    ----------
    q, p : array_like
        Atom locations and positive masses.
    check_mean : bool
        Enforce ``E[Q] = 1/2`` (within ``BARYCENTER_TOL``).
    """

    def __init__(self, q, p, check_mean=True):
        q = np.asarray(q, dtype=float).reshape(-1)
        p = np.asarray(p, dtype=float).reshape(-1)
        if q.shape != p.shape or q.size == 0:
            raise InvariantError("shape", "q and p must be non-empty and of equal length")
        if np.any(~np.isfinite(q)) or np.any(q < -ATOM_TOL) or np.any(q > 1 + ATOM_TOL):
            raise InvariantError("support", "atoms of Q must lie in [0, 1]")
        if np.any(~np.isfinite(p)) or np.any(p <= 0):
            raise InvariantError("mass", "masses must be positive")
        if abs(p.sum() - 1.0) > MASS_TOL:
            raise InvariantError("mass", f"masses sum to {p.sum()!r}, not 1")
        q, p = merge_atoms(np.clip(q, 0.0, 1.0), p)
        if check_mean and abs(p @ q - 0.5) > BARYCENTER_TOL:
            raise InvariantError("mean", f"E[Q] = {p @ q!r}, not 1/2")
        q.setflags(write=False)
        p.setflags(write=False)
        self.q = q
        self.p = p

    @property
    def n_atoms(self):
        return self.q.size

    def mass_at(self, value, tol=ATOM_TOL):
        return float(self.p[np.abs(self.q - value) <= tol].sum())

    def is_symmetric(self, tol=ATOM_TOL):
        """``Q`` equal in law to ``1 - Q``, compared atom by atom."""
        q2, p2 = merge_atoms(1.0 - self.q, self.p)
        if q2.size != self.q.size:
            return False
        return bool(
            np.all(np.abs(q2 - self.q) <= tol) and np.all(np.abs(p2 - self.p) <= tol)
        )

    def pickands(self):
        """Exact piecewise-linear ``A(x) = 2 E[max(xQ, (1-x)(1-Q))]``."""
        interior = 1.0 - self.q[(self.q > ATOM_TOL) & (self.q < 1 - ATOM_TOL)]
        kinks, _ = merge_atoms(np.concatenate(([0.0, 1.0], interior)),
                               np.ones(interior.size + 2))
        kinks[0], kinks[-1] = 0.0, 1.0
        return PiecewiseLinearPickands(kinks, eval_A_from_Q(self, kinks))

    def to_dict(self):
        return {"atoms": [{"q": float(a), "p": float(b)} for a, b in zip(self.q, self.p)]}

    @classmethod
    def from_dict(cls, doc):
        try:
            atoms = doc["atoms"]
            q = [float(a["q"]) for a in atoms]
            p = [float(a["p"]) for a in atoms]
        except (KeyError, TypeError, ValueError) as exc:
            raise InvariantError("schema", f"malformed Q law document: {exc}") from exc
        return cls(q, p)

    def __eq__(self, other):
        if not isinstance(other, QLaw):
            return NotImplemented
        return (
            self.q.shape == other.q.shape
            and bool(np.all(np.abs(self.q - other.q) <= ATOM_TOL))
            and bool(np.all(np.abs(self.p - other.p) <= MASS_TOL))
        )

    __hash__ = None

    def __repr__(self):
        pairs = ", ".join(f"{a:.6g}: {b:.6g}" for a, b in zip(self.q, self.p))
        return f"QLaw({{{pairs}}})"


def eval_A_from_Q(law, x):
    """``A(x) = 2 sum_j p_j max(x q_j, (1 - x)(1 - q_j))``.

    `law` is a :class:`QLaw` or a ``(q, p)`` pair; the mean-1/2 condition is
    enforced either way.
    """
    if not isinstance(law, QLaw):
        q, p = law
        law = QLaw(q, p)
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    xx = np.atleast_1d(x)
    if np.any((xx < 0) | (xx > 1)):
        raise InvariantError("domain", "A is defined on [0, 1]")
    terms = np.maximum(xx[:, None] * law.q[None, :], (1 - xx)[:, None] * (1 - law.q)[None, :])
    vals = 2.0 * _sorted_sum(terms * law.p)
    return float(vals[0]) if scalar else vals


# ---------------------------------------------------------------------------
# piecewise-linear Pickands dependence functions
# ---------------------------------------------------------------------------

class PiecewiseLinearPickands:
    """Convex piecewise-linear dependence function given by kinks and values.

    Invariants: ``A(0) = A(1) = 1``, ``max(x, 1-x) <= A(x) <= 1``,
    non-decreasing slopes in ``[-1, 1]``.
    """

    def __init__(self, kinks, values, validate=True):
        x = np.asarray(kinks, dtype=float).reshape(-1)
        a = np.asarray(values, dtype=float).reshape(-1)
        if x.shape != a.shape or x.size < 2:
            raise InvariantError("shape", "need at least the two endpoint kinks")
        if validate:
            _check_pickands(x, a)
        x.setflags(write=False)
        a.setflags(write=False)
        self.kinks = x
        self.values = a

    def __call__(self, x):
        return np.interp(x, self.kinks, self.values) if np.ndim(x) else float(
            np.interp(x, self.kinks, self.values))

    @property
    def slopes(self):
        return np.diff(self.values) / np.diff(self.kinks)

    def is_symmetric(self, tol=ATOM_TOL):
        return bool(np.all(np.abs(self(1.0 - self.kinks) - self.values) <= tol))

    def sup_distance(self, other, grid=None):
        """Sup-norm distance, exact on the union of both kink sets."""
        if grid is None:
            other_kinks = other.kinks if isinstance(other, PiecewiseLinearPickands) else []
            grid = np.union1d(self.kinks, other_kinks)
        return float(np.max(np.abs(self(grid) - other(grid))))

    @classmethod
    def from_function(cls, func, n_grid=1000):
        """Dense-kink interpolant of a smooth dependence function.

        The interpolation error is at most ``max|A''| * h**2 / 8`` with
        ``h = 1 / n_grid``.
        """
        x = np.linspace(0.0, 1.0, n_grid + 1)
        vals = np.array([func(v) for v in x], dtype=float)
        vals[0] = vals[-1] = 1.0
        return cls(x, vals)

    def to_dict(self):
        return {"kinks": self.kinks.tolist(), "values": self.values.tolist()}

    @classmethod
    def from_dict(cls, doc):
        try:
            return cls(doc["kinks"], doc["values"])
        except (KeyError, TypeError) as exc:
            raise InvariantError("schema", f"malformed Pickands document: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, PiecewiseLinearPickands):
            return NotImplemented
        return self.kinks.shape == other.kinks.shape and bool(
            np.all(self.kinks == other.kinks) and np.all(self.values == other.values))

    __hash__ = None

    def __repr__(self):
        return f"PiecewiseLinearPickands(n_kinks={self.kinks.size})"


def _check_pickands(x, a):
    if np.any(~np.isfinite(x)) or np.any(~np.isfinite(a)):
        raise InvariantError("finite", "non-finite kink or value")
    if x[0] != 0.0 or x[-1] != 1.0:
        raise InvariantError("endpoints", "kinks must start at 0 and end at 1")
    if np.any(np.diff(x) <= 0):
        raise InvariantError("kinks", "kinks must be strictly increasing")
    if abs(a[0] - 1.0) > ATOM_TOL or abs(a[-1] - 1.0) > ATOM_TOL:
        raise InvariantError("endpoints", "A(0) = A(1) = 1 is required")
    if np.any(a > 1 + ATOM_TOL) or np.any(a < np.maximum(x, 1 - x) - ATOM_TOL):
        raise InvariantError("envelope", "max(x, 1-x) <= A(x) <= 1 violated")
    dx = np.diff(x)
    s = np.diff(a) / dx
    noise = _slope_noise(dx)
    if np.any(np.abs(s) > 1 + SLOPE_TOL + noise):
        raise InvariantError("slope", "slopes must lie in [-1, 1]")
    if np.any(np.diff(s) < -SLOPE_TOL - noise[:-1] - noise[1:]):
        raise InvariantError("convexity", "slopes must be non-decreasing")


def _slope_noise(dx):
    # rounding in the kink values is amplified by 1/dx on short intervals
    return _VALUE_NOISE / dx


def mix_pickands(weights, functions):
    """Convex combination of piecewise-linear dependence functions."""
    w = np.asarray(weights, dtype=float)
    if np.any(w < 0) or abs(w.sum() - 1.0) > MASS_TOL:
        raise InvariantError("weights", "mixture weights must be non-negative and sum to 1")
    kinks = functions[0].kinks
    for f in functions[1:]:
        kinks = np.union1d(kinks, f.kinks)
    vals = _sorted_sum(np.column_stack([wi * f(kinks) for wi, f in zip(w, functions)]))
    return PiecewiseLinearPickands(kinks, vals)


def pickands_from_ell(m):
    """``A(x) = ell(x, 1 - x)`` for a bivariate discrete measure, exactly."""
    if m.d != 2:
        raise InvariantError("dimension", "pickands_from_ell needs d = 2")
    q2 = m.points[:, 1]
    interior = q2[(q2 > ATOM_TOL) & (q2 < 1 - ATOM_TOL)]
    kinks, _ = merge_atoms(np.concatenate(([0.0, 1.0], interior)), np.ones(interior.size + 2))
    kinks[0], kinks[-1] = 0.0, 1.0
    vals = eval_ell(m, np.column_stack([kinks, 1.0 - kinks]))
    vals[0] = vals[-1] = 1.0
    return PiecewiseLinearPickands(kinks, vals)


def q_from_A(A):
    """Recover the law of ``Q`` from slope jumps of a piecewise-linear ``A``.

    An interior kink at ``x`` carries mass (slope jump)/2 at ``q = 1 - x``;
    the boundary masses are ``P(Q=1) = (1 + A'(0+))/2`` and
    ``P(Q=0) = (1 - A'(1-))/2``.
    """
    s = A.slopes
    jumps = np.diff(s)
    noise = _slope_noise(np.diff(A.kinks))
    if np.any(jumps < -SLOPE_TOL - noise[:-1] - noise[1:]):
        raise InvariantError("convexity", "A is not convex")
    q = np.concatenate(([1.0], 1.0 - A.kinks[1:-1], [0.0]))
    p = np.concatenate(([(1.0 + s[0]) / 2.0], jumps / 2.0, [(1.0 - s[-1]) / 2.0]))
    keep = p > _JUMP_NOISE
    return QLaw(q[keep], p[keep])


def bc2_law(a, b):
    """Two-atom law ``Q_{a,b}`` with ``P(Q = a) = (b - 1/2)/(b - a)`` (0/0 = 1)."""
    if not (0.0 <= a <= 0.5 <= b <= 1.0):
        raise InvariantError("bc2-range", f"need 0 <= a <= 1/2 <= b <= 1, got a={a}, b={b}")
    pa = 1.0 if b == a else (b - 0.5) / (b - a)
    q, p = [], []
    if pa > 0:
        q.append(a)
        p.append(pa)
    if pa < 1:
        q.append(b)
        p.append(1.0 - pa)
    return QLaw(q, p)


def bc2_A(a, b):
    """BC2 dependence function obtained from the two-atom law ``Q_{a,b}``."""
    return bc2_law(a, b).pickands()


def bc2_A_closed_form(a, b):
    """``max(ax, b(1-x)) + max((1-a)x, (1-b)(1-x))``.

    Agrees with :func:`bc2_A` only when ``b = 1 - a``.
    """
    if not (0.0 <= a <= 0.5 <= b <= 1.0):
        raise InvariantError("bc2-range", f"need 0 <= a <= 1/2 <= b <= 1, got a={a}, b={b}")
    cand = [0.0, 1.0]
    if a + b > 0:
        cand.append(b / (a + b))
    if 2 - a - b > 0:
        cand.append((1 - b) / (2 - a - b))
    kinks = np.unique(np.clip(cand, 0.0, 1.0))
    vals = (np.maximum(a * kinks, b * (1 - kinks))
            + np.maximum((1 - a) * kinks, (1 - b) * (1 - kinks)))
    return PiecewiseLinearPickands(kinks, vals)


# ---------------------------------------------------------------------------
# symmetric decomposition
# ---------------------------------------------------------------------------

class NuMeasure:
    """Mixing law over the extremal symmetric functions ``A_{q,1-q}``,
    ``0 <= q <= 1/2``."""

    def __init__(self, q, mass):
        q = np.asarray(q, dtype=float).reshape(-1)
        mass = np.asarray(mass, dtype=float).reshape(-1)
        if q.shape != mass.shape or q.size == 0:
            raise InvariantError("shape", "q and mass must be non-empty and of equal length")
        if np.any(q < -ATOM_TOL) or np.any(q > 0.5 + ATOM_TOL):
            raise InvariantError("support", "nu lives on [0, 1/2]")
        if np.any(mass <= 0):
            raise InvariantError("mass", "nu masses must be positive")
        if abs(mass.sum() - 1.0) > MASS_TOL:
            raise InvariantError("mass", f"nu has total mass {mass.sum()!r}, not 1")
        q, mass = merge_atoms(np.clip(q, 0.0, 0.5), mass)
        q.setflags(write=False)
        mass.setflags(write=False)
        self.q = q
        self.mass = mass

    def to_qlaw(self):
        half = np.abs(self.q - 0.5) <= ATOM_TOL
        lo = self.q[~half]
        qs = np.concatenate((lo, 1.0 - lo, self.q[half]))
        ps = np.concatenate((self.mass[~half] / 2, self.mass[~half] / 2, self.mass[half]))
        return QLaw(qs, ps)

    def recompose(self):
        """``sum_q nu(q) A_{q,1-q}`` as an explicit mixture of BC2 elements."""
        parts = [bc2_A(min(q, 0.5), max(1.0 - q, 0.5)) for q in self.q]
        return mix_pickands(self.mass, parts)

    def to_dict(self):
        return {"nu": [{"q": float(a), "mass": float(b)} for a, b in zip(self.q, self.mass)]}

    @classmethod
    def from_dict(cls, doc):
        try:
            atoms = doc["nu"]
            return cls([a["q"] for a in atoms], [a["mass"] for a in atoms])
        except (KeyError, TypeError) as exc:
            raise InvariantError("schema", f"malformed nu document: {exc}") from exc

    def __eq__(self, other):
        if not isinstance(other, NuMeasure):
            return NotImplemented
        return self.q.shape == other.q.shape and bool(
            np.all(np.abs(self.q - other.q) <= ATOM_TOL)
            and np.all(np.abs(self.mass - other.mass) <= MASS_TOL))

    __hash__ = None

    def __repr__(self):
        pairs = ", ".join(f"{a:.6g}: {b:.6g}" for a, b in zip(self.q, self.mass))
        return f"NuMeasure({{{pairs}}})"


def simplex_decompose(A):
    """Unique mixing measure of a symmetric ``A`` over ``{A_{q,1-q}}``.

    ``nu({1/2}) = P(Q = 1/2)`` and ``nu({q}) = 2 P(Q = q)`` for ``q < 1/2``.
    """
    if not A.is_symmetric():
        raise InvariantError("symmetry", "simplex_decompose needs A(x) = A(1 - x)")
    law = q_from_A(A)
    half = np.abs(law.q - 0.5) <= ATOM_TOL
    lo = law.q < 0.5 - ATOM_TOL
    q_lo = law.q[lo]
    # average P(Q=q) and P(Q=1-q) so rounding asymmetry cannot leak into nu
    mirror = np.array([law.mass_at(1.0 - v) for v in q_lo])
    qs = np.concatenate((q_lo, [0.5] if half.any() else []))
    ms = np.concatenate((law.p[lo] + mirror, law.p[half].sum(keepdims=True) if half.any() else []))
    return NuMeasure(qs, ms)
