"""Exact samplers for exchangeable extreme-value copulas.

Two constructions are provided:

* max-linear sampling from a discrete spectral measure: with coefficients
  ``a_jk = d p_j q_jk`` and iid standard exponentials ``E_j``,
  ``X_k = min_j E_j / a_jk`` and ``U_k = exp(-X_k)``;
* event-driven first passage for a ``(b, lambda)`` model: ``U_k = exp(-X_k)``
  with ``X_k = inf{t > 0 : H_t > eps_k}``.

Both are exact (no discretization); the inner loops live in the kernel
backend chosen by :mod:`exchev._backend`.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .errors import InvariantError, SamplerError
from .extendibility import CondIIDSpec
from .spectral import DiscreteSpectralMeasure

MAX_EVENTS_PER_ROW = 1_000_000
GENERATOR_TAG = "numpy.PCG64/SeedSequence"
_INITIAL_ARRIVALS = 16
_U_LO = np.finfo(float).tiny
_U_HI = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class RngStream:
    """Seed plus stream index.

    Streams are derived with ``numpy.random.SeedSequence(seed,
    spawn_key=(stream,))``; distinct stream indices give independent
    PCG64 generators. Every call to :meth:`generator` starts the stream from
    its beginning, which makes sampler calls reproducible.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise InvariantError("seed", "seed must be a 64-bit unsigned integer")
        if int(self.stream) < 0:
            raise InvariantError("stream", "stream index must be non-negative")

    def generator(self):
        ss = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.PCG64(ss))

    def substream(self, index):
        return RngStream(self.seed, self.stream * 1_000_003 + int(index) + 1)


@dataclass
class SampleBatch:
    """``n x d`` matrix of copula samples, every entry strictly inside (0, 1)."""

    rows: np.ndarray
    seed: int | None = None
    stream: int | None = None
    generator: str = GENERATOR_TAG
    model: dict = field(default_factory=dict)

    def __post_init__(self):
        rows = np.atleast_2d(np.asarray(self.rows, dtype=float))
        if rows.size and (np.any(~(rows > 0)) or np.any(~(rows < 1))):
            raise InvariantError("open-unit-cube", "sample entries must lie strictly in (0, 1)")
        rows.setflags(write=False)
        self.rows = rows

    @property
    def n(self):
        return self.rows.shape[0]

    @property
    def d(self):
        return self.rows.shape[1]

    def column(self, k):
        return self.rows[:, k]

    def metadata(self):
        return {
            "seed": self.seed,
            "stream": self.stream,
            "generator": self.generator,
            "model": self.model,
            "n": int(self.n),
            "d": int(self.d),
        }

    def to_csv(self, path, sidecar=True):
        """Write ``u1,...,ud`` rows (17 significant digits) and a JSON sidecar."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"u{k + 1}" for k in range(self.d)])
            for row in self.rows:
                w.writerow([f"{v:.17g}" for v in row])
        if sidecar:
            with open(f"{path}.json", "w") as fh:
                json.dump(self.metadata(), fh, indent=2, sort_keys=True)
                fh.write("\n")

    @classmethod
    def from_csv(cls, path):
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [[float(v) for v in line] for line in reader if line]
        if not header or not all(h.startswith("u") for h in header):
            raise InvariantError("schema", "CSV header must be u1,...,ud")
        meta = {}
        try:
            with open(f"{path}.json") as fh:
                meta = json.load(fh)
        except FileNotFoundError:
            pass
        arr = np.array(rows, dtype=float).reshape(-1, len(header))
        return cls(arr, seed=meta.get("seed"), stream=meta.get("stream"),
                   generator=meta.get("generator", GENERATOR_TAG), model=meta.get("model", {}))


def _open_uniform(gen, shape):
    v = gen.random(shape)
    v[v == 0.0] = 2.0**-54
    return v


def _to_uniform(X):
    return np.clip(np.exp(-X), _U_LO, _U_HI)


def maxlinear_coefficients(m):
    """Coefficients ``a_jk = d p_j q_jk``; every column sums to one."""
    return m.d * m.masses[:, None] * m.points


def sample_maxlinear_exponents(m, n, rng, backend=None, chunk_cells=1 << 22):
    """``X = -log U`` for max-linear samples; see :func:`sample_maxlinear`."""
    if n < 1:
        raise InvariantError("count", "n must be at least 1")
    kern = _backend.get_kernels(backend)
    a = maxlinear_coefficients(m)
    with np.errstate(divide="ignore", over="ignore"):
        inv = np.where(a > 0, 1.0 / a, np.inf)
    gen = rng.generator()
    K = m.n_atoms
    step = max(1, chunk_cells // K)
    out = np.empty((n, m.d))
    for lo in range(0, n, step):
        hi = min(n, lo + step)
        E = -np.log(_open_uniform(gen, (hi - lo, K)))
        out[lo:hi] = kern.maxlinear_exponents(E, inv)
    return out


def sample_maxlinear(m, n, rng, backend=None):
    """Draw `n` rows from the extreme-value copula of a discrete spectral measure.

    Parameters
    ----------
    m : DiscreteSpectralMeasure
    n : int
    rng : RngStream
    backend : {"python", "cython"}, optional
        Kernel override; the import-time default otherwise.

    Returns
    -------
    SampleBatch
    """
    X = sample_maxlinear_exponents(m, n, rng, backend)
    return SampleBatch(_to_uniform(X), seed=rng.seed, stream=rng.stream,
                       model={"kind": "spectral", "sampler": "maxlinear", **m.to_dict()})


def _component_tables(spec):
    starts, lens, inv_x, jumps = [], [], [], []
    for F in spec.dfs:
        pos = F.x[F.x > 0][::-1]
        upper = F.cdf(pos)
        lower = F.cdf_left(pos)
        with np.errstate(divide="ignore", over="ignore"):
            jmp = np.log(upper) - np.log(lower)
        starts.append(len(inv_x))
        lens.append(pos.size)
        inv_x.extend((1.0 / pos).tolist())
        jumps.extend(jmp.tolist())
    x_max = max(float(F.x[-1]) for F in spec.dfs)
    return (np.array(starts, dtype=np.intp), np.array(lens, dtype=np.intp),
            np.array(inv_x), np.array(jumps), 1.0 / x_max)


def sample_condiid_exponents(spec, d, n, rng, backend=None, max_events=None):
    """First-passage times ``X = -log U``; see :func:`sample_condiid`.

    `max_events` caps the events processed per row (default
    ``MAX_EVENTS_PER_ROW``); exceeding it raises :class:`SamplerError`.
    """
    if max_events is None:
        max_events = MAX_EVENTS_PER_ROW
    if not isinstance(spec, CondIIDSpec):
        raise InvariantError("type", "sample_condiid needs a CondIIDSpec")
    if d < 1 or n < 1:
        raise InvariantError("count", "need d >= 1 and n >= 1")
    kern = _backend.get_kernels(backend)
    gen = rng.generator()
    eps = gen.standard_exponential((n, d))
    if spec.b >= 1.0:
        return eps / spec.b
    rate = 1.0 - spec.b
    starts, lens, inv_x, jumps, inv_xmax = _component_tables(spec)
    cum_w = np.cumsum(spec.weights)
    n_comp = len(spec.dfs)

    def draw(rows, width):
        gaps = gen.standard_exponential((rows, width)) / rate
        comp = np.minimum(np.searchsorted(cum_w, gen.random((rows, width)), side="right"),
                          n_comp - 1).astype(np.intp)
        return gaps, comp

    gaps, comp = draw(n, _INITIAL_ARRIVALS)
    X, status = kern.condiid_first_passage(eps, gaps, comp, starts, lens, inv_x, jumps,
                                           inv_xmax, spec.b, max_events)
    X = np.array(X)
    if np.any(status == 2):
        raise SamplerError(f"event cap of {max_events} per row exceeded")
    pending = np.flatnonzero(status == 1)
    gaps, comp = gaps[pending], comp[pending]
    while pending.size:
        width = gaps.shape[1]
        if width > max_events:
            raise SamplerError(f"more than {max_events} arrivals needed in one row")
        g2, c2 = draw(pending.size, width)
        gaps = np.hstack([gaps, g2])
        comp = np.hstack([comp, c2])
        Xp, sp = kern.condiid_first_passage(eps[pending], gaps, comp, starts, lens, inv_x,
                                            jumps, inv_xmax, spec.b, max_events)
        if np.any(sp == 2):
            raise SamplerError(f"event cap of {max_events} per row exceeded")
        X[pending] = Xp
        keep = sp == 1
        pending = pending[keep]
        gaps, comp = gaps[keep], comp[keep]
    return X


def sample_condiid(spec, d, n, rng, backend=None):
    """Draw `n` rows of the d-variate conditionally iid model ``(b, lambda)``.

    The latent process is

        H_t = b t + sum_a -log G_a(T_a / t -),

    with ``T_a`` the points of a Poisson process of rate ``1 - b`` and
    ``G_a`` iid draws from ``lambda``; the rate makes the margins uniform for
    every ``b`` in [0, 1]. Each ``G_a`` contributes jumps
    ``log F(x)/F(x-)`` at the times ``T_a / x`` (``x`` a positive atom), the
    last one infinite when ``F`` has no atom at zero.
    """
    X = sample_condiid_exponents(spec, d, n, rng, backend)
    return SampleBatch(_to_uniform(X), seed=rng.seed, stream=rng.stream,
                       model={"kind": "condiid", "sampler": "first-passage", "d": int(d),
                              **spec.to_dict()})


def sample_model(model, n, rng, d=None, backend=None):
    """Dispatch on the model type (spectral measure or ``(b, lambda)`` spec)."""
    if isinstance(model, DiscreteSpectralMeasure):
        return sample_maxlinear(model, n, rng, backend)
    if isinstance(model, CondIIDSpec):
        if d is None:
            raise InvariantError("dimension", "conditionally iid sampling needs d")
        return sample_condiid(model, d, n, rng, backend)
    raise InvariantError("type", f"cannot sample from {type(model).__name__}")
