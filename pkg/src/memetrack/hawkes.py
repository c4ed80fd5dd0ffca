"""Multivariate Hawkes processes over K communities.

Each community is a process; every meme post is an event. Events raise the
intensity of later events through an impulse kernel scaled by per-pair
excitation weights, so fitted weights read as expected extra events caused
on the destination per event on the source.

The impulse here is a truncated exponential density (decay beta, hard
cutoff dmax) normalized to integrate to 1 over its support, which keeps
the weights interpretable and gives closed forms for every small-case
check. Other shapes can be swapped in behind the same density/cdf_mass
surface.

Fitting uses auxiliary-parent Gibbs sampling: each sweep draws a parent
per event (background, or one of the prior events in the kernel window)
proportionally to the intensity contributions, then redraws rates and
weights from their conjugate Gamma posteriors given the parent counts.
Non-convergence is not detected; inspect the returned chain if in doubt.

Root causes are attributed by the deterministic expected-share recursion:
an event's probability vector over originating communities mixes its own
background share with the (recursively attributed) vectors of its
candidate parents, weighted by their intensity contributions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence

import numpy as np
from scipy.special import kolmogorov

_JITTER = 1e-6  # spacing applied to simultaneous timestamps at ingest


@dataclass(frozen=True)
class ExpKernel:
    """Truncated exponential impulse: density on [0, dmax), zero elsewhere."""

    beta: float = 1.0
    dmax: float = 7.0

    def validate(self) -> "ExpKernel":
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValueError(f"beta must be positive and finite, got {self.beta}")
        if not (math.isfinite(self.dmax) and self.dmax > 0):
            raise ValueError(f"dmax must be positive and finite, got {self.dmax}")
        return self

    @property
    def _norm(self) -> float:
        return self.beta * (1.0 - math.exp(-self.dmax / self.beta))

    def density(self, dt):
        """h(dt); h(0) = 1 / (beta * (1 - e^(-dmax/beta))), 0 at or beyond dmax."""
        dt = np.asarray(dt, dtype=np.float64)
        inside = (dt >= 0) & (dt < self.dmax)
        out = np.where(inside, np.exp(-np.minimum(dt, self.dmax) / self.beta) / self._norm, 0.0)
        return out if out.ndim else float(out)

    def cdf_mass(self, dt):
        """Integral of the density over [0, min(dt, dmax)]; reaches 1 at dmax."""
        dt = np.asarray(dt, dtype=np.float64)
        clipped = np.clip(dt, 0.0, self.dmax)
        out = (1.0 - np.exp(-clipped / self.beta)) / (1.0 - math.exp(-self.dmax / self.beta))
        return out if out.ndim else float(out)


@dataclass
class HawkesModel:
    lambda0: np.ndarray  # (K,) background rates
    W: np.ndarray  # (K, K) excitation weights, source -> destination
    kernel: ExpKernel = field(default_factory=ExpKernel)

    def __post_init__(self):
        self.lambda0 = np.asarray(self.lambda0, dtype=np.float64)
        self.W = np.asarray(self.W, dtype=np.float64)

    @property
    def K(self) -> int:
        return len(self.lambda0)

    def validate(self) -> "HawkesModel":
        if self.lambda0.ndim != 1 or self.W.shape != (self.K, self.K):
            raise ValueError("lambda0 must be (K,) and W must be (K, K)")
        if not (np.isfinite(self.lambda0).all() and np.isfinite(self.W).all()):
            raise ValueError("model parameters must be finite")
        if (self.lambda0 < 0).any() or (self.W < 0).any():
            raise ValueError("rates and weights must be nonnegative")
        self.kernel.validate()
        return self

    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.W)).max())

    def to_json(self, communities: Sequence[str] | None = None) -> dict:
        out = {
            "K": self.K,
            "lambda0": self.lambda0.tolist(),
            "W": self.W.tolist(),
            "beta": self.kernel.beta,
            "dmax": self.kernel.dmax,
        }
        if communities is not None:
            out["communities"] = list(communities)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "HawkesModel":
        model = cls(
            lambda0=np.array(obj["lambda0"], dtype=np.float64),
            W=np.array(obj["W"], dtype=np.float64),
            kernel=ExpKernel(beta=float(obj["beta"]), dmax=float(obj["dmax"])),
        )
        if model.K != int(obj["K"]):
            raise ValueError("K does not match lambda0 length")
        return model.validate()


@dataclass
class EventStream:
    times: np.ndarray  # strictly increasing, within [0, horizon]
    procs: np.ndarray  # process index per event
    horizon: float

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        self.procs = np.asarray(self.procs, dtype=np.int64)
        if self.times.shape != self.procs.shape:
            raise ValueError("times and procs must align")
        if len(self.times) and not (np.diff(self.times) > 0).all():
            raise ValueError("timestamps must be strictly increasing")
        if len(self.times) and (self.times[0] < 0 or self.times[-1] > self.horizon):
            raise ValueError("timestamps must lie within [0, horizon]")

    def __len__(self) -> int:
        return len(self.times)

    def counts(self, K: int) -> np.ndarray:
        return np.bincount(self.procs, minlength=K)

    @classmethod
    def from_records(
        cls,
        records: Iterable[tuple[float, int]],
        *,
        horizon: float | None = None,
        shift: bool = False,
    ) -> "EventStream":
        """Build a stream from (time, process) pairs.

        Simultaneous timestamps are spread by +1e-6 per tie rank so ordering
        is strict; with shift=True the earliest event moves to t=0.
        """
        recs = sorted(records, key=lambda r: r[0])
        times = np.array([t for t, _ in recs], dtype=np.float64)
        procs = np.array([k for _, k in recs], dtype=np.int64)
        if shift and len(times):
            times = times - times[0]
        if len(times) > 1:
            rank = np.zeros(len(times))
            for i in range(1, len(times)):
                rank[i] = rank[i - 1] + 1 if times[i] == times[i - 1] else 0
            times = times + _JITTER * rank
            if not (np.diff(times) > 0).all():
                raise ValueError("timestamps too dense for tie jitter; rescale time unit")
        if horizon is None:
            horizon = float(times[-1]) if len(times) else 0.0
        return cls(times=times, procs=procs, horizon=float(horizon))


def _contributions(model: HawkesModel, times: np.ndarray, procs: np.ndarray, t: float):
    """Active-event indices and their per-destination intensity contributions at t."""
    lo = int(np.searchsorted(times, t - model.kernel.dmax, side="right"))
    hi = int(np.searchsorted(times, t, side="left"))
    js = np.arange(lo, hi)
    if len(js) == 0:
        return js, np.zeros((0, model.K))
    h = model.kernel.density(t - times[js])
    return js, model.W[procs[js], :] * h[:, None]


def intensity(model: HawkesModel, events: EventStream, t: float, k: int) -> float:
    """Rate of process k at time t given strictly prior events."""
    model.validate()
    _, contrib = _contributions(model, events.times, events.procs, t)
    return float(model.lambda0[k] + contrib[:, k].sum())


def simulate(model: HawkesModel, horizon: float, seed: int) -> EventStream:
    """Exact thinning simulation; deterministic for a given seed.

    Between events every impulse is non-increasing, so the intensity right
    after the latest event bounds the intensity until the next one.
    """
    model.validate()
    if not (math.isfinite(horizon) and horizon >= 0):
        raise ValueError(f"horizon must be finite and nonnegative, got {horizon}")
    if model.spectral_radius() >= 1.0:
        warnings.warn("spectral radius of W is >= 1; the process may be explosive", stacklevel=2)
    rng = np.random.default_rng(seed)
    kern = model.kernel
    times: list[float] = []
    procs: list[int] = []
    lo = 0  # first event still inside the kernel window

    def rates_at(t: float) -> np.ndarray:
        nonlocal lo
        while lo < len(times) and times[lo] <= t - kern.dmax:
            lo += 1
        if lo == len(times):
            return model.lambda0.copy()
        h = kern.density(t - np.array(times[lo:], dtype=np.float64))
        active = np.array(procs[lo:], dtype=np.int64)
        return model.lambda0 + (model.W[active, :] * h[:, None]).sum(axis=0)

    t = 0.0
    while True:
        bound = float(rates_at(t).sum())
        if bound <= 0.0:
            break
        t = t + rng.exponential(1.0 / bound)
        if t > horizon:
            break
        lam = rates_at(t)
        u = rng.uniform(0.0, bound)
        if u <= float(lam.sum()):
            k = int(np.searchsorted(np.cumsum(lam), u, side="left"))
            times.append(t)
            procs.append(k)
    return EventStream(times=np.array(times), procs=np.array(procs, dtype=np.int64), horizon=horizon)


@dataclass(frozen=True)
class GammaPriors:
    """Gamma(shape, rate) priors for background rates and excitation weights."""

    lambda0_shape: float = 1.0
    lambda0_rate: float = 1.0
    weight_shape: float = 1.0
    weight_rate: float = 1.0


@dataclass
class GibbsFit:
    model: HawkesModel  # posterior means after burn-in
    lambda0_chain: np.ndarray  # (iters, K)
    w_chain: np.ndarray  # (iters, K, K)
    burnin: int


def _candidate_pairs(times: np.ndarray, kernel: ExpKernel):
    """Flat (child, parent) arrays over every in-window prior event."""
    n = len(times)
    lo = np.searchsorted(times, times - kernel.dmax, side="right")
    counts = np.arange(n) - lo
    child = np.repeat(np.arange(n), counts)
    parent = np.concatenate([np.arange(l, i) for i, l in enumerate(lo) if l < i]) if counts.sum() else np.array([], dtype=np.int64)
    seg_end = np.cumsum(counts)
    seg_start = seg_end - counts
    return child.astype(np.int64), parent.astype(np.int64), seg_start, seg_end


def fit_gibbs(
    events: EventStream,
    K: int,
    kernel: ExpKernel,
    iters: int,
    burnin: int,
    priors: GammaPriors = GammaPriors(),
    seed: int = 0,
) -> GibbsFit:
    """Auxiliary-parent Gibbs sampling with the kernel shape held fixed."""
    if len(events) < 1:
        raise ValueError("fitting needs at least one event")
    if not iters > burnin >= 0:
        raise ValueError("need iters > burnin >= 0")
    kernel.validate()
    rng = np.random.default_rng(seed)
    times, procs, T = events.times, events.procs, events.horizon
    n = len(times)

    child, parent, seg_start, seg_end = _candidate_pairs(times, kernel)
    h_pair = kernel.density(times[child] - times[parent])
    kp = procs[parent]
    kc = procs[child]
    proc_counts = np.bincount(procs, minlength=K)
    # per-source exposure: how much kernel mass each event can still place before T
    exposure = np.zeros(K)
    np.add.at(exposure, procs, kernel.cdf_mass(T - times))

    lam = (proc_counts + 1.0) / (T + 1.0)
    W = np.full((K, K), 0.1)

    lam_chain = np.empty((iters, K))
    w_chain = np.empty((iters, K, K))
    for it in range(iters):
        pair_w = W[kp, kc] * h_pair
        cum = np.concatenate(([0.0], np.cumsum(pair_w)))
        seg_sum = cum[seg_end] - cum[seg_start]
        bg = lam[procs]
        Z = bg + seg_sum
        u = rng.random(n) * Z
        is_bg = (u < bg) | (Z <= 0.0)

        B = np.bincount(procs[is_bg], minlength=K)
        take = ~is_bg
        M = np.zeros((K, K))
        if take.any():
            target = cum[seg_start[take]] + (u[take] - bg[take])
            f = np.searchsorted(cum, target, side="right") - 1
            f = np.clip(f, seg_start[take], seg_end[take] - 1)
            pk = procs[parent[f]]
            np.add.at(M, (pk, procs[take]), 1.0)

        lam = rng.gamma(priors.lambda0_shape + B, 1.0 / (priors.lambda0_rate + T))
        W = rng.gamma(priors.weight_shape + M, 1.0 / (priors.weight_rate + exposure[:, None]))

        lam_chain[it] = lam
        w_chain[it] = W

    model = HawkesModel(
        lambda0=lam_chain[burnin:].mean(axis=0),
        W=w_chain[burnin:].mean(axis=0),
        kernel=kernel,
    ).validate()
    return GibbsFit(model=model, lambda0_chain=lam_chain, w_chain=w_chain, burnin=burnin)


def attribute_root_cause(model: HawkesModel, events: EventStream) -> np.ndarray:
    """Per event, the probability of each community being the root cause.

    Events are processed in time order; each event splits its mass between
    its own community (background share) and its candidate parents' root
    vectors, in proportion to the intensity contributions at its time. An
    event with no active impulses is its own root.
    """
    model.validate()
    times, procs = events.times, events.procs
    n, K = len(times), model.K
    R = np.zeros((n, K))
    for i in range(n):
        js, contrib = _contributions(model, times[:i], procs[:i], times[i])
        c = contrib[:, procs[i]]
        b = float(model.lambda0[procs[i]])
        Z = b + float(c.sum())
        if Z <= 0.0:
            R[i, procs[i]] = 1.0
            continue
        if len(js):
            R[i] = (c[:, None] * R[js]).sum(axis=0) / Z
        R[i, procs[i]] += b / Z
    return R


def attributed_counts(root: np.ndarray, events: EventStream, K: int) -> tuple[np.ndarray, np.ndarray]:
    """A[s, d] = attributed event mass from source s on destination d, plus event counts."""
    A = np.zeros((K, K))
    for d in range(K):
        on_d = events.procs == d
        if on_d.any():
            A[:, d] = root[on_d].sum(axis=0)
    return A, events.counts(K)


def influence_from_counts(A: np.ndarray, counts: np.ndarray, mode: str) -> np.ndarray:
    """Percent influence matrix; communities with no events become NaN, not 0."""
    K = len(counts)
    out = np.full((K, K), np.nan)
    if mode == "raw":
        for d in range(K):
            if counts[d] > 0:
                out[:, d] = 100.0 * A[:, d] / counts[d]
    elif mode == "normalized":
        for s in range(K):
            if counts[s] > 0:
                out[s, :] = 100.0 * A[s, :] / counts[s]
    else:
        raise ValueError(f"mode must be 'raw' or 'normalized', got {mode!r}")
    return out


def influence_matrix(root: np.ndarray, events: EventStream, K: int, mode: str) -> np.ndarray:
    A, counts = attributed_counts(root, events, K)
    return influence_from_counts(A, counts, mode)


def aggregate_influence(parts: Sequence[tuple[np.ndarray, EventStream]], K: int, mode: str) -> np.ndarray:
    """Combine per-cluster attributions by summing counts before normalizing."""
    A = np.zeros((K, K))
    counts = np.zeros(K, dtype=np.int64)
    for root, events in parts:
        a, c = attributed_counts(root, events, K)
        A += a
        counts += c
    return influence_from_counts(A, counts, mode)


class KsResult(NamedTuple):
    statistic: float
    p_value: float
    significant: bool  # at the p < 0.01 threshold


def ks_two_sample(x: Sequence[float], y: Sequence[float]) -> KsResult:
    """Two-sample Kolmogorov-Smirnov test with the asymptotic p-value."""
    xs = np.sort(np.asarray(x, dtype=np.float64))
    ys = np.sort(np.asarray(y, dtype=np.float64))
    if len(xs) == 0 or len(ys) == 0:
        raise ValueError("both samples must be non-empty")
    grid = np.concatenate([xs, ys])
    cdf_x = np.searchsorted(xs, grid, side="right") / len(xs)
    cdf_y = np.searchsorted(ys, grid, side="right") / len(ys)
    d = float(np.abs(cdf_x - cdf_y).max())
    en = math.sqrt(len(xs) * len(ys) / (len(xs) + len(ys)))
    p = float(kolmogorov(en * d))
    return KsResult(statistic=d, p_value=p, significant=p < 0.01)
