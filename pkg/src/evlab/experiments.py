"""Monte Carlo experiments: hitting times, tail indices, growth of the hybrid zone.

Every replica owns a generator seeded from ``SeedSequence([master_seed, i])``,
so results depend only on the master seed and the replica index, never on
thread scheduling. Worker threads come from ``threads=`` or the
``EVLAB_THREADS`` environment variable; the compiled kernel releases the GIL.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import _chain
from .config import GROUND, Configuration, from_blocks, from_string
from .kernel import Params, parse_number
from .lyapunov import f2

DEFAULT_TAU_CAP = 10**6
DEFAULT_HORIZON = 10**6
GRID_RATIO = 1.25
EXPLORATORY = "EXPLORATORY"


class EstimationError(ValueError):
    """Not enough usable data for an estimate."""


class AbsorbingStartError(ValueError):
    """The start state is absorbing, so the hitting time is undefined."""


# --- replica plumbing --------------------------------------------------


def replica_rng(master_seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([master_seed, index])))


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("EVLAB_THREADS", "").strip()
        threads = int(env) if env else 1
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    return threads


def map_replicas(fn: Callable[[int], object], count: int, threads: int | None = None) -> list:
    """``[fn(0), ..., fn(count-1)]``, possibly computed on several threads."""
    threads = min(resolve_threads(threads), max(count, 1))
    if threads == 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


def _float_params(params: Params) -> tuple[float, float]:
    return float(params.beta), float(params.p)


class ChainResult(NamedTuple):
    tau: int
    tau_c: float
    table: np.ndarray
    clock: np.ndarray
    violations: int
    final: Configuration


_NO_SAMPLES = np.zeros(0, dtype=np.int64)


def _run_single(S0: Configuration, params: Params, horizon: int, rng,
                sample_times=None, stop_on_ground: bool = False,
                continuous: bool = False, track_f1: bool = False) -> ChainResult:
    beta, p = _float_params(params)
    times = _NO_SAMPLES if sample_times is None else np.asarray(sample_times, dtype=np.int64)
    tau, tau_c, table, clock, viol, final = _chain.run_chain(
        _chain.word_array(S0.word), beta, p, int(horizon), bool(stop_on_ground),
        times, bool(continuous), bool(track_f1), rng,
    )
    return ChainResult(int(tau), float(tau_c), table, clock, int(viol),
                       from_string(_chain.array_word(final)))


def geometric_grid(horizon: int, ratio: float = GRID_RATIO, start: int = 1) -> np.ndarray:
    """Integer times ``start, ~start*ratio, ...`` up to and including ``horizon``."""
    if horizon < start:
        return np.array([horizon], dtype=np.int64)
    out = []
    x = float(start)
    while x < horizon:
        out.append(int(round(x)))
        x *= ratio
    out.append(int(horizon))
    return np.unique(np.asarray(out, dtype=np.int64))


# --- records -----------------------------------------------------------

OBSERVABLES = ("size", "blocks", "f1", "f2", "rho2", "max_size", "max_blocks")


@dataclass
class TrajectoryRecord:
    """Observables of one replica on a time grid.

    ``tau`` is the ground-state hitting time (``None`` if not reached within
    the run, then ``censored`` is True). ``tau_c`` is the continuous clock at
    ``tau`` when that clock was run.
    """

    times: np.ndarray
    series: dict
    tau: int | None
    censored: bool
    params: Params
    seed: int | None = None
    replica: int | None = None
    tau_c: float | None = None
    f1_violations: int = 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.series[name]


def _record(res: ChainResult, params, seed, replica) -> TrajectoryRecord:
    tab = res.table
    series = {name: tab[:, k + 1].copy() for k, name in enumerate(OBSERVABLES)}
    tau = res.tau if res.tau >= 0 else None
    tau_c = res.tau_c if tau is not None and not math.isnan(res.tau_c) else None
    return TrajectoryRecord(tab[:, 0].copy(), series, tau, tau is None, params,
                            seed, replica, tau_c, res.violations)


# --- hitting times -----------------------------------------------------


class TauSample(NamedTuple):
    tau: int | None
    censored: bool
    tau_c: float | None = None


def _check_start(S0: Configuration, params: Params):
    if S0.is_ground and (params.beta == 1 or params.p == 1):
        raise AbsorbingStartError(
            "the ground state is absorbing at these parameters; the hitting time is undefined"
        )


def relaxation_time_sample(S0: Configuration, params: Params, cap: int,
                           rng: np.random.Generator, continuous: bool = False) -> TauSample:
    """First ``t in 1..cap`` with the ground state, or a censored sample.

    With ``continuous`` the accumulated exponential holding times up to the
    same event are returned as ``tau_c``.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    _check_start(S0, params)
    res = _run_single(S0, params, cap, rng, stop_on_ground=True, continuous=continuous)
    if res.tau < 0:
        return TauSample(None, True, None)
    return TauSample(res.tau, False, res.tau_c if continuous else None)


def rectangle_configuration(x: int, y: int) -> Configuration:
    """Configuration ``0^x 1^y``, whose largest inscribed rectangle is ``x`` by ``y``."""
    return from_blocks((x, y))


def sigma_xy_sample(x: int, y: int, params: Params, cap: int,
                    rng: np.random.Generator) -> TauSample:
    """Hitting time from a start with rectangle witness ``(X, Y) = (x, y)``."""
    return relaxation_time_sample(rectangle_configuration(x, y), params, cap, rng)


# --- tail estimation ---------------------------------------------------


@dataclass
class TailEstimate:
    """Polynomial tail index ``a`` in ``P(tau > t) ~ t^-a``."""

    exponent: float
    stderr: float
    censored_fraction: float
    samples: int
    method: str = "survival"
    t_range: tuple[float, float] = (math.nan, math.nan)
    tail_points: int = 0
    light_tail: bool = False
    curvature: float = 0.0


def _split_censored(samples, censored):
    x = np.asarray(samples, dtype=float)
    if censored is None:
        cens = ~np.isfinite(x) | (x < 0)
    else:
        cens = np.asarray(censored, dtype=bool)
        if cens.shape != x.shape:
            raise ValueError("censored mask must match samples")
    return x, cens


def tail_index_estimate(samples, censored=None, decades: float = 2.0,
                        min_tail: int = 25, method: str = "survival",
                        hill_k: int | None = None, light_ratio: float = 2.0) -> TailEstimate:
    """Tail index from hitting times with right censoring.

    Parameters
    ----------
    samples : array_like
        Hitting times. Negative or non-finite entries count as censored
        unless ``censored`` is given.
    censored : array_like of bool, optional
        Censoring mask. A censored sample is known to exceed every observed
        time, so it stays in the survival count up to the cap.
    decades : float
        Width in log10 units of the fitting window. The window ends at the
        largest time still exceeded by ``min_tail`` samples, so the fit
        covers the upper part of the tail that the data resolve.
    method : {"survival", "hill"}
        ``"survival"`` fits log survival against log time by least squares.
        ``"hill"`` uses the top ``hill_k`` uncensored order statistics; it
        is biased when many samples are censored.
    light_ratio : float
        The tail is flagged light when the local slope over the upper half
        of the window exceeds the lower-half slope by this factor.

    Raises
    ------
    EstimationError
        Fewer than 100 uncensored samples or a degenerate window.
    """
    x, cens = _split_censored(samples, censored)
    n = x.size
    obs = np.sort(x[~cens])
    if obs.size < 100:
        raise EstimationError(f"need at least 100 uncensored samples, got {obs.size}")
    cfrac = float(cens.mean()) if n else 0.0

    if method == "hill":
        k = hill_k if hill_k is not None else max(10, obs.size // 20)
        k = min(k, obs.size - 1)
        top = obs[-k:]
        thresh = obs[-k - 1]
        if thresh <= 0:
            raise EstimationError("Hill estimator needs positive order statistics")
        mean_log = float(np.mean(np.log(top / thresh)))
        a = 1.0 / mean_log
        return TailEstimate(a, a / math.sqrt(k), cfrac, n, "hill",
                            (float(thresh), float(top[-1])), k)
    if method != "survival":
        raise ValueError(f"unknown method {method!r}")

    # survival S(t) = #{samples > t} / n, censored samples counted as exceeding
    n_cens = int(cens.sum())

    def exceed(t):
        return (obs.size - np.searchsorted(obs, t, side="right")) + n_cens

    # largest observed time still exceeded by min_tail samples
    candidates = obs[exceed(obs) >= min_tail]
    if candidates.size == 0:
        raise EstimationError("no time is exceeded by enough samples")
    t_hi = float(candidates[-1])
    t_lo = max(t_hi / 10 ** decades, 1.0)
    if t_hi <= t_lo * 1.5:
        raise EstimationError("fitting window is degenerate")
    grid = np.unique(np.geomspace(t_lo, t_hi, 40))
    surv = exceed(grid) / n
    keep = surv > 0
    lt, ls = np.log(grid[keep]), np.log(surv[keep])
    if lt.size < 5:
        raise EstimationError("too few distinct survival points")
    A = np.vstack([lt, np.ones_like(lt)]).T
    coef, *_ = np.linalg.lstsq(A, ls, rcond=None)
    slope = float(coef[0])
    resid = ls - A @ coef
    dof = max(lt.size - 2, 1)
    s2 = float(resid @ resid) / dof
    se = math.sqrt(s2 / float(((lt - lt.mean()) ** 2).sum()))
    # curvature: compare slopes on the two halves of the window
    mid = lt.size // 2
    lower = np.polyfit(lt[:mid + 1], ls[:mid + 1], 1)[0]
    upper = np.polyfit(lt[mid:], ls[mid:], 1)[0]
    ratio = upper / lower if lower < 0 else math.inf
    light = bool(ratio > light_ratio)
    return TailEstimate(-slope, se, cfrac, n, "survival", (t_lo, t_hi),
                        int(keep.sum()), light, float(ratio))


# --- growth ------------------------------------------------------------


def growth_experiment(S0: Configuration, params: Params, horizon: int,
                      rng: np.random.Generator, ratio: float = GRID_RATIO,
                      seed: int | None = None, replica: int | None = None) -> TrajectoryRecord:
    """Run to ``horizon`` recording observables on a geometric grid.

    At ``beta = 0`` the staircase area is followed at every step and the
    number of steps with ``f1 > f1(S0) + t`` is stored in ``f1_violations``.
    """
    if horizon < 1000:
        raise ValueError(f"growth horizon must be at least 1000, got {horizon}")
    times = np.concatenate(([0], geometric_grid(horizon, ratio)))
    res = _run_single(S0, params, horizon, rng, times, stop_on_ground=False,
                      track_f1=float(params.beta) == 0.0)
    return _record(res, params, seed, replica)


@dataclass
class GrowthFit:
    slope: float
    stderr: float
    intercept: float
    points: int
    degenerate: bool = False

    def band(self, z: float = 2.0) -> tuple[float, float]:
        return self.slope - z * self.stderr, self.slope + z * self.stderr


def growth_exponent(record, column: str = "max_size", decades: float = 2.0,
                    min_points: int = 10) -> GrowthFit:
    """Least-squares slope of ``log y`` on ``log t`` over the final ``decades``.

    ``record`` is a :class:`TrajectoryRecord` or a pair ``(t, y)``.
    A constant series is returned with ``degenerate=True`` and slope 0.
    """
    if isinstance(record, TrajectoryRecord):
        t, y = record.times, record[column]
    else:
        t, y = record
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    mask = (t > 0) & (y > 0)
    t, y = t[mask], y[mask]
    if t.size == 0:
        raise EstimationError("no positive points")
    lo = t.max() / 10 ** decades
    if t.min() > lo * (1 + 1e-9):
        raise EstimationError("series does not span the requested decades")
    sel = t >= lo * (1 - 1e-12)
    t, y = t[sel], y[sel]
    if t.size < min_points:
        raise EstimationError(f"need {min_points} grid points in the window, got {t.size}")
    lt, ly = np.log(t), np.log(y)
    if np.ptp(ly) == 0:
        return GrowthFit(0.0, 0.0, float(ly[0]), t.size, True)
    A = np.vstack([lt, np.ones_like(lt)]).T
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - A @ coef
    dof = max(t.size - 2, 1)
    se = math.sqrt(float(resid @ resid) / dof / float(((lt - lt.mean()) ** 2).sum()))
    return GrowthFit(float(coef[0]), se, float(coef[1]), int(t.size))


SIMULATE_CSV_HEADER = ["t", "size", "blocks", "f1", "f2", "rho2", "max_size", "config_blocks"]


def simulate_path(S0: Configuration, params: Params, horizon: int,
                  rng: np.random.Generator, times=None) -> list[tuple]:
    """Single trajectory with the configuration itself recorded at ``times``.

    The chain is run segment by segment between consecutive times with one
    generator, so the result is a deterministic function of the seed.
    Rows follow :data:`SIMULATE_CSV_HEADER`.
    """
    from .lyapunov import f1 as _f1, rho2 as _rho2

    if times is None:
        times = np.concatenate(([0], geometric_grid(horizon))) if horizon else np.array([0])
    rows = []
    S = S0
    now = 0
    best = S0.size
    for t in sorted(int(x) for x in times):
        if t > horizon:
            break
        if t > now:
            res = _run_single(S, params, t - now, rng, np.array([t - now]))
            best = max(best, int(res.table[-1, 6]))
            S = res.final
            now = t
        rows.append((now, S.size, S.N, _f1(S), f2(S), _rho2(S), best, S.to_csv_field()))
    return rows


# --- replica orchestration ---------------------------------------------

MODES = ("tau", "growth")
TAU_CSV_HEADER = ["replica", "seed", "tau", "censored", "tau_c"]
GROWTH_CSV_HEADER = ["replica", "t", "max_size", "max_blocks", "f1", "f2", "rho2"]


@dataclass(frozen=True)
class ExperimentSpec:
    beta: object
    p: object
    s0: Configuration = GROUND
    horizon: int = DEFAULT_HORIZON
    cap: int = DEFAULT_TAU_CAP
    replicas: int = 1
    seed: int = 0
    mode: str = "tau"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.replicas < 1:
            raise ValueError("replica count must be >= 1")

    @property
    def params(self) -> Params:
        return Params.parse(self.beta, self.p)

    def to_json(self) -> str:
        prm = self.params.to_dict()
        return json.dumps({
            "beta": prm["beta"], "p": prm["p"], "s0_blocks": list(self.s0.blocks),
            "horizon": self.horizon, "cap": self.cap, "replicas": self.replicas,
            "seed": self.seed, "mode": self.mode,
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentSpec":
        d = json.loads(text)
        return cls(parse_number(d["beta"]), parse_number(d["p"]),
                   from_blocks(d.get("s0_blocks", [])), int(d.get("horizon", DEFAULT_HORIZON)),
                   int(d.get("cap", DEFAULT_TAU_CAP)), int(d.get("replicas", 1)),
                   int(d.get("seed", 0)), d.get("mode", "tau"))


@dataclass
class ReplicaResults:
    spec: ExperimentSpec
    taus: list = field(default_factory=list)       # TauSample per replica
    records: list = field(default_factory=list)    # TrajectoryRecord per replica

    @property
    def censored_fraction(self) -> float:
        if self.spec.mode == "tau":
            items = self.taus
        else:
            items = self.records
        if not items:
            return 0.0
        return sum(1 for s in items if s.censored) / len(items)

    def tau_array(self) -> np.ndarray:
        """Hitting times with ``-1`` for censored replicas."""
        return np.array([-1 if s.censored else s.tau for s in self.taus], dtype=np.int64)

    def to_csv(self) -> str:
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        if self.spec.mode == "tau":
            w.writerow(TAU_CSV_HEADER)
            for i, s in enumerate(self.taus):
                w.writerow([i, self.spec.seed,
                            "" if s.censored else s.tau, int(s.censored),
                            "" if s.tau_c is None else repr(s.tau_c)])
        else:
            w.writerow(GROWTH_CSV_HEADER)
            for rec in self.records:
                for k, t in enumerate(rec.times):
                    w.writerow([rec.replica, int(t), int(rec["max_size"][k]),
                                int(rec["max_blocks"][k]), int(rec["f1"][k]),
                                int(rec["f2"][k]), int(rec["rho2"][k])])
        return out.getvalue()


def run_replicas(spec: ExperimentSpec, threads: int | None = None) -> ReplicaResults:
    """Run ``spec.replicas`` independent replicas; output depends only on ``spec``."""
    params = spec.params
    if spec.mode == "tau":
        _check_start(spec.s0, params)

        def one(i):
            return relaxation_time_sample(spec.s0, params, spec.cap,
                                          replica_rng(spec.seed, i), continuous=True)
        return ReplicaResults(spec, taus=map_replicas(one, spec.replicas, threads))

    def grow(i):
        return growth_experiment(spec.s0, params, spec.horizon, replica_rng(spec.seed, i),
                                 seed=spec.seed, replica=i)
    return ReplicaResults(spec, records=map_replicas(grow, spec.replicas, threads))


# --- size bound probe --------------------------------------------------


@dataclass
class ProbeResult:
    probability: float
    stderr: float
    bound: float
    size_limit: float
    replicas: int
    vacuous: bool

    @property
    def threshold(self) -> float:
        """``bound - 3 stderr``: the smallest estimate still consistent with the bound."""
        return self.bound - 3 * self.stderr

    @property
    def passed(self) -> bool:
        return self.vacuous or self.probability >= self.threshold


def size_bound_probe(params: Params, S0: Configuration, t: int, replicas: int = 1000,
                     seed: int = 0, threads: int | None = None) -> ProbeResult:
    """Estimate ``P(max_{s<=t} |xi_s| <= 2 sqrt(10 t))`` for ``p >= 1/2``.

    The guaranteed level is ``0.95 - f2(S0)/(10 t)``; when that is not
    positive the bound says nothing and ``vacuous`` is set.
    """
    if params.p < 0.5:
        raise ValueError("the size bound is stated for p >= 1/2")
    limit = 2 * math.sqrt(10) * math.sqrt(t)
    bound = 0.95 - f2(S0) / (10 * t)
    times = np.array([t], dtype=np.int64)

    def one(i):
        res = _run_single(S0, params, t, replica_rng(seed, i), times)
        return res.table[-1, 6] <= limit

    hits = np.array(map_replicas(one, replicas, threads), dtype=bool)
    ph = float(hits.mean())
    se = math.sqrt(max(ph * (1 - ph), 0.0) / replicas)
    return ProbeResult(ph, se, bound, limit, replicas, bound <= 0)


# --- exploratory probes ------------------------------------------------


@dataclass
class ExploratoryReport:
    """Output of a probe into an open question. Never a pass/fail verdict."""

    name: str
    question: str
    values: dict
    label: str = EXPLORATORY

    def lines(self) -> list[str]:
        out = [f"[{self.label}] {self.name}: {self.question}"]
        out += [f"    {k} = {v}" for k, v in self.values.items()]
        return out


def _tau_samples(S0, params, cap, replicas, seed, threads):
    def one(i):
        return relaxation_time_sample(S0, params, cap, replica_rng(seed, i))
    samples = map_replicas(one, replicas, threads)
    taus = np.array([-1 if s.censored else s.tau for s in samples], dtype=float)
    return taus


def _safe_tail(taus):
    try:
        return tail_index_estimate(taus)
    except EstimationError:
        return None


def infinite_mean_probe(p: float = 0.3, betas: Sequence[float] = (0.02, 0.05, 0.1),
                        S0: Configuration = None, cap: int = 10**5, replicas: int = 2000,
                        seed: int = 0, threads: int | None = None) -> ExploratoryReport:
    """Tail index of the hitting time for small ``beta`` and ``p < 1/2``.

    An index at or below 1 is what an infinite mean would look like.
    """
    S0 = S0 or from_blocks((1, 1))
    vals = {}
    for b in betas:
        taus = _tau_samples(S0, Params(float(b), float(p)), cap, replicas, seed, threads)
        est = _safe_tail(taus)
        vals[f"beta={b}"] = (
            "insufficient data" if est is None
            else f"index={est.exponent:.3f}+-{est.stderr:.3f} censored={est.censored_fraction:.3f}"
        )
    return ExploratoryReport("infinite_mean_small_beta",
                             f"is the mean hitting time infinite for small beta at p={p}?", vals)


def mixed_tail_probe(p: float = 0.3, betas: Sequence[float] = (0.7, 0.85, 1.0),
                     S0: Configuration = None, cap: int = 10**5, replicas: int = 5000,
                     seed: int = 0, threads: int | None = None) -> ExploratoryReport:
    """Does mixing in transient exclusion keep the tail index at or below 3/2?"""
    S0 = S0 or from_blocks((1, 1))
    vals = {}
    for b in betas:
        taus = _tau_samples(S0, Params(float(b), float(p)), cap, replicas, seed, threads)
        est = _safe_tail(taus)
        vals[f"beta={b}"] = ("insufficient data" if est is None
                             else f"index={est.exponent:.3f}+-{est.stderr:.3f}")
    return ExploratoryReport("tail_index_with_transient_exclusion",
                             f"is the hitting-time tail index <= 3/2 at p={p}?", vals)


def recurrence_probe(p: float = 0.3, beta: float = 0.3,
                     caps: Sequence[int] = (10**3, 10**4, 10**5),
                     S0: Configuration = None, replicas: int = 500, seed: int = 0,
                     threads: int | None = None) -> ExploratoryReport:
    """Fraction of replicas back at the ground state by each cap.

    A fraction still rising towards 1 with the cap is consistent with recurrence.
    """
    S0 = S0 or from_blocks((1, 1))
    taus = _tau_samples(S0, Params(float(beta), float(p)), max(caps), replicas, seed, threads)
    vals = {f"P(tau<={c})": float(np.mean((taus >= 0) & (taus <= c))) for c in caps}
    return ExploratoryReport("recurrence_with_voter_noise",
                             f"is the chain recurrent at beta={beta}, p={p}?", vals)


def growth_rate_probe(p: float = 0.5, horizon: int = 10**5, replicas: int = 16,
                      seed: int = 0, threads: int | None = None) -> ExploratoryReport:
    """Median fitted exponent of ``|xi_t|`` itself (not its running maximum) at ``beta = 0``."""
    params = Params(0.0, float(p))

    def one(i):
        rec = growth_experiment(GROUND, params, horizon, replica_rng(seed, i))
        return growth_exponent(rec, "size").slope
    slopes = map_replicas(one, replicas, threads)
    return ExploratoryReport("zone_size_exponent",
                             f"growth exponent of the zone size at beta=0, p={p}",
                             {"median_slope": float(np.median(slopes)),
                              "slopes": [round(s, 3) for s in slopes]})


__all__ = [
    "TrajectoryRecord", "TailEstimate", "TauSample", "GrowthFit", "ExperimentSpec",
    "ReplicaResults", "ProbeResult", "ExploratoryReport", "EstimationError",
    "AbsorbingStartError", "replica_rng", "resolve_threads", "map_replicas",
    "geometric_grid", "relaxation_time_sample", "rectangle_configuration",
    "sigma_xy_sample", "tail_index_estimate", "growth_experiment", "growth_exponent",
    "run_replicas", "size_bound_probe", "infinite_mean_probe", "mixed_tail_probe",
    "recurrence_probe", "growth_rate_probe", "TAU_CSV_HEADER", "GROWTH_CSV_HEADER",
    "EXPLORATORY", "simulate_path", "SIMULATE_CSV_HEADER",
]
