"""Prime sweeps: sharpness slopes below the critical exponent, flat behaviour above it.

For every prime in a geometric sweep the cube-plus-random-set measure is
built, its effective exponents are measured, and a lower bound for
R*(2 -> q) is recorded. A least-squares fit of log(bound) against log(p)
then gives the growth exponent, to be compared with the predicted tau.
"""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .field import Field, MAX_GRID, is_prime
from .measures import (
    GENERATOR, bohr_box_count, bohr_set, combined_measure, cube_set, random_set,
    spectral_report, uniform_measure,
)
from .restriction import critical_q, rstar_lower_iterate, rstar_witness_cube, sharpness_tau

MODES = ("sharpness", "boundedness", "salem", "diagnose", "rstar", "transform-selftest")
CSV_COLUMNS = ("p", "n", "alpha", "beta", "q", "A_size", "E_size", "AE_overlap", "bohr_size",
               "alpha_eff", "beta_eff", "rstar_lb", "witness_kind", "seed")
MIN_TAU = 0.05
MIN_SPAN = 10.0


class ConfigError(ValueError):
    """Invalid experiment configuration (CLI exit code 1)."""


class InvariantError(AssertionError):
    """A checked invariant failed during a run (CLI exit code 2)."""


@dataclass
class ExperimentConfig:
    mode: str = "sharpness"
    n: int = 1
    alpha: float = 0.6
    beta: float = 0.4
    q_list: list = field(default_factory=lambda: [3.0])
    prime_min: int = 200
    prime_max: int = 5000
    prime_count: int = 8
    primes: Optional[list] = None
    seeds: list = field(default_factory=lambda: [0, 1, 2])
    restarts: int = 8
    max_iter: int = 500
    tol: float = 1e-10
    epsilon: float = 0.05
    measure: str = "combined"
    iterate: bool = False
    transform: str = "rader"
    output_path: Optional[str] = None
    format: str = "csv"

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        data = dict(data)
        if "q_list" in data:
            data["q_list"] = [_parse_ext(q) for q in data["q_list"]]
        return cls(**data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["q_list"] = [_render_ext(q) for q in self.q_list]
        return out

    def prime_list(self) -> list:
        if self.primes:
            bad = [p for p in self.primes if not is_prime(int(p))]
            if bad:
                raise ConfigError(f"not prime: {bad}")
            return sorted({int(p) for p in self.primes})
        return primes_in_range(self.prime_min, self.prime_max, self.prime_count)

    def construction_exponents(self) -> tuple:
        """(alpha, beta) actually used to build the measure; alpha = beta is lifted by epsilon."""
        if self.alpha == self.beta:
            return self.alpha + self.epsilon, self.alpha
        return self.alpha, self.beta


def _parse_ext(x) -> float:
    if isinstance(x, str) and x.strip().lower() in ("inf", "infinity", "+inf"):
        return math.inf
    return float(x)


def _render_ext(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


@dataclass
class SweepRow:
    p: int
    n: int
    alpha: float
    beta: float
    q: float
    A_size: int
    E_size: int
    AE_overlap: int
    bohr_size: int
    alpha_eff: float
    beta_eff: float
    rstar_lb: float
    witness_kind: str
    seed: int
    N: int = 0
    bohr_box: int = 0
    seed_used: int = 0
    eta_warning: bool = False
    q_crit_eff: float = 0.0
    iterated: Optional[float] = None


@dataclass
class ScalingResult:
    q: float
    seed: int
    rows: list
    slope: float
    intercept: float
    r_squared: float
    tau_predicted: float


# --- helpers ---------------------------------------------------------------------

def _prime_at_or_above(x: int, hi: int) -> int:
    m = max(2, x)
    while m <= hi:
        if is_prime(m):
            return m
        m += 1
    m = hi
    while m >= 2 and not is_prime(m):
        m -= 1
    return m


def primes_in_range(lo: int, hi: int, count: int) -> list:
    """`count` primes near a geometric grid on [lo, hi].

    Each grid point moves to the next prime at or above it; if that prime
    exceeds hi, the largest prime <= hi is used instead. Duplicates are
    dropped and the result is sorted.
    """
    lo, hi, count = int(lo), int(hi), int(count)
    if lo < 3 or hi < lo:
        raise ConfigError(f"need 3 <= lo <= hi, got lo={lo}, hi={hi}")
    if count < 1:
        raise ConfigError("count must be >= 1")
    available = sum(1 for m in range(lo, hi + 1) if is_prime(m))
    if available < count:
        raise ConfigError(f"only {available} primes in [{lo}, {hi}], {count} requested")
    if count == 1:
        grid = [lo]
    else:
        grid = [lo * (hi / lo) ** (i / (count - 1)) for i in range(count)]
    out = {_prime_at_or_above(math.ceil(round(g, 9)), hi) for g in grid}
    return sorted(p for p in out if p >= lo)


def derive_seed(seed: int, p: int) -> int:
    """Per-(seed, prime) 64-bit seed, independent of sweep order."""
    ss = np.random.SeedSequence(int(seed) % (1 << 64), spawn_key=(int(p),))
    return int(ss.generate_state(1, np.uint64)[0])


def fit_loglog_slope(points) -> tuple:
    """OLS fit of ln(value) on ln(p): returns (slope, intercept, r_squared)."""
    pts = list(points)
    if len(pts) < 2:
        raise ValueError("need at least two points")
    x = np.log(np.array([float(p) for p, _ in pts]))
    vals = np.array([float(v) for _, v in pts])
    if np.any(vals <= 0):
        raise ValueError("values must be positive")
    y = np.log(vals)
    xc, yc = x - x.mean(), y - y.mean()
    sxx = float(xc @ xc)
    if sxx == 0:
        raise ValueError("need at least two distinct primes")
    slope = float(xc @ yc) / sxx
    intercept = float(y.mean() - slope * x.mean())
    ss_tot = float(yc @ yc)
    ss_res = float(np.sum((y - (intercept + slope * x)) ** 2))
    r2 = 1.0 if ss_tot <= 1e-300 else min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return slope, intercept, r2


# --- validation --------------------------------------------------------------------

def _validate_common(cfg: ExperimentConfig) -> list:
    if cfg.n < 1:
        raise ConfigError("n must be >= 1")
    if cfg.measure not in ("combined", "uniform"):
        raise ConfigError(f"unknown measure {cfg.measure!r}")
    if not cfg.seeds:
        raise ConfigError("at least one seed is required")
    if not cfg.q_list:
        raise ConfigError("q_list is empty")
    primes = cfg.prime_list()
    if min(primes) < 3:
        raise ConfigError("primes must be >= 3")
    if max(primes) ** cfg.n > MAX_GRID:
        raise ConfigError(f"{max(primes)}^{cfg.n} exceeds the grid cap {MAX_GRID}")
    return primes


def validate_sharpness(cfg: ExperimentConfig) -> list:
    primes = _validate_common(cfg)
    if not (0 < cfg.beta <= cfg.alpha < cfg.n):
        raise ConfigError(f"sharpness needs 0 < beta <= alpha < n (alpha={cfg.alpha}, beta={cfg.beta})")
    a, b = cfg.construction_exponents()
    if a >= cfg.n:
        raise ConfigError(f"alpha + epsilon = {a} must stay below n = {cfg.n}")
    if len(primes) < 4:
        raise ConfigError("a slope fit needs at least 4 primes")
    if max(primes) / min(primes) < MIN_SPAN:
        raise ConfigError(f"primes span only {max(primes) / min(primes):.3g}x; widen the range to >= {MIN_SPAN:g}x")
    for q in cfg.q_list:
        qc = critical_q(cfg.n, a, b)
        if not q < qc:
            raise ConfigError(f"q = {q} is not below the critical exponent {qc:.6g}")
        tau = sharpness_tau(cfg.n, a, b, q)
        if tau < MIN_TAU:
            raise ConfigError(
                f"predicted tau = {tau:.4g} < {MIN_TAU} is too weak to separate from log factors; "
                "lower q or raise beta")
    return primes


def validate_boundedness(cfg: ExperimentConfig) -> list:
    primes = _validate_common(cfg)
    if len(primes) < 4:
        raise ConfigError("a slope fit needs at least 4 primes")
    if cfg.measure == "combined":
        if not (0 < cfg.beta <= cfg.alpha < cfg.n):
            raise ConfigError(f"need 0 < beta <= alpha < n (alpha={cfg.alpha}, beta={cfg.beta})")
        qc = critical_q(cfg.n, cfg.alpha, cfg.beta)
        for q in cfg.q_list:
            if q < qc * (1 - 1e-12):
                raise ConfigError(f"q = {q} is below the critical exponent {qc:.6g}")
    for q in cfg.q_list:
        if q < 2:
            raise ConfigError("q must be >= 2")
    return primes


# --- sweeps -----------------------------------------------------------------------

def build_measure(cfg: ExperimentConfig, p: int, seed: int, alpha: float, beta: float):
    field_ = Field(p)
    if cfg.measure == "uniform":
        return uniform_measure(field_, cfg.n)
    A = cube_set(field_, cfg.n, alpha, beta)
    E = random_set(field_, cfg.n, alpha, derive_seed(seed, p))
    return combined_measure(A, E)


def _base_row(cfg, mu, report, p, seed, q, value, kind) -> SweepRow:
    meta = mu.meta
    A = mu.parts.get("A")
    N = A.meta["N"] if A is not None else 0
    return SweepRow(
        p=p, n=cfg.n, alpha=cfg.alpha, beta=cfg.beta, q=q,
        A_size=meta.get("A_size", 0), E_size=meta.get("E_size", 0),
        AE_overlap=meta.get("AE_overlap", 0), bohr_size=0,
        alpha_eff=report.alpha_eff, beta_eff=report.beta_eff, rstar_lb=value,
        witness_kind=kind, seed=int(seed), N=N,
        bohr_box=bohr_box_count(p, cfg.n, N) if N else 0,
        seed_used=meta.get("E", {}).get("seed_used", 0),
        eta_warning=meta.get("eta_warning", False),
        q_crit_eff=critical_q(cfg.n, report.alpha_eff, report.beta_eff),
    )


def _assemble(cfg, rows_by_key, tau_of) -> list:
    results = []
    for q in cfg.q_list:
        for seed in cfg.seeds:
            rows = sorted(rows_by_key[(q, seed)], key=lambda r: r.p)
            slope, intercept, r2 = fit_loglog_slope([(r.p, r.rstar_lb) for r in rows])
            results.append(ScalingResult(q=q, seed=int(seed), rows=rows, slope=slope,
                                         intercept=intercept, r_squared=r2, tau_predicted=tau_of(q)))
    return results


def run_sharpness(cfg: ExperimentConfig) -> list:
    """Cube-witness lower bounds for R*(2 -> q), q below critical; one ScalingResult per (q, seed)."""
    primes = validate_sharpness(cfg)
    a, b = cfg.construction_exponents()
    rows = {(q, s): [] for q in cfg.q_list for s in cfg.seeds}
    for seed in cfg.seeds:
        for p in primes:
            mu = build_measure(cfg, p, seed, a, b)
            report = spectral_report(mu, cfg.transform)
            for q in cfg.q_list:
                est = rstar_witness_cube(mu, q, cfg.transform)
                row = _base_row(cfg, mu, report, p, seed, q, est.value, "witness")
                row.bohr_size = est.details["bohr_size"]
                if cfg.iterate:
                    row.iterated = rstar_lower_iterate(
                        mu, q, cfg.restarts, derive_seed(seed, p), cfg.max_iter, cfg.tol,
                        cfg.transform).value
                if not row.rstar_lb > 0:
                    raise InvariantError(f"p={p}: nonpositive witness ratio {row.rstar_lb}")
                if row.bohr_size < row.bohr_box:
                    raise InvariantError(f"p={p}: |A*| = {row.bohr_size} below the box count {row.bohr_box}")
                rows[(q, seed)].append(row)
    return _assemble(cfg, rows, lambda q: sharpness_tau(cfg.n, a, b, q))


def run_boundedness(cfg: ExperimentConfig) -> list:
    """Iterated lower bounds for R*(2 -> q) at or above the critical exponent."""
    primes = validate_boundedness(cfg)
    a, b = cfg.alpha, cfg.beta
    rows = {(q, s): [] for q in cfg.q_list for s in cfg.seeds}
    for seed in cfg.seeds:
        for p in primes:
            mu = build_measure(cfg, p, seed, a, b)
            report = spectral_report(mu, cfg.transform)
            bohr = bohr_set(mu.parts["A"], method=cfg.transform) if "A" in mu.parts else None
            for q in cfg.q_list:
                est = rstar_lower_iterate(mu, q, cfg.restarts, derive_seed(seed, p), cfg.max_iter,
                                          cfg.tol, cfg.transform)
                row = _base_row(cfg, mu, report, p, seed, q, est.value, "iterated")
                row.bohr_size = len(bohr) if bohr is not None else 0
                row.iterated = est.value
                rows[(q, seed)].append(row)
    if cfg.measure == "uniform":
        return _assemble(cfg, rows, lambda q: 0.0)
    return _assemble(cfg, rows, lambda q: sharpness_tau(cfg.n, a, b, q))


def run_salem(cfg: ExperimentConfig, constant: float = 4.0) -> list:
    """max_{xi != 0} |1_E^(xi)| against constant * sqrt(|E|) * sqrt(ln p^n) for each (p, seed)."""
    from .fourier import dft

    if not 0 < cfg.alpha <= cfg.n:
        raise ConfigError("need 0 < alpha <= n")
    primes = _validate_common(cfg)
    out = []
    for p in primes:
        field_ = Field(p)
        for seed in cfg.seeds:
            E = random_set(field_, cfg.n, cfg.alpha, int(seed))
            spec = np.abs(dft(E.indicator, cfg.transform).values)
            top = float(spec[1:].max(initial=0.0))
            bound = constant * math.sqrt(max(len(E), 1)) * math.sqrt(cfg.n * math.log(p))
            out.append({"p": p, "n": cfg.n, "alpha": cfg.alpha, "seed": int(seed),
                        "E_size": len(E), "max_coeff": top, "bound": bound,
                        "ratio": top / bound, "passed": top <= bound})
    return out


# --- output -------------------------------------------------------------------------

def fmt_number(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, float):
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return format(x, ".12g")
    return str(x)


def results_csv(results) -> str:
    if isinstance(results, ScalingResult):
        results = [results]
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for res in results:
        for row in res.rows:
            writer.writerow([fmt_number(getattr(row, c)) for c in CSV_COLUMNS])
    return buf.getvalue()


def _json_float(x):
    if isinstance(x, float) and not math.isfinite(x):
        return "inf" if x > 0 else ("-inf" if x < 0 else "nan")
    return x


def _unjson_float(x):
    if isinstance(x, str) and x in ("inf", "-inf", "nan"):
        return float(x)
    return x


def results_to_json(results, config: Optional[ExperimentConfig] = None, wall_clock: float = 0.0) -> dict:
    if isinstance(results, ScalingResult):
        results = [results]
    payload = []
    for res in results:
        d = {k: _json_float(v) for k, v in dataclasses.asdict(res).items() if k != "rows"}
        d["rows"] = [{k: _json_float(v) for k, v in dataclasses.asdict(r).items()} for r in res.rows]
        payload.append(d)
    return {"config": config.to_dict() if config else None, "generator": GENERATOR,
            "version": __version__, "wall_clock_s": wall_clock, "results": payload}


def results_from_json(doc: dict) -> list:
    out = []
    for d in doc["results"]:
        rows = [SweepRow(**{k: _unjson_float(v) for k, v in r.items()}) for r in d["rows"]]
        fields_ = {k: _unjson_float(v) for k, v in d.items() if k != "rows"}
        out.append(ScalingResult(rows=rows, **fields_))
    return out


def emit_results(results, path, format: str = "csv", config: Optional[ExperimentConfig] = None,
                 wall_clock: float = 0.0) -> None:
    path = Path(path)
    if format == "csv":
        path.write_text(results_csv(results))
    elif format == "json":
        doc = results_to_json(results, config, wall_clock)
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    else:
        raise ValueError(f"unknown format {format!r}")


def load_results(path) -> list:
    return results_from_json(json.loads(Path(path).read_text()))


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0
