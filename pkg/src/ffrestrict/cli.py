"""Command line front end.

Exit codes: 0 success, 1 configuration error, 2 a checked invariant failed.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import sys
import time

import numpy as np

from . import __version__
from .experiments import (
    ConfigError, ExperimentConfig, InvariantError, emit_results, fmt_number, results_csv,
    results_to_json, run_boundedness, run_salem, run_sharpness,
)
from .field import Field
from .fourier import GridFn, convolve, dft, idft, lq_norm, write_gridfn
from .measures import (
    bohr_set, combined_measure, cube_set, normalized_measure, paraboloid_set, random_set,
    spectral_report, support_decay_check, uniform_measure, write_pointset,
)
from .restriction import rstar_2_2_exact, rstar_lower_iterate, rstar_witness_cube
from .stein_tomas import kernel_bounds

log = logging.getLogger("ffrestrict")

_CONFIG_FLAGS = {
    "n": "n", "alpha": "alpha", "beta": "beta", "q": "q_list", "prime_min": "prime_min",
    "prime_max": "prime_max", "prime_count": "prime_count", "primes": "primes", "seed": "seeds",
    "restarts": "restarts", "max_iter": "max_iter", "tol": "tol", "epsilon": "epsilon",
    "measure": "measure", "iterate": "iterate", "transform": "transform",
    "output": "output_path", "format": "format",
}


def _ext_float(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _add_common(sp):
    sp.add_argument("--config", help="JSON file with ExperimentConfig fields")
    sp.add_argument("--seed", type=int, nargs="+", help="one or more 64-bit seeds")
    sp.add_argument("--output", help="output path (default: stdout)")
    sp.add_argument("--format", choices=("csv", "json"))
    sp.add_argument("-n", "--n", type=int, help="dimension")
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--beta", type=float)
    sp.add_argument("--q", type=_ext_float, nargs="+", help="target exponents (inf allowed)")
    sp.add_argument("--prime-min", type=int)
    sp.add_argument("--prime-max", type=int)
    sp.add_argument("--prime-count", type=int)
    sp.add_argument("--primes", type=int, nargs="+", help="explicit prime list (overrides the range)")
    sp.add_argument("--restarts", type=int)
    sp.add_argument("--max-iter", type=int)
    sp.add_argument("--tol", type=float)
    sp.add_argument("--epsilon", type=float, help="lift used when alpha == beta")
    sp.add_argument("--measure", choices=("combined", "uniform"))
    sp.add_argument("--iterate", action="store_true", default=None,
                    help="also run the iterative lower bound in sharpness mode")
    sp.add_argument("--transform", choices=("naive", "direct", "rader"))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ffrestrict", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("selftest", help="check the Fourier identities on random functions")
    _add_common(sp)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--rtol", type=float, default=1e-9)

    sp = sub.add_parser("construct", help="build a set or measure and write it out")
    _add_common(sp)
    sp.add_argument("--kind", required=True,
                    choices=("cube", "random", "bohr", "paraboloid", "combined", "uniform"))

    for name, text in (("diagnose", "spectral exponents and kernel constants of a measure"),
                       ("rstar", "R*(2 -> q) estimates for a measure"),
                       ("sharpness", "prime sweep below the critical exponent"),
                       ("boundedness", "prime sweep at or above the critical exponent"),
                       ("salem", "random-set Fourier bound across seeds")):
        sp = sub.add_parser(name, help=text)
        _add_common(sp)
        if name in ("diagnose", "rstar"):
            sp.add_argument("--kind", default="combined", choices=("combined", "uniform", "paraboloid"))
        if name == "rstar":
            sp.add_argument("--witness-out", help="dump the best witness as GridFn text")
    return parser


def config_from_args(args, mode: str) -> ExperimentConfig:
    data = {}
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    data["mode"] = mode
    for flag, key in _CONFIG_FLAGS.items():
        val = getattr(args, flag, None)
        if val is not None:
            data[key] = val
    try:
        return ExperimentConfig.from_dict(data)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def _write(text: str, path) -> None:
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _single_prime(cfg: ExperimentConfig) -> int:
    return cfg.primes[0] if cfg.primes else cfg.prime_min


def _measure_for(kind: str, cfg: ExperimentConfig, p: int):
    field_ = Field(p)
    if kind == "uniform":
        return uniform_measure(field_, cfg.n)
    if kind == "paraboloid":
        return normalized_measure(paraboloid_set(field_, cfg.n))
    a, b = cfg.construction_exponents()
    return combined_measure(cube_set(field_, cfg.n, a, b),
                            random_set(field_, cfg.n, a, cfg.seeds[0]))


# --- subcommands -----------------------------------------------------------------------

def cmd_selftest(args, cfg: ExperimentConfig) -> int:
    grids = [(p, cfg.n) for p in (cfg.primes or [3, 5, 7, 101])]
    rng = np.random.default_rng(cfg.seeds[0])
    failed = False
    for p, n in grids:
        field_ = Field(p)
        worst = {"plancherel": 0.0, "inversion": 0.0, "convolution": 0.0, "symmetry": 0.0,
                 "naive": 0.0}
        for _ in range(args.trials):
            f = GridFn.random(field_, n, rng)
            g = GridFn.random(field_, n, rng)
            fh, gh = dft(f, cfg.transform), dft(g, cfg.transform)
            size = f.size
            worst["plancherel"] = max(worst["plancherel"],
                                      abs(lq_norm(fh, 2) ** 2 - size * lq_norm(f, 2) ** 2) / (size * lq_norm(f, 2) ** 2))
            back = idft(fh, cfg.transform).values
            worst["inversion"] = max(worst["inversion"],
                                     np.linalg.norm(back - size * f.values) / np.linalg.norm(size * f.values))
            lhs = dft(convolve(f, g, cfg.transform), cfg.transform).values
            rhs = fh.values * gh.values
            worst["convolution"] = max(worst["convolution"], np.linalg.norm(lhs - rhs) / np.linalg.norm(rhs))
            s1, s2 = np.sum(fh.values * g.values), np.sum(f.values * gh.values)
            worst["symmetry"] = max(worst["symmetry"], abs(s1 - s2) / max(abs(s1), abs(s2)))
            if size <= 4096:
                ref = dft(f, "naive").values
                worst["naive"] = max(worst["naive"], np.linalg.norm(fh.values - ref) / np.linalg.norm(ref))
        for name, err in worst.items():
            ok = err <= args.rtol
            failed |= not ok
            print(f"{'PASS' if ok else 'FAIL'} {name:12s} p={p} n={n} max_rel_err={err:.3e}")
    return 2 if failed else 0


def cmd_construct(args, cfg: ExperimentConfig) -> int:
    p = _single_prime(cfg)
    field_ = Field(p)
    a, b = cfg.alpha, cfg.beta
    kind = args.kind
    if kind in ("combined", "uniform"):
        mu = _measure_for(kind, cfg, p)
        if not args.output:
            raise ConfigError("--output is required for measures")
        write_gridfn(mu.weights, args.output)
        print(json.dumps(mu.meta, sort_keys=True, default=str))
        return 0
    if kind == "cube":
        S = cube_set(field_, cfg.n, a, b)
    elif kind == "bohr":
        S = bohr_set(cube_set(field_, cfg.n, a, b), method=cfg.transform)
    elif kind == "random":
        S = random_set(field_, cfg.n, cfg.alpha, cfg.seeds[0])
    else:
        S = paraboloid_set(field_, cfg.n)
    if args.output:
        write_pointset(S, args.output)
        print(json.dumps({"size": len(S), **S.meta}, sort_keys=True, default=str))
    else:
        sys.stdout.write(f"{S.p} {S.dim} {len(S)}\n" + "".join(f"{i}\n" for i in S.members))
    return 0


def _finite(x):
    return "inf" if isinstance(x, float) and math.isinf(x) else x


def cmd_diagnose(args, cfg: ExperimentConfig) -> int:
    out = []
    for p in (cfg.primes or [cfg.prime_min]):
        mu = _measure_for(args.kind, cfg, p)
        rep = spectral_report(mu, cfg.transform)
        check = support_decay_check(rep, mu)
        kb = kernel_bounds(mu, rep, cfg.transform)
        exact = rstar_2_2_exact(mu, cfg.transform, seed=cfg.seeds[0])
        entry = {"p": p, "n": cfg.n, "kind": args.kind,
                 "meta": {k: v for k, v in mu.meta.items() if k not in ("A", "E")},
                 "spectral": {k: _finite(v) for k, v in rep.__dict__.items()},
                 "decay_check": {**check.__dict__, "violation": check.violation},
                 "kernel": kb.__dict__,
                 "rstar_2_2": {**exact.to_json(), **exact.details}}
        out.append(entry)
        if check.violation or kb.c_infty > 1.01 or kb.c_two > 1.01:
            raise InvariantError(f"p={p}: diagnostic bound violated: {entry}")
    _write(json.dumps(out, indent=2, sort_keys=True, default=str) + "\n", cfg.output_path)
    return 0


def cmd_rstar(args, cfg: ExperimentConfig) -> int:
    p = _single_prime(cfg)
    mu = _measure_for(args.kind, cfg, p)
    estimates = [rstar_2_2_exact(mu, cfg.transform, seed=cfg.seeds[0])]
    for q in cfg.q_list:
        if q == 2:
            continue
        estimates.append(rstar_lower_iterate(mu, q, cfg.restarts, cfg.seeds[0], cfg.max_iter,
                                             cfg.tol, cfg.transform))
        if "A" in mu.parts:
            estimates.append(rstar_witness_cube(mu, q, cfg.transform))
    if args.witness_out:
        best = max(estimates[1:] or estimates, key=lambda e: e.value)
        write_gridfn(best.witness, args.witness_out)
    doc = [e.to_json() for e in estimates]
    _write(json.dumps(doc, indent=2) + "\n", cfg.output_path)
    return 0


def cmd_sweep(runner, cfg: ExperimentConfig) -> int:
    t0 = time.perf_counter()
    results = runner(cfg)
    wall = time.perf_counter() - t0
    for res in results:
        print(f"q={res.q:g} seed={res.seed} slope={res.slope:.4f} tau={res.tau_predicted:.4f} "
              f"r2={res.r_squared:.3f}", file=sys.stderr)
    if cfg.output_path:
        emit_results(results, cfg.output_path, cfg.format, cfg, wall)
    elif cfg.format == "json":
        sys.stdout.write(json.dumps(results_to_json(results, cfg, wall), indent=2, sort_keys=True) + "\n")
    else:
        sys.stdout.write(results_csv(results))
    return 0


def cmd_salem(args, cfg: ExperimentConfig) -> int:
    rows = run_salem(cfg)
    cols = ["p", "n", "alpha", "seed", "E_size", "max_coeff", "bound", "ratio", "passed"]
    lines = [",".join(cols)]
    lines.extend(",".join(fmt_number(r[c]) for c in cols) for r in rows)
    _write("\n".join(lines) + "\n", cfg.output_path)
    fails = sum(not r["passed"] for r in rows)
    print(f"salem: {len(rows) - fails}/{len(rows)} draws within the bound", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    mode = {"selftest": "transform-selftest", "construct": "diagnose"}.get(args.command, args.command)
    try:
        cfg = config_from_args(args, mode)
        if args.command == "selftest":
            return cmd_selftest(args, cfg)
        if args.command == "construct":
            return cmd_construct(args, cfg)
        if args.command == "diagnose":
            return cmd_diagnose(args, cfg)
        if args.command == "rstar":
            return cmd_rstar(args, cfg)
        if args.command == "sharpness":
            return cmd_sweep(run_sharpness, cfg)
        if args.command == "boundedness":
            return cmd_sweep(run_boundedness, cfg)
        return cmd_salem(args, cfg)
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
