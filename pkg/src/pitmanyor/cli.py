"""Command-line surface: simulate, fit, posterior, lr, verify, experiment.

Exit codes: 0 success (possibly with warnings), 1 runtime/I-O errors,
2 usage errors.  Every JSON output embeds the tool version, the resolved
configuration, the seed, and sha256 digests of the inputs, so any run can be
reproduced exactly.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from . import __version__, experiments, inference, partition
from .estimators import INTERIOR, mle_sigma, profile_mle
from .population import make_explicit, population_from_json
from .sampler import RngStream, sample_iid_labels, sample_py_partition, \
    write_sample_csv


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _guard_output(path, force):
    if Path(path).exists() and not force:
        raise CliError(f"refusing to overwrite {path} (use --force)", 1)


def _write_json(path, payload, force):
    _guard_output(path, force)
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _provenance(args, inputs=()):
    return {
        "version": __version__,
        "config": {k: v for k, v in sorted(vars(args).items())
                   if k != "func" and v is not None},
        "input_digests": {str(p): _digest(p) for p in inputs},
    }


def _load_stats(args):
    if args.stats is not None:
        text = Path(args.stats).read_text()
        payload = json.loads(text)
        if "stats" in payload:  # wrapped output of `simulate`
            text = json.dumps(payload["stats"])
        return partition.PartitionStats.from_json(text), [args.stats]
    if args.sample is not None:
        return partition.read_sample_csv(args.sample), [args.sample]
    raise CliError("provide --stats or --sample", 2)


def _parse_prior(args):
    kwargs = {}
    if args.prior == "beta":
        a, b = (float(x) for x in args.beta.split(","))
        kwargs.update(sigma_kind="beta", beta_a=a, beta_b=b)
    if getattr(args, "m", None) is not None:
        kwargs.update(M_kind="fixed", M_value=args.m)
    elif getattr(args, "m_uniform_max", None) is not None:
        kwargs.update(M_kind="uniform", M_max=args.m_uniform_max)
    return inference.PriorSpec(**kwargs)


# ---------------------------------------------------------------------------


def cmd_simulate(args):
    if args.n < 1:
        raise CliError("--n must be a positive integer", 2)
    rng = RngStream(args.seed)
    if args.py is not None:
        sigma, M = (float(x) for x in args.py.split(","))
        stats = sample_py_partition(sigma, M, args.n, rng)
        labels = stats.expand()
    else:
        pop = population_from_json(Path(args.population).read_text())
        labels = sample_iid_labels(pop, args.n, rng)
        stats = partition.from_observations(labels)
    _guard_output(args.out, args.force)
    write_sample_csv(args.out, labels)
    stats_path = args.stats_out or str(Path(args.out).with_suffix(".json"))
    payload = {"stats": json.loads(stats.to_json()),
               "provenance": _provenance(args)}
    _write_json(stats_path, payload, args.force)
    top = ", ".join(str(x) for x in stats.N[:5])
    print(f"n={stats.n} K={stats.K} largest blocks: {top}")
    return 0


def cmd_fit(args):
    stats, inputs = _load_stats(args)
    if args.profile:
        res = profile_mle(stats, M_max=args.m_max, se=args.se)
    else:
        res = mle_sigma(stats, args.m, se=args.se)
    warnings = []
    if res.boundary != INTERIOR:
        warnings.append(f"estimate at boundary: {res.boundary}")
    payload = json.loads(res.to_json(stats))
    payload["warnings"] = warnings
    payload["provenance"] = _provenance(args, inputs)
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        _guard_output(args.out, args.force)
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    return 0


def cmd_posterior(args):
    stats, inputs = _load_stats(args)
    prior = _parse_prior(args)
    post = inference.posterior_sigma(stats, prior)
    mean, sd, interval = inference.posterior_mean_and_interval(
        post, level=args.level)
    if args.csv_out:
        _guard_output(args.csv_out, args.force)
        post.write_csv(args.csv_out)
    payload = {
        "mean": mean, "sd": sd, "interval": list(interval),
        "level": args.level, "degenerate": post.degenerate,
        "prior_spec": prior.to_dict(),
        "provenance": _provenance(args, inputs),
    }
    text = json.dumps(payload, sort_keys=True, indent=2)
    if args.out:
        _guard_output(args.out, args.force)
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_lr(args):
    import csv

    with open(args.db, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or "species" not in reader.fieldnames:
            raise CliError("db CSV must have a `species` header column", 1)
        labels = [row["species"] for row in reader]
    if args.crime_profile in labels:
        raise CliError("crime profile must be a new, unseen species", 1)
    labels.append(args.crime_profile)
    stats = partition.from_observations(labels)
    prior = _parse_prior(args)
    report = inference.forensic_report(stats, prior)
    report["provenance"] = _provenance(args, [args.db])
    text = json.dumps(report, sort_keys=True, indent=2)
    if args.out:
        _guard_output(args.out, args.force)
        Path(args.out).write_text(text + "\n")
    else:
        print(text)
    return 0


def cmd_verify(args):
    rows = experiments.verify_suite(fast=args.fast)
    width = max(len(name) for name, _, _ in rows)
    failed = 0
    for name, ok, detail in rows:
        status = "PASS" if ok else "FAIL"
        print(f"{status}  {name:<{width}}  {detail}")
        failed += not ok
    print(f"{len(rows) - failed}/{len(rows)} checks passed")
    return 1 if failed else 0


_EXPERIMENTS = ("normality", "bvm", "lemma_limits", "root_rate", "tau1_mc",
                "precision_profile", "forensic")


def cmd_experiment(args):
    spec = json.loads(Path(args.config).read_text())
    check = args.check or spec.get("check")
    if check not in _EXPERIMENTS:
        raise CliError(
            f"unknown check {check!r}; choose from {', '.join(_EXPERIMENTS)}",
            2)
    if args.seed is not None:
        spec["seed"] = args.seed
    spec["threads"] = args.threads
    if check in ("lemma_limits", "root_rate", "tau1_mc"):
        pop = population_from_json(spec["population"])
        if check == "lemma_limits":
            report = experiments.run_lemma_limits(
                pop, sigma=spec.get("sigma"), n_grid=spec["n_grid"],
                tolerance=spec.get("tolerance", 0.05))
        elif check == "root_rate":
            report = experiments.run_root_rate(pop, spec["n_grid"])
        else:
            report = experiments.run_tau1_mc(
                pop, spec["n_grid"][-1], spec.get("replications", 400),
                seed=spec.get("seed", 0),
                tolerance=spec.get("tolerance", 0.10), threads=args.threads)
    else:
        config = experiments.ExperimentConfig.from_dict(spec)
        runner = getattr(experiments, f"run_{check}")
        report = runner(config)
    payload = json.loads(report.to_json())
    payload["provenance"] = _provenance(args, [args.config])
    _write_json(args.out, payload, args.force)
    print(f"{check}: {'PASS' if report.passed else 'FAIL'} "
          f"({report.wall_clock:.1f}s) -> {args.out}")
    return 0 if report.passed else 1


# ---------------------------------------------------------------------------


def build_parser():
    parser = argparse.ArgumentParser(
        prog="pitmanyor",
        description="Pitman-Yor type-parameter estimation toolkit")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("simulate", help="draw a sample and write CSV + stats")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--py", metavar="SIGMA,M",
                     help="sample a Pitman-Yor partition directly")
    src.add_argument("--population", metavar="JSON_PATH",
                     help="i.i.d. sample from a population spec")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="sample CSV path")
    p.add_argument("--stats-out", help="stats JSON path (default: out.json)")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="maximum marginal likelihood estimate")
    p.add_argument("--stats", help="stats JSON input")
    p.add_argument("--sample", help="sample CSV input")
    p.add_argument("--m", type=float, default=1.0,
                   help="fixed precision M (default 1)")
    p.add_argument("--profile", action="store_true",
                   help="profile over M instead of fixing it")
    p.add_argument("--m-max", type=float, default=50.0)
    p.add_argument("--se", action="store_true", help="attach standard errors")
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("posterior", help="grid posterior for sigma")
    p.add_argument("--stats")
    p.add_argument("--sample")
    p.add_argument("--prior", choices=("uniform", "beta"), default="uniform")
    p.add_argument("--beta", metavar="A,B", default="1,1")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--m", type=float, help="fixed M (default 1)")
    g.add_argument("--m-uniform-max", type=float,
                   help="uniform M prior on [0, MAX]")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--csv-out", help="full grid CSV")
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_posterior)

    p = sub.add_parser("lr", help="forensic likelihood ratio")
    p.add_argument("--db", required=True, help="database sample CSV")
    p.add_argument("--crime-profile", required=True,
                   help="label of the new profile")
    p.add_argument("--prior", choices=("uniform", "beta"), default="uniform")
    p.add_argument("--beta", metavar="A,B", default="1,1")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--m", type=float)
    g.add_argument("--m-uniform-max", type=float)
    p.add_argument("--out")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_lr)

    p = sub.add_parser("verify", help="run the deterministic invariant suite")
    p.add_argument("--fast", action="store_true",
                   help="trim expensive enumerations (< 60 s)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("experiment", help="run a Monte Carlo check")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--check", choices=_EXPERIMENTS,
                   help="override the check named in the config")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--force", action="store_true")
    p.set_defaults(func=cmd_experiment)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
