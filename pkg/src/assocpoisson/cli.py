"""Command-line experiment runner.

    assocpoisson <sigma-sweep|charfn|count-fit|fkg-check> --config FILE
        [--seed U64] [--replicates INT] [--out DIR]

Outputs are CSV tables plus ``manifest.json``; identical configs produce
byte-identical files. The only environment input is the worker thread
count (``ASSOCPOISSON_THREADS``), which does not affect results.
"""

import argparse
import csv
import hashlib
import json
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .association import exact_fkg_check, mc_fkg_check, window_distribution
from .config import EXPERIMENTS, ConfigError, load_config
from .counts import COMPOUND2, POISSON, count_experiment, fit_summary, lam_eff, reference_pmf
from .errors import FeasibilityError, InvalidSpecError, NumericalAccuracyError, ResourceError
from .field import decay_diagnostic, marginal_prob, sigma
from .limit import CharfnReport, charfn_report


def format_value(v):
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    return str(v)


def write_csv(path, header, rows):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])


def write_json(path, obj):
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=format_value)
        fh.write("\n")


def _sigma_sweep(cfg, out):
    n_values = cfg.n_values or [cfg.spec.n]
    rows = []
    for n, scaled in decay_diagnostic(cfg.spec, n_values):
        spec = cfg.spec.with_n(n)
        rows.append([n, scaled, sigma(spec), marginal_prob(spec)])
    write_csv(out / "sigma_sweep.csv", ["n", "nd_sigma", "sigma", "marginal_prob"], rows)
    return {"sigma_sweep.csv": None}


def _charfn(cfg, out):
    n_values = cfg.n_values or [cfg.spec.n]
    rows = []
    for n in n_values:
        spec = cfg.spec.with_n(n)
        for t in cfg.t_values:
            report = charfn_report(
                t, cfg.f, spec, cfg.replicates, cfg.master_seed,
                lam=cfg.reference["lambda"], mass=cfg.reference["mass"],
            )
            rows.append(report.row())
    write_csv(out / "charfn.csv", CharfnReport.CSV_COLUMNS, rows)
    return {"charfn.csv": [0, cfg.replicates]}


def _count_fit(cfg, out):
    hist = count_experiment(cfg.spec, cfg.box, cfg.replicates, cfg.master_seed)
    lam = lam_eff(cfg.spec, cfg.box)
    kind = COMPOUND2 if cfg.spec.kind == "or" else POISSON
    rows = []
    for k in range(max(hist.counts, default=0) + 1):
        c = hist.counts.get(k, 0)
        rows.append([k, c, c / hist.replicates, float(reference_pmf(kind, lam, k))])
    write_csv(out / "histogram.csv", ["k", "count", "empirical_p", "reference_p"], rows)
    summary = fit_summary(hist, cfg.spec, cfg.box)
    summary["reference_kind"] = kind
    write_json(out / "summary.json", summary)
    return {"histogram.csv": [0, cfg.replicates], "summary.json": [0, cfg.replicates]}


def _fkg_check(cfg, out):
    rows = []
    m = len(cfg.sites)
    if m <= 4:
        try:
            res = exact_fkg_check(window_distribution(cfg.spec, cfg.sites))
        except FeasibilityError:
            res = None
        if res is not None:
            pair = "" if res.witness is None else json.dumps(list(res.witness))
            verdict = "associated" if res.associated else "not-associated"
            rows.append(["exact", pair, res.min_cov, None, verdict])
    for r in mc_fkg_check(cfg.spec, cfg.sites, cfg.pairs, cfg.replicates, cfg.master_seed):
        desc = json.dumps([list(r.f_generators), list(r.g_generators)], separators=(",", ":"))
        verdict = "consistent" if r.cov >= -4 * r.se else "negative"
        rows.append([f"mc-{r.pair_id}", desc, r.cov, r.se, verdict])
    write_csv(out / "fkg.csv", ["pair_id", "pair", "cov", "se", "verdict"], rows)
    return {"fkg.csv": [0, cfg.replicates]}


RUNNERS = {
    "sigma-sweep": _sigma_sweep,
    "charfn": _charfn,
    "count-fit": _count_fit,
    "fkg-check": _fkg_check,
}


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def run(cfg):
    """Run one experiment and write its outputs and manifest to ``cfg.out_dir``."""
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    produced = RUNNERS[cfg.experiment](cfg, out)
    manifest = {
        "config": cfg.to_record(),
        "config_sha256": cfg.digest(),
        "master_seed": cfg.master_seed,
        "versions": {"assocpoisson": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "outputs": {
            name: {"sha256": _sha256(out / name), "replicate_range": rng}
            for name, rng in sorted(produced.items())
        },
    }
    write_json(out / "manifest.json", manifest)
    return manifest


def _fail(kind, exc, code, parameter=None):
    record = {"error": kind, "message": str(exc)}
    if parameter is not None:
        record["parameter"] = parameter
    sys.stderr.write(json.dumps(record, sort_keys=True) + "\n")
    return code


def build_parser():
    parser = argparse.ArgumentParser(prog="assocpoisson", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in EXPERIMENTS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="YAML experiment config")
        p.add_argument("--seed", type=int, help="override master_seed")
        p.add_argument("--replicates", type=int, help="override replicates")
        p.add_argument("--out", help="override out_dir")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    overrides = {
        "experiment": args.command,
        "master_seed": args.seed,
        "replicates": args.replicates,
        "out_dir": args.out,
    }
    try:
        cfg = load_config(args.config, overrides)
        run(cfg)
    except ConfigError as exc:
        return _fail("invalid-config", exc, 2, exc.parameter)
    except InvalidSpecError as exc:
        return _fail("invalid-config", exc, 2)
    except (FeasibilityError, ResourceError) as exc:
        return _fail(type(exc).__name__, exc, 3, exc.parameter)
    except NumericalAccuracyError as exc:
        return _fail("numerical-accuracy", exc, 4)
    return 0


if __name__ == "__main__":
    sys.exit(main())
