"""Command-line driver: runs seeded verification suites and writes
machine-readable reports.

Exit codes: 0 = clean pass, 1 = violations / certificates found,
2 = usage or configuration error.
"""

from __future__ import annotations

import argparse
import datetime
import os
import platform
import sys
import time

from . import report as rep
from .config import ConfigError, RunConfig, load_run_config
from .convexity import ScanConfig, ellipticity_scan
from .injectivity import (
    blatzko_pressure_scan,
    injectivity_search,
    pressure_compression_check,
)
from .materials import MODEL_REGISTRY, canonical_model_name, make_model
from .suites import gradient_suite, identity_suite, theorem_identity_suite, twin_suite

import numpy as np

SUBCOMMANDS_WITH_MODEL = ("ellipticity", "injectivity", "pc-check")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rank1lab",
        description="Rank-one convexity and Cauchy-stress injectivity checks "
        "for hyperelastic constitutive laws.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="run configuration file")
    common.add_argument("--seed", type=int, metavar="U64", help="override the run seed")
    common.add_argument("--out", metavar="DIR", help="output directory for reports")
    common.add_argument("--json", action="store_true", help="print the report to stdout")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("identities", parents=[common], help="tensor identity suite")
    sub.add_parser("gradcheck", parents=[common], help="analytic vs FD stress gradients")
    for name, text in (
        ("ellipticity", "scan one model for rank-one ellipticity violations"),
        ("injectivity", "search one model for Cauchy-stress collisions"),
        ("pc-check", "pressure-compression sign check for one model"),
    ):
        p = sub.add_parser(name, parents=[common], help=text)
        p.add_argument("model", help="model name (blatz-ko, neo-hooke, svk, volumetric-cubic)")
    sub.add_parser("twins", parents=[common], help="left Cauchy-Green twin suite")
    sub.add_parser("blatzko-scan", parents=[common], help="Blatz-Ko spherical pressure scan")
    sub.add_parser("all", parents=[common], help="run every suite")
    return parser


def _scan_config(cfg: RunConfig) -> ScanConfig:
    return ScanConfig(
        seed=cfg.seed,
        spread=cfg.spread,
        n_F=cfg.n_F,
        n_dir=cfg.n_dir,
        n_starts=cfg.n_starts,
        s_max=cfg.s_max,
        probe_F=tuple(cfg.probe_F),
        refine_k=cfg.refine_k,
    )


def _models(cfg: RunConfig) -> dict:
    return {name: make_model(name, **params) for name, params in sorted(cfg.models.items())}


class _Run:
    """Accumulates suite outputs, violation counts, and CSV payloads."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.models = _models(cfg)
        self.suites: dict = {}
        self.violations = 0
        self.inconsistent = False  # a finding at odds with a model's declared class
        self.timings: dict = {}
        self.ellipticity_rows: list = []
        self.pressure_rows: list = []

    def _timed(self, key, fn):
        t0 = time.perf_counter()
        out = fn()
        self.timings[key] = time.perf_counter() - t0
        return out

    def identities(self):
        res = self._timed(
            "identities",
            lambda: identity_suite(self.cfg.seed, self.cfg.identity_samples, self.cfg.spread),
        )
        self.suites["identities"] = rep.identity_suite_json(res)
        self.violations += res.violations
        self.inconsistent |= res.violations > 0

    def gradcheck(self):
        models = list(self.models.values())
        res = self._timed(
            "gradcheck",
            lambda: gradient_suite(self.cfg.seed, models, self.cfg.gradcheck_n_F, self.cfg.spread),
        )
        self.suites["gradcheck"] = rep.gradient_suite_json(res)
        self.violations += res.violations
        self.inconsistent |= res.violations > 0

    def theorem_identity(self):
        models = list(self.models.values())
        res = self._timed(
            "theorem_identity",
            lambda: theorem_identity_suite(
                self.cfg.seed, models, self.cfg.theorem_samples, self.cfg.spread
            ),
        )
        self.suites["theorem_identity"] = rep.theorem_suite_json(res)
        self.violations += res.violations
        self.inconsistent |= res.violations > 0

    def twins(self):
        res = self._timed(
            "twins",
            lambda: twin_suite(
                self.cfg.seed, self.cfg.twin_samples, self.cfg.twin_det_samples, self.cfg.spread
            ),
        )
        self.suites["twins"] = rep.twin_suite_json(res)
        self.violations += res.violations
        self.inconsistent |= res.violations > 0

    def ellipticity(self, names):
        reports = []
        for name in names:
            model = self.models[name]
            out = self._timed(
                f"ellipticity:{name}", lambda m=model: ellipticity_scan(m, _scan_config(self.cfg))
            )
            reports.append(rep.ellipticity_json(out))
            self.violations += len(out.violations)
            if model.expected_elliptic and out.violations:
                self.inconsistent = True
            for v in out.violations:
                self.ellipticity_rows.append(
                    [*np.asarray(v.F).ravel(), *v.xi, *v.eta, v.value]
                )
        self.suites["ellipticity"] = reports

    def injectivity(self, names):
        reports = []
        for name in names:
            model = self.models[name]
            out = self._timed(
                f"injectivity:{name}", lambda m=model: injectivity_search(m, _scan_config(self.cfg))
            )
            reports.append(rep.injectivity_json(name, out))
            self.violations += len(out.certificates)
            if model.expected_elliptic and out.certificates:
                self.inconsistent = True
        self.suites["injectivity"] = reports

    def blatzko_scan(self):
        mu = self.cfg.models.get("blatz-ko", {}).get("mu", 1.0)
        records, summary = self._timed(
            "blatzko_scan",
            lambda: blatzko_pressure_scan(
                mu, self.cfg.bk_alpha_min, self.cfg.bk_alpha_max, self.cfg.bk_n
            ),
        )
        self.suites["blatzko_scan"] = rep.blatzko_scan_json(records, summary)
        self.pressure_rows = [[r.alpha, r.spherical] for r in records]

    def pc_check(self, names):
        reports = []
        lams = np.exp(
            np.linspace(np.log(self.cfg.pc_lambda_min), np.log(self.cfg.pc_lambda_max), self.cfg.pc_n)
        )
        for name in names:
            model = self.models[name]
            out = self._timed(
                f"pc_check:{name}",
                lambda m=model: pressure_compression_check(m, lams),
            )
            reports.append(rep.pc_check_json(name, out))
            bad = sum(1 for pt in out.points if not pt.skipped and pt.product <= 0.0)
            self.violations += bad
            if model.expected_elliptic and bad:
                self.inconsistent = True
        self.suites["pc_check"] = reports


def _resolve_model_arg(raw: str, cfg: RunConfig) -> str:
    name = canonical_model_name(raw)
    if name not in MODEL_REGISTRY:
        raise ConfigError(f"unknown model '{raw}' (known: {sorted(MODEL_REGISTRY)})")
    if name not in cfg.models:
        raise ConfigError(f"model '{name}' has no parameters in this configuration")
    return name


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_run_config(args.config, args.seed, args.out)
        model_name = None
        if args.command in SUBCOMMANDS_WITH_MODEL:
            model_name = _resolve_model_arg(args.model, cfg)
    except (ConfigError, OSError) as exc:
        print(f"rank1lab: {exc}", file=sys.stderr)
        return 2

    run = _Run(cfg)
    if args.command == "identities":
        run.identities()
    elif args.command == "gradcheck":
        run.gradcheck()
    elif args.command == "ellipticity":
        run.ellipticity([model_name])
    elif args.command == "injectivity":
        run.injectivity([model_name])
    elif args.command == "twins":
        run.twins()
    elif args.command == "blatzko-scan":
        run.blatzko_scan()
    elif args.command == "pc-check":
        run.pc_check([model_name])
    elif args.command == "all":
        run.identities()
        run.gradcheck()
        run.theorem_identity()
        run.twins()
        every = sorted(run.models)
        run.ellipticity(every)
        run.injectivity(every)
        run.blatzko_scan()
        run.pc_check(every)

    verdict = "fail" if run.inconsistent else "pass"
    document = {
        "schema_version": rep.SCHEMA_VERSION,
        "subcommand": args.command,
        "config": cfg.jsonable() | ({"model": model_name} if model_name else {}),
        "suites": run.suites,
        "verdict": verdict,
        "violations": run.violations,
        "meta": {
            "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
            "host": platform.node(),
            "output_dir": cfg.output_dir,
            "timings_s": run.timings,
        },
    }

    try:
        out_dir = cfg.output_dir
        os.makedirs(out_dir, exist_ok=True)
        rep.write_report(document, os.path.join(out_dir, "report.json"))
        if run.ellipticity_rows or args.command in ("ellipticity", "all"):
            header = (
                [f"f{i}{j}" for i in range(3) for j in range(3)]
                + [f"xi{i}" for i in range(3)]
                + [f"eta{i}" for i in range(3)]
                + ["value"]
            )
            rep.write_csv(
                os.path.join(out_dir, "ellipticity_violations.csv"),
                header,
                run.ellipticity_rows,
            )
        if run.pressure_rows:
            rep.write_csv(
                os.path.join(out_dir, "pressure_scan.csv"),
                ["alpha", "spherical"],
                run.pressure_rows,
            )
    except OSError as exc:
        print(f"rank1lab: cannot write outputs: {exc}", file=sys.stderr)
        return 2

    if args.json:
        print(rep.stable_dumps(document))
    return 1 if run.violations > 0 else 0


def entry():  # console-script shim
    sys.exit(main())


if __name__ == "__main__":
    entry()
