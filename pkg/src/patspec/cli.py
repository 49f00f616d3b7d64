"""Command-line interface.

Subcommands:

    limit-moments        theoretical beta_k for a pattern/model/mask combo
    simulate             replicated empirical trace moments (+ histogram)
    compare              theory vs simulation from a JSON config
    count-pi             exact |Pi(word)| at finite n, optionally the limit
    classify-partitions  partition class counts as JSON

Exit codes: 0 success/pass, 2 comparison failure, 3 capacity exceeded,
4 invalid configuration or arguments.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import asymptotics, combin, harness, spectra
from .asymptotics import MCConfig
from .entries import ContinuousVarianceProfile, PolyFn, ScaledIID, SparseBernoulli, BinomialSparse
from .errors import CapacityError, ConfigError
from .harness import ExperimentConfig
from .patterns import MaskKind, MaskSpec, parse_pattern

EXIT_OK = 0
EXIT_COMPARISON = 2
EXIT_CAPACITY = 3
EXIT_CONFIG = 4


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad arguments; 2 is reserved for comparison failures.
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _model_from_name(name: str, lam: float | None, scale: str) -> object:
    """CLI model names: normal|uniform|rademacher|sparse|binomial:M|linear-profile."""
    if name in ("normal", "uniform", "rademacher"):
        return ScaledIID(base=name, scale=scale)
    if name == "sparse":
        if lam is None:
            raise ConfigError("model 'sparse' needs --lambda")
        return SparseBernoulli(lam=lam)
    if name.startswith("binomial:"):
        if lam is None:
            raise ConfigError("model 'binomial:M' needs --lambda")
        return BinomialSparse(m=int(name.split(":", 1)[1]), lam=lam)
    if name == "linear-profile":
        return ContinuousVarianceProfile(PolyFn((0.0, 1.0)), ScaledIID(scale=scale))
    raise ConfigError(
        f"unknown model {name!r}; expected normal|uniform|rademacher|sparse|"
        f"binomial:M|linear-profile"
    )


def _mask_from_name(name: str, alpha: float | None) -> MaskSpec:
    kind = MaskKind(name)
    if kind in (MaskKind.BAND_I, MaskKind.BAND_II):
        if alpha is None:
            raise ConfigError(f"mask {name} needs --alpha")
        return MaskSpec(kind=kind, alpha=alpha)
    return MaskSpec(kind=kind)


def _cmd_limit_moments(args) -> int:
    pattern = parse_pattern(args.pattern)
    model = _model_from_name(args.model, args.lam, args.scale)
    mask = _mask_from_name(args.mask, args.alpha)
    mc = MCConfig(samples=args.mc_samples, seed=args.seed)
    theory = harness.theoretical_moments(pattern, model, mask, args.kmax, mc)
    report = {
        "pattern": pattern.short,
        "model": args.model,
        "mask": args.mask,
        "alpha": args.alpha,
        "lambda": args.lam,
        "kmax": args.kmax,
        "seed": args.seed,
        "mc_samples": args.mc_samples,
        "beta": {
            str(k): {"value": v, "se": se} for k, (v, se) in sorted(theory.items())
        },
    }
    harness.write_json(args.out, report)
    for k, (v, se) in sorted(theory.items()):
        print(f"beta_{k} = {v:.8g}" + (f" +- {se:.2g}" if se else ""))
    print(f"wrote {args.out}")
    return EXIT_OK


def _parse_n_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part)
    except ValueError:
        raise ConfigError(f"bad --n list {text!r}; expected e.g. 250,1000") from None


def _cmd_simulate(args) -> int:
    cfg = ExperimentConfig(
        pattern=parse_pattern(args.pattern),
        model=_model_from_name(args.model, args.lam, args.scale),
        mask=_mask_from_name(args.mask, args.alpha),
        n_list=_parse_n_list(args.n),
        replicates=args.replicates,
        kmax=args.kmax,
        seed=args.seed,
        solver=args.solver,
        bins=args.bins,
    )
    want_eigs = args.hist is not None or args.plot is not None
    empirical, pools = harness.estimate_moments(cfg, collect_eigs=want_eigs)
    report = {
        "pattern": cfg.pattern.short,
        "model": args.model,
        "mask": args.mask,
        "seed": cfg.seed,
        "results": [emp.as_dict() for emp in empirical],
    }
    hist = None
    if want_eigs:
        n_big = max(cfg.n_list)
        hist = spectra.esd_histogram(pools[n_big], bins=cfg.bins)
        report["histogram"] = {
            "n": n_big,
            "bins": cfg.bins,
            "mass_below": hist.below,
            "mass_above": hist.above,
        }
    harness.write_json(args.out, report)
    print(f"wrote {args.out}")
    if args.hist is not None:
        harness.write_histogram_csv(args.hist, hist)
        print(f"wrote {args.hist}")
    if args.plot is not None:
        from . import plotting

        plotting.plot_histogram(
            hist, args.plot, title=f"{cfg.pattern.short} spectrum, n={max(cfg.n_list)}"
        )
        print(f"wrote {args.plot}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    cfg = harness.load_config(args.config)
    report = harness.compare(cfg)
    obj = report.as_dict()
    if cfg.out:
        harness.write_json(cfg.out, obj)
        print(f"wrote {cfg.out}")
    if cfg.plot:
        from . import plotting

        plotting.plot_comparison(report, cfg.plot, title=f"{cfg.pattern.short} moments")
        print(f"wrote {cfg.plot}")
    for row in report.rows:
        mark = "pass" if row.passed else "FAIL"
        print(
            f"n={row.n} k={row.k}: emp {row.empirical:+.6g} (se {row.empirical_se:.2g}) "
            f"vs theory {row.theory:+.6g} (se {row.theory_se:.2g})  z={row.z:+.2f}  {mark}"
        )
    print(f"worst |z| = {report.worst_z:.2f} (zcap {report.zcap})")
    return EXIT_OK if report.passed else EXIT_COMPARISON


def _cmd_count_pi(args) -> int:
    pattern = parse_pattern(args.pattern)
    res = asymptotics.count_pi_exact(args.word, pattern, args.n, budget=args.budget)
    print(
        f"|Pi({args.word})| = {res.count} at n={args.n} ({pattern.short}); "
        f"b={res.b}; count/n^(b+1) = {res.normalized:.8g}"
    )
    if args.limit:
        lim = asymptotics.pi_limit(
            args.word, pattern, MCConfig(samples=args.mc_samples, seed=args.seed)
        )
        tail = f" +- {lim.se:.2g}" if lim.se else ""
        print(f"limit = {lim.value:.8g}{tail}")
    return EXIT_OK


def _cmd_classify_partitions(args) -> int:
    counts = combin.class_counts(args.k, kcap=max(args.k, combin.KCAP_DEFAULT))
    print(json.dumps(counts.as_dict(), indent=2))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="patspec", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common_model_flags(p):
        p.add_argument("--model", required=True,
                       help="normal|uniform|rademacher|sparse|binomial:M|linear-profile")
        p.add_argument("--lambda", dest="lam", type=float, default=None,
                       help="rate for sparse/binomial models")
        p.add_argument("--alpha", type=float, default=None, help="band ratio m_n/n limit")
        p.add_argument("--mask", default="none", choices=["none", "band1", "band2", "tri"])
        p.add_argument("--scale", default="sqrt_n", choices=["sqrt_n", "sqrt_m", "none"],
                       help="iid entry scaling (sqrt_m divides by the bandwidth)")

    p = sub.add_parser("limit-moments", help="theoretical limiting moments")
    p.add_argument("--pattern", required=True, choices=["rc", "sc", "toeplitz", "hankel"])
    common_model_flags(p)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--mc-samples", type=int, default=MCConfig.samples)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output JSON path")
    p.set_defaults(fn=_cmd_limit_moments)

    p = sub.add_parser("simulate", help="replicated empirical spectra and moments")
    p.add_argument("--pattern", required=True, choices=["rc", "sc", "toeplitz", "hankel"])
    common_model_flags(p)
    p.add_argument("--n", required=True, help="comma-separated dimensions, e.g. 250,1000")
    p.add_argument("--replicates", type=int, required=True)
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", required=True, help="output JSON path")
    p.add_argument("--hist", default=None, help="histogram CSV path (largest n)")
    p.add_argument("--bins", type=int, default=101)
    p.add_argument("--plot", default=None, help="histogram PNG path")
    p.add_argument("--solver", default="auto", choices=["auto", "dense", "fast"])
    p.set_defaults(fn=_cmd_simulate)

    p = sub.add_parser("compare", help="theory vs simulation from a JSON config")
    p.add_argument("--config", required=True)
    p.set_defaults(fn=_cmd_compare)

    p = sub.add_parser("count-pi", help="exact circuit count for a word")
    p.add_argument("--word", required=True)
    p.add_argument("--pattern", required=True, choices=["rc", "sc", "toeplitz", "hankel"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--limit", action="store_true", help="also evaluate the n->inf limit")
    p.add_argument("--mc-samples", type=int, default=MCConfig.samples)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=asymptotics.DEFAULT_COUNT_BUDGET)
    p.set_defaults(fn=_cmd_count_pi)

    p = sub.add_parser("classify-partitions", help="partition class counts")
    p.add_argument("--k", type=int, required=True)
    p.set_defaults(fn=_cmd_classify_partitions)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, ValueError, IndexError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
