"""Replicated-simulation moment estimation and theory-vs-simulation reports.

The experiment config is a plain JSON object (see README for the schema);
unknown keys are rejected at every level so silent typos cannot weaken a
comparison.  All randomness derives from one master seed: replicate r at
dimension n runs on the stream (seed, SIM_TAG, n, r), and the theoretical
Monte-Carlo integrals use per-(partition, sign set) streams keyed by the
same seed, so reports are reproducible bit for bit.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from . import asymptotics, entries, spectra
from .asymptotics import BandKernel, MCConfig
from .combin import KCAP_DEFAULT
from .entries import (
    BinomialSparse,
    ContinuousVarianceProfile,
    DiscreteVarianceProfile,
    EntryModel,
    GridFn,
    IndicatorFn,
    PolyFn,
    ConstFn,
    ScaledIID,
    SparseBernoulli,
    Truncation,
)
from .errors import CapacityError, ConfigError
from .patterns import MaskKind, MaskSpec, MatrixSpec, Pattern, parse_pattern

_SIM_TAG = 101
_TRUNC_TAG = 202


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    pattern: Pattern
    model: EntryModel
    n_list: tuple[int, ...]
    replicates: int
    kmax: int
    seed: int
    mask: MaskSpec = field(default_factory=MaskSpec)
    mc: MCConfig = field(default_factory=MCConfig)
    zcap: float = 3.0
    solver: str = "auto"
    kcap: int = KCAP_DEFAULT
    out: str | None = None
    hist: str | None = None
    bins: int = 101
    plot: str | None = None

    def __post_init__(self):
        if self.replicates < 1:
            raise ConfigError("replicates must be >= 1")
        if not self.n_list:
            raise ConfigError("need at least one n")
        for n in self.n_list:
            MatrixSpec(self.pattern, n, self.mask)  # validates n/mask/pattern
        if self.kmax < 1 or self.kmax > self.kcap:
            raise ConfigError(f"kmax must be in [1, {self.kcap}], got {self.kmax}")
        if self.solver not in ("auto", "dense", "fast"):
            raise ConfigError(f"unknown solver {self.solver!r}")
        if self.seed < 0:
            raise ConfigError("seed must be a nonnegative integer")
        if self.bins < 1:
            raise ConfigError("bins must be >= 1")


def _require_keys(d: dict, allowed: set[str], ctx: str) -> None:
    unknown = set(d) - allowed
    if unknown:
        raise ConfigError(f"unknown keys in {ctx}: {sorted(unknown)}")


def _parse_trunc(d: Any) -> Truncation:
    if d is None:
        return Truncation()
    _require_keys(d, {"c", "e"}, "trunc")
    return Truncation(c=d.get("c"), e=d.get("e", 0.0))


def _parse_sigma_fn(d: dict):
    _require_keys(d, {"kind", "c", "coeffs", "lo", "hi", "height", "xs", "ys"}, "sigma")
    kind = d.get("kind")
    if kind == "const":
        return ConstFn(float(d["c"]))
    if kind == "poly":
        return PolyFn(tuple(float(c) for c in d["coeffs"]))
    if kind == "indicator":
        return IndicatorFn(float(d["lo"]), float(d["hi"]), float(d.get("height", 1.0)))
    if kind == "grid":
        return GridFn(tuple(map(float, d["xs"])), tuple(map(float, d["ys"])))
    raise ConfigError(f"unknown sigma kind {kind!r}")


def parse_model(spec: Any) -> EntryModel:
    """Entry model from a config object (or a bare name string)."""
    if isinstance(spec, str):
        spec = {"kind": spec}
    _require_keys(
        spec,
        {"kind", "base", "scale", "lambda", "m", "sigma", "inner", "trunc"},
        "model",
    )
    kind = spec.get("kind")
    trunc = _parse_trunc(spec.get("trunc"))
    if kind in ("normal", "uniform", "rademacher"):
        return ScaledIID(base=kind, scale=spec.get("scale", "sqrt_n"), trunc=trunc)
    if kind == "iid":
        return ScaledIID(
            base=spec.get("base", "normal"), scale=spec.get("scale", "sqrt_n"), trunc=trunc
        )
    if kind == "sparse":
        if "lambda" not in spec:
            raise ConfigError("sparse model needs lambda")
        return SparseBernoulli(lam=float(spec["lambda"]), trunc=trunc)
    if kind == "binomial":
        if "lambda" not in spec or "m" not in spec:
            raise ConfigError("binomial model needs m and lambda")
        return BinomialSparse(m=int(spec["m"]), lam=float(spec["lambda"]), trunc=trunc)
    if kind == "discrete-profile":
        if "sigma" not in spec or not isinstance(spec["sigma"], (list, tuple)):
            raise ConfigError("discrete-profile needs a sigma period list")
        inner = parse_model(spec.get("inner", "normal"))
        return DiscreteVarianceProfile(tuple(float(s) for s in spec["sigma"]), inner)
    if kind == "continuous-profile":
        if "sigma" not in spec or not isinstance(spec["sigma"], dict):
            raise ConfigError("continuous-profile needs a sigma function object")
        inner = parse_model(spec.get("inner", "normal"))
        return ContinuousVarianceProfile(_parse_sigma_fn(spec["sigma"]), inner)
    raise ConfigError(f"unknown model kind {kind!r}")


def parse_mask(spec: Any) -> MaskSpec:
    if spec is None:
        return MaskSpec()
    if isinstance(spec, str):
        spec = {"kind": spec}
    _require_keys(spec, {"kind", "m", "alpha"}, "mask")
    kind = spec.get("kind", "none")
    try:
        mk = MaskKind(kind)
    except ValueError:
        raise ConfigError(f"unknown mask kind {kind!r}") from None
    return MaskSpec(
        kind=mk,
        m=int(spec["m"]) if "m" in spec and spec["m"] is not None else None,
        alpha=float(spec["alpha"]) if spec.get("alpha") is not None else None,
    )


def parse_config(obj: dict) -> ExperimentConfig:
    """Strict ExperimentConfig from a decoded JSON object."""
    _require_keys(
        obj,
        {
            "pattern", "model", "mask", "n", "replicates", "kmax", "seed",
            "mc", "zcap", "solver", "kcap", "out", "hist", "bins", "plot",
        },
        "config",
    )
    for key in ("pattern", "model", "n", "replicates", "kmax", "seed"):
        if key not in obj:
            raise ConfigError(f"config misses required key {key!r}")
    mc_obj = obj.get("mc", {})
    _require_keys(mc_obj, {"samples", "seed", "sign_set_cap", "chunk"}, "mc")
    mc = MCConfig(
        samples=int(mc_obj.get("samples", MCConfig.samples)),
        seed=int(mc_obj.get("seed", obj["seed"])),
        sign_set_cap=int(mc_obj.get("sign_set_cap", MCConfig.sign_set_cap)),
        chunk=int(mc_obj.get("chunk", MCConfig.chunk)),
    )
    n_raw = obj["n"]
    n_list = tuple(int(v) for v in (n_raw if isinstance(n_raw, (list, tuple)) else [n_raw]))
    return ExperimentConfig(
        pattern=parse_pattern(obj["pattern"]),
        model=parse_model(obj["model"]),
        mask=parse_mask(obj.get("mask")),
        n_list=n_list,
        replicates=int(obj["replicates"]),
        kmax=int(obj["kmax"]),
        seed=int(obj["seed"]),
        mc=mc,
        zcap=float(obj.get("zcap", 3.0)),
        solver=obj.get("solver", "auto"),
        kcap=int(obj.get("kcap", KCAP_DEFAULT)),
        out=obj.get("out"),
        hist=obj.get("hist"),
        bins=int(obj.get("bins", 101)),
        plot=obj.get("plot"),
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(obj, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(obj)


# ---------------------------------------------------------------------------
# simulation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EmpiricalMoments:
    n: int
    replicates: int
    mean: np.ndarray  # 1-indexed over k
    se: np.ndarray

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "replicates": self.replicates,
            "moments": {
                str(k): {"mean": float(self.mean[k]), "se": float(self.se[k])}
                for k in range(1, len(self.mean))
            },
        }


def _replicate_rng(seed: int, n: int, rep: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence((seed, _SIM_TAG, n, rep)))


def _solve_spectrum(cfg: ExperimentConfig, spec: MatrixSpec, inputs: np.ndarray) -> np.ndarray:
    fast_ok = spec.pattern is Pattern.REVERSE_CIRCULANT and spec.mask.kind is MaskKind.NONE
    if cfg.solver == "fast" or (cfg.solver == "auto" and fast_ok):
        if not fast_ok:
            raise ConfigError("fast solver only covers unmasked reverse circulant")
        return spectra.rc_eigenvalues_fast(inputs)
    return spectra.eigenvalues_sym(spectra.build_matrix(spec, inputs))


def estimate_moments(
    cfg: ExperimentConfig, collect_eigs: bool = False
) -> tuple[list[EmpiricalMoments], dict[int, np.ndarray]]:
    """Replicated trace moments per n; deterministic given the seed.

    Returns one EmpiricalMoments per n and, when requested, the pooled
    eigenvalues per n (for histograms).  Capacity or numeric failures are
    re-raised with the (n, replicate) coordinate attached.
    """
    results = []
    pools: dict[int, np.ndarray] = {}
    for n in cfg.n_list:
        if n > spectra.NMAX_DENSE:
            raise ConfigError(f"n={n} exceeds the dense solver cap {spectra.NMAX_DENSE}")
        spec = MatrixSpec(cfg.pattern, n, cfg.mask)
        band_m = (
            cfg.mask.bandwidth(n)
            if cfg.mask.kind in (MaskKind.BAND_I, MaskKind.BAND_II)
            else None
        )
        per_rep = np.zeros((cfg.replicates, cfg.kmax + 1))
        eig_pool = [] if collect_eigs else None
        for rep in range(cfg.replicates):
            rng = _replicate_rng(cfg.seed, n, rep)
            try:
                inputs = entries.sample_inputs(cfg.model, cfg.pattern, n, rng, band_m=band_m)
                eigs = _solve_spectrum(cfg, spec, inputs)
            except (CapacityError, ArithmeticError) as exc:
                raise type(exc)(f"at n={n}, replicate={rep}: {exc}") from exc
            per_rep[rep] = spectra.trace_moments_from_eigs(eigs, cfg.kmax)
            if eig_pool is not None:
                eig_pool.append(eigs)
        mean = per_rep.mean(axis=0)
        if cfg.replicates > 1:
            se = per_rep.std(axis=0, ddof=1) / math.sqrt(cfg.replicates)
        else:
            se = np.zeros(cfg.kmax + 1)
        results.append(EmpiricalMoments(n=n, replicates=cfg.replicates, mean=mean, se=se))
        if eig_pool is not None:
            pools[n] = np.concatenate(eig_pool)
    return results, pools


# ---------------------------------------------------------------------------
# theoretical side
# ---------------------------------------------------------------------------


def _is_iid_type(model: EntryModel) -> bool:
    return isinstance(model, (ScaledIID, SparseBernoulli, BinomialSparse))


def _const_seq(value: float, kmax: int) -> np.ndarray:
    out = np.zeros(kmax + 1)
    out[1:] = value
    return out


def theoretical_moments(
    pattern: Pattern,
    model: EntryModel,
    mask: MaskSpec,
    kmax: int,
    mc: MCConfig = MCConfig(),
    kcap: int = KCAP_DEFAULT,
) -> dict[int, tuple[float, float]]:
    """beta_k with Monte-Carlo stderr for k = 1..kmax, per the dispatch table
    (pattern x model x mask) documented in the README; unsupported
    combinations raise ConfigError naming the missing formula."""
    out: dict[int, tuple[float, float]] = {k: (0.0, 0.0) for k in range(1, kmax + 1)}
    even_orders = range(2, kmax + 1, 2)
    alpha_band = mask.alpha if mask.alpha is not None else None
    if mask.kind in (MaskKind.BAND_I, MaskKind.BAND_II) and alpha_band is None:
        raise ConfigError("band mask needs alpha for the asymptotic formulas")

    def fill(report_fn):
        for k in even_orders:
            rep = report_fn(k)
            out[k] = (rep.beta, rep.se)

    if mask.kind is MaskKind.NONE:
        if _is_iid_type(model):
            C = entries.limit_constants(model, kmax)
            if pattern is Pattern.REVERSE_CIRCULANT:
                fill(lambda k: asymptotics.rc_limit_moment(C, k, kcap))
            elif pattern is Pattern.SYMMETRIC_CIRCULANT:
                fill(lambda k: asymptotics.sc_limit_moment(C, k, kcap))
            else:
                profile = entries.constant_profile(C, kmax)
                if pattern is Pattern.TOEPLITZ:
                    fill(lambda k: asymptotics.toeplitz_limit_moment(profile, k, mc, kcap))
                else:
                    fill(lambda k: asymptotics.hankel_limit_moment(profile, k, mc, kcap))
            return out
        # variance profiles
        C = entries.limit_constants(model, kmax)
        if pattern in (Pattern.REVERSE_CIRCULANT, Pattern.SYMMETRIC_CIRCULANT):
            alpha = entries.alpha_sequence(model, kmax, pattern)
            fill(lambda k: asymptotics.profile_limit_moment(pattern, alpha, C, k, kcap))
            return out
        if isinstance(model, ContinuousVarianceProfile):
            profile = entries.sigma_power_profile(model.sigma, C, kmax)
            if pattern is Pattern.TOEPLITZ:
                fill(lambda k: asymptotics.toeplitz_limit_moment(profile, k, mc, kcap))
            else:
                fill(lambda k: asymptotics.hankel_limit_moment(profile, k, mc, kcap))
            return out
        raise ConfigError(
            "no limiting formula for toeplitz/hankel with a discrete variance profile"
        )

    if not _is_iid_type(model):
        raise ConfigError("masked theory is only available for iid-type entry models")
    C = entries.limit_constants(model, kmax, band_alpha=alpha_band)

    if mask.kind is MaskKind.BAND_I:
        if pattern is Pattern.REVERSE_CIRCULANT:
            alpha = _const_seq(alpha_band, kmax)
            fill(lambda k: asymptotics.profile_limit_moment(pattern, alpha, C, k, kcap))
        elif pattern is Pattern.SYMMETRIC_CIRCULANT:
            alpha = _const_seq(min(alpha_band, 0.5), kmax)
            fill(lambda k: asymptotics.profile_limit_moment(pattern, alpha, C, k, kcap))
        else:
            kern = BandKernel("band1", alpha_band)
            fill(lambda k: asymptotics.band_toeplitz_hankel_moment(pattern, kern, C, k, mc, kcap))
        return out

    if mask.kind is MaskKind.BAND_II:
        if pattern is Pattern.REVERSE_CIRCULANT:
            alpha = _const_seq(min(2.0 * alpha_band, 1.0), kmax)
            fill(lambda k: asymptotics.profile_limit_moment(pattern, alpha, C, k, kcap))
        else:
            kern = BandKernel("band2", alpha_band)
            fill(lambda k: asymptotics.band_toeplitz_hankel_moment(pattern, kern, C, k, mc, kcap))
        return out

    # triangular
    kern = BandKernel("tri")
    fill(lambda k: asymptotics.band_toeplitz_hankel_moment(pattern, kern, C, k, mc, kcap))
    return out


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ComparisonRow:
    n: int
    k: int
    theory: float
    theory_se: float
    empirical: float
    empirical_se: float
    z: float
    passed: bool

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "theory": self.theory,
            "theory_se": self.theory_se,
            "empirical": self.empirical,
            "empirical_se": self.empirical_se,
            "z": self.z,
            "verdict": "pass" if self.passed else "fail",
        }


@dataclass(frozen=True)
class ComparisonReport:
    rows: tuple[ComparisonRow, ...]
    zcap: float
    passed: bool
    worst_z: float

    def as_dict(self) -> dict:
        return {
            "zcap": self.zcap,
            "passed": self.passed,
            "worst_z": self.worst_z,
            "rows": [r.as_dict() for r in self.rows],
        }


def compare(cfg: ExperimentConfig) -> ComparisonReport:
    """Theory vs replicated simulation, one row per (n, k).

    z = (empirical - theory) / sqrt(se_emp^2 + se_theory^2); a row passes
    when |z| <= zcap.  Needs replicates >= 2 so the empirical stderr exists.
    """
    if cfg.replicates < 2:
        raise ConfigError("compare needs replicates >= 2 for an empirical stderr")
    theory = theoretical_moments(cfg.pattern, cfg.model, cfg.mask, cfg.kmax, cfg.mc, cfg.kcap)
    empirical, _ = estimate_moments(cfg)
    rows = []
    worst = 0.0
    for emp in empirical:
        for k in range(1, cfg.kmax + 1):
            th, th_se = theory[k]
            mean, se = float(emp.mean[k]), float(emp.se[k])
            denom = math.hypot(se, th_se)
            diff = mean - th
            z = diff / denom if denom > 0 else (0.0 if diff == 0.0 else math.inf)
            worst = max(worst, abs(z))
            rows.append(
                ComparisonRow(
                    n=emp.n, k=k, theory=th, theory_se=th_se,
                    empirical=mean, empirical_se=se, z=z, passed=abs(z) <= cfg.zcap,
                )
            )
    return ComparisonReport(
        rows=tuple(rows), zcap=cfg.zcap,
        passed=all(r.passed for r in rows), worst_z=worst,
    )


@dataclass(frozen=True)
class TruncationRow:
    n: int
    estimate: float
    se: float


@dataclass(frozen=True)
class TruncationReport:
    rows: tuple[TruncationRow, ...]
    suspect: bool  # estimates fail to decrease along the n list

    def as_dict(self) -> dict:
        return {
            "suspect_non_vanishing": self.suspect,
            "rows": [
                {"n": r.n, "estimate": r.estimate, "se": r.se} for r in self.rows
            ],
        }


def truncation_check(cfg: ExperimentConfig, samples: int = 200_000) -> TruncationReport:
    """Monte-Carlo sum_i E[x_i^2 1{|x_i| > t_n}] across the n list.

    Purely diagnostic: flags the sequence as suspect when it fails to
    decrease beyond noise between the first and last n.
    """
    rows = []
    for n in cfg.n_list:
        rng = np.random.default_rng(np.random.SeedSequence((cfg.seed, _TRUNC_TAG, n)))
        est, se = entries.truncation_residual(cfg.model, n, samples, rng, cfg.pattern)
        rows.append(TruncationRow(n=n, estimate=est, se=se))
    suspect = False
    if len(rows) >= 2:
        first, last = rows[0], rows[-1]
        slack = 3.0 * (first.se + last.se)
        suspect = last.estimate > max(0.75 * first.estimate + slack, 1e-12)
    return TruncationReport(rows=tuple(rows), suspect=suspect)


# ---------------------------------------------------------------------------
# report emitters
# ---------------------------------------------------------------------------


def write_json(path: str, obj: dict) -> None:
    """JSON with stable (insertion) key order and a trailing newline."""
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_histogram_csv(path: str, hist: spectra.Histogram) -> None:
    """Columns, in order: bin_left, bin_right, mass."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_left", "bin_right", "mass"])
        for left, right, mass in hist.rows():
            writer.writerow([repr(left), repr(right), repr(mass)])
