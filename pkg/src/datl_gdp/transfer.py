"""Mixed-domain transfer runs, the pairwise experiment matrix, the target-fraction
sweep and validation-driven estimation of missing GDP values."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Mapping, Optional, Sequence

import numpy as np

from .data_ingest import (
    CountrySeries,
    Dataset,
    apply,
    fit_standardizer,
    missing_windows,
    to_prediction_dataset,
    to_training_dataset,
)
from .errors import (
    AllCandidatesFailedError,
    DatlError,
    EmptyDatasetError,
    InfeasibleFractionError,
    NumericFailureError,
    ValidationError,
)
from .metrics import improvement_pct, r_squared, rmse, rrmse, try_metric
from .regressors.search import RegressorSpec, fit_candidate, select_and_fit

log = logging.getLogger(__name__)

STUDY_FRACTIONS = (Fraction(0),) + tuple(Fraction(1, d) for d in (18, 9, 6, 3, 2))
DEFAULT_TD_FRACTION = Fraction(1, 3)
MIXING_POLICIES = ("earliest_years", "seeded_random")
VALIDATION_POLICIES = ("random", "chronological")
DEFAULT_SEED = 42

# Reported model selection for the missing-GDP countries: (model, source, RMSE, R^2, RRMSE).
REFERENCE_MISSING_BASELINES = {
    "AFG": ("svr", "IND", 49.21, 0.48, 0.24),
    "IRQ": ("elm", "CMR", 2080.72, 0.44, 1.07),
    "MMR": ("elm", "EU", 201.03, 0.74, 0.67),
    "SYR": ("grnn", "IND", 410.94, 0.51, 0.54),
    "YEM": ("grnn", "CMR", 399.01, 0.69, 0.30),
    "CHE": ("elm", "EU", 9462.41, 0.94, 0.38),
    "POL": ("grnn", "USA", 793.79, 0.90, 0.20),
}
REFERENCE_MISSING_WINDOWS = {
    "AFG": ((1982, 2000),),
    "IRQ": ((1965, 1967), (1991, 2003)),
    "MMR": ((1960, 1999),),
    "SYR": ((2008, 2014),),
    "YEM": ((1960, 1989),),
    "CHE": ((1970, 1979),),
    "POL": ((1960, 1989),),
}


def parse_fraction(text):
    """Exact rational from ``"1/18"``, ``"0"`` or a Fraction/int."""
    if isinstance(text, Fraction):
        return text
    if isinstance(text, float):
        raise ValidationError(f"fractions must be given as exact rationals like '1/3', not {text!r}")
    try:
        return Fraction(str(text).strip())
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"not a rational fraction: {text!r}") from None


def format_fraction(f):
    f = Fraction(f)
    return str(f.numerator) if f.denominator == 1 else f"{f.numerator}/{f.denominator}"


def fraction_label(f):
    f = Fraction(f)
    return "No_TD" if f == 0 else f"{format_fraction(f)}*TD"


def round_half_up(x):
    return int(np.floor(Fraction(x) + Fraction(1, 2)))


@dataclass(frozen=True)
class TransferConfig:
    source_code: str
    target_code: str
    regressor: RegressorSpec
    td_fraction: Fraction = DEFAULT_TD_FRACTION
    mixing_policy: str = "earliest_years"
    seed: int = DEFAULT_SEED
    allow_any_fraction: bool = False

    def __post_init__(self):
        f = parse_fraction(self.td_fraction)
        object.__setattr__(self, "td_fraction", f)
        upper = Fraction(1) if self.allow_any_fraction else Fraction(1, 2)
        if not 0 <= f <= upper:
            raise ValidationError(f"td_fraction {format_fraction(f)} outside [0, {format_fraction(upper)}]")
        if self.mixing_policy not in MIXING_POLICIES:
            raise ValidationError(f"unknown mixing policy {self.mixing_policy!r}; expected {MIXING_POLICIES}")

    @property
    def label(self):
        return (f"{self.source_code}-to-{self.target_code} {self.regressor.name} "
                f"f={format_fraction(self.td_fraction)}")

    def to_dict(self):
        return {
            "source_code": self.source_code,
            "target_code": self.target_code,
            "regressor": self.regressor.to_dict(),
            "td_fraction": format_fraction(self.td_fraction),
            "mixing_policy": self.mixing_policy,
            "seed": self.seed,
            "allow_any_fraction": self.allow_any_fraction,
        }

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["regressor"] = RegressorSpec.from_dict(d["regressor"])
        d["td_fraction"] = parse_fraction(d["td_fraction"])
        return cls(**d)


@dataclass(frozen=True)
class MixedDomain:
    data: Dataset
    mixed_target_years: tuple


def construct_mixed_domain(source: Dataset, target: Dataset, cfg: TransferConfig):
    """All source rows plus ``round(f * N_target)`` target rows (half-up rounding)."""
    if len(source) == 0:
        raise EmptyDatasetError("source domain is empty")
    if len(target) == 0 and cfg.td_fraction != 0:
        raise EmptyDatasetError("target domain is empty but td_fraction > 0")
    k = round_half_up(cfg.td_fraction * len(target))
    if k > len(target):
        raise InfeasibleFractionError(f"need {k} target rows, target has {len(target)}")
    order = np.argsort(target.years, kind="stable")
    if cfg.mixing_policy == "earliest_years":
        picked = order[:k]
    else:
        rng = np.random.default_rng(cfg.seed)
        picked = order[np.sort(rng.choice(len(target), size=k, replace=False))]
    picked = np.sort(picked)
    mixed = Dataset.concat(source, target.take(picked)) if k else source
    return MixedDomain(mixed, tuple(int(y) for y in target.years[picked]))


@dataclass(frozen=True)
class EvalReport:
    config: TransferConfig
    rmse: float
    r2: Optional[float]
    rrmse: Optional[float]
    per_year: tuple
    chosen_hyperparameters: dict
    mixed_target_years: tuple = ()
    heldout_rmse: Optional[float] = None
    heldout_r2: Optional[float] = None
    heldout_rrmse: Optional[float] = None
    n_train: int = 0

    kind = "eval"

    def to_dict(self):
        return {
            "config": self.config.to_dict(),
            "rmse": self.rmse,
            "r2": self.r2,
            "rrmse": self.rrmse,
            "heldout_rmse": self.heldout_rmse,
            "heldout_r2": self.heldout_r2,
            "heldout_rrmse": self.heldout_rrmse,
            "n_train": self.n_train,
            "chosen_hyperparameters": dict(self.chosen_hyperparameters),
            "mixed_target_years": list(self.mixed_target_years),
            "per_year": [list(row) for row in self.per_year],
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            config=TransferConfig.from_dict(d["config"]),
            rmse=d["rmse"], r2=d["r2"], rrmse=d["rrmse"],
            per_year=tuple((int(y), a, p) for y, a, p in d["per_year"]),
            chosen_hyperparameters=dict(d["chosen_hyperparameters"]),
            mixed_target_years=tuple(d["mixed_target_years"]),
            heldout_rmse=d.get("heldout_rmse"), heldout_r2=d.get("heldout_r2"),
            heldout_rrmse=d.get("heldout_rrmse"), n_train=d.get("n_train", 0),
        )


@dataclass(frozen=True)
class RunFailure:
    config: TransferConfig
    error_type: str
    message: str
    numeric: bool = False

    kind = "failure"

    def to_dict(self):
        return {"config": self.config.to_dict(), "error_type": self.error_type,
                "message": self.message, "numeric": self.numeric}

    @classmethod
    def from_dict(cls, d):
        return cls(TransferConfig.from_dict(d["config"]), d["error_type"], d["message"], d["numeric"])


class TransferRunError(DatlError):
    """A fit/solve failure inside one transfer run, tagged with its config."""

    def __init__(self, cfg, cause):
        super().__init__(f"{cfg.label}: {type(cause).__name__}: {cause}")
        self.config = cfg
        self.cause = cause


def fit_pipeline(train: Dataset, spec: RegressorSpec, params=None):
    """Standardize on ``train`` and fit; grid-search unless ``params`` is given."""
    std = fit_standardizer(train)
    scaled = apply(std, train)
    if params is None:
        model, params, _ = select_and_fit(spec, scaled)
    else:
        model = fit_candidate(spec, params, scaled)
    return std, model, params


def datl_run(source: Dataset, target: Dataset, cfg: TransferConfig):
    """Train on the mixed domain and score predictions over every target row."""
    if len(target) == 0:
        raise EmptyDatasetError(f"{cfg.label}: target domain is empty, nothing to predict")
    mixed = construct_mixed_domain(source, target, cfg)
    try:
        std, model, params = fit_pipeline(mixed.data, cfg.regressor)
    except (DatlError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise TransferRunError(cfg, exc) from exc
    pred = model.predict(std.transform(target.features))
    actual = target.labels
    in_mix = np.isin(target.years, mixed.mixed_target_years)
    held = ~in_mix
    return EvalReport(
        config=cfg,
        rmse=rmse(actual, pred),
        r2=try_metric(r_squared, actual, pred),
        rrmse=try_metric(rrmse, actual, pred),
        per_year=tuple((int(y), float(a), float(p)) for y, a, p in zip(target.years, actual, pred)),
        chosen_hyperparameters={k: float(v) for k, v in params.items()},
        mixed_target_years=mixed.mixed_target_years,
        heldout_rmse=try_metric(rmse, actual[held], pred[held]),
        heldout_r2=try_metric(r_squared, actual[held], pred[held]),
        heldout_rrmse=try_metric(rrmse, actual[held], pred[held]),
        n_train=len(mixed.data),
    )


def _run_or_fail(args):
    source, target, cfg = args
    try:
        return datl_run(source, target, cfg)
    except DatlError as exc:
        cause = exc.cause if isinstance(exc, TransferRunError) else exc
        log.warning("run failed: %s", exc)
        return RunFailure(cfg, type(cause).__name__, str(exc), isinstance(cause, NumericFailureError))


def _map(fn, tasks, jobs):
    if jobs and jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(fn, tasks))
    return [fn(t) for t in tasks]


def _check_countries(datasets, countries):
    countries = list(countries)
    if len(countries) < 2:
        raise ValidationError("need at least two countries for pairwise transfer")
    dupes = sorted({c for c in countries if countries.count(c) > 1})
    if dupes:
        raise ValidationError(f"duplicate countries {dupes}")
    unknown = [c for c in countries if c not in datasets]
    if unknown:
        raise ValidationError(f"no dataset for {unknown}; known: {sorted(datasets)}")
    return countries


def pairwise_matrix(datasets: Mapping[str, Dataset], countries: Sequence[str],
                    regressors: Sequence[RegressorSpec], td_fraction=DEFAULT_TD_FRACTION,
                    mixing_policy="earliest_years", seed=DEFAULT_SEED, jobs=1, allow_any_fraction=False):
    """One run per ordered (source, target) pair and regressor.

    Failed runs come back as RunFailure entries in place; ordering is
    source, then target, then regressor, following ``countries`` and
    ``regressors``.
    """
    countries = _check_countries(datasets, countries)
    tasks = []
    for src in countries:
        for tgt in countries:
            if src == tgt:
                continue
            for spec in regressors:
                cfg = TransferConfig(src, tgt, spec, parse_fraction(td_fraction), mixing_policy, seed,
                                     allow_any_fraction)
                tasks.append((datasets[src], datasets[tgt], cfg))
    return _map(_run_or_fail, tasks, jobs)


@dataclass
class SweepTable:
    regressors: tuple
    fractions: tuple
    mean_rmse: dict
    improvements: dict
    reports: list = field(default_factory=list)

    kind = "sweep"

    @property
    def failures(self):
        return [r for r in self.reports if isinstance(r, RunFailure)]

    def to_dict(self):
        return {
            "regressors": list(self.regressors),
            "fractions": [format_fraction(f) for f in self.fractions],
            "mean_rmse": {r: {format_fraction(f): v for f, v in row.items()} for r, row in self.mean_rmse.items()},
            "improvements": {r: {format_fraction(f): v for f, v in row.items()}
                             for r, row in self.improvements.items()},
            "reports": [r.to_dict() | {"kind": r.kind} for r in self.reports],
        }

    @classmethod
    def from_dict(cls, d):
        def rows(m):
            return {r: {parse_fraction(f): v for f, v in row.items()} for r, row in m.items()}

        return cls(tuple(d["regressors"]), tuple(parse_fraction(f) for f in d["fractions"]),
                   rows(d["mean_rmse"]), rows(d["improvements"]),
                   [report_from_dict(r) for r in d["reports"]])


def report_from_dict(d):
    return RunFailure.from_dict(d) if d.get("kind") == "failure" else EvalReport.from_dict(d)


def td_sweep(datasets, countries, regressors, fractions=STUDY_FRACTIONS, mixing_policy="earliest_years",
             seed=DEFAULT_SEED, jobs=1, allow_any_fraction=False):
    """Mean target RMSE over all pairwise runs, per regressor and target-data fraction.

    Improvements are ``improvement_pct(mean_rmse at 0, mean_rmse at f)`` and are
    only produced when 0 is among the fractions.  Failed runs are excluded from
    the means and kept in ``reports``.
    """
    fractions = tuple(parse_fraction(f) for f in fractions)
    reports = []
    for f in fractions:
        reports.extend(pairwise_matrix(datasets, countries, regressors, f, mixing_policy, seed, jobs,
                                       allow_any_fraction))
    names = tuple(spec.name for spec in regressors)
    mean = {}
    for spec in regressors:
        row = {}
        for f in fractions:
            vals = [r.rmse for r in reports if isinstance(r, EvalReport)
                    and r.config.regressor == spec and r.config.td_fraction == f]
            row[f] = float(np.mean(vals)) if vals else None
        mean[spec.name] = row
    improvements = {}
    if Fraction(0) in fractions:
        for name, row in mean.items():
            base = row[Fraction(0)]
            improvements[name] = {f: (improvement_pct(base, v) if base and v is not None else None)
                                  for f, v in row.items()}
    return SweepTable(names, fractions, mean, improvements, reports)


@dataclass(frozen=True)
class CandidateRow:
    regressor: str
    source: str
    rmse: Optional[float]
    r2: Optional[float]
    rrmse: Optional[float]
    hyperparameters: dict = field(default_factory=dict)
    error: Optional[str] = None

    def to_dict(self):
        return {"regressor": self.regressor, "source": self.source, "rmse": self.rmse, "r2": self.r2,
                "rrmse": self.rrmse, "hyperparameters": dict(self.hyperparameters), "error": self.error}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


@dataclass(frozen=True)
class MissingEstimateReport:
    country: str
    candidates: tuple
    selected: Optional[int]
    estimates: tuple
    missing_windows: tuple
    validation_years: tuple = ()
    nothing_to_do: bool = False
    reference_baseline: Optional[dict] = None
    manifest: Optional[dict] = None
    country_name: str = ""

    kind = "missing"

    @property
    def selected_candidate(self):
        return None if self.selected is None else self.candidates[self.selected]

    def to_dict(self):
        return {
            "country": self.country,
            "country_name": self.country_name,
            "nothing_to_do": self.nothing_to_do,
            "missing_windows": [list(w) for w in self.missing_windows],
            "validation_years": list(self.validation_years),
            "candidates": [c.to_dict() for c in self.candidates],
            "selected": self.selected,
            "estimates": [list(e) for e in self.estimates],
            "reference_baseline": self.reference_baseline,
            "manifest": self.manifest,
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            country=d["country"],
            candidates=tuple(CandidateRow.from_dict(c) for c in d["candidates"]),
            selected=d["selected"],
            estimates=tuple((int(y), v) for y, v in d["estimates"]),
            missing_windows=tuple((int(a), int(b)) for a, b in d["missing_windows"]),
            validation_years=tuple(d["validation_years"]),
            nothing_to_do=d["nothing_to_do"],
            reference_baseline=d.get("reference_baseline"),
            manifest=d.get("manifest"),
            country_name=d.get("country_name", ""),
        )


def reference_baseline(country_code):
    row = REFERENCE_MISSING_BASELINES.get(country_code)
    if row is None:
        return None
    model, source, err, r2, rel = row
    return {"model": model, "source": source, "rmse": err, "r2": r2, "rrmse": rel,
            "missing_windows": [list(w) for w in REFERENCE_MISSING_WINDOWS[country_code]]}


def validation_split(n, seed, policy="random", fraction=Fraction(1, 3)):
    """Indices (remainder, validation) with ``round(fraction * n)`` validation rows."""
    if policy not in VALIDATION_POLICIES:
        raise ValidationError(f"unknown validation policy {policy!r}; expected {VALIDATION_POLICIES}")
    k = round_half_up(Fraction(fraction) * n)
    if policy == "random":
        val = np.sort(np.random.default_rng(seed).choice(n, size=k, replace=False))
    else:
        val = np.arange(n - k, n)
    rest = np.setdiff1d(np.arange(n), val)
    return rest, val


def _evaluate_candidate(args):
    spec, src_code, source, remainder, validation = args
    try:
        std, model, params = fit_pipeline(Dataset.concat(source, remainder), spec)
        pred = model.predict(std.transform(validation.features))
        actual = validation.labels
        return CandidateRow(spec.name, src_code, rmse(actual, pred), try_metric(r_squared, actual, pred),
                            try_metric(rrmse, actual, pred), {k: float(v) for k, v in params.items()})
    except (DatlError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return CandidateRow(spec.name, src_code, None, None, None, error=f"{type(exc).__name__}: {exc}")


MIN_COMPLETE_YEARS = 6


def estimate_missing(country: CountrySeries, candidate_sources: Mapping[str, Dataset],
                     regressors: Sequence[RegressorSpec], seed=DEFAULT_SEED, validation_policy="random",
                     jobs=1):
    """Pick the (regressor, source) pair with the lowest validation RMSE and fill GDP gaps.

    A third of the country's complete years is held out for validation; the
    rest is mixed with each candidate source.  Ties go to the earlier
    regressor, then the lexicographically smaller source code.  The winner is
    refit, with its chosen hyperparameters, on the source plus every complete
    year of the country, then predicts each missing year whose inputs are all
    present.
    """
    windows = tuple(missing_windows(country))
    base = dict(country=country.country_code, missing_windows=windows,
                reference_baseline=reference_baseline(country.country_code), country_name=country.country_name)
    missing = country.missing_label_years()
    if not missing:
        return MissingEstimateReport(candidates=(), selected=None, estimates=(), nothing_to_do=True, **base)
    predictable = country.missing_label_years(require_inputs=True)
    if not predictable:
        raise ValidationError(f"{country.country_code}: no missing-GDP year has all four inputs present")
    complete = to_training_dataset(country)
    if len(complete) < MIN_COMPLETE_YEARS:
        raise ValidationError(
            f"{country.country_code}: {len(complete)} complete years, need at least {MIN_COMPLETE_YEARS}"
        )
    if not candidate_sources:
        raise ValidationError("no candidate source domains")
    rest_idx, val_idx = validation_split(len(complete), seed, validation_policy)
    remainder, validation = complete.take(rest_idx), complete.take(val_idx)

    tasks = [(spec, code, candidate_sources[code], remainder, validation)
             for spec in regressors for code in sorted(candidate_sources)]
    candidates = tuple(_map(_evaluate_candidate, tasks, jobs))
    scored = [i for i, c in enumerate(candidates) if c.rmse is not None]
    if not scored:
        raise AllCandidatesFailedError(
            f"{country.country_code}: every candidate failed", causes=[c.error for c in candidates]
        )
    selected = min(scored, key=lambda i: (candidates[i].rmse, i))
    winner = candidates[selected]
    spec = tasks[selected][0]
    std, model, _ = fit_pipeline(Dataset.concat(candidate_sources[winner.source], complete), spec,
                                 params=winner.hyperparameters)
    target = to_prediction_dataset(country, predictable)
    pred = model.predict(std.transform(target.features))
    estimates = tuple((int(y), float(p)) for y, p in zip(target.years, pred))
    return MissingEstimateReport(candidates=candidates, selected=selected, estimates=estimates,
                                 validation_years=tuple(int(y) for y in validation.years), **base)


def with_manifest(report, manifest):
    return replace(report, manifest=manifest)
