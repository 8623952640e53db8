"""Regressor specifications, default hyperparameter grids and validation grid search."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist

from ..errors import AllCandidatesFailedError, DatlError, EmptyDatasetError, InvalidHyperparameterError
from ..metrics import rmse
from .elm import elm_fit
from .grnn import grnn_fit
from .kernels import KernelSpec
from .svr import svr_fit

METHODS = ("grnn", "elm", "svr")
FEATURE_DIM = 4
DEFAULT_SIGMA_FACTORS = (0.25, 0.5, 1.0, 2.0)
DEFAULT_CS = (1.0, 10.0, 100.0, 1000.0, 10000.0)
DEFAULT_GAMMAS = tuple(g / FEATURE_DIM for g in (0.01, 0.1, 1.0, 10.0))
DEFAULT_EPSILON_FACTORS = (0.01, 0.05, 0.1)


def _tuple(values):
    return None if values is None else tuple(float(v) for v in values)


@dataclass(frozen=True)
class RegressorSpec:
    """Which regressor to train and over which hyperparameter grid.

    ``None`` axes fall back to data-dependent defaults: sigma is a multiple of
    the mean pairwise distance of the training inputs and epsilon a multiple of
    the label standard deviation; C and gamma use fixed decades.
    """

    method: str
    sigmas: Optional[tuple] = None
    Cs: Optional[tuple] = None
    gammas: Optional[tuple] = None
    epsilons: Optional[tuple] = None
    kernel: str = "rbf"
    svr_tol: Optional[float] = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise InvalidHyperparameterError(f"unknown regressor {self.method!r}; expected one of {METHODS}")
        for name in ("sigmas", "Cs", "gammas", "epsilons"):
            values = _tuple(getattr(self, name))
            object.__setattr__(self, name, values)
            if values is None:
                continue
            if not values:
                raise InvalidHyperparameterError(f"{self.method}: empty {name} grid")
            floor_ok = (lambda v: v >= 0) if name == "epsilons" else (lambda v: v > 0)
            bad = [v for v in values if not floor_ok(v)]
            if bad:
                raise InvalidHyperparameterError(f"{self.method}: invalid {name} values {bad}")

    @property
    def name(self):
        return self.method

    def to_dict(self):
        return {k: (list(v) if isinstance(v, tuple) else v)
                for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, d):
        return cls(**d)


def mean_pairwise_distance(features):
    if len(features) < 2:
        return 1.0
    d = float(pdist(features).mean())
    return d if d > 0 else 1.0


def resolve_grid(spec: RegressorSpec, train):
    """Hyperparameter dicts in declared enumeration order (last axis varies fastest)."""
    if spec.method == "grnn":
        sigmas = spec.sigmas
        if sigmas is None:
            base = mean_pairwise_distance(train.features)
            sigmas = tuple(f * base for f in DEFAULT_SIGMA_FACTORS)
        return [{"sigma": s} for s in sigmas]
    Cs = spec.Cs or DEFAULT_CS
    gammas = spec.gammas or DEFAULT_GAMMAS
    if spec.method == "elm":
        return [{"C": c, "gamma": g} for c, g in itertools.product(Cs, gammas)]
    epsilons = spec.epsilons
    if epsilons is None:
        sd = float(np.std(train.labels)) if len(train) else 0.0
        epsilons = tuple(f * sd for f in DEFAULT_EPSILON_FACTORS)
    return [{"C": c, "epsilon": e, "gamma": g} for c, e, g in itertools.product(Cs, epsilons, gammas)]


def fit_candidate(spec: RegressorSpec, params, train):
    if spec.method == "grnn":
        return grnn_fit(train, params["sigma"])
    kernel = KernelSpec(spec.kernel, params["gamma"])
    if spec.method == "elm":
        return elm_fit(train, kernel, params["C"])
    return svr_fit(train, kernel, params["C"], params["epsilon"], tol=spec.svr_tol)


@dataclass
class Candidate:
    params: dict
    validation_rmse: Optional[float] = None
    error: Optional[str] = None


@dataclass
class SearchResult:
    model: object
    params: dict
    validation_rmse: float
    candidates: list = field(default_factory=list)


def grid_search(spec: RegressorSpec, train, validation, grid=None):
    """Fit every grid point on ``train``; keep the lowest validation RMSE.

    Ties go to the earliest grid point.  Candidates that fail to fit are
    recorded and skipped; if all fail, AllCandidatesFailedError is raised.
    """
    if len(validation) == 0:
        raise EmptyDatasetError("grid search needs a non-empty validation set")
    grid = resolve_grid(spec, train) if grid is None else list(grid)
    if not grid:
        raise InvalidHyperparameterError("empty hyperparameter grid")
    best = None
    candidates = []
    for params in grid:
        try:
            model = fit_candidate(spec, params, train)
            score = rmse(validation.labels, model.predict(validation.features))
        except (DatlError, ArithmeticError, np.linalg.LinAlgError) as exc:
            candidates.append(Candidate(params, error=f"{type(exc).__name__}: {exc}"))
            continue
        candidates.append(Candidate(params, score))
        if best is None or score < best.validation_rmse:
            best = SearchResult(model, params, score)
    if best is None:
        raise AllCandidatesFailedError(
            f"all {len(grid)} {spec.method} candidates failed: {candidates[0].error}",
            causes=[c.error for c in candidates],
        )
    best.candidates = candidates
    return best


def chronological_split(d, fraction=1 / 3):
    """Hold out the latest ``round(fraction * N)`` rows by year (stable on ties)."""
    n = len(d)
    k = int(np.floor(fraction * n + 0.5))
    k = min(max(k, 1), n - 1) if n >= 2 else 0
    order = np.argsort(d.years, kind="stable")
    return d.take(np.sort(order[: n - k])), d.take(np.sort(order[n - k:]))


def select_and_fit(spec: RegressorSpec, train):
    """Pick hyperparameters on a chronological last-third split, then refit on all rows.

    A single-point grid skips the split.  Returns ``(model, params, search)``
    where ``search`` is None when no split was made.
    """
    grid = resolve_grid(spec, train)
    if len(grid) == 1 or len(train) < 3:
        if len(grid) != 1:
            raise EmptyDatasetError(f"{spec.method}: need at least 3 rows to grid-search, got {len(train)}")
        return fit_candidate(spec, grid[0], train), grid[0], None
    fit_part, val_part = chronological_split(train)
    search = grid_search(spec, fit_part, val_part, grid=grid)
    return fit_candidate(spec, search.params, train), search.params, search
