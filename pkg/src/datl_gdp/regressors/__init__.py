"""GRNN, kernel-ELM and epsilon-SVR regressors behind a common fit/predict contract."""

from .elm import ElmModel, RandomElmModel, elm_fit, elm_predict, random_elm_fit
from .grnn import GrnnModel, grnn_fit, grnn_predict
from .kernels import KernelSpec, kernel_matrix
from .qp_oracle import oracle_bias, qp_oracle
from .search import METHODS, RegressorSpec, grid_search, resolve_grid, select_and_fit
from .svr import SvrModel, dual_objective, kkt_violations, svr_fit, svr_predict

__all__ = [
    "ElmModel", "GrnnModel", "KernelSpec", "METHODS", "RandomElmModel", "RegressorSpec", "SvrModel",
    "dual_objective", "elm_fit", "elm_predict", "grid_search", "grnn_fit", "grnn_predict",
    "kernel_matrix", "oracle_bias", "qp_oracle", "random_elm_fit", "resolve_grid", "select_and_fit",
    "svr_fit", "svr_predict",
]
