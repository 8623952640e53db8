from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datl_gdp.data_ingest import Dataset, to_training_dataset
from datl_gdp.errors import EmptyDatasetError, InfeasibleFractionError, ValidationError
from datl_gdp.metrics import rmse
from datl_gdp.regressors import RegressorSpec
from datl_gdp.synthetic import (
    SYNTHETIC_CODES,
    make_missing_country,
    make_shift_corpus,
    make_transfer_corpus,
    marginal_shift,
)
from datl_gdp.transfer import (
    STUDY_FRACTIONS,
    EvalReport,
    RunFailure,
    TransferConfig,
    construct_mixed_domain,
    datl_run,
    estimate_missing,
    fraction_label,
    pairwise_matrix,
    parse_fraction,
    round_half_up,
    td_sweep,
    validation_split,
)

GRNN = RegressorSpec("grnn")
FIXED_GRNN = RegressorSpec("grnn", sigmas=(0.3,))


def target_of(n, code="TGT", first=1960):
    rng = np.random.default_rng(n)
    return Dataset(np.arange(first, first + n), rng.normal(size=(n, 4)), rng.uniform(1, 2, n), (code,) * n)


def cfg(f, **kw):
    return TransferConfig("SRC", "TGT", GRNN, f, **kw)


def test_fraction_parsing():
    assert parse_fraction("1/18") == Fraction(1, 18)
    assert parse_fraction(" 0 ") == 0
    with pytest.raises(ValidationError):
        parse_fraction(0.5)
    with pytest.raises(ValidationError):
        parse_fraction("one third")
    assert fraction_label(0) == "No_TD" and fraction_label(Fraction(1, 2)) == "1/2*TD"
    assert round_half_up(Fraction(5, 2)) == 3 and round_half_up(Fraction(3, 2)) == 2


def test_config_fraction_bounds():
    with pytest.raises(ValidationError):
        cfg("2/3")
    assert cfg("2/3", allow_any_fraction=True).td_fraction == Fraction(2, 3)
    with pytest.raises(ValidationError):
        cfg("1/3", mixing_policy="latest")


@pytest.mark.parametrize("f,k", [("0", 0), ("1/18", 3), ("1/9", 6), ("1/6", 9), ("1/3", 18), ("1/2", 27)])
def test_mixed_domain_sizes_on_54_rows(f, k):
    src, tgt = target_of(30, "SRC"), target_of(54)
    m = construct_mixed_domain(src, tgt, cfg(f))
    assert len(m.mixed_target_years) == k and m.data.n == 30 + k
    assert m.mixed_target_years == tuple(range(1960, 1960 + k))


def test_zero_fraction_is_source_only():
    src = target_of(10, "SRC")
    assert construct_mixed_domain(src, target_of(54), cfg("0")).data == src


def test_seeded_random_policy():
    src, tgt = target_of(10, "SRC"), target_of(54)
    a = construct_mixed_domain(src, tgt, cfg("1/3", mixing_policy="seeded_random", seed=7))
    b = construct_mixed_domain(src, tgt, cfg("1/3", mixing_policy="seeded_random", seed=7))
    c = construct_mixed_domain(src, tgt, cfg("1/3", mixing_policy="seeded_random", seed=8))
    assert a.mixed_target_years == b.mixed_target_years != c.mixed_target_years
    assert len(set(a.mixed_target_years)) == 18


def test_infeasible_and_empty_domains():
    over = cfg("1/2")
    object.__setattr__(over, "td_fraction", Fraction(2))  # bypasses the config bound on purpose
    with pytest.raises(InfeasibleFractionError):
        construct_mixed_domain(target_of(5, "SRC"), target_of(3), over)
    with pytest.raises(EmptyDatasetError):
        construct_mixed_domain(target_of(0, "SRC"), target_of(5), cfg("1/3"))
    with pytest.raises(EmptyDatasetError):
        construct_mixed_domain(target_of(5, "SRC"), target_of(0), cfg("1/3"))
    with pytest.raises(EmptyDatasetError):
        datl_run(target_of(5, "SRC"), target_of(0), cfg("0"))


@settings(max_examples=80, deadline=None)
@given(st.integers(1, 40), st.integers(0, 120), st.integers(0, 60).flatmap(
    lambda d: st.integers(0, d).map(lambda n: Fraction(n, max(d, 1)))),
    st.sampled_from(["earliest_years", "seeded_random"]))
def test_mixed_domain_cardinality(n_src, n_tgt, f, policy):
    f = min(f, Fraction(1, 2))
    if n_tgt == 0 and f != 0:
        return
    src, tgt = target_of(n_src, "SRC"), target_of(n_tgt)
    m = construct_mixed_domain(src, tgt, cfg(f, mixing_policy=policy))
    k = round_half_up(f * n_tgt)
    assert m.data.n == n_src + k and len(m.mixed_target_years) == k
    assert m.data.origin_tags.count("SRC") == n_src
    assert np.array_equal(m.data.features[:n_src], src.features)
    if policy == "earliest_years":
        assert list(m.mixed_target_years) == tgt.years[:k].tolist()


def test_degenerate_self_transfer_is_near_exact():
    d = target_of(20)
    r = datl_run(d, d, TransferConfig("A", "A", RegressorSpec("grnn", sigmas=(1e-3,)), Fraction(0)))
    assert r.rmse < 1e-6 * d.labels.mean()


def test_report_fields_and_determinism():
    corpus = make_transfer_corpus(0)
    c = TransferConfig("XAA", "XBB", RegressorSpec("svr"), Fraction(1, 3))
    a, b = datl_run(corpus["XAA"], corpus["XBB"], c), datl_run(corpus["XAA"], corpus["XBB"], c)
    assert a.to_dict() == b.to_dict()
    assert len(a.per_year) == 54 and a.r2 <= 1 and a.n_train == 54 + 18
    years, actual, pred = map(np.array, zip(*a.per_year))
    assert abs(rmse(actual, pred) - a.rmse) <= 1e-9 * a.rmse
    held = ~np.isin(years, a.mixed_target_years)
    assert a.heldout_rmse == pytest.approx(rmse(actual[held], pred[held]), rel=1e-12)
    assert EvalReport.from_dict(a.to_dict()) == a


def test_pairwise_matrix_shapes():
    corpus = make_transfer_corpus(0)
    reports = pairwise_matrix(corpus, SYNTHETIC_CODES, [FIXED_GRNN, RegressorSpec("elm", Cs=(10.0,), gammas=(0.25,))])
    assert len(reports) == 24
    assert [(r.config.source_code, r.config.target_code) for r in reports[:4]] == \
        [("XAA", "XBB"), ("XAA", "XBB"), ("XAA", "XCC"), ("XAA", "XCC")]
    assert len(pairwise_matrix(corpus, ["XAA", "XBB"], [FIXED_GRNN])) == 2
    with pytest.raises(ValidationError):
        pairwise_matrix(corpus, ["XAA", "XAA"], [FIXED_GRNN])
    with pytest.raises(ValidationError):
        pairwise_matrix(corpus, ["XAA"], [FIXED_GRNN])


def test_failures_recorded_in_place():
    corpus = make_transfer_corpus(0)
    # rank-4 linear kernel with a negligible ridge: the Cholesky solve fails
    bad = RegressorSpec("elm", Cs=(1e300,), gammas=(1.0,), kernel="linear")
    reports = pairwise_matrix(corpus, ["XAA", "XBB"], [FIXED_GRNN, bad])
    assert isinstance(reports[0], EvalReport) and isinstance(reports[1], RunFailure)
    assert reports[1].numeric and reports[1].error_type == "NumericFailureError"


def test_parallel_matches_serial():
    corpus = make_transfer_corpus(1)
    a = pairwise_matrix(corpus, SYNTHETIC_CODES[:3], [FIXED_GRNN], jobs=1)
    b = pairwise_matrix(corpus, SYNTHETIC_CODES[:3], [FIXED_GRNN], jobs=3)
    assert [r.to_dict() for r in a] == [r.to_dict() for r in b]


def test_synthetic_corpus_has_covariate_shift():
    corpus = make_transfer_corpus(3)
    for a in SYNTHETIC_CODES:
        for b in SYNTHETIC_CODES:
            if a != b:
                assert np.all(marginal_shift(corpus[a], corpus[b]) >= 1.0)


def test_sweep_table_shape_and_improvements():
    corpus = make_transfer_corpus(0)
    t = td_sweep(corpus, SYNTHETIC_CODES, [FIXED_GRNN])
    assert t.fractions == STUDY_FRACTIONS and len(t.mean_rmse["grnn"]) == 6
    assert t.improvements["grnn"][Fraction(0)] == 0
    base = t.mean_rmse["grnn"][Fraction(0)]
    half = t.mean_rmse["grnn"][Fraction(1, 2)]
    assert t.improvements["grnn"][Fraction(1, 2)] == pytest.approx(100 * (base - half) / base)
    assert not td_sweep(corpus, SYNTHETIC_CODES[:2], [FIXED_GRNN], fractions=["1/3"]).improvements


@pytest.mark.parametrize("seed", range(3))
def test_constant_shift_corpus_grnn_rmse_non_increasing(seed):
    corpus = make_shift_corpus(seed)
    t = td_sweep(corpus, SYNTHETIC_CODES, [FIXED_GRNN])
    curve = [t.mean_rmse["grnn"][f] for f in t.fractions]
    assert all(a >= b for a, b in zip(curve, curve[1:])), curve


def test_validation_split():
    rest, val = validation_split(30, seed=1)
    assert len(val) == 10 and len(rest) == 20 and not set(rest) & set(val)
    assert np.array_equal(validation_split(30, 1)[1], val)
    assert validation_split(30, 1, "chronological")[1].tolist() == list(range(20, 30))
    with pytest.raises(ValidationError):
        validation_split(30, 1, "bogus")


def sources():
    corpus = make_transfer_corpus(0)
    return {k: corpus[k] for k in ("XAA", "XBB")}


SPECS = [FIXED_GRNN, RegressorSpec("elm", Cs=(100.0,), gammas=(0.25,))]


def test_estimate_missing_two_windows():
    country = make_missing_country("ZZI", seed=5, windows=((1965, 1967), (1991, 2003)))
    r = estimate_missing(country, sources(), SPECS, seed=42)
    assert r.missing_windows == ((1965, 1967), (1991, 2003))
    assert [y for y, _ in r.estimates] == [1965, 1966, 1967] + list(range(1991, 2004))
    assert len(r.candidates) == 4
    assert [(c.regressor, c.source) for c in r.candidates] == \
        [("grnn", "XAA"), ("grnn", "XBB"), ("elm", "XAA"), ("elm", "XBB")]
    scored = [c.rmse for c in r.candidates if c.rmse is not None]
    assert r.selected_candidate.rmse == min(scored)
    assert len(r.validation_years) == round_half_up(Fraction(len(to_training_dataset(country)), 3))


def test_estimate_missing_nothing_to_do():
    country = make_missing_country("ZZN", seed=1, windows=())
    r = estimate_missing(country, sources(), SPECS)
    assert r.nothing_to_do and r.estimates == () and r.selected is None


def test_estimate_missing_preconditions():
    few = make_missing_country("ZZF", seed=2, windows=((1960, 2009),))
    with pytest.raises(ValidationError):
        estimate_missing(few, sources(), SPECS)
    ok = make_missing_country("ZZG", seed=2)
    with pytest.raises(ValidationError):
        estimate_missing(ok, {}, SPECS)


def test_estimate_missing_is_deterministic():
    country = make_missing_country("ZZD", seed=9)
    a = estimate_missing(country, sources(), SPECS, seed=3)
    b = estimate_missing(country, sources(), SPECS, seed=3, jobs=2)
    assert a.to_dict() == b.to_dict()
