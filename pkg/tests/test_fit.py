import itertools
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import rec
from culturesel.fit import (
    DataStructure,
    ParameterGrid,
    best_fit,
    default_grid,
    extract_data_structures,
    fit_all,
    frange,
    grid_log_likelihood,
)
from culturesel.model import (
    ExposureEvent,
    ModelParams,
    Source,
    UnknownQualityError,
    ZeroProbabilityError,
    build_window,
    choice_distribution,
)
from culturesel.oracles import scalar_log_likelihood, sequence_probability_total
from culturesel.sim import SimConfig, simulate


def ds_of(*records):
    return DataStructure(records[0].society, records[0].concept, tuple(records))


# ---------------------------------------------------------------- extraction


def test_default_log_has_64_structures():
    log, _, _ = simulate(SimConfig())
    structures = extract_data_structures(log)
    assert len(structures) == 64
    assert [(d.society, d.concept) for d in structures] == sorted((d.society, d.concept) for d in structures)


def test_empty_log():
    assert extract_data_structures([]) == []


def test_partition_property():
    log, _, _ = simulate(SimConfig(n_societies=1, n_concepts=3, n_participants=4, games_per_pair=2))
    structures = extract_data_structures(log)
    assert len(structures) == 3
    assert sum(len(d) for d in structures) == len(log)
    # brute force: every record lands in the structure with its own key
    for r in log:
        owners = [d for d in structures if r in d.records]
        assert len(owners) == 1 and (owners[0].society, owners[0].concept) == (r.society, r.concept)


def test_structure_rejects_foreign_records():
    with pytest.raises(ValueError):
        DataStructure("s", "c", (rec(1, "a", "b", "A"), rec(2, "a", "b", "A", concept="z")))
    with pytest.raises(ValueError):
        DataStructure("s", "c", (rec(2, "a", "b", "A"), rec(1, "a", "b", "A")))


# ---------------------------------------------------------------- grid


def test_default_grid():
    g = default_grid()
    points = list(g)
    assert len(g) == len(points) == 484
    assert (2, 0.0, 0.0) in points
    assert {2, 4} <= set(g.memory_sizes)
    assert g.conformity_values == (-1.0, -0.8, -0.6, -0.4, -0.2, 0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
    assert g.content_values == tuple(round(0.1 * i, 10) for i in range(11))
    assert g.innovation == 0.01


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(memory_sizes=(2,), conformity_values=(-1.0, 1.0), content_values=(0.0,)),
        dict(memory_sizes=(2,), conformity_values=(0.0,), content_values=(0.5,)),
        dict(memory_sizes=(4, 2), conformity_values=(0.0,), content_values=(0.0,)),
        dict(memory_sizes=(2,), conformity_values=(0.0, 0.0), content_values=(0.0,)),
        dict(memory_sizes=(0,), conformity_values=(0.0,), content_values=(0.0,)),
    ],
)
def test_grid_invariants(kwargs):
    with pytest.raises(ValueError):
        ParameterGrid(**kwargs)


def test_frange_rejects_uneven_step():
    with pytest.raises(ValueError):
        frange(-1.0, 1.0, 0.3)


# ---------------------------------------------------------------- best_fit


def test_all_equal_table_prefers_simplest():
    table = {p: -3.0 for p in default_grid()}
    params, ll = best_fit(table)
    assert (params.memory_size, params.conformity, params.content, ll) == (2, 0.0, 0.0, -3.0)


def test_unique_maximum():
    table = {p: -3.0 for p in default_grid()}
    table[(8, 0.6, 0.3)] = -1.0
    params, ll = best_fit(table)
    assert (params.memory_size, params.conformity, params.content) == (8, 0.6, 0.3)


def test_two_way_tie_broken_by_content():
    table = {p: -3.0 for p in default_grid()}
    table[(2, -0.2, 0.1)] = -1.0
    table[(2, 0.2, 0.0)] = -1.0
    params, _ = best_fit(table)
    assert (params.conformity, params.content) == (0.2, 0.0)


def test_tie_independent_of_table_order():
    table = {p: -1.0 for p in [(4, -0.2, 0.1), (2, 0.2, 0.1), (2, -0.2, 0.1)]}
    for perm in itertools.permutations(table.items()):
        params, _ = best_fit(dict(perm))
        assert (params.memory_size, params.conformity) == (2, -0.2)


def test_empty_table():
    with pytest.raises(ValueError):
        best_fit({})


# ---------------------------------------------------------------- grid_log_likelihood


def test_unscored_structure():
    fit = grid_log_likelihood(ds_of(rec(1, "a", "b", "A")), default_grid(), {"A": 0.5})
    assert set(fit.table.values()) == {0.0}
    assert fit.n_scored_events == {2: 0, 4: 0, 8: 0, 16: 0}
    assert (fit.best[0].memory_size, fit.best[0].conformity, fit.best[0].content) == (2, 0.0, 0.0)


def test_repeat_sole_self_variant():
    # b directs first (empty window), then repeats its own variant
    ds = ds_of(rec(1, "b", "a", "A"), rec(2, "b", "c", "A"))
    grid = ParameterGrid((2, 4, 8, 16), default_grid().conformity_values, default_grid().content_values, 0.0)
    fit = grid_log_likelihood(ds, grid, {"A": 0.5})
    for m in grid.memory_sizes:
        assert fit.table[(m, 0.0, 0.0)] == 0.0
    assert fit.n_scored_events == {2: 1, 4: 1, 8: 1, 16: 1}


def one_event_structure():
    # p1 sees Self A (order 1), Other B from p3 (order 2), then chooses A
    return ds_of(rec(1, "p1", "p2", "A"), rec(2, "p3", "p1", "B"), rec(3, "p1", "p2", "A"))


def brute_one_event(grid, quality):
    """Closed-form probability of choosing A at every grid point."""
    window = [ExposureEvent(Source.SELF, "A"), ExposureEvent(Source.OTHER, "B")]
    probs = {p: choice_distribution(window, grid.params(p), quality).in_window["A"] for p in grid}
    return {p: math.log(x) if x > 0 else -math.inf for p, x in probs.items()}


def test_one_event_brute_force():
    g = default_grid()
    grid = ParameterGrid(g.memory_sizes, g.conformity_values, g.content_values, 0.0)
    quality = {"A": 0.5, "B": 0.5}
    fit = grid_log_likelihood(one_event_structure(), grid, quality)
    brute = brute_one_event(grid, quality)
    assert fit.table.keys() == brute.keys()
    for p in brute:
        assert fit.table[p] == pytest.approx(brute[p], abs=1e-12)
    alpha_nonzero = [p for p in brute if p[1] != 0.0]
    top = max(alpha_nonzero, key=lambda p: brute[p])
    assert top[1] == -1.0 and brute[top] == 0.0
    assert fit.subfamily_maxima["alpha_nonzero"] == pytest.approx(0.0, abs=1e-15)
    assert fit.subfamily_maxima["alpha0"] == pytest.approx(math.log(0.5))
    # with beta > 0 the quality part pulls P(A) towards 0.5
    assert fit.subfamily_maxima["beta_nonzero"] == pytest.approx(math.log(0.95))


def test_unknown_quality_propagates():
    with pytest.raises(UnknownQualityError):
        grid_log_likelihood(one_event_structure(), default_grid(), {"A": 0.5})
    # content-free grid never needs quality
    grid = ParameterGrid((2,), (0.0,), (0.0,), 0.01)
    grid_log_likelihood(one_event_structure(), grid, {})


def test_zero_probability_propagates():
    ds = ds_of(rec(1, "b", "a", "A"), rec(2, "b", "c", "Z"))
    with pytest.raises(ZeroProbabilityError):
        grid_log_likelihood(ds, ParameterGrid((2,), (0.0,), (0.0,), 0.0), {})


@pytest.fixture(scope="module")
def small_fits():
    cfg = SimConfig(true_params=ModelParams(2, -0.4, 0.5, 0.02), n_societies=2, n_participants=4,
                    n_concepts=3, games_per_pair=3, seed=11)
    log, quality, _ = simulate(cfg)
    structures = extract_data_structures(log)
    grid = ParameterGrid((1, 2, 4), (-1.0, -0.5, 0.0, 0.5, 1.0), (0.0, 0.25, 0.5, 1.0), 0.02)
    return structures, grid, quality, [grid_log_likelihood(ds, grid, quality) for ds in structures]


def test_vectorized_matches_scalar_route(small_fits):
    structures, grid, quality, fits = small_fits
    for ds, fit in zip(structures, fits):
        for p, value in fit.table.items():
            ref = scalar_log_likelihood(ds, grid.params(p), quality)
            assert value == pytest.approx(ref, abs=1e-9) or value == ref == -math.inf


def test_fit_invariants(small_fits):
    _, grid, _, fits = small_fits
    for fit in fits:
        assert fit.best[1] == max(fit.table.values())
        assert all(v <= 0.0 for v in fit.table.values())
        for name, value in fit.subfamily_maxima.items():
            assert fit.subfamily_maxima["all"] >= value
        assert fit.subfamily_maxima["alpha0"] >= fit.subfamily_maxima["drift"]
        assert fit.subfamily_maxima["beta0"] >= fit.subfamily_maxima["drift"]
        assert set(fit.n_scored_events) == set(grid.memory_sizes)


def test_evaluation_order_does_not_matter(small_fits):
    structures, grid, quality, fits = small_fits
    for seed in range(3):
        shuffled = fit_all(structures, grid, quality, shuffle_seed=seed)
        for a, b in zip(fits, shuffled):
            assert a.table == b.table and a.best == b.best and a.subfamily_maxima == b.subfamily_maxima


def test_parallel_matches_serial(small_fits):
    structures, grid, quality, fits = small_fits
    parallel = fit_all(structures, grid, quality, workers=2)
    assert [f.table for f in parallel] == [f.table for f in fits]
    assert [f.best for f in parallel] == [f.best for f in fits]


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.sampled_from([("a", "b"), ("b", "a"), ("a", "c"), ("c", "b")]), min_size=2, max_size=8),
    st.sampled_from([(-1.0, 0.0), (-0.6, 0.3), (0.0, 0.0), (0.7, 1.0), (1.0, 0.5)]),
    st.sampled_from([1, 2, 3]),
)
def test_sequence_enumeration_sums_to_one(roles, point, M):
    total = sequence_probability_total(roles, ModelParams(M, point[0], point[1], 0.1), {"fresh0": 0.5})
    assert total == pytest.approx(1.0, abs=1e-9)


def test_enumeration_is_consistent_with_likelihood():
    """The enumerated outcome total equals the sum of exp(likelihood) over
    every concrete extension of a short role stream."""
    roles = [("a", "b"), ("b", "a"), ("a", "b"), ("b", "a")]
    params = ModelParams(2, 0.4, 0.0, 0.2)
    # enumerate variant labellings: first production invents token t0
    labels = ["t0", "t1", "t2", "t3"]
    total = 0.0
    for seq in itertools.product(labels, repeat=3):
        variants = ["t0", *seq]
        # canonical labelling: a fresh token must be the next unused one
        used, ok = ["t0"], True
        for v in seq:
            if v not in used:
                if v != f"t{len(used)}":
                    ok = False
                used.append(v)
        if not ok:
            continue
        ds = ds_of(*[rec(i + 1, d, m, v) for i, ((d, m), v) in enumerate(zip(roles, variants))])
        # an out-of-window production must be a brand-new token
        prior = set()
        for r in ds.records:
            window = {e.variant for e in build_window(list(ds.records), r.director, "c", r.order, 2)}
            if r.variant in prior and r.variant not in window:
                ok = False
            prior.add(r.variant)
        if not ok:
            continue
        total += math.exp(scalar_log_likelihood(ds, params, {}))
    assert total == pytest.approx(sequence_probability_total(roles, params, {}), abs=1e-12)
    assert total == pytest.approx(1.0, abs=1e-12)
