import math
import random

import pytest

from natalrisk.bayesnet import (
    BayesNetModel,
    Cpt,
    Dag,
    StructureParams,
    bn_from_json,
    bn_to_json,
    eliminate,
    export_bn_dot,
    fit_cpts,
    learn_structure,
    markov_blanket,
    predict_bn,
    score_network,
)
from natalrisk.errors import (
    BadModelFile,
    BadValue,
    CyclicGraph,
    EmptyView,
    QueryInEvidence,
    UnknownVariable,
    VariableMismatch,
)

from conftest import enumerate_posterior, random_binary_bn, view_of

TARGET = "apgar1_leq7"


# --- graph -------------------------------------------------------------------

def test_dag_parent_child_order_follows_variables():
    dag = Dag(variables=("c", "a", "b"), edges=(("b", "c"), ("a", "c"), ("a", "b")))
    assert dag.parents_of("c") == ("a", "b")
    assert dag.children_of("a") == ("c", "b")
    assert dag.parents_of("a") == ()


def test_dag_rejects_bad_edges():
    with pytest.raises(UnknownVariable):
        Dag(variables=("a",), edges=(("a", "b"),))
    with pytest.raises(UnknownVariable):
        Dag(variables=("a",), edges=(("b", "a"),))
    with pytest.raises(CyclicGraph):
        Dag(variables=("a",), edges=(("a", "a"),))
    with pytest.raises(ValueError):
        Dag(variables=("a", "b"), edges=(("a", "b"), ("a", "b")))


def test_dag_rejects_cycles_but_allows_diamonds():
    with pytest.raises(CyclicGraph):
        Dag(variables=("a", "b", "c"), edges=(("a", "b"), ("b", "c"), ("c", "a")))
    Dag(variables=("a", "b", "c", "d"),
        edges=(("a", "b"), ("a", "c"), ("b", "d"), ("c", "d")))


# --- scores ------------------------------------------------------------------

def dependent_rows():
    """8 records: twins present -> apgar mostly present, absent -> absent."""
    rows = [{"twins": "present", TARGET: "present"}] * 3
    rows += [{"twins": "present", TARGET: "absent"}]
    rows += [{"twins": "absent", TARGET: "absent"}] * 4
    return rows


def bic_oracle(buckets, r, q):
    n_total = sum(sum(b) for b in buckets)
    ll = sum(n * math.log(n / sum(b)) for b in buckets for n in b if n)
    return ll - 0.5 * (r - 1) * q * math.log(n_total)


def bdeu_oracle(buckets, r, q, ess):
    s = 0.0
    for b in buckets:
        s += math.lgamma(ess / q) - math.lgamma(ess / q + sum(b))
        s += sum(math.lgamma(ess / (q * r) + n) - math.lgamma(ess / (q * r)) for n in b)
    return s


def test_bic_score_matches_hand_computation():
    v = view_of(dependent_rows(), TARGET, ["twins"])
    variables = ("twins", TARGET)
    empty = Dag(variables=variables, edges=())
    linked = Dag(variables=variables, edges=(("twins", TARGET),))
    # marginals: twins 4/4, apgar 5 absent / 3 present; families under the
    # edge: twins=absent -> (4,0), twins=present -> (1,3)
    want_empty = bic_oracle([[4, 4]], 2, 1) + bic_oracle([[5, 3]], 2, 1)
    want_linked = bic_oracle([[4, 4]], 2, 1) + bic_oracle([[4, 0], [1, 3]], 2, 2)
    assert score_network(empty, v) == pytest.approx(want_empty, abs=1e-12)
    assert score_network(linked, v) == pytest.approx(want_linked, abs=1e-12)
    assert want_linked > want_empty


def test_bdeu_score_matches_hand_computation():
    v = view_of(dependent_rows(), TARGET, ["twins"])
    params = StructureParams(score="bdeu", equivalent_sample_size=4.0)
    linked = Dag(variables=("twins", TARGET), edges=(("twins", TARGET),))
    want = (bdeu_oracle([[4, 4]], 2, 1, 4.0)
            + bdeu_oracle([[4, 0], [1, 3]], 2, 2, 4.0))
    assert score_network(linked, v, params) == pytest.approx(want, abs=1e-12)


def test_score_ignores_family_incomplete_records():
    rows = dependent_rows() + [{TARGET: "present"}]  # twins missing
    v = view_of(rows, TARGET, ["twins"])
    linked = Dag(variables=("twins", TARGET), edges=(("twins", TARGET),))
    # apgar family drops the incomplete record; twins marginal does too
    want = bic_oracle([[4, 4]], 2, 1) + bic_oracle([[4, 0], [1, 3]], 2, 2)
    assert score_network(linked, v) == pytest.approx(want, abs=1e-12)


def test_unobserved_parent_configs_add_nothing():
    rows = [{"birth_weight": "lt2500", TARGET: "present"}] * 3
    rows += [{"birth_weight": "2500to4000", TARGET: "absent"}] * 3
    v = view_of(rows, TARGET, ["birth_weight"])
    linked = Dag(variables=("birth_weight", TARGET),
                 edges=(("birth_weight", TARGET),))
    # gt4000 never occurs; with full-q penalties the score still charges q=3
    want = (bic_oracle([[3, 3, 0]], 3, 1)
            + bic_oracle([[0, 3], [3, 0]], 2, 3))
    assert score_network(linked, v) == pytest.approx(want, abs=1e-12)


def test_score_network_requires_matching_variables():
    v = view_of(dependent_rows(), TARGET, ["twins"])
    with pytest.raises(VariableMismatch):
        score_network(Dag(variables=("twins",), edges=()), v)


@pytest.mark.parametrize("kwargs", [
    {"max_parents": 0}, {"score": "aic"}, {"equivalent_sample_size": 0.0},
    {"restarts": -1}, {"smoothing_alpha": 0.0},
])
def test_bad_structure_params_rejected(kwargs):
    with pytest.raises(ValueError):
        StructureParams(**kwargs)


# --- structure search --------------------------------------------------------

def correlated_rows(n=400, seed=3):
    rng = random.Random(seed)
    rows = []
    for _ in range(n):
        twins = "present" if rng.random() < 0.4 else "absent"
        p = 0.9 if twins == "present" else 0.05
        eg = "present" if rng.random() < p else "absent"
        rows.append({"twins": twins, "eg_lt37": eg, TARGET: "absent"})
    rows[0][TARGET] = "present"  # keep the target non-degenerate
    return rows


def test_learn_structure_finds_strong_dependency():
    v = view_of(correlated_rows(), "eg_lt37", ["twins", TARGET])
    dag = learn_structure(v)
    adjacent = {frozenset(e) for e in dag.edges}
    assert frozenset(("twins", "eg_lt37")) in adjacent


def test_learn_structure_leaves_independent_variables_apart():
    rows = []
    for twins in ("absent", "present"):
        for apgar in ("absent", "present"):
            rows += [{"twins": twins, TARGET: apgar}] * 25
    dag = learn_structure(view_of(rows, TARGET, ["twins"]))
    assert dag.edges == ()


def test_fully_missing_predictor_never_becomes_a_parent():
    # a column with no observations empties every family it joins; that must
    # not read as a score improvement
    rows = [{"hypertension": "present", TARGET: "present"}] * 6
    rows += [{"hypertension": "absent", TARGET: "absent"}] * 9
    v = view_of(rows, TARGET, ["hypertension", "twins"])
    dag = learn_structure(v)
    for p, c in dag.edges:
        assert "twins" not in (p, c)
    adjacent = {frozenset(e) for e in dag.edges}
    assert frozenset(("hypertension", TARGET)) in adjacent
    linked = Dag(variables=("hypertension", "twins", TARGET),
                 edges=(("twins", TARGET),))
    assert score_network(linked, v) == float("-inf")


def test_learn_structure_respects_max_parents():
    v = view_of(correlated_rows(), "eg_lt37", ["twins", "hypertension", TARGET])
    dag = learn_structure(v, StructureParams(max_parents=1))
    for var in dag.variables:
        assert len(dag.parents_of(var)) <= 1


def test_learn_structure_is_deterministic():
    v = view_of(correlated_rows(), "eg_lt37", ["twins", TARGET])
    a = learn_structure(v, StructureParams(restarts=3, seed=11))
    b = learn_structure(v, StructureParams(restarts=3, seed=11))
    assert a == b


def test_restarts_never_lower_the_score():
    v = view_of(correlated_rows(), "eg_lt37", ["twins", "hypertension", TARGET])
    plain = learn_structure(v)
    restarted = learn_structure(v, StructureParams(restarts=5, seed=2))
    assert score_network(restarted, v) >= score_network(plain, v) - 1e-9


def test_learn_structure_rejects_empty_view():
    v = view_of(dependent_rows(), TARGET, ["twins"])
    with pytest.raises(EmptyView):
        learn_structure(v.with_records(()))


def test_learned_variables_are_canonical_order(schema):
    v = view_of(correlated_rows(), "eg_lt37", ["twins", TARGET])
    dag = learn_structure(v)
    assert dag.variables == ("eg_lt37", "twins", TARGET)


# --- parameter fitting -------------------------------------------------------

def test_fit_cpts_add_one_smoothing():
    v = view_of(dependent_rows(), TARGET, ["twins"])
    dag = Dag(variables=("twins", TARGET), edges=(("twins", TARGET),))
    model = fit_cpts(dag, v)
    assert model.class_var == TARGET
    assert model.trained_on == 8
    assert model.cpts["twins"].rows == ((0.5, 0.5),)
    apgar = model.cpts[TARGET]
    assert apgar.parents == ("twins",)
    assert apgar.rows[0] == pytest.approx((5 / 6, 1 / 6))  # twins=absent: (4,0)
    assert apgar.rows[1] == pytest.approx((2 / 6, 4 / 6))  # twins=present: (1,3)


def test_fit_cpts_unseen_config_is_uniform():
    rows = [{"birth_weight": "lt2500", TARGET: "present"}] * 2
    rows += [{"birth_weight": "2500to4000", TARGET: "absent"}] * 2
    v = view_of(rows, TARGET, ["birth_weight"])
    dag = Dag(variables=("birth_weight", TARGET), edges=(("birth_weight", TARGET),))
    model = fit_cpts(dag, v)
    assert model.cpts[TARGET].rows[2] == (0.5, 0.5)  # gt4000 never observed


def test_fit_cpts_drops_family_incomplete_records_only():
    rows = dependent_rows() + [{"twins": "present"}] * 4  # target missing
    v = view_of(rows, "twins", [TARGET])
    dag = Dag(variables=("twins", TARGET), edges=((TARGET, "twins"),))
    model = fit_cpts(dag, v)
    # twins marginal would see 12 records, but twins|apgar only the 8 complete
    assert model.cpts["twins"].parents == (TARGET,)
    assert model.cpts["twins"].rows[0] == pytest.approx((5 / 7, 2 / 7))  # (4,1)
    assert model.cpts["twins"].rows[1] == pytest.approx((1 / 5, 4 / 5))  # (0,3)


def test_fit_cpts_validation():
    v = view_of(dependent_rows(), TARGET, ["twins"])
    dag = Dag(variables=("twins", TARGET), edges=())
    with pytest.raises(ValueError):
        fit_cpts(dag, v, smoothing_alpha=0.0)
    with pytest.raises(VariableMismatch):
        fit_cpts(Dag(variables=("twins",), edges=()), v)


# --- inference ---------------------------------------------------------------

def chain_model():
    """a -> b -> c with hand-picked CPTs over absent/present."""
    dag = Dag(variables=("a", "b", "c"), edges=(("a", "b"), ("b", "c")))
    domains = {v: ("absent", "present") for v in ("a", "b", "c")}
    cpts = {
        "a": Cpt(var="a", parents=(), rows=((0.6, 0.4),)),
        "b": Cpt(var="b", parents=("a",), rows=((0.9, 0.1), (0.3, 0.7))),
        "c": Cpt(var="c", parents=("b",), rows=((0.8, 0.2), (0.25, 0.75))),
    }
    return BayesNetModel(dag=dag, domains=domains, cpts=cpts, class_var="c",
                         smoothing_alpha=1.0, trained_on=0)


def test_eliminate_matches_hand_numbers():
    model = chain_model()
    prior_b = eliminate(model, "b", {})
    # P(b=present) = .6*.1 + .4*.7 = .34
    assert prior_b["present"] == pytest.approx(0.34, abs=1e-12)
    posterior = eliminate(model, "a", {"c": "present"})
    # P(a, c=present) marginalizes b: present .4*(.7*.75+.3*.2) = .234
    #                                 absent  .6*(.1*.75+.9*.2) = .153
    assert posterior["present"] == pytest.approx(0.234 / 0.387, abs=1e-12)


def test_eliminate_matches_enumeration_on_chain():
    model = chain_model()
    for query in ("a", "b", "c"):
        for evidence in ({}, {"a": "present"}, {"c": "absent"},
                         {"a": "absent", "c": "present"}):
            if query in evidence:
                continue
            got = eliminate(model, query, evidence)
            want = enumerate_posterior(model, query, evidence)
            for value in got:
                assert got[value] == pytest.approx(want[value], abs=1e-12)


def test_eliminate_matches_enumeration_on_random_networks():
    rng = random.Random(99)
    for _ in range(20):
        model = random_binary_bn(rng, rng.randint(2, 8))
        names = model.dag.variables
        query = names[rng.randrange(len(names))]
        others = [v for v in names if v != query]
        evidence = {v: rng.choice(("absent", "present"))
                    for v in rng.sample(others, rng.randint(0, len(others)))}
        got = eliminate(model, query, evidence)
        want = enumerate_posterior(model, query, evidence)
        assert sum(got.values()) == pytest.approx(1.0, abs=1e-12)
        for value in got:
            assert got[value] == pytest.approx(want[value], abs=1e-9)


def test_eliminate_input_errors():
    model = chain_model()
    with pytest.raises(UnknownVariable):
        eliminate(model, "z", {})
    with pytest.raises(UnknownVariable):
        eliminate(model, "a", {"z": "present"})
    with pytest.raises(QueryInEvidence):
        eliminate(model, "a", {"a": "present"})
    with pytest.raises(BadValue):
        eliminate(model, "a", {"b": "sideways"})


# --- blanket and prediction --------------------------------------------------

def collider_model():
    """a -> c <- b, c -> d."""
    dag = Dag(variables=("a", "b", "c", "d"),
              edges=(("a", "c"), ("b", "c"), ("c", "d")))
    domains = {v: ("absent", "present") for v in dag.variables}
    cpts = {
        "a": Cpt(var="a", parents=(), rows=((0.5, 0.5),)),
        "b": Cpt(var="b", parents=(), rows=((0.7, 0.3),)),
        "c": Cpt(var="c", parents=("a", "b"),
                 rows=((0.9, 0.1), (0.5, 0.5), (0.4, 0.6), (0.05, 0.95))),
        "d": Cpt(var="d", parents=("c",), rows=((0.8, 0.2), (0.1, 0.9))),
    }
    return BayesNetModel(dag=dag, domains=domains, cpts=cpts, class_var="c",
                         smoothing_alpha=1.0, trained_on=0)


def test_markov_blanket():
    model = collider_model()
    assert markov_blanket(model, "c") == {"a", "b", "d"}
    assert markov_blanket(model, "a") == {"b", "c"}
    assert markov_blanket(model, "d") == {"c"}
    with pytest.raises(UnknownVariable):
        markov_blanket(model, "z")


def test_predict_bn_argmax_and_influence():
    model = collider_model()
    result = predict_bn(model, {"a": "present", "b": "present"})
    assert result.predicted == "present"
    assert result.distribution["present"] == pytest.approx(0.95, abs=1e-12)
    assert result.influence == ("a", "b")


def test_predict_bn_influence_only_includes_blanket():
    model = chain_model()  # class is c; blanket(c) = {b}
    result = predict_bn(model, {"a": "present", "b": "absent"})
    assert result.influence == ("b",)


def test_predict_bn_rejects_class_evidence():
    with pytest.raises(QueryInEvidence):
        predict_bn(chain_model(), {"c": "present"})


def test_predict_bn_tie_takes_lower_value_index():
    dag = Dag(variables=("a",), edges=())
    model = BayesNetModel(dag=dag, domains={"a": ("absent", "present")},
                          cpts={"a": Cpt(var="a", parents=(), rows=((0.5, 0.5),))},
                          class_var="a", smoothing_alpha=1.0, trained_on=0)
    assert predict_bn(model, {}).predicted == "absent"


# --- export and serialization ------------------------------------------------

def test_dot_export_marks_class_and_sorts_edges():
    dot = export_bn_dot(collider_model())
    assert dot.startswith("digraph bayes_net {")
    assert '"c" [shape=ellipse, style=filled, fillcolor=lightgrey];' in dot
    assert dot.index('"a" -> "c";') < dot.index('"b" -> "c";') < dot.index('"c" -> "d";')
    assert dot.endswith("}\n")


def test_bn_json_round_trip():
    model = collider_model()
    text = bn_to_json(model)
    clone = bn_from_json(text)
    assert clone == model
    assert bn_to_json(clone) == text


def test_bn_json_round_trip_of_learned_model():
    v = view_of(correlated_rows(), "eg_lt37", ["twins", TARGET])
    model = fit_cpts(learn_structure(v), v)
    assert bn_from_json(bn_to_json(model)) == model


@pytest.mark.parametrize("mangle", [
    lambda t: "{ not json",
    lambda t: t.replace('"bayes_net"', '"decision_tree"'),
    lambda t: t.replace('"format_version": 1', '"format_version": 0'),
    lambda t: t.replace('"rows": [', '"rows": [[0.5, 0.5],', 1),
    lambda t: "17",
])
def test_malformed_network_files_rejected(mangle):
    text = bn_to_json(chain_model())
    with pytest.raises(BadModelFile):
        bn_from_json(mangle(text))
