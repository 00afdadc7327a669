import itertools

import pytest

from natalrisk.bayesnet import BayesNetModel, Cpt, Dag
from natalrisk.dataset import Dataset, feature_view, make_record
from natalrisk.schema import builtin_schema


@pytest.fixture(scope="session")
def schema():
    return builtin_schema()


def dataset_of(rows, provenance="real"):
    """Build a dataset from partial name -> value dicts (rest missing)."""
    s = builtin_schema()
    return Dataset(schema=s, records=tuple(
        make_record(s, row, provenance=provenance) for row in rows))


def view_of(rows, target, predictors):
    return feature_view(dataset_of(rows), target, predictors)


def enumerate_posterior(model, query, evidence):
    """Brute-force P(query | evidence) by summing the full joint.

    Deliberately naive: walks every complete assignment and multiplies CPT
    cells looked up by hand, so it shares no code with the inference engine.
    """
    variables = model.dag.variables
    domains = model.domains
    totals = {v: 0.0 for v in domains[query]}
    for combo in itertools.product(*(range(len(domains[v])) for v in variables)):
        at = dict(zip(variables, combo))
        if any(domains[var][at[var]] != val for var, val in evidence.items()):
            continue
        p = 1.0
        for var in variables:
            cpt = model.cpts[var]
            row = 0
            for parent in cpt.parents:
                row = row * len(domains[parent]) + at[parent]
            p *= cpt.rows[row][at[var]]
        totals[domains[query][at[query]]] += p
    z = sum(totals.values())
    return {val: p / z for val, p in totals.items()}


def random_binary_bn(rng, n_nodes, max_parents=3):
    """A random DAG over binary variables with CPT cells in [0.05, 0.95]."""
    names = tuple(f"v{i:02d}" for i in range(n_nodes))
    edges = []
    for i, child in enumerate(names):
        for parent in rng.sample(names[:i], rng.randint(0, min(max_parents, i))):
            edges.append((parent, child))
    dag = Dag(variables=names, edges=tuple(edges))
    domains = {v: ("absent", "present") for v in names}
    cpts = {}
    for child in names:
        parents = dag.parents_of(child)
        n_rows = 1
        for p in parents:
            n_rows *= 2
        rows = []
        for _ in range(n_rows):
            p1 = rng.uniform(0.05, 0.95)
            rows.append((1.0 - p1, p1))
        cpts[child] = Cpt(var=child, parents=parents, rows=tuple(rows))
    return BayesNetModel(dag=dag, domains=domains, cpts=cpts, class_var=names[0],
                         smoothing_alpha=1.0, trained_on=0)
