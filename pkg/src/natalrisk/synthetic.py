"""Seeded synthetic cohort generation with planted correlations.

The real cohort is private, so tests and demos run on generated data whose
dependency structure is known by construction: every variable is drawn from
its marginal prevalence unless a planted rule conditions it on previously
drawn variables.  Identical (spec, n) always produce byte-identical datasets.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field

from .dataset import PROV_SYNTHETIC, Dataset, PatientRecord
from .errors import InvalidSpec
from .schema import ABSENT, KIND_BINARY, PRESENT, RiskFactorSchema, builtin_schema


@dataclass(frozen=True)
class PlantedRule:
    """condition (conjunction over already-drawn variables) -> P(target value).

    ``target`` defaults to the CorrelationSpec's class target; rules may
    also target other variables, which is how inter-factor dependencies
    are planted.
    For binary targets ``prob`` is P(present); for ordinal targets use
    ``dist`` (bin label -> probability summing to 1).
    """

    when: dict  # variable name -> required value
    prob: float | None = None
    target: str | None = None
    dist: dict | None = None  # ordinal targets only

    def matches(self, drawn: dict) -> bool:
        return all(drawn.get(k) == v for k, v in self.when.items())


@dataclass(frozen=True)
class CorrelationSpec:
    """Generation plan: class target, base rate, marginals, planted rules.

    When several rules for the same target match a record, the first one in
    ``planted_rules`` order wins.  Variables without a marginal or rule are
    drawn at probability 0 (binary) or their middle bin (ordinal).
    """

    class_target: str
    base_rate: float = 0.0
    marginals: dict = field(default_factory=dict)  # name -> float | {bin: prob}
    planted_rules: tuple[PlantedRule, ...] = ()
    seed: int = 0

    def rule_target(self, rule: PlantedRule) -> str:
        return rule.target if rule.target is not None else self.class_target


def _check_prob(p, what: str) -> float:
    if not isinstance(p, (int, float)) or not (0.0 <= float(p) <= 1.0):
        raise InvalidSpec(f"{what} must be a probability in [0,1], got {p!r}")
    return float(p)


def _validate(spec: CorrelationSpec, schema: RiskFactorSchema) -> None:
    if spec.class_target not in schema:
        raise InvalidSpec(f"unknown class target: {spec.class_target}")
    _check_prob(spec.base_rate, "base_rate")
    for name, m in spec.marginals.items():
        if name not in schema:
            raise InvalidSpec(f"unknown name in marginals: {name}")
        d = schema.definition(name)
        if d.kind == KIND_BINARY:
            _check_prob(m, f"marginal({name})")
        else:
            if not isinstance(m, dict) or set(m) - set(d.bins):
                raise InvalidSpec(f"marginal({name}) must map bins of {name}")
            total = sum(_check_prob(v, f"marginal({name})[{k}]") for k, v in m.items())
            if abs(total - 1.0) > 1e-9:
                raise InvalidSpec(f"marginal({name}) must sum to 1, got {total}")
    for rule in spec.planted_rules:
        target = spec.rule_target(rule)
        if target not in schema:
            raise InvalidSpec(f"unknown rule target: {target}")
        tdef = schema.definition(target)
        if tdef.kind == KIND_BINARY:
            if rule.prob is None:
                raise InvalidSpec(f"rule for binary target {target} needs prob")
            _check_prob(rule.prob, f"rule prob for {target}")
        else:
            if rule.dist is None:
                raise InvalidSpec(f"rule for ordinal target {target} needs dist")
        for name, value in rule.when.items():
            if name not in schema:
                raise InvalidSpec(f"unknown name in rule condition: {name}")
            if value not in schema.values_of(name):
                raise InvalidSpec(f"bad value {value!r} for {name} in rule condition")
            if name == target:
                raise InvalidSpec(f"rule target {target} cannot condition on itself")


def _draw_order(spec: CorrelationSpec, schema: RiskFactorSchema) -> list[str]:
    """Canonical order, with rule targets deferred until their conditions are drawn."""
    deps: dict[str, set[str]] = {name: set() for name in schema.all_names}
    for rule in spec.planted_rules:
        deps[spec.rule_target(rule)].update(rule.when.keys())
    order: list[str] = []
    placed: set[str] = set()
    pending = list(schema.all_names)
    while pending:
        progressed = False
        remaining = []
        for name in pending:
            if deps[name] <= placed:
                order.append(name)
                placed.add(name)
                progressed = True
            else:
                remaining.append(name)
        if not progressed:
            raise InvalidSpec(f"cyclic planted-rule dependencies among: {remaining}")
        pending = remaining
    return order


def _draw_value(schema, spec, name, drawn, rng):
    d = schema.definition(name)
    rule = next((r for r in spec.planted_rules
                 if spec.rule_target(r) == name and r.matches(drawn)), None)
    if d.kind == KIND_BINARY:
        if rule is not None:
            p = rule.prob
        elif name == spec.class_target:
            p = spec.base_rate
        else:
            p = spec.marginals.get(name, 0.0)
        return PRESENT if rng.random() < p else ABSENT
    # ordinal: cumulative draw over the bin distribution
    dist = rule.dist if rule is not None else spec.marginals.get(name)
    if dist is None:
        return d.bins[len(d.bins) // 2]  # deterministic modal default
    u = rng.random()
    acc = 0.0
    for b in d.bins:
        acc += dist.get(b, 0.0)
        if u < acc:
            return b
    return d.bins[-1]


def generate_synthetic(spec: CorrelationSpec, n: int,
                       schema: RiskFactorSchema | None = None) -> Dataset:
    """Generate ``n`` records; deterministic for a given (spec, n)."""
    if n < 1:
        raise InvalidSpec(f"n must be >= 1, got {n}")
    schema = schema or builtin_schema()
    _validate(spec, schema)
    order = _draw_order(spec, schema)
    rng = random.Random(spec.seed)
    records = []
    for _ in range(n):
        drawn: dict = {}
        for name in order:
            drawn[name] = _draw_value(schema, spec, name, drawn, rng)
        records.append(PatientRecord(
            values={k: drawn[k] for k in schema.factor_names},
            outcomes={k: drawn[k] for k in schema.outcome_names},
            provenance=PROV_SYNTHETIC,
        ))
    return Dataset(schema=schema, records=tuple(records))


def spec_from_json(text: str) -> CorrelationSpec:
    """Load a generation plan from its JSON document form."""
    doc = json.loads(text)
    rules = tuple(
        PlantedRule(when=r["when"], prob=r.get("prob"),
                    target=r.get("target"), dist=r.get("dist"))
        for r in doc.get("planted_rules", ())
    )
    return CorrelationSpec(
        class_target=doc["class_target"],
        base_rate=doc.get("base_rate", 0.0),
        marginals=doc.get("marginals", {}),
        planted_rules=rules,
        seed=int(doc.get("seed", 0)),
    )


def demo_cohort_spec(seed: int = 7) -> CorrelationSpec:
    """Cohort with known signal: ventilation deterministically forces a low
    APGAR, twin pregnancy drives prematurity, plus weak noise factors."""
    return CorrelationSpec(
        class_target="apgar1_leq7",
        base_rate=0.01,
        marginals={
            "ventilated_at_birth": 0.2,
            "twins": 0.2,
            "eg_lt37": 0.05,
            "eg_lt39": 0.15,
            "hypertension": 0.25,
            "bmi_gt25": 0.3,
            "age_gt35": 0.3,
            "meconium_fluid": 0.15,
            "urgent_caesarean": 0.2,
            "gestational_diabetes": 0.1,
            "birth_weight": {"lt2500": 0.1, "2500to4000": 0.8, "gt4000": 0.1},
        },
        planted_rules=(
            PlantedRule(when={"ventilated_at_birth": PRESENT}, prob=1.0),
            PlantedRule(when={"hypertension": PRESENT}, prob=0.06),
            PlantedRule(when={"eg_lt39": PRESENT}, prob=0.05),
            PlantedRule(target="eg_lt37", when={"twins": PRESENT}, prob=0.9),
            # keep gestational-age flags coherent: <37 weeks implies <39
            PlantedRule(target="eg_lt39", when={"eg_lt37": PRESENT}, prob=1.0),
        ),
        seed=seed,
    )
