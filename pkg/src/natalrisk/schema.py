"""Risk-factor and outcome catalog for the newborn cohort.

The catalog is fixed: 33 collected risk factors (10 maternal antepartum,
12 fetal antepartum, 11 intrapartum), one derived gestational-age flag,
and 8 recorded outcomes.  All variables are categorical; ``birth_weight``
is the single ordinal (binned) factor, everything else is binary with the
value domain ``{absent, present}`` plus first-class missingness.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .errors import BadValue, UnknownName

FORMAT_VERSION = 1

GROUP_MATERNAL = "maternal_antepartum"
GROUP_FETAL = "fetal_antepartum"
GROUP_INTRAPARTUM = "intrapartum"
GROUP_OUTCOME = "outcome"

KIND_BINARY = "binary"
KIND_ORDINAL = "ordinal-binned"

ABSENT = "absent"
PRESENT = "present"
BINARY_VALUES = (ABSENT, PRESENT)

BIRTH_WEIGHT_BINS = ("lt2500", "2500to4000", "gt4000")


@dataclass(frozen=True)
class FactorDef:
    """One variable of the catalog: canonical name, group, and value domain."""

    name: str
    group: str
    display_label: str
    kind: str = KIND_BINARY
    bins: tuple[str, ...] = ()
    derived: bool = False

    @property
    def values(self) -> tuple[str, ...]:
        """Ordered value domain (missing excluded)."""
        return self.bins if self.kind == KIND_ORDINAL else BINARY_VALUES

    def to_json_obj(self) -> dict:
        obj = {
            "name": self.name,
            "group": self.group,
            "kind": self.kind,
            "display_label": self.display_label,
        }
        if self.kind == KIND_ORDINAL:
            obj["bins"] = list(self.bins)
        if self.derived:
            obj["derived"] = True
        return obj

    @staticmethod
    def from_json_obj(obj: dict) -> "FactorDef":
        return FactorDef(
            name=obj["name"],
            group=obj["group"],
            display_label=obj["display_label"],
            kind=obj["kind"],
            bins=tuple(obj.get("bins", ())),
            derived=bool(obj.get("derived", False)),
        )


@dataclass(frozen=True)
class RiskFactorSchema:
    """Ordered catalog of risk factors, derived factors, and outcomes.

    ``factors`` holds exactly the 33 collected risk factors.  Derived factors
    (currently the single gestational-age flag ``eg_lt39``) live in their own
    list so the collected-factor counts stay canonical.  Canonical column
    order is factors, then derived factors, then outcomes.
    """

    factors: tuple[FactorDef, ...]
    derived_factors: tuple[FactorDef, ...]
    outcomes: tuple[FactorDef, ...]
    _by_name: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        by_name: dict[str, FactorDef] = {}
        for f in self.all_defs():
            if f.name in by_name:
                raise ValueError(f"duplicate catalog name: {f.name}")
            by_name[f.name] = f
        object.__setattr__(self, "_by_name", by_name)

    def all_defs(self) -> tuple[FactorDef, ...]:
        return self.factors + self.derived_factors + self.outcomes

    @property
    def factor_names(self) -> tuple[str, ...]:
        """Collected + derived factor names, canonical order."""
        return tuple(f.name for f in self.factors + self.derived_factors)

    @property
    def outcome_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.outcomes)

    @property
    def all_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.all_defs())

    def __contains__(self, name: str) -> bool:
        return name in self._by_name

    def definition(self, name: str) -> FactorDef:
        try:
            return self._by_name[name]
        except KeyError:
            raise UnknownName(name) from None

    def values_of(self, name: str) -> tuple[str, ...]:
        return self.definition(name).values

    def index_of(self, name: str) -> int:
        """Position in canonical column order; the global tie-break key."""
        names = self.all_names
        try:
            return names.index(name)
        except ValueError:
            raise UnknownName(name) from None

    def is_outcome(self, name: str) -> bool:
        return self.definition(name).group == GROUP_OUTCOME

    def check_value(self, name: str, value: str | None, row: int | None = None) -> str | None:
        """Validate one value against the variable's domain; None means missing."""
        if value is None:
            return None
        if value not in self.definition(name).values:
            raise BadValue(row, name, value)
        return value

    def to_json(self) -> str:
        """Versioned JSON export; stable byte-for-byte for a given schema."""
        doc = {
            "format_version": FORMAT_VERSION,
            "factors": [f.to_json_obj() for f in self.factors],
            "derived_factors": [f.to_json_obj() for f in self.derived_factors],
            "outcomes": [f.to_json_obj() for f in self.outcomes],
        }
        return json.dumps(doc, indent=2) + "\n"

    @staticmethod
    def from_json(text: str) -> "RiskFactorSchema":
        doc = json.loads(text)
        if doc.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported schema format_version: {doc.get('format_version')}")
        return RiskFactorSchema(
            factors=tuple(FactorDef.from_json_obj(o) for o in doc["factors"]),
            derived_factors=tuple(FactorDef.from_json_obj(o) for o in doc.get("derived_factors", [])),
            outcomes=tuple(FactorDef.from_json_obj(o) for o in doc["outcomes"]),
        )


def _binary(name: str, group: str, label: str, derived: bool = False) -> FactorDef:
    return FactorDef(name=name, group=group, display_label=label, derived=derived)


_MATERNAL = (
    _binary("age_gt35", GROUP_MATERNAL, "Maternal age > 35 years"),
    _binary("previous_pathologies_or_smoking", GROUP_MATERNAL, "Previous pathologies or smoking"),
    _binary("hypertension", GROUP_MATERNAL, "Hypertension"),
    _binary("preeclampsia", GROUP_MATERNAL, "Preeclampsia"),
    _binary("strep_b_positive", GROUP_MATERNAL, "Vaginal swab positive for group B Streptococcus"),
    _binary("torch_seroconversion", GROUP_MATERNAL, "TORCH seroconversion"),
    _binary("gestational_diabetes", GROUP_MATERNAL, "Gestational diabetes"),
    _binary("height_lt150", GROUP_MATERNAL, "Maternal height < 150 cm"),
    _binary("bmi_gt25", GROUP_MATERNAL, "BMI > 25"),
    _binary("unfollowed_pregnancy", GROUP_MATERNAL, "Unfollowed pregnancy"),
)

_FETAL = (
    _binary("major_malformations", GROUP_FETAL, "Major malformations"),
    _binary("iugr", GROUP_FETAL, "Intrauterine growth restriction"),
    _binary("macrosomia", GROUP_FETAL, "Macrosomia"),
    _binary("oligohydramnios", GROUP_FETAL, "Oligohydramnios"),
    _binary("polyhydramnios", GROUP_FETAL, "Polyhydramnios"),
    _binary("eg_lt37", GROUP_FETAL, "Gestational age < 37 weeks"),
    _binary("eg_gt41", GROUP_FETAL, "Gestational age > 41 weeks"),
    FactorDef(
        name="birth_weight",
        group=GROUP_FETAL,
        display_label="Birth weight (g)",
        kind=KIND_ORDINAL,
        bins=BIRTH_WEIGHT_BINS,
    ),
    _binary("twins", GROUP_FETAL, "Twin pregnancy"),
    _binary("fetal_anaemia", GROUP_FETAL, "Fetal anaemia"),
    _binary("no_steroid_prophylaxis_preterm", GROUP_FETAL, "No steroid prophylaxis in preterm"),
    _binary("fetal_hydrops", GROUP_FETAL, "Fetal hydrops"),
)

_INTRAPARTUM = (
    _binary("suction_forceps_delivery", GROUP_INTRAPARTUM, "Operative delivery (ventouse or forceps)"),
    _binary("breech_vaginal_delivery", GROUP_INTRAPARTUM, "Vaginal delivery in breech position"),
    _binary("placenta_detachment", GROUP_INTRAPARTUM, "Placenta detachment"),
    _binary("intrapartum_bleeding", GROUP_INTRAPARTUM, "Intrapartum bleeding"),
    _binary("cord_prolapse_or_knot", GROUP_INTRAPARTUM, "Cord prolapse or cord knot"),
    _binary("urgent_caesarean", GROUP_INTRAPARTUM, "Urgent caesarean section"),
    _binary("fetal_cf_pattern_ii_iii", GROUP_INTRAPARTUM, "Fetal heart rate pattern category II or III"),
    _binary("general_anaesthesia", GROUP_INTRAPARTUM, "General maternal anaesthesia"),
    _binary("shoulder_dystocia", GROUP_INTRAPARTUM, "Shoulder dystocia"),
    _binary("chorioamnionitis", GROUP_INTRAPARTUM, "Chorioamnionitis"),
    _binary("meconium_fluid", GROUP_INTRAPARTUM, "Meconium-stained amniotic fluid"),
)

# eg_lt39 is not collected directly; it is a coarser gestational-age flag kept
# outside the 33 collected factors so group counts stay canonical.
_DERIVED = (
    _binary("eg_lt39", GROUP_FETAL, "Gestational age < 39 weeks", derived=True),
)

_OUTCOMES = (
    _binary("apgar1_leq7", GROUP_OUTCOME, "APGAR at 1 minute <= 7"),
    _binary("ventilated_at_birth", GROUP_OUTCOME, "Ventilated at birth"),
    _binary("respiratory_distress", GROUP_OUTCOME, "Respiratory distress after birth"),
    _binary("nicu_transfer", GROUP_OUTCOME, "Transfer to NICU"),
    _binary("neonatal_pathology_transfer", GROUP_OUTCOME, "Transfer to neonatal pathology"),
    _binary("brain_ultrasound_pathological", GROUP_OUTCOME, "Pathological brain ultrasound"),
    _binary("passive_hypothermia", GROUP_OUTCOME, "Passive hypothermia"),
    _binary("niv_after_birth", GROUP_OUTCOME, "Non-invasive ventilation after birth"),
)

_BUILTIN = RiskFactorSchema(factors=_MATERNAL + _FETAL + _INTRAPARTUM,
                            derived_factors=_DERIVED,
                            outcomes=_OUTCOMES)


def builtin_schema() -> RiskFactorSchema:
    """The fixed 33-factor, 8-outcome catalog. Idempotent."""
    return _BUILTIN
