"""
Enums for MTransE
All ENUM types used across the application
"""
from enum import Enum as PyEnum


# ============================================================================
# MODEL ENUMS
# ============================================================================

class Variant(str, PyEnum):
    """
    Alignment model variant

    VAR1/VAR2: axis calibration (entities only / entities and relations)
    VAR3: translation vectors v_e, v_r
    VAR4: one linear transformation M_e shared by entities and relations
    VAR5: separate linear transformations M_e (entities) and M_r (relations)
    """
    VAR1 = "var1"
    VAR2 = "var2"
    VAR3 = "var3"
    VAR4 = "var4"
    VAR5 = "var5"

    @property
    def uses_relations(self) -> bool:
        """Whether the alignment score has a relation term"""
        return self in (Variant.VAR2, Variant.VAR3, Variant.VAR5)

    @property
    def uses_matrices(self) -> bool:
        return self in (Variant.VAR4, Variant.VAR5)

    @property
    def parameter_names(self) -> tuple:
        """Names of the transition parameters this variant trains"""
        return {
            Variant.VAR1: (),
            Variant.VAR2: (),
            Variant.VAR3: ("v_e", "v_r"),
            Variant.VAR4: ("M_e",),
            Variant.VAR5: ("M_e", "M_r"),
        }[self]

    @classmethod
    def parse(cls, value: str) -> "Variant":
        """Accept "var4", "Var4", "VAR4" or "4" """
        text = str(value).strip().lower()
        if text.isdigit():
            text = f"var{text}"
        return cls(text)


class NormOrder(str, PyEnum):
    """Norm used by the knowledge and alignment scores"""
    L1 = "L1"
    L2 = "L2"

    @classmethod
    def parse(cls, value: str) -> "NormOrder":
        return cls(str(value).strip().upper())


# ============================================================================
# EVALUATION ENUMS
# ============================================================================

class Slot(str, PyEnum):
    """Element of a triple"""
    HEAD = "head"
    RELATION = "relation"
    TAIL = "tail"


class CorruptionKind(str, PyEnum):
    """
    How a negative TWA case was produced

    Type (i): one of the six elements replaced (SOURCE_* / TARGET_*)
    Type (ii): a whole triple substituted (SOURCE_TRIPLE / TARGET_TRIPLE)
    """
    SOURCE_HEAD = "source_head"
    SOURCE_RELATION = "source_relation"
    SOURCE_TAIL = "source_tail"
    TARGET_HEAD = "target_head"
    TARGET_RELATION = "target_relation"
    TARGET_TAIL = "target_tail"
    SOURCE_TRIPLE = "source_triple"
    TARGET_TRIPLE = "target_triple"

    @property
    def is_element(self) -> bool:
        """Type (i) corruption"""
        return self not in (CorruptionKind.SOURCE_TRIPLE, CorruptionKind.TARGET_TRIPLE)


class EvalTask(str, PyEnum):
    """Subcommands of `eval`"""
    MATCH = "match"
    PR = "pr"
    TWA = "twa"
    TAIL = "tail"
    REL = "rel"
    COMPLETE = "complete"
    PCA = "pca"
