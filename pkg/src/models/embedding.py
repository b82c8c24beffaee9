"""
Embedding Models
Trainable parameters: per-language vector tables and per-pair transitions

Parameters are float64 numpy arrays. The trainer is the only writer;
evaluation code treats a Model as read-only.
"""
import threading
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.linalg import lu_factor

from src.config.settings import settings
from src.core.exceptions import (
    SingularTransitionError, UnknownLanguageError, UnknownPairError, ValidationError
)
from src.models.enums import Variant
from src.models.graph import KnowledgeGraph, LanguageId, LanguagePair, canonical_pair


@dataclass
class EmbeddingSpace:
    """
    One language's k-dimensional space

    entity_vecs: (n_e, k), unit L2 norm after every training epoch
    relation_vecs: (n_r, k), not norm-constrained
    Labels are optional; a space restored from disk carries them.
    """
    language: LanguageId
    entity_vecs: np.ndarray
    relation_vecs: np.ndarray
    entity_labels: Tuple[str, ...] = ()
    relation_labels: Tuple[str, ...] = ()

    def __post_init__(self):
        if self.entity_vecs.ndim != 2 or self.relation_vecs.ndim != 2:
            raise ValidationError("Embedding tables must be 2-dimensional", error_code="BAD_SHAPE")
        if self.entity_vecs.shape[1] != self.relation_vecs.shape[1]:
            raise ValidationError("Entity and relation tables disagree on k", error_code="BAD_SHAPE",
                                  details={"language": self.language})

    @property
    def k(self) -> int:
        return int(self.entity_vecs.shape[1])

    @property
    def num_entities(self) -> int:
        return int(self.entity_vecs.shape[0])

    @property
    def num_relations(self) -> int:
        return int(self.relation_vecs.shape[0])

    def vocabulary_graph(self) -> KnowledgeGraph:
        """Triple-less graph over the stored labels, for resolving surface strings"""
        return KnowledgeGraph(self.language, tuple(self.entity_labels), tuple(self.relation_labels), ())


@dataclass
class TransitionParams:
    """
    Transition parameters of one canonical language pair

    Only the fields the variant needs are set. The LU factorization used
    by reverse transitions is cached per matrix and dropped by
    `invalidate()`, which every writer must call after touching a matrix.
    """
    direction: LanguagePair
    variant: Variant
    v_e: Optional[np.ndarray] = None
    v_r: Optional[np.ndarray] = None
    M_e: Optional[np.ndarray] = None
    M_r: Optional[np.ndarray] = None
    _lu_cache: Dict[str, tuple] = field(default_factory=dict, init=False, repr=False, compare=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, init=False, repr=False, compare=False)

    def __post_init__(self):
        required = set(self.variant.parameter_names)
        for name in ("v_e", "v_r", "M_e", "M_r"):
            present = getattr(self, name) is not None
            if present != (name in required):
                raise ValidationError(
                    message=f"{self.variant.value} transition {'needs' if name in required else 'must not have'} {name}",
                    error_code="BAD_TRANSITION",
                    details={"variant": self.variant.value, "parameter": name}
                )
        for name in ("M_e", "M_r"):
            matrix = getattr(self, name)
            if matrix is not None and (matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]):
                raise ValidationError(f"{name} must be a square matrix", error_code="BAD_SHAPE",
                                      details={"shape": list(matrix.shape)})

    def parameters(self) -> Dict[str, np.ndarray]:
        """Present parameters by name, in variant order"""
        return {name: getattr(self, name) for name in self.variant.parameter_names}

    def invalidate(self) -> None:
        with self._lock:
            self._lu_cache.clear()

    def lu(self, name: str) -> tuple:
        """Cached LU factorization (partial pivoting) of matrix `name`"""
        with self._lock:
            cached = self._lu_cache.get(name)
            if cached is not None:
                return cached
            matrix = getattr(self, name)
            condition = float(np.linalg.cond(matrix))
            if not np.isfinite(condition) or condition > settings.singular_condition_limit:
                raise SingularTransitionError(name, condition)
            factor = lu_factor(matrix, check_finite=True)
            self._lu_cache[name] = factor
            return factor


@dataclass
class Model:
    """
    Per-language spaces plus one transition per aligned canonical pair
    """
    variant: Variant
    k: int
    spaces: Dict[LanguageId, EmbeddingSpace]
    transitions: Dict[LanguagePair, TransitionParams] = field(default_factory=dict)

    def __post_init__(self):
        for space in self.spaces.values():
            if space.k != self.k:
                raise ValidationError(
                    message=f"Space '{space.language}' has k={space.k}, model has k={self.k}",
                    error_code="DIMENSION_MISMATCH",
                    details={"language": space.language}
                )
        for key, transition in self.transitions.items():
            if tuple(key) != canonical_pair(*key) or tuple(transition.direction) != tuple(key):
                raise ValidationError(f"Transition {key} is not stored in canonical direction",
                                      error_code="NON_CANONICAL_PAIR")

    @property
    def languages(self):
        return sorted(self.spaces)

    def space(self, language: LanguageId) -> EmbeddingSpace:
        if language not in self.spaces:
            raise UnknownLanguageError(language)
        return self.spaces[language]

    def transition(self, source: LanguageId, target: LanguageId) -> Tuple[TransitionParams, bool]:
        """Stored transition of the pair and whether source -> target is its forward direction"""
        for code in (source, target):
            if code not in self.spaces:
                raise UnknownLanguageError(code)
        key = canonical_pair(source, target)
        if key not in self.transitions:
            raise UnknownPairError(source, target)
        return self.transitions[key], key[0] == source

    def entity_norm_drift(self) -> float:
        """max over all entities of | ||e||_2 - 1 |"""
        drift = 0.0
        for space in self.spaces.values():
            if space.num_entities:
                norms = np.linalg.norm(space.entity_vecs, axis=1)
                drift = max(drift, float(np.max(np.abs(norms - 1.0))))
        return drift
