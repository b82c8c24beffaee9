"""
Models Package
Domain containers for MTransE: enums, knowledge graphs, embedding parameters
"""
from src.models.enums import CorruptionKind, EvalTask, NormOrder, Slot, Variant
from src.models.graph import (
    AlignedPair, AlignmentSet, IllSet, KnowledgeGraph, LanguageId, LanguagePair, MultilingualKB, Triple,
    canonical_pair
)
from src.models.embedding import EmbeddingSpace, Model, TransitionParams

__all__ = [
    'CorruptionKind', 'EvalTask', 'NormOrder', 'Slot', 'Variant',
    'AlignedPair', 'AlignmentSet', 'IllSet', 'KnowledgeGraph', 'LanguageId', 'LanguagePair',
    'MultilingualKB', 'Triple', 'canonical_pair',
    'EmbeddingSpace', 'Model', 'TransitionParams',
]
