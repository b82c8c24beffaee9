"""
Synthetic Knowledge Base Service
Isomorphic bilingual knowledge bases with a known ground-truth alignment

Both languages share one random graph structure; only the labels differ
(`<lang>:e<i>`, `<lang>:r<j>`). Relations come in inverse pairs (r0/r1,
r2/r3, ...; a trailing odd relation is unpaired), so a triple usually
appears next to its reversed twin.

A fraction of the entities is held out: the aligned triples use only the
remaining core entities, every other triple touches a held-out entity, and
the held-out identity pairs serve as ILLs for entity matching.
"""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from src.core.exceptions import ValidationError
from src.core.logging import get_logger
from src.models.graph import AlignedPair, AlignmentSet, IllSet, KnowledgeGraph, MultilingualKB, Triple, canonical_pair
from src.services.kg_loader import GraphLoaderService
from src.utils.seeding import derive_rng
from src.utils.tsv import write_lines

logger = get_logger(__name__)

PathLike = Union[str, Path]

# Stream id of the generator; outside the range the trainer and evaluators use
SYNTHETIC_STREAM = 100


@dataclass(frozen=True)
class SyntheticKB:
    """A generated bilingual KB plus its held-back ground truth"""
    kb: MultilingualKB
    ill: IllSet
    unaligned: Tuple[AlignedPair, ...]

    @property
    def pair(self) -> Tuple[str, str]:
        return self.ill.source, self.ill.target


def _inverse(relation: int, num_relations: int) -> Optional[int]:
    partner = relation ^ 1
    return partner if partner < num_relations else None


def _check_count(what: str, count: int, low: int, high: int) -> None:
    if not low <= count <= high:
        raise ValidationError(
            message=f"{what} must be in {low}..{high}, got {count}",
            error_code="INVALID_SYNTHETIC_SHAPE",
            details={what: count}
        )


def _draw_triples(rng: np.random.Generator, pool: Sequence[int], num_relations: int, count: int,
                  required: Optional[Set[int]] = None) -> List[Triple]:
    """
    `count` distinct triples with h != t over the entities of `pool`

    Every triple touches `required` when given. Each covered entity (the
    required ones, else the whole pool) first gets one triple; inverse
    twins of those come next, then random triples with their twins until
    `count` is reached. Callers check that `count` fits.
    """
    triples: Dict[Triple, None] = {}

    def other(entity: int) -> int:
        while True:
            candidate = pool[int(rng.integers(len(pool)))]
            if candidate != entity:
                return candidate

    def inverse_of(triple: Triple) -> Optional[Triple]:
        relation = _inverse(triple.relation, num_relations)
        return None if relation is None else Triple(triple.tail, relation, triple.head)

    covered: Set[int] = set()
    for entity in sorted(required) if required is not None else pool:
        while entity not in covered:
            partner = other(entity)
            head, tail = (entity, partner) if rng.random() < 0.5 else (partner, entity)
            triple = Triple(head, int(rng.integers(num_relations)), tail)
            if triple not in triples:
                triples[triple] = None
                covered.update((head, tail))

    for triple in list(triples):
        twin = inverse_of(triple)
        if len(triples) >= count:
            break
        if twin is not None:
            triples.setdefault(twin, None)

    while len(triples) < count:
        head = pool[int(rng.integers(len(pool)))]
        tail = other(head)
        if required is not None and head not in required and tail not in required:
            continue
        triple = Triple(head, int(rng.integers(num_relations)), tail)
        if triple in triples:
            continue
        triples[triple] = None
        twin = inverse_of(triple)
        if twin is not None and len(triples) < count:
            triples.setdefault(twin, None)
    return list(triples)


class SyntheticKbService:
    """Service class generating synthetic bilingual knowledge bases"""

    @staticmethod
    def random_structure(num_entities: int, num_relations: int, num_triples: int,
                         seed: int) -> List[Triple]:
        """Distinct (h, r, t) triples with h != t in which every entity occurs"""
        if num_entities < 2 or num_relations < 1:
            raise ValidationError("Need at least 2 entities and 1 relation", error_code="INVALID_SYNTHETIC_SHAPE")
        _check_count("num_triples", num_triples, num_entities, num_entities * (num_entities - 1) * num_relations)
        rng = derive_rng(seed, SYNTHETIC_STREAM)
        return _draw_triples(rng, list(range(num_entities)), num_relations, num_triples)

    @staticmethod
    def isomorphic_bilingual(
        num_entities: int = 50,
        num_relations: int = 5,
        num_triples: int = 200,
        aligned_fraction: float = 0.6,
        seed: int = 0,
        languages: Tuple[str, str] = ("en", "fr"),
        held_out_fraction: float = 0.2
    ) -> SyntheticKB:
        """
        Two copies of one random graph, a fraction of triples aligned

        round(held_out_fraction * num_entities) entities are reserved first.
        round(aligned_fraction * num_triples) triples are drawn among the
        other (core) entities and aligned; the rest each touch a held-out
        entity and stay unaligned. ILLs (first -> second language) are the
        held-out identity pairs.

        Raises:
            ValidationError: a fraction out of range, or counts that cannot
                cover the core and held-out entities with distinct triples
        """
        if not 0.0 < aligned_fraction < 1.0:
            raise ValidationError("aligned_fraction must be in (0, 1)", error_code="INVALID_FRACTION")
        if not 0.0 < held_out_fraction < 1.0:
            raise ValidationError("held_out_fraction must be in (0, 1)", error_code="INVALID_FRACTION")
        if num_relations < 1:
            raise ValidationError("Need at least 1 relation", error_code="INVALID_SYNTHETIC_SHAPE")
        first, second = canonical_pair(*languages)

        n_held = int(round(held_out_fraction * num_entities))
        _check_count("held_out_entities", n_held, 1, num_entities - 2)
        n_core = num_entities - n_held
        n_aligned = int(round(aligned_fraction * num_triples))
        n_unaligned = num_triples - n_aligned
        _check_count("aligned_triples", n_aligned, n_core, n_core * (n_core - 1) * num_relations)
        _check_count("unaligned_triples", n_unaligned, n_held,
                     (num_entities * (num_entities - 1) - n_core * (n_core - 1)) * num_relations)

        held_out = sorted(int(e) for e in derive_rng(seed, SYNTHETIC_STREAM, 0).choice(
            num_entities, size=n_held, replace=False))
        core = sorted(set(range(num_entities)) - set(held_out))
        aligned_triples = _draw_triples(derive_rng(seed, SYNTHETIC_STREAM, 1), core, num_relations, n_aligned)
        unaligned_triples = _draw_triples(derive_rng(seed, SYNTHETIC_STREAM, 2), list(range(num_entities)),
                                          num_relations, n_unaligned, required=set(held_out))

        combined = aligned_triples + unaligned_triples
        order = derive_rng(seed, SYNTHETIC_STREAM, 3).permutation(len(combined))
        structure = tuple(combined[i] for i in order)
        aligned_set = set(aligned_triples)

        graphs = {
            code: KnowledgeGraph(
                code,
                tuple(f"{code}:e{i}" for i in range(num_entities)),
                tuple(f"{code}:r{j}" for j in range(num_relations)),
                structure,
            )
            for code in (first, second)
        }
        aligned = tuple((t, t) for t in structure if t in aligned_set)
        unaligned = tuple((t, t) for t in structure if t not in aligned_set)
        ill = IllSet(first, second, tuple((e, e) for e in held_out))

        kb = MultilingualKB(graphs=graphs, alignments={(first, second): AlignmentSet((first, second), aligned)},
                            ills=[ill])
        logger.info("Synthetic KB generated",
                    extra={"languages": [first, second], "entities": num_entities, "relations": num_relations,
                           "triples": len(structure), "aligned": len(aligned), "ills": len(ill)})
        return SyntheticKB(kb=kb, ill=ill, unaligned=unaligned)

    @staticmethod
    def write_files(synthetic: SyntheticKB, directory: PathLike, **train_keys) -> Path:
        """
        Write triple, alignment and ILL files plus a run config; returns the config path

        `train_keys` become extra `key<TAB>value` lines (variant, dim, epochs, ...).
        """
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        kb = synthetic.kb
        first, second = synthetic.pair

        lines = []
        for code in (first, second):
            path = directory / f"{code}.triples.tsv"
            GraphLoaderService.write_graph(kb.graphs[code], path)
            lines.append(f"language\t{code}\t{path.name}")

        alignment_path = directory / f"{first}-{second}.alignment.tsv"
        GraphLoaderService.write_alignment(kb.alignments[(first, second)].pairs, kb.graphs[first],
                                           kb.graphs[second], alignment_path)
        lines.append(f"alignment\t{first}\t{second}\t{alignment_path.name}")

        ill_path = directory / f"{first}-{second}.ills.tsv"
        source, target = kb.graphs[first], kb.graphs[second]
        write_lines((f"{source.entities[s]}\t{target.entities[t]}" for s, t in synthetic.ill.links), ill_path)
        lines.append(f"ills\t{first}\t{second}\t{ill_path.name}")

        lines += [f"{key}\t{value}" for key, value in train_keys.items()]
        config_path = directory / "run.tsv"
        write_lines(lines, config_path)
        return config_path
