"""
Embedding Store Service
Initialization, unit-sphere projection and on-disk format of model parameters

Model directory layout:
    manifest.tsv              key<TAB>value lines (format_version, variant, k,
                              language / entities.<lang> / relations.<lang>,
                              pair a:b, tensor entries)
    <lang>.entities.f32       n_e x k little-endian float32, row-major
    <lang>.relations.f32      n_r x k
    <a>-<b>.<param>.f32       v_e / v_r: 1 x k, M_e / M_r: k x k
    <lang>.entities.txt       entity labels, one per line (optional)
    <lang>.relations.txt      relation labels, one per line (optional)

Training runs in float64; saving truncates to float32 and loading
promotes back, so save -> load -> save is byte-identical.
"""
from pathlib import Path
from typing import Dict, List, Tuple, Union

import numpy as np
from scipy.linalg import svd

from src.config.settings import settings
from src.core.exceptions import (
    MissingManifestError, ModelFormatError, ModelVersionError, TensorLengthError,
    ValidationError, ZeroVectorError
)
from src.core.logging import get_logger
from src.models.embedding import EmbeddingSpace, Model, TransitionParams
from src.models.enums import Variant
from src.models.graph import MultilingualKB
from src.utils.seeding import Stream, derive_rng
from src.utils.tsv import iter_fields, iter_key_values, write_lines

logger = get_logger(__name__)

PathLike = Union[str, Path]

MANIFEST = "manifest.tsv"
_FLOAT = np.dtype("<f4")


class EmbeddingStoreService:
    """
    Service class owning model parameters at rest

    All methods are static; init_model is a pure function of
    (kb shape, variant, k, seed).
    """

    # ========================================================================
    # INITIALIZATION
    # ========================================================================

    @staticmethod
    def sample_unit_sphere(rng: np.random.Generator, n: int, k: int) -> np.ndarray:
        """n i.i.d. points uniform on the unit (k-1)-sphere (normalized Gaussians)"""
        points = rng.standard_normal((n, k))
        norms = np.linalg.norm(points, axis=1)
        # A zero draw has probability 0; redraw those rows anyway
        while n and np.any(norms == 0.0):
            bad = norms == 0.0
            points[bad] = rng.standard_normal((int(bad.sum()), k))
            norms = np.linalg.norm(points, axis=1)
        return points / norms[:, None]

    @staticmethod
    def random_orthogonal(rng: np.random.Generator, k: int) -> np.ndarray:
        """Random orthogonal k x k matrix: orthonormalize a Gaussian matrix via SVD (U V^T)"""
        gaussian = rng.standard_normal((k, k))
        u, _, vh = svd(gaussian)
        return u @ vh

    @staticmethod
    def init_model(kb: MultilingualKB, variant: Variant, k: int, seed: int) -> Model:
        """
        Fresh model for a knowledge base

        - entity and relation vectors: uniform on the unit sphere
        - Var3 translation vectors: zero
        - Var4/Var5 matrices: random orthogonal
        Transitions exist exactly for canonical pairs with a non-empty alignment set.

        Raises:
            ValidationError: k < 1 or an empty knowledge base
        """
        if k < 1:
            raise ValidationError(f"Dimensionality must be at least 1, got {k}", error_code="INVALID_DIMENSION",
                                  details={"k": k})
        if not kb.graphs:
            raise ValidationError("Cannot initialize a model for an empty knowledge base",
                                  error_code="EMPTY_KB")
        variant = Variant.parse(variant) if not isinstance(variant, Variant) else variant
        rng = derive_rng(seed, Stream.INIT)

        spaces: Dict[str, EmbeddingSpace] = {}
        for code in kb.languages:
            graph = kb.graphs[code]
            spaces[code] = EmbeddingSpace(
                language=code,
                entity_vecs=EmbeddingStoreService.sample_unit_sphere(rng, graph.num_entities, k),
                relation_vecs=EmbeddingStoreService.sample_unit_sphere(rng, graph.num_relations, k),
                entity_labels=graph.entities,
                relation_labels=graph.relations,
            )

        transitions: Dict[Tuple[str, str], TransitionParams] = {}
        for pair in kb.aligned_pairs():
            params = {}
            for name in variant.parameter_names:
                if name.startswith("v_"):
                    params[name] = np.zeros(k)
                else:
                    params[name] = EmbeddingStoreService.random_orthogonal(rng, k)
            transitions[pair] = TransitionParams(direction=pair, variant=variant, **params)

        logger.info(
            "Model initialized",
            extra={"variant": variant.value, "k": k, "seed": seed,
                   "languages": list(spaces), "pairs": [f"{a}-{b}" for a, b in transitions]}
        )
        return Model(variant=variant, k=k, spaces=spaces, transitions=transitions)

    # ========================================================================
    # PROJECTION
    # ========================================================================

    @staticmethod
    def project_to_sphere(v: np.ndarray) -> np.ndarray:
        """
        v / ||v||_2

        Raises:
            ZeroVectorError: ||v||_2 == 0 (the trainer re-randomizes the vector)
        """
        norm = float(np.linalg.norm(v))
        if not norm > settings.zero_norm_epsilon:
            raise ZeroVectorError()
        return v / norm

    # ========================================================================
    # SERIALIZATION
    # ========================================================================

    @staticmethod
    def save_model(model: Model, directory: PathLike) -> None:
        """Write the model directory (overwrites files of the same name)"""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)

        manifest: List[str] = [
            f"format_version\t{settings.model_format_version}",
            f"variant\t{model.variant.value}",
            f"k\t{model.k}",
        ]
        tensors: List[Tuple[str, np.ndarray]] = []

        for code in model.languages:
            space = model.spaces[code]
            manifest += [
                f"language\t{code}",
                f"entities.{code}\t{space.num_entities}",
                f"relations.{code}\t{space.num_relations}",
            ]
            tensors.append((f"{code}.entities.f32", space.entity_vecs))
            tensors.append((f"{code}.relations.f32", space.relation_vecs))
            if space.entity_labels or space.relation_labels:
                write_lines(space.entity_labels, directory / f"{code}.entities.txt")
                write_lines(space.relation_labels, directory / f"{code}.relations.txt")
                manifest.append(f"vocabulary\t{code}")

        for (a, b), transition in sorted(model.transitions.items()):
            manifest.append(f"pair\t{a}:{b}")
            for name, value in transition.parameters().items():
                tensors.append((f"{a}-{b}.{name}.f32", np.atleast_2d(value)))

        for name, array in tensors:
            (directory / name).write_bytes(np.ascontiguousarray(array, dtype=_FLOAT).tobytes(order="C"))
            manifest.append(f"tensor\t{name}")

        write_lines(manifest, directory / MANIFEST)
        logger.info("Model saved", extra={"directory": str(directory), "tensors": len(tensors)})

    @staticmethod
    def load_model(directory: PathLike) -> Model:
        """
        Read a model directory written by save_model

        Raises:
            MissingManifestError: no manifest.tsv
            ModelVersionError: unsupported format_version
            TensorLengthError: tensor byte length disagrees with the manifest
            ModelFormatError: any other inconsistency
        """
        directory = Path(directory)
        manifest_path = directory / MANIFEST
        if not manifest_path.is_file():
            raise MissingManifestError(str(directory))

        scalars: Dict[str, str] = {}
        languages: List[str] = []
        pairs: List[Tuple[str, str]] = []
        vocabularies: List[str] = []
        tensor_names: List[str] = []
        for _, key, values in iter_key_values(manifest_path):
            value = values[0]
            if key == "language":
                languages.append(value)
            elif key == "pair":
                first, _, second = value.partition(":")
                pairs.append((first, second))
            elif key == "vocabulary":
                vocabularies.append(value)
            elif key == "tensor":
                tensor_names.append(value)
            else:
                scalars[key] = value

        version = scalars.get("format_version")
        if version != str(settings.model_format_version):
            raise ModelVersionError(str(version), settings.model_format_version)
        try:
            variant = Variant.parse(scalars["variant"])
            k = int(scalars["k"])
            counts = {code: (int(scalars[f"entities.{code}"]), int(scalars[f"relations.{code}"]))
                      for code in languages}
        except (KeyError, ValueError) as exc:
            raise ModelFormatError(f"Manifest in {directory} is incomplete: {exc}",
                                   error_code="BAD_MANIFEST") from exc

        declared = set(tensor_names)

        def read(name: str, rows: int, cols: int) -> np.ndarray:
            if name not in declared:
                raise ModelFormatError(f"Manifest does not list tensor {name}", error_code="BAD_MANIFEST",
                                       details={"tensor": name})
            path = directory / name
            if not path.is_file():
                raise ModelFormatError(f"Tensor file {name} is missing", error_code="MISSING_TENSOR",
                                       details={"tensor": name})
            raw = path.read_bytes()
            expected = rows * cols * _FLOAT.itemsize
            if len(raw) != expected:
                raise TensorLengthError(name, expected, len(raw))
            return np.frombuffer(raw, dtype=_FLOAT).astype(np.float64).reshape(rows, cols)

        spaces: Dict[str, EmbeddingSpace] = {}
        for code in languages:
            n_e, n_r = counts[code]
            entity_labels: Tuple[str, ...] = ()
            relation_labels: Tuple[str, ...] = ()
            if code in vocabularies:
                entity_labels = _read_labels(directory / f"{code}.entities.txt", n_e)
                relation_labels = _read_labels(directory / f"{code}.relations.txt", n_r)
            spaces[code] = EmbeddingSpace(
                language=code,
                entity_vecs=read(f"{code}.entities.f32", n_e, k),
                relation_vecs=read(f"{code}.relations.f32", n_r, k),
                entity_labels=entity_labels,
                relation_labels=relation_labels,
            )

        transitions: Dict[Tuple[str, str], TransitionParams] = {}
        for a, b in pairs:
            params = {}
            for name in variant.parameter_names:
                rows = 1 if name.startswith("v_") else k
                tensor = read(f"{a}-{b}.{name}.f32", rows, k)
                params[name] = tensor[0].copy() if rows == 1 else tensor
            transitions[(a, b)] = TransitionParams(direction=(a, b), variant=variant, **params)

        return Model(variant=variant, k=k, spaces=spaces, transitions=transitions)


def _read_labels(path: Path, expected: int) -> Tuple[str, ...]:
    if not path.is_file():
        raise ModelFormatError(f"Vocabulary file {path.name} is missing", error_code="MISSING_VOCABULARY",
                               details={"file": path.name})
    labels = tuple(fields[0] for _, fields in iter_fields(path, arity=1))
    if len(labels) != expected:
        raise ModelFormatError(
            f"Vocabulary file {path.name} has {len(labels)} labels, manifest says {expected}",
            error_code="VOCABULARY_MISMATCH",
            details={"file": path.name, "expected": expected, "found": len(labels)}
        )
    return labels
