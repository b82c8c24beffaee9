"""
Pydantic schemas for Training

This module provides:
- TrainConfig: hyperparameters of one training run
- EpochReport: per-epoch progress record

Defaults (lambda=0.01, alpha=5, k=75) come from settings so they can be
overridden through the environment.
"""
from pydantic import AliasChoices, BaseModel, ConfigDict, Field, field_validator

from src.config.settings import settings
from src.models.enums import NormOrder, Variant


class TrainConfig(BaseModel):
    """
    Hyperparameters of a training run

    Invariants (enforced on construction):
        learning_rate > 0, alpha >= 0, epochs >= 0, k >= 1
    """
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    variant: Variant = Field(default=Variant.VAR4, description="Alignment model variant")
    k: int = Field(
        default_factory=lambda: settings.default_dim,
        ge=1,
        validation_alias=AliasChoices("k", "dim"),
        description="Embedding dimensionality"
    )
    learning_rate: float = Field(
        default_factory=lambda: settings.default_learning_rate,
        gt=0,
        validation_alias=AliasChoices("learning_rate", "lambda"),
        description="Constant SGD step size lambda"
    )
    alpha: float = Field(
        default_factory=lambda: settings.default_alpha,
        ge=0,
        description="Weight of the alignment loss in J = S_K + alpha * S_A"
    )
    norm: NormOrder = Field(
        default_factory=lambda: NormOrder.parse(settings.default_norm),
        description="Norm of the knowledge and alignment scores"
    )
    epochs: int = Field(default_factory=lambda: settings.default_epochs, ge=0)
    seed: int = Field(default_factory=lambda: settings.default_seed, ge=0)
    shuffle: bool = Field(default=True, description="Shuffle samples every epoch")
    knowledge_steps: int = Field(default=1, ge=1, description="Knowledge passes per epoch")
    alignment_steps: int = Field(default=1, ge=1, description="Alignment passes per epoch")
    threads: int = Field(
        default_factory=lambda: settings.default_threads,
        ge=1,
        description="Worker threads for the per-language knowledge pass"
    )
    project_relations: bool = Field(
        default=False,
        description="Re-project touched relation vectors onto the unit sphere after every step"
    )

    @field_validator("variant", mode="before")
    @classmethod
    def parse_variant(cls, value):
        return value if isinstance(value, Variant) else Variant.parse(value)

    @field_validator("norm", mode="before")
    @classmethod
    def parse_norm(cls, value):
        return value if isinstance(value, NormOrder) else NormOrder.parse(value)


class EpochReport(BaseModel):
    """
    Progress of one epoch

    Scores are means of the per-sample scores seen during the epoch's
    passes (computed just before each update).
    """
    epoch: int = Field(..., ge=1)
    mean_knowledge_score: float = Field(..., ge=0)
    mean_alignment_score: float = Field(..., ge=0)
    max_entity_norm_drift: float = Field(..., ge=0)
    wall_time: float = Field(..., ge=0, description="Seconds")

    def to_tsv(self) -> str:
        """`epoch<TAB>S_K_mean<TAB>S_A_mean<TAB>wall_ms`"""
        return (f"{self.epoch}\t{self.mean_knowledge_score:.6f}\t"
                f"{self.mean_alignment_score:.6f}\t{self.wall_time * 1000.0:.0f}")
