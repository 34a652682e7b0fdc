"""Differentiable Spearman correlation loss via tanh-smoothed ranks, with a
gradient-free memory bank for global rank consistency."""

__version__ = "0.1.0"

from .baselines import ProjectionConfig, margin_loss_cost, margin_rank_loss, permutahedron_project
from .correlation import hard_rank, plcc, srocc, srocc_closed_form
from .errors import (
    DegenerateVariance,
    DivergenceDetected,
    InvalidConfig,
    LabelConflict,
    LengthMismatch,
    NonFinite,
    ParseError,
    SoftSroccError,
)
from .memory_bank import BankEntry, MemoryBank
from .soft_rank import (
    GradTaggedScores,
    LossResult,
    SoftRankConfig,
    mono_loss,
    mono_loss_cost,
    soft_rank,
    soft_rank_jacobian,
    soft_rank_vjp,
)

__all__ = [
    "BankEntry",
    "DegenerateVariance",
    "DivergenceDetected",
    "GradTaggedScores",
    "InvalidConfig",
    "LabelConflict",
    "LengthMismatch",
    "LossResult",
    "MemoryBank",
    "NonFinite",
    "ParseError",
    "ProjectionConfig",
    "SoftRankConfig",
    "SoftSroccError",
    "hard_rank",
    "margin_loss_cost",
    "margin_rank_loss",
    "mono_loss",
    "mono_loss_cost",
    "permutahedron_project",
    "plcc",
    "soft_rank",
    "soft_rank_jacobian",
    "soft_rank_vjp",
    "srocc",
    "srocc_closed_form",
]
