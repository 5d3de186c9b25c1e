"""Two-stage attack on score-regression (image quality) models.

Stage One picks target scores that reverse the ranking of the original
scores while pushing them far from the originals. Stage Two nudges each image
inside an l-inf ball toward its target.
"""

from .errors import ArgumentError, DegenerateInputError, DimensionError, NumericError, ParseError, SMAError
from .metrics import (
    MetricsReport,
    RBounds,
    abs_gain,
    delta_rank,
    evaluate,
    krocc,
    mse,
    plcc,
    r_metric,
    rmse,
    soft_srocc,
    srocc,
    variance,
)
from .numerics import AdamState, Rng, adam_step, finite_diff_grad, rng_uniform
from .ranking import SoftRankResult, hard_rank, permutahedron_project, soft_rank, soft_rank_vjp
from .scorer import ScorerSpec, random_images, score, score_grad, score_set
from .stage_one import StageOneConfig, StageOneTrace, optimize_targets, stage_one_grad, stage_one_objective
from .stage_two import AttackConfig, AttackResult, attack_image, attack_set

__version__ = "0.1.0"
