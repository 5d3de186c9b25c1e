"""End-to-end runs: ingest, Stage One, Stage Two, metrics, report files."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import os
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from . import pnm
from .errors import ArgumentError, ParseError
from .metrics import RBounds, evaluate, krocc, plcc, rmse, soft_srocc, srocc
from .numerics import Rng
from .ranking import hard_rank
from .scorer import ScorerSpec, random_images, score_set
from .stage_one import StageOneConfig, optimize_targets
from .stage_two import AttackConfig, attack_set

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MODES = ("full_attack", "stage_one_only", "metrics_only", "ablation", "selfcheck")
SWEEPS = ("beta", "lambda_var", "lambda_mse")
IMAGE_SUFFIXES = (".pgm", ".ppm", ".pnm")

REPORT_HEADER = ("id", "orig_score", "target_score", "adv_score", "rank_before", "rank_after", "linf")
DIAGNOSTIC_HEADER = ("orig_score", "abs_target_delta")


@dataclass(frozen=True)
class Source:
    """Exactly one of the four input kinds is set."""

    image_dir: str | None = None
    scores_file: str | None = None
    synthetic_images: int | None = None
    synthetic_scores: int | None = None

    def __post_init__(self):
        given = [v for v in asdict(self).values() if v is not None]
        if len(given) != 1:
            raise ArgumentError("give exactly one input source (images, scores, or a synthetic count)")

    @property
    def has_images(self) -> bool:
        return self.image_dir is not None or self.synthetic_images is not None


@dataclass(frozen=True)
class RunConfig:
    mode: str
    source: Source
    out_dir: str
    scorer: str = "feature_affine"
    stage_one: StageOneConfig = StageOneConfig()
    attack: AttackConfig = AttackConfig()
    bounds: RBounds = RBounds()
    seed: int = 0
    jobs: int = 1
    after_scores_file: str | None = None
    sweep: str | None = None
    sweep_values: tuple[float, ...] = ()
    image_size: tuple[int, int, int] = (32, 32, 3)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ArgumentError(f"unknown mode {self.mode!r}; choose one of {', '.join(MODES)}")

    def echo(self) -> dict:
        """Config as plain data, with the output directory left out."""
        d = asdict(self)
        del d["out_dir"]
        d["sweep_values"] = list(self.sweep_values)
        d["image_size"] = list(self.image_size)
        return d


# --- ingestion -------------------------------------------------------------

def ingest_images(path) -> tuple[list[str], list[np.ndarray]]:
    """All P5/P6 files in a directory, in lexicographic filename order."""
    root = Path(path)
    if not root.is_dir():
        raise ArgumentError(f"image directory {root} does not exist")
    files = sorted(p for p in root.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)
    if not files:
        raise ArgumentError(f"no .pgm/.ppm/.pnm files in {root}")
    return [p.stem for p in files], [pnm.read_pnm(p) for p in files]


def ingest_scores(path) -> tuple[list[str], np.ndarray]:
    """``id,score`` lines; blank lines are skipped."""
    ids, values = [], []
    with open(path, newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            parts = line.strip().split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 'id,score'")
            try:
                value = float(parts[1])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: score {parts[1]!r} is not a number") from None
            if not math.isfinite(value):
                raise ParseError(f"{path}: line {lineno}: score must be finite")
            ids.append(parts[0].strip())
            values.append(value)
    if not values:
        raise ArgumentError(f"{path}: no scores")
    return ids, np.array(values)


def _derived_seed(seed: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, stream]).generate_state(1, dtype=np.uint64)[0])


def load_images(cfg: RunConfig) -> tuple[list[str], list[np.ndarray]]:
    src = cfg.source
    if src.image_dir is not None:
        return ingest_images(src.image_dir)
    if src.synthetic_images is not None:
        n = src.synthetic_images
        images = random_images(Rng(_derived_seed(cfg.seed, 0)), n, *cfg.image_size)
        return [f"img{i:04d}" for i in range(n)], images
    raise ArgumentError(f"mode {cfg.mode} needs images (--images or --synthetic)")


def load_scores(cfg: RunConfig) -> tuple[list[str], np.ndarray, list[np.ndarray] | None]:
    src = cfg.source
    if src.scores_file is not None:
        ids, scores = ingest_scores(src.scores_file)
        return ids, scores, None
    if src.synthetic_scores is not None:
        n = src.synthetic_scores
        scores = Rng(_derived_seed(cfg.seed, 0)).uniform(0.0, 100.0, n)
        return [f"s{i:04d}" for i in range(n)], scores, None
    ids, images = load_images(cfg)
    return ids, score_set(ScorerSpec.named(cfg.scorer), images), images


def _require_pairs(n: int) -> None:
    if n < 2:
        raise ArgumentError(f"need N >= 2 inputs for rank correlation, got N={n}")


# --- shared report helpers -------------------------------------------------

def _finite_or_none(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        obj = obj.item()
    return _finite_or_none(obj)


def _dump_json(payload: dict) -> str:
    return json.dumps(_clean(payload), indent=2, sort_keys=True, allow_nan=False) + "\n"


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def correlation_summary(a, b) -> dict:
    out = {"srocc": srocc(a, b), "krocc": krocc(a, b), "rmse": rmse(a, b)}
    try:
        out["plcc"] = plcc(a, b)
    except ArgumentError:
        out["plcc"] = math.nan
    return out


def score_change_diagnostic(original, targets) -> dict:
    """How the size of each target change relates to the distance from the median."""
    original = np.asarray(original)
    change = np.abs(np.asarray(targets) - original)
    median = float(np.median(original))
    q1, q3 = np.quantile(original, [0.25, 0.75])
    j = int(np.argmin(change))
    distance = np.abs(original - median)
    return {
        "median_original": median,
        "min_change_index": j,
        "min_change_original_score": float(original[j]),
        "min_change_within_iqr": bool(q1 <= original[j] <= q3),
        "srocc_change_vs_distance_from_median": srocc(change, distance) if original.size >= 2 else math.nan,
    }


@dataclass
class RunOutput:
    """File name to text content, in write order, plus the summary payload."""

    files: dict[str, str | bytes] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name, content in self.files.items():
            if isinstance(content, bytes):
                (out / name).write_bytes(content)
            else:
                (out / name).write_text(content)


def _summary_base(cfg: RunConfig) -> dict:
    return {"schema_version": SCHEMA_VERSION, "mode": cfg.mode, "seed": cfg.seed, "config": cfg.echo()}


def _stage_one_cfg(cfg: RunConfig, **changes) -> StageOneConfig:
    return replace(cfg.stage_one, seed=_derived_seed(cfg.seed, 1), **changes)


def _trace_csv(trace) -> str:
    rows = zip(trace.epoch, trace.objective, trace.srocc_term, trace.var_term, trace.mse_term)
    return _csv_text(("epoch", "objective", "srocc_term", "var_term", "mse_term"), rows)


def _diagnostic_csv(original, targets) -> str:
    return _csv_text(DIAGNOSTIC_HEADER, zip(original, np.abs(np.asarray(targets) - original)))


def _stage_one_summary(original, targets, s1: StageOneConfig, trace) -> dict:
    soft = soft_srocc(targets, original, s1.beta, soft_reference=False)
    hard = srocc(targets, original)
    return {
        "objective_final": trace.objective[-1],
        "srocc_beta": soft,
        "srocc": hard,
        "approximation_error": abs(soft - hard),
        "ideal": correlation_summary(original, targets),
    }


# --- modes -----------------------------------------------------------------

def run_full_attack(cfg: RunConfig, save_adversarial: bool = False) -> RunOutput:
    ids, images = load_images(cfg)
    _require_pairs(len(images))
    spec = ScorerSpec.named(cfg.scorer)
    original = score_set(spec, images)

    s1 = _stage_one_cfg(cfg)
    targets, trace = optimize_targets(original, s1)
    results, report = attack_set(spec, images, targets, cfg.attack, cfg.bounds, cfg.jobs)
    achieved = np.array([r.achieved_score for r in results])

    rank_before, rank_after = hard_rank(original), hard_rank(achieved)
    rows = [
        (ids[j], original[j], targets[j], achieved[j], int(rank_before[j]), int(rank_after[j]), results[j].linf_distance)
        for j in range(len(ids))
    ]
    summary = _summary_base(cfg)
    summary.update(
        n_images=len(ids),
        metrics=report.as_dict(),
        stage_one=_stage_one_summary(original, targets, s1, trace),
        target_vs_achieved=correlation_summary(targets, achieved),
        score_change_diagnostic=score_change_diagnostic(original, targets),
        max_linf=max(r.linf_distance for r in results),
    )
    out = RunOutput(summary=summary)
    out.files["report.csv"] = _csv_text(REPORT_HEADER, rows)
    out.files["score_changes.csv"] = _diagnostic_csv(original, targets)
    out.files["stage_one_trace.csv"] = _trace_csv(trace)
    out.files["summary.json"] = _dump_json(summary)
    if save_adversarial:
        for name, r in zip(ids, results):
            suffix = "pgm" if r.adversarial.shape[2] == 1 else "ppm"
            out.files[f"adv_{name}.{suffix}"] = pnm.encode_pnm(r.adversarial)
    return out


def run_stage_one_only(cfg: RunConfig) -> RunOutput:
    ids, original, _ = load_scores(cfg)
    _require_pairs(original.size)
    s1 = _stage_one_cfg(cfg)
    targets, trace = optimize_targets(original, s1)
    summary = _summary_base(cfg)
    summary.update(
        n_scores=len(ids),
        stage_one=_stage_one_summary(original, targets, s1, trace),
        score_change_diagnostic=score_change_diagnostic(original, targets),
    )
    out = RunOutput(summary=summary)
    out.files["targets.csv"] = _csv_text(("id", "orig_score", "target_score"), zip(ids, original, targets))
    out.files["score_changes.csv"] = _diagnostic_csv(original, targets)
    out.files["stage_one_trace.csv"] = _trace_csv(trace)
    out.files["summary.json"] = _dump_json(summary)
    return out


def run_metrics_only(cfg: RunConfig) -> RunOutput:
    if cfg.after_scores_file is None:
        raise ArgumentError("metrics_only needs --after-scores")
    ids, before, _ = load_scores(cfg)
    after_ids, after = ingest_scores(cfg.after_scores_file)
    if after_ids != ids:
        raise ArgumentError("before and after score files must list the same ids in the same order")
    _require_pairs(before.size)
    summary = _summary_base(cfg)
    summary.update(n_scores=len(ids), metrics=evaluate(before, after, cfg.bounds).as_dict())
    return RunOutput(summary=summary, files={"summary.json": _dump_json(summary)})


ABLATION_HEADERS = {
    "beta": ("beta", "srocc_beta", "srocc", "rmse", "error"),
    "lambda": (
        "value", "srocc_target_vs_adv", "krocc_target_vs_adv", "plcc_target_vs_adv",
        "rmse_orig_vs_adv", "srocc_orig_vs_adv", "rmse_orig_vs_target",
    ),
}


def run_ablation(cfg: RunConfig) -> RunOutput:
    """One run per swept value.

    A ``beta`` sweep runs Stage One only and reports the soft-vs-hard
    correlation gap. ``lambda_var`` and ``lambda_mse`` sweeps run the whole
    attack and compare targets with the achieved scores.
    """
    if cfg.sweep not in SWEEPS:
        raise ArgumentError(f"ablation needs --sweep in {SWEEPS}")
    if not cfg.sweep_values:
        raise ArgumentError("ablation needs at least one value in --values")
    rows = []
    if cfg.sweep == "beta":
        ids, original, _ = load_scores(cfg)
        _require_pairs(original.size)
        for beta in cfg.sweep_values:
            s1 = _stage_one_cfg(cfg, beta=float(beta))
            targets, _ = optimize_targets(original, s1)
            soft = soft_srocc(targets, original, s1.beta, soft_reference=False)
            hard = srocc(targets, original)
            rows.append((float(beta), soft, hard, rmse(targets, original), abs(soft - hard)))
        header = ABLATION_HEADERS["beta"]
    else:
        ids, images = load_images(cfg)
        _require_pairs(len(images))
        spec = ScorerSpec.named(cfg.scorer)
        original = score_set(spec, images)
        for value in cfg.sweep_values:
            s1 = _stage_one_cfg(cfg, **{cfg.sweep: float(value)})
            targets, _ = optimize_targets(original, s1)
            results, _ = attack_set(spec, images, targets, cfg.attack, cfg.bounds, cfg.jobs)
            achieved = np.array([r.achieved_score for r in results])
            c = correlation_summary(targets, achieved)
            rows.append((
                float(value), c["srocc"], c["krocc"], c["plcc"],
                rmse(original, achieved), srocc(original, achieved), rmse(original, targets),
            ))
        header = ABLATION_HEADERS["lambda"]
    summary = _summary_base(cfg)
    summary.update(sweep=cfg.sweep, rows=[dict(zip(header, row)) for row in rows])
    out = RunOutput(summary=summary)
    out.files["ablation.csv"] = _csv_text(header, rows)
    out.files["summary.json"] = _dump_json(summary)
    return out


def prepare_out_dir(path) -> Path:
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArgumentError(f"cannot create output directory {out}: {exc}") from None
    if not os.access(out, os.W_OK):
        raise ArgumentError(f"output directory {out} is not writable")
    return out


def run(cfg: RunConfig, save_adversarial: bool = False) -> RunOutput:
    prepare_out_dir(cfg.out_dir)
    if cfg.mode == "full_attack":
        out = run_full_attack(cfg, save_adversarial)
    elif cfg.mode == "stage_one_only":
        out = run_stage_one_only(cfg)
    elif cfg.mode == "metrics_only":
        out = run_metrics_only(cfg)
    elif cfg.mode == "ablation":
        out = run_ablation(cfg)
    else:
        raise ArgumentError("selfcheck is run through the CLI, not run()")
    out.write(cfg.out_dir)
    return out
