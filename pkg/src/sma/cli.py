"""Command-line entry point. Exit codes: 0 ok, 2 argument, 3 parse, 4 numeric."""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import replace

from .errors import SMAError
from .metrics import RBounds
from .pipeline import MODES, SWEEPS, RunConfig, Source, run
from .scorer import FEATURE_AFFINE, LINEAR_MEAN
from .stage_one import DESK_EPOCHS, PRESETS
from .stage_two import AttackConfig

logger = logging.getLogger("sma")


def _float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sma",
        description="Two-stage rank-correlation and score-error attack on score-regression models.",
    )
    p.add_argument("--mode", choices=MODES, default="full_attack")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--images", metavar="DIR", help="directory of binary P5/P6 pixmaps")
    src.add_argument("--scores", metavar="FILE", help="'id,score' lines")
    src.add_argument("--synthetic", type=int, metavar="N", help="N seeded noise images")
    src.add_argument("--synthetic-scores", type=int, metavar="N", help="N seeded scores uniform in [0, 100]")
    p.add_argument("--after-scores", metavar="FILE", help="post-attack 'id,score' lines (metrics_only)")
    p.add_argument("--out", default="sma_out", help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scorer", choices=(FEATURE_AFFINE, LINEAR_MEAN), default=FEATURE_AFFINE)
    p.add_argument("--preset", choices=sorted(PRESETS), default="desk",
                   help="Stage One defaults; explicit flags override (desk: %d epochs)" % DESK_EPOCHS)
    p.add_argument("--beta", type=float)
    p.add_argument("--lambda-var", type=float)
    p.add_argument("--lambda-mse", type=float)
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float, help="Stage One Adam learning rate")
    p.add_argument("--warmup-fraction", type=float)
    p.add_argument("--epsilon", type=float, default=AttackConfig.epsilon)
    p.add_argument("--iterations", type=int, default=AttackConfig.iterations)
    p.add_argument("--alpha", type=float, default=AttackConfig.step_size)
    p.add_argument("--r-hi", type=float, default=RBounds.hi)
    p.add_argument("--r-lo", type=float, default=RBounds.lo)
    p.add_argument("--jobs", type=int, default=1, help="concurrent per-image attacks")
    p.add_argument("--sweep", choices=SWEEPS, help="parameter swept in ablation mode")
    p.add_argument("--values", type=_float_list, default=(), help="comma-separated sweep values")
    p.add_argument("--image-size", type=int, nargs=3, default=(32, 32, 3), metavar=("H", "W", "C"))
    p.add_argument("--save-adversarial", action="store_true", help="write adversarial images as pixmaps")
    p.add_argument("--selfcheck-scale", type=float, default=0.2)
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def config_from_args(args: argparse.Namespace) -> RunConfig:
    stage_one = PRESETS[args.preset]
    overrides = {
        "beta": args.beta,
        "lambda_var": args.lambda_var,
        "lambda_mse": args.lambda_mse,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "warmup_fraction": args.warmup_fraction,
    }
    stage_one = replace(stage_one, **{k: v for k, v in overrides.items() if v is not None})
    return RunConfig(
        mode=args.mode,
        source=Source(args.images, args.scores, args.synthetic, args.synthetic_scores),
        out_dir=args.out,
        scorer=args.scorer,
        stage_one=stage_one,
        attack=AttackConfig(args.epsilon, args.iterations, args.alpha),
        bounds=RBounds(args.r_hi, args.r_lo),
        seed=args.seed,
        jobs=args.jobs,
        after_scores_file=args.after_scores,
        sweep=args.sweep,
        sweep_values=args.values,
        image_size=tuple(args.image_size),
    )


def selfcheck(scale: float) -> int:
    from .selfcheck import run_all

    checks = run_all(scale)
    for c in checks:
        print(c.line())
    return 0 if all(c.passed for c in checks) else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.mode == "selfcheck":
            return selfcheck(args.selfcheck_scale)
        cfg = config_from_args(args)
        out = run(cfg, save_adversarial=args.save_adversarial)
    except SMAError as exc:
        print(f"sma: error: {exc}", file=sys.stderr)
        return exc.exit_code
    summary = out.summary
    if "metrics" in summary:
        m = summary["metrics"]
        print(" ".join(f"{k}={m[k]:.4f}" if isinstance(m[k], float) else f"{k}={m[k]}" for k in m))
    elif "stage_one" in summary:
        s1 = summary["stage_one"]
        print(f"srocc={s1['srocc']:.4f} srocc_beta={s1['srocc_beta']:.4f} rmse={s1['ideal']['rmse']:.4f}")
    print(f"wrote {', '.join(out.files)} to {cfg.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
