"""
Command-line interface.

    python -m salnet gen-data --classes 20 --per-class 20 --size 32 --seed 0 --out data/
    python -m salnet train    --config run.conf --data data/ --out runs/inter
    python -m salnet eval     --checkpoint runs/inter/model.ckpt --config runs/inter/config.txt --data data/
    python -m salnet ablate   --config run.conf --data data/ --out runs/ablation
    python -m salnet sweep    --config run.conf --data data/ --key trir.beta --values 0,0.005,0.01,0.1,0.5 --out runs/beta
    python -m salnet plot     --log runs/ablation/ablation.csv --out plots/

Exit codes: 0 success, 1 internal error, 2 configuration error, 3 data error,
4 numeric divergence.
"""

import argparse
import sys
from contextlib import contextmanager
from pathlib import Path
from typing import Callable, Iterator, List, Optional, Sequence

from dotenv import load_dotenv
from rich.progress import BarColumn, MofNCompleteColumn, Progress, TextColumn, TimeElapsedColumn

from salnet import __version__
from salnet.config.constants import ExitCode
from salnet.config.run_config import RunConfig
from salnet.config.settings import settings
from salnet.data.directory import export_directory, load_directory
from salnet.data.synthetic import generate_synthetic, synthetic_config
from salnet.harness.ablation import ablate, total_runs
from salnet.harness.evaluator import evaluate, write_eval_log
from salnet.harness.plots import emit_plots
from salnet.harness.sweeps import sweep
from salnet.harness.trainer import ensure_teacher, train
from salnet.shared.exceptions import SalNetError
from salnet.shared.logger import console, get_logger, setup_logging
from salnet.shared.utils.parsers import parse_list

logger = get_logger(__name__)

LIST_KEYS = {"dilation_radii", "split", "ablation_shots", "ablation_seeds", "encoder.f_layers", "encoder.g_layers"}


@contextmanager
def progress_bar(description: str, total: int) -> Iterator[Callable[[int], None]]:
    """Yields an ``on_episode`` callback advancing a rich progress bar."""
    if not settings.app.progress:
        yield lambda _: None
        return
    with Progress(
        TextColumn("[bold]{task.description}"),
        BarColumn(),
        MofNCompleteColumn(),
        TimeElapsedColumn(),
        console=console,
        transient=True,
    ) as progress:
        task = progress.add_task(description, total=total)
        yield lambda _: progress.advance(task)


def _load_config(path: Optional[Path]) -> RunConfig:
    return RunConfig.load(path) if path else RunConfig()


def _out_dir(args: argparse.Namespace, name: str) -> Path:
    """``--out`` when given, else ``app.runs_dir/<name>``."""
    return args.out if args.out is not None else Path(settings.app.runs_dir) / name


def cmd_gen_data(args: argparse.Namespace) -> int:
    config = synthetic_config(
        num_classes=args.classes,
        images_per_class=args.per_class,
        image_size=args.size,
        seed=args.seed,
    )
    dataset = generate_synthetic(config)
    export_directory(dataset, args.out)
    console.print(f"{len(dataset)} images in {dataset.num_classes} classes -> {args.out}")
    return ExitCode.OK


def cmd_train(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    dataset = load_directory(args.data, config.image_size)
    out = _out_dir(args, args.config.stem if args.config else "default")
    if not args.no_auto_teacher:
        config = ensure_teacher(config, dataset, out)
    with progress_bar("train", config.episodes_train) as on_episode:
        result = train(config, dataset, out, on_episode=on_episode)
    console.print(f"checkpoint: {result.checkpoint}")
    return ExitCode.OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    dataset = load_directory(args.data, config.image_size)
    with progress_bar("eval", config.episodes_eval) as on_episode:
        result = evaluate(args.checkpoint, config, dataset, workers=args.workers, on_episode=on_episode)
    if args.log:
        write_eval_log(args.log, result)
    console.print(f"{config.n_way}-way {config.w_shot}-shot ({config.eval_split}): {result}")
    return ExitCode.OK


def cmd_ablate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    dataset = load_directory(args.data, config.image_size)
    with progress_bar("ablation runs", total_runs(config)) as on_run:
        result = ablate(config, dataset, _out_dir(args, "ablation"), on_run=lambda *_: on_run(0))
    console.print(result.table())
    console.print(f"results: {result.path}")
    return ExitCode.OK


def _sweep_values(key: str, raw: Sequence[str]) -> List[str]:
    if key in LIST_KEYS:
        return list(raw)
    values: List[str] = []
    for item in raw:
        values.extend(parse_list(item))
    return values


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    dataset = load_directory(args.data, config.image_size)
    out = _out_dir(args, f"sweep_{args.key}")
    rows = sweep(config, dataset, args.key, _sweep_values(args.key, args.values), out)
    for row in rows:
        console.print(f"{row['variant']:<32} seed={row['seed']}  {row['accuracy']:.2f} ± {row['ci95']:.2f}")
    return ExitCode.OK


def cmd_plot(args: argparse.Namespace) -> int:
    written = emit_plots(args.log, args.out)
    for path in written:
        console.print(str(path))
    return ExitCode.OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="salnet", description="Saliency-guided hallucination for few-shot learning", allow_abbrev=False
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--json-logs", action="store_true", default=None, help="JSON log records on stderr")
    parser.add_argument("--log-file", type=Path, default=None)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-data", help="Generate the synthetic corpus", allow_abbrev=False)
    p.add_argument("--classes", type=int, default=20)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--size", type=int, default=32)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_gen_data)

    p = sub.add_parser("train", help="Train one configuration", allow_abbrev=False)
    p.add_argument("--config", type=Path)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="Defaults to a directory under app.runs_dir")
    p.add_argument("--no-auto-teacher", action="store_true", help="Fail instead of training a missing TriR teacher")
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("eval", help="Evaluate a checkpoint", allow_abbrev=False)
    p.add_argument("--checkpoint", type=Path, required=True)
    p.add_argument("--config", type=Path)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--log", type=Path, default=None, help="Write per-episode accuracies as CSV")
    p.set_defaults(handler=cmd_eval)

    p = sub.add_parser("ablate", help="Train and evaluate all ablation variants", allow_abbrev=False)
    p.add_argument("--config", type=Path)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--out", type=Path, default=None, help="Defaults to a directory under app.runs_dir")
    p.set_defaults(handler=cmd_ablate)

    p = sub.add_parser("sweep", help="Train and evaluate once per value of one config key", allow_abbrev=False)
    p.add_argument("--config", type=Path)
    p.add_argument("--data", type=Path, required=True)
    p.add_argument("--key", required=True)
    p.add_argument("--values", nargs="+", required=True)
    p.add_argument("--out", type=Path, default=None, help="Defaults to a directory under app.runs_dir")
    p.set_defaults(handler=cmd_sweep)

    p = sub.add_parser("plot", help="Render SVGs from result or training logs", allow_abbrev=False)
    p.add_argument("--log", type=Path, nargs="+", required=True)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(handler=cmd_plot)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    setup_logging(level=args.log_level, log_file=args.log_file, json_format=args.json_logs)
    try:
        return int(args.handler(args))
    except SalNetError as e:
        logger.error(str(e), error=type(e).__name__, exit_code=e.exit_code)
        return e.exit_code
    except KeyboardInterrupt:
        logger.warning("Interrupted")
        return ExitCode.FAILURE


if __name__ == "__main__":
    sys.exit(main())
