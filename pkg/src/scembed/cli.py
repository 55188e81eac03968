"""Command-line front end: ``scembed {affinity,embed,eval,plot-scatter,plot-spy}``.

Exit status is 0 on success, 1 for invalid input and 2 when a run aborts.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from . import fileio
from .affinity import AffinityRecipe, CalibrationError, Dataset
from .core import AffinityError, OptimizerConfig, ScaleState
from .evaluation import quality_report
from .optimizer import ConvergenceError, NonFiniteError, embed
from .plotting import PlotSpec, scatter_svg, spy_svg

EXIT_INVALID = 1
EXIT_ABORT = 2


def cmd_affinity(args):
    data = Dataset(fileio.read_vectors(args.input))
    if args.knn is not None:
        recipe = AffinityRecipe("knn", k=args.knn)
    else:
        recipe = AffinityRecipe("entropic", perplexity=args.entropic)
    start = time.perf_counter()
    P = recipe.build(data)
    elapsed = time.perf_counter() - start
    fileio.write_affinity(args.output, P)
    print(f"n={P.n} nnz={P.nnz} time={elapsed:.3f}s")


def cmd_embed(args):
    P = fileio.read_affinity(args.affinity)
    config = OptimizerConfig(
        alpha=args.alpha,
        mode=args.mode,
        beta=args.beta,
        total_iterations=args.iterations,
        base_step=args.step,
        workers=args.workers,
        seed=args.seed,
        output_dim=args.dim,
        trace_every=args.trace_every,
    )
    Y, trace = embed(P, config)
    fileio.write_embedding(args.output, Y.coords)
    fileio.write_lines(args.trace or args.output + ".trace", trace.to_lines())


def _check_counts(P, coords, what="embedding"):
    if coords.shape[0] != P.n:
        raise ValueError(f"affinity has n={P.n} items but {what} has {coords.shape[0]}")


def _final_state(trace_path):
    last = None
    with open(trace_path) as fh:
        for line in fh:
            if line.strip():
                last = line
    if last is None:
        return None
    return ScaleState(float(last.split()[2]))


def cmd_eval(args):
    P = fileio.read_affinity(args.affinity)
    coords = fileio.read_embedding(args.embedding)
    _check_counts(P, coords)
    reference = None
    if args.labels:
        reference = fileio.read_labels(args.labels)
        _check_counts(P, reference, "labels file")
    state = _final_state(args.trace) if args.trace else None
    report = quality_report(P, coords, args.k, state=state, reference_labels=reference,
                            seed=args.seed, restarts=args.restarts)
    fileio.write_lines(args.output, report.to_lines())
    if args.labels_out:
        fileio.write_labels(args.labels_out, report.labels)


def _plot_spec(args):
    return PlotSpec(width=args.width, height=args.height, point_radius=args.radius,
                    color_by_label=not args.no_color, subsample_fraction=args.subsample,
                    seed=args.seed)


def cmd_plot_scatter(args):
    coords = fileio.read_embedding(args.embedding)
    labels = fileio.read_labels(args.labels) if args.labels else None
    if labels is not None and labels.shape[0] != coords.shape[0]:
        raise ValueError(f"embedding has {coords.shape[0]} points but labels file has {labels.shape[0]}")
    with open(args.output, "w") as fh:
        fh.write(scatter_svg(coords, labels, _plot_spec(args)))


def cmd_plot_spy(args):
    P = fileio.read_affinity(args.affinity)
    labels = fileio.read_labels(args.labels)
    _check_counts(P, labels, "labels file")
    with open(args.output, "w") as fh:
        fh.write(spy_svg(P, labels, _plot_spec(args)))


def _add_plot_flags(p):
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=800)
    p.add_argument("--radius", type=float, default=1.0, help="point radius in pixels")
    p.add_argument("--no-color", action="store_true", help="draw every point in one color")
    p.add_argument("--subsample", type=float, default=1.0,
                   help="fraction of points drawn, uniformly at random (default 1)")
    p.add_argument("--seed", type=int, default=0, help="subsampling seed (default 0)")


def build_parser():
    parser = argparse.ArgumentParser(prog="scembed", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("affinity", help="build a normalized similarity matrix from vectors")
    recipe = p.add_mutually_exclusive_group(required=True)
    recipe.add_argument("--knn", type=int, metavar="K", help="symmetrized K-nearest-neighbour graph")
    recipe.add_argument("--entropic", type=float, metavar="PERPLEXITY", help="entropic affinity")
    p.add_argument("input", help="CSV of vectors, one row per item")
    p.add_argument("output", help="affinity file to write")
    p.set_defaults(func=cmd_affinity)

    p = sub.add_parser("embed", help="embed an affinity matrix")
    p.add_argument("affinity")
    p.add_argument("output", help="CSV of embedding coordinates")
    p.add_argument("--trace", help="trace file (default: OUTPUT.trace)")
    p.add_argument("--mode", choices=("sce", "sne", "exaggerated"), default="sce")
    p.add_argument("--alpha", type=float, default=0.5, help="SCE mixing weight (default 0.5)")
    p.add_argument("--beta", type=float, default=12.0,
                   help="exaggeration factor, exaggerated mode only (default 12)")
    p.add_argument("--iterations", "-T", type=int, default=100, help="epochs (default 100)")
    p.add_argument("--step", type=float, default=1.0, help="base learning rate (default 1)")
    p.add_argument("--workers", type=int, default=1, help="worker threads (default 1)")
    p.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    p.add_argument("--dim", type=int, default=2, help="output dimension (default 2)")
    p.add_argument("--trace-every", type=int, default=0,
                   help="compute exact divergences every N epochs (default 0: never)")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("eval", help="cluster an embedding and score it against the affinity")
    p.add_argument("affinity")
    p.add_argument("embedding")
    p.add_argument("output", help="report file to write")
    p.add_argument("--k", type=int, required=True, help="number of clusters")
    p.add_argument("--labels", help="reference labels for the adjusted Rand index")
    p.add_argument("--trace", help="trace of the run; its last s_inv sets the scale")
    p.add_argument("--labels-out", help="write the k-means labels here")
    p.add_argument("--restarts", type=int, default=10)
    p.add_argument("--seed", type=int, default=0, help="k-means seed (default 0)")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("plot-scatter", help="SVG scatter plot of an embedding")
    p.add_argument("embedding")
    p.add_argument("output")
    p.add_argument("--labels")
    _add_plot_flags(p)
    p.set_defaults(func=cmd_plot_scatter)

    p = sub.add_parser("plot-spy", help="SVG of the label-reordered affinity nonzeros")
    p.add_argument("affinity")
    p.add_argument("labels")
    p.add_argument("output")
    _add_plot_flags(p)
    p.set_defaults(func=cmd_plot_spy)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        args.func(args)
    except (NonFiniteError, ConvergenceError) as exc:
        print(f"scembed: aborted: {exc}", file=sys.stderr)
        return EXIT_ABORT
    except (AffinityError, CalibrationError, ValueError, OSError) as exc:
        print(f"scembed: error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    return 0


if __name__ == "__main__":
    sys.exit(main())
