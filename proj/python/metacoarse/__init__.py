"""Python bindings for the metacoarse C++ library."""

import json
from os import PathLike
from typing import Iterable, Union

from ._core import (
    ParseError,
    PipelineError,
    SampleGraph,
    __version__,
    accuracy,
    build_afg,
    characterization,
    coarse_size_bound,
    coarsen,
    fidelity_scores,
    generate_synthetic,
    kron_kept_set,
    kron_reduce,
    lambda_score,
    laplacian,
    load_samples,
    save_samples,
    select_tes,
    tes_node_budget,
)
from . import _core

PathType = Union[str, PathLike]


def _config(input, output, method, ratio, seed, **options):
    cfg = {"input": str(input), "output_dir": str(output), "method": method, "ratio": ratio, "seed": seed}
    train = {k: options.pop(k) for k in list(options) if k in _TRAIN_KEYS}
    if train:
        cfg["train"] = train
    cfg.update(options)
    return json.dumps(cfg)


_TRAIN_KEYS = {"learning_rate", "epochs", "batch_size", "hidden_dim", "dropout"}


def run(input: PathType, output: PathType, method: str = "identity", ratio: float = 0.0, seed: int = 0,
        **options) -> dict:
    """Run the full pipeline and return the metrics report.

    Extra keyword arguments are run config fields (epsilon, ig_steps, ...) or
    training fields (epochs, hidden_dim, ...).
    """
    return json.loads(_core.run_pipeline(_config(input, output, method, ratio, seed, **options)))


def report(run_dir: PathType) -> dict:
    return json.loads(_core.report_from_run(str(run_dir)))


def sweep(input: PathType, output: PathType, seed: int = 0,
          methods: Iterable[str] = ("kron", "variation_edges"),
          ratios: Iterable[float] = (0.25, 0.5, 0.75, 0.999), **options):
    """Baseline plus every method x ratio. Returns (inference tsv, explainability tsv, trained models)."""
    base = _config(input, output, "identity", 0.0, seed, **options)
    return _core.sweep(base, list(methods), list(ratios))


__all__ = [
    "ParseError", "PipelineError", "SampleGraph", "__version__", "accuracy", "build_afg", "characterization",
    "coarse_size_bound", "coarsen", "fidelity_scores", "generate_synthetic", "kron_kept_set", "kron_reduce",
    "lambda_score", "laplacian", "load_samples", "report", "run", "save_samples", "select_tes", "sweep",
    "tes_node_budget",
]
