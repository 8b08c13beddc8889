"""Batch command-line front end.

Subcommands: ``generate``, ``train``, ``fit``, ``score``, ``evaluate``,
``stats``. Commands that need many parameters read a single JSON config
document; command-line flags override config keys. Every command honors a
global ``--seed`` (falling back to the config, then the ``FSVDD_SEED``
environment variable) and is deterministic under it.

Exit codes: 0 success, 2 config error, 3 data error, 4 numerical failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

import numpy as np

from . import complex_nn, dataio, evaluate, focus_svdd, svdd, synth_data
from .complex_nn import TrainConfig
from .errors import ConfigError, DataError, NumericalError
from .signal_repr import analytic_signal, instantaneous_amplitude_array

REPRESENTATION_CHOICES = ("real", "amplitude", "analytic")

_REP_DEFAULT_ACTIVATION = {"real": "relu", "amplitude": "relu",
                           "analytic": "ead"}


def _load_config(path, allowed: dict) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError as exc:
        raise ConfigError(f"config file not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    _check_keys(doc, allowed, where="config")
    return doc


def _check_keys(doc: dict, allowed: dict, where: str) -> None:
    for key, value in doc.items():
        if key not in allowed:
            raise ConfigError(f"unknown key {key!r} in {where}")
        sub = allowed[key]
        if isinstance(sub, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"{where}.{key} must be an object")
            _check_keys(value, sub, where=f"{where}.{key}")


def _resolve_seed(flag_seed, config_seed, default: int = 0) -> int:
    if flag_seed is not None:
        return int(flag_seed)
    if config_seed is not None:
        return int(config_seed)
    env = os.environ.get("FSVDD_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"FSVDD_SEED must be an integer, got {env!r}") from exc
    return default


def _train_config(doc: dict | None, seed: int) -> TrainConfig:
    doc = dict(doc or {})
    doc.setdefault("seed", seed)
    try:
        return TrainConfig(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad train section: {exc}") from exc


def _read_dataset(path) -> dataio.SignalDataset:
    if os.path.isdir(path):
        return dataio.read_dataset(path)
    if not os.path.exists(path):
        raise DataError(f"dataset not found: {path}")
    with open(path) as fh:
        signals = dataio._parse_rows(fh.read(), is_complex=False)
    if signals.size == 0:
        signals = signals.reshape(0, 0)
    return dataio.SignalDataset(signals=signals, meta=[], representation="raw")


def _transform(signals: np.ndarray, representation: str, mean: float,
               std: float) -> np.ndarray:
    x = (np.asarray(signals, dtype=np.float64) - mean) / std
    if representation == "real":
        return x
    xh = analytic_signal(x)
    if representation == "analytic":
        return xh
    if representation == "amplitude":
        return instantaneous_amplitude_array(xh)
    raise ConfigError(f"unknown representation {representation!r}")


def _model_inputs(ds: dataio.SignalDataset, preprocess: dict) -> np.ndarray:
    """Signals in the model's representation, transforming raw data."""
    rep = preprocess["representation"]
    if ds.representation == "raw":
        return _transform(ds.signals, rep, preprocess["mean"], preprocess["std"])
    if ds.representation == rep:
        return ds.signals
    raise DataError(
        f"dataset representation {ds.representation!r} does not match the "
        f"model representation {rep!r}")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

_GENERATE_SCHEMA = {
    "out_dir": None,
    "generator": {"L": None, "clusters": None, "defect": None,
                  "noise_sigma": None, "counts": None, "seed": None},
    "seed": None,
}


def cmd_generate(args) -> int:
    doc = _load_config(args.config, _GENERATE_SCHEMA)
    gen_doc = dict(doc.get("generator", {}))
    seed = _resolve_seed(args.seed, gen_doc.get("seed", doc.get("seed")),
                         default=synth_data.GeneratorConfig.seed)
    gen_doc["seed"] = seed
    try:
        cfg = synth_data.config_from_dict(gen_doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad generator section: {exc}") from exc
    out_dir = args.out_dir or doc.get("out_dir")
    if not out_dir:
        raise ConfigError("generate needs an out_dir (config key or --out-dir)")
    ds = synth_data.generate(cfg)
    digest = dataio.write_dataset(out_dir, ds,
                                  config=synth_data.config_to_dict(cfg))
    print(f"wrote {ds.signals.shape[0]} signals to {out_dir}")
    print(f"content_hash {digest}")
    return 0


_TRAIN_SCHEMA = {
    "dataset": None,
    "representation": None,
    "activation": None,
    "hidden": None,
    "per_node_b": None,
    "train": {"epochs": None, "batch_size": None, "learning_rate": None,
              "seed": None, "optimizer": None},
    "model_out": None,
    "seed": None,
}


def cmd_train(args) -> int:
    doc = _load_config(args.config, _TRAIN_SCHEMA)
    for key in ("dataset", "representation"):
        if key not in doc:
            raise ConfigError(f"train config needs {key!r}")
    rep = doc["representation"]
    if rep not in REPRESENTATION_CHOICES:
        raise ConfigError(f"representation must be one of {REPRESENTATION_CHOICES}")
    activation = doc.get("activation", _REP_DEFAULT_ACTIVATION[rep])
    if rep in ("real", "amplitude") and activation != "relu":
        raise ConfigError(f"representation {rep!r} requires the relu activation")
    if rep == "analytic" and activation not in ("crelu", "modrelu", "ead"):
        raise ConfigError("analytic representation needs a complex activation")
    model_out = args.model_out or doc.get("model_out")
    if not model_out:
        raise ConfigError("train needs model_out (config key or --model-out)")
    seed = _resolve_seed(args.seed, (doc.get("train") or {}).get("seed"))
    init_seed, shuffle_seed = (int(s) for s in
                               np.random.SeedSequence(seed).generate_state(2))
    ds = _read_dataset(doc["dataset"])
    if ds.representation != "raw":
        raise DataError("training expects a raw dataset")
    x_train = ds.rows(split="train", label="healthy")
    if x_train.shape[0] == 0:
        raise DataError("dataset has no healthy training rows")
    mean = float(x_train.mean())
    std = float(x_train.std())
    if std <= 0.0:
        raise NumericalError("training split has zero variance")
    inputs = _transform(x_train, rep, mean, std)
    hidden = tuple(doc.get("hidden", complex_nn.DEFAULT_HIDDEN))
    ae = complex_nn.build_autoencoder(inputs.shape[1], activation=activation,
                                      hidden=hidden, seed=init_seed,
                                      per_node_b=bool(doc.get("per_node_b", False)))
    cfg = _train_config(doc.get("train"), seed=shuffle_seed)
    ae = complex_nn.train(ae, inputs, cfg)
    extra = {
        "kind": "autoencoder",
        "representation": rep,
        "activation": activation,
        "preprocess": {"representation": rep, "mean": mean, "std": std},
        "train_seed": seed,
        "final_loss": ae.train_report.final_loss,
    }
    complex_nn.save_autoencoder(model_out, ae, extra=extra)
    print(f"trained {rep}/{activation} autoencoder on {inputs.shape[0]} signals")
    print(f"final_loss {ae.train_report.final_loss!r}")
    print(f"model {model_out}")
    return 0


_FIT_SCHEMA = {
    "dataset": None,
    "ae_model": None,
    "out": None,
    "mode": None,
    "epsilon": None,
    "C": None,
    "gamma_grid": None,
    "seed": None,
}


def cmd_fit(args) -> int:
    doc = _load_config(args.config, _FIT_SCHEMA)
    for key in ("dataset", "ae_model"):
        if key not in doc:
            raise ConfigError(f"fit config needs {key!r}")
    out = args.out or doc.get("out")
    if not out:
        raise ConfigError("fit needs an output path (config key 'out' or --out)")
    mode = doc.get("mode", "focus")
    if mode not in ("focus", "raw"):
        raise ConfigError("mode must be 'focus' or 'raw'")
    epsilon = float(doc.get("epsilon", 0.05))
    C = float(doc.get("C", 1.0))
    grid = tuple(doc.get("gamma_grid", svdd.DEFAULT_GAMMA_GRID))
    if not os.path.exists(doc["ae_model"]):
        raise DataError(f"model not found: {doc['ae_model']}")
    ae, extras = complex_nn.load_autoencoder(doc["ae_model"])
    preprocess = extras.get("preprocess")
    if not preprocess:
        raise DataError("autoencoder file lacks preprocessing parameters")
    ds = _read_dataset(doc["dataset"])
    labels = ds.labels
    splits = ds.splits
    x_t = ds.signals[(splits == "train") & (labels == "healthy")]
    x_v = ds.signals[(splits == "val") & (labels == "healthy")]
    if x_t.shape[0] == 0 or x_v.shape[0] == 0:
        raise DataError("dataset needs healthy train and val splits")
    rep = preprocess["representation"]
    if ds.representation == "raw":
        x_t = _transform(x_t, rep, preprocess["mean"], preprocess["std"])
        x_v = _transform(x_v, rep, preprocess["mean"], preprocess["std"])
    elif ds.representation != rep:
        raise DataError("dataset representation does not match the model")
    if mode == "raw":
        model, gamma, m_t, m_v = svdd.fit_with_gamma_search(
            x_t, x_v, epsilon, grid, C, representation_tag=rep)
        svdd.save_svdd(out, model, extra={"kind": "svdd",
                                          "preprocess": preprocess,
                                          "epsilon": epsilon})
        print(f"gamma {gamma!r}")
        print(f"density_limit {model.density_limit!r}")
        print(f"corrected_limit {model.corrected_limit!r}")
    else:
        fm, gamma = focus_svdd.fit_focus_with_gamma_search(
            x_t, x_v, ae, epsilon, grid, C, representation_tag=rep)
        thr = focus_svdd.norm_threshold(ae, x_v, epsilon)
        focus_svdd.save_focus(out, fm, extra={"preprocess": preprocess,
                                              "epsilon": epsilon,
                                              "norm_threshold": thr})
        print(f"gamma {gamma!r}")
        print(f"density_limit {fm.svdd.density_limit!r}")
        print(f"corrected_limit {fm.svdd.corrected_limit!r}")
    print(f"model {out}")
    return 0


def _load_any_model(path):
    if not os.path.exists(path):
        raise DataError(f"model not found: {path}")
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"model file is not valid JSON: {exc}") from exc
    kind = doc.get("kind", "autoencoder" if "layers" in doc else None)
    if kind == "focus":
        model, extras = focus_svdd.load_focus(path)
        return "focus", model, extras
    if kind == "svdd":
        model = svdd.svdd_from_dict(doc)
        extras = {k: v for k, v in doc.items() if k in ("preprocess", "epsilon")}
        return "svdd", model, extras
    if kind == "autoencoder":
        model, extras = complex_nn.load_autoencoder(path)
        return "autoencoder", model, extras
    raise DataError("unrecognized model file")


def cmd_score(args) -> int:
    kind, model, extras = _load_any_model(args.model)
    preprocess = extras.get("preprocess")
    if not preprocess:
        raise DataError("model file lacks preprocessing parameters")
    ds = _read_dataset(args.data)
    decision = args.decision
    valid = {"focus": ("norm", "focus_r", "focus_m"), "svdd": ("svdd",)}
    if kind == "autoencoder":
        raise DataError("score needs a fitted boundary model, not a bare "
                        "autoencoder")
    if decision not in valid[kind]:
        raise DataError(f"decision {decision!r} is not available for a "
                        f"{kind} model")
    header = "id,score,decision"
    if ds.signals.shape[0] == 0:
        rows = []
    else:
        X = _model_inputs(ds, preprocess)
        if kind == "svdd":
            dens = svdd.densities(model, X)
            scores = -dens
            preds = svdd.decide_batch(model, X)
        elif decision == "norm":
            thr = extras.get("norm_threshold")
            if thr is None:
                raise DataError("focus model lacks a stored norm threshold")
            scores = focus_svdd.residual_norms(X, model.autoencoder)
            preds = (scores > thr).astype(np.int64)
        else:
            r = focus_svdd.residual(X, model.autoencoder)
            dens = svdd.densities(model.svdd, r)
            scores = -dens
            limit = (model.svdd.corrected_limit if decision == "focus_m"
                     else model.svdd.density_limit)
            preds = svdd.decide_batch(model.svdd, r, limit=limit)
        ids = ds.ids
        rows = [f"{ids[i]},{scores[i]!r},{int(preds[i])}"
                for i in range(len(ids))]
    text = "\n".join([header, *rows]) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {len(rows)} rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


_EVALUATE_SCHEMA = {
    "dataset": None,
    "out_prefix": None,
    "representations": None,
    "decisions": None,
    "train": {"epochs": None, "batch_size": None, "learning_rate": None,
              "seed": None, "optimizer": None},
    "epsilon": None,
    "C": None,
    "gamma_grid": None,
    "n_folds": None,
    "hidden": None,
    "seed": None,
}


def cmd_evaluate(args) -> int:
    doc = _load_config(args.config, _EVALUATE_SCHEMA)
    if "dataset" not in doc:
        raise ConfigError("evaluate config needs 'dataset'")
    out_prefix = args.out_prefix or doc.get("out_prefix")
    if not out_prefix:
        raise ConfigError("evaluate needs out_prefix (config key or --out-prefix)")
    seed = _resolve_seed(args.seed, doc.get("seed"))
    try:
        spec = evaluate.AblationSpec(
            representations=tuple(doc.get("representations",
                                          evaluate.REPRESENTATIONS)),
            decisions=tuple(doc.get("decisions", evaluate.DECISIONS)),
            train=_train_config(doc.get("train"), seed=seed),
            epsilon=float(doc.get("epsilon", 0.05)),
            C=float(doc.get("C", 1.0)),
            gamma_grid=tuple(doc.get("gamma_grid", svdd.DEFAULT_GAMMA_GRID)),
            hidden=tuple(doc.get("hidden", complex_nn.DEFAULT_HIDDEN)),
            seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    ds = _read_dataset(doc["dataset"])
    plan = evaluate.FoldPlan.build(
        int(np.sum(ds.labels == "healthy")),
        n_folds=int(doc.get("n_folds", 5)), seed=seed)
    report = evaluate.run_ablation(ds, plan, spec, jobs=args.jobs)
    json_path = f"{out_prefix}.json"
    csv_path = f"{out_prefix}.csv"
    evaluate.save_report(report, json_path, csv_path)
    n_failed = sum(c.failed for c in report.cells)
    print(f"report {json_path}")
    print(f"report {csv_path}")
    print(f"cells {len(report.cells)} failed {n_failed}")
    if report.cells and n_failed == len(report.cells):
        raise NumericalError("every ablation cell failed")
    return 0


def cmd_stats(args) -> int:
    kind, model, extras = _load_any_model(args.model)
    if kind == "focus":
        ae = model.autoencoder
    elif kind == "autoencoder":
        ae = model
    else:
        raise DataError("stats needs an autoencoder or focus model")
    preprocess = extras.get("preprocess")
    if not preprocess:
        raise DataError("model file lacks preprocessing parameters")
    if preprocess["representation"] != "analytic":
        raise DataError("amplitude statistics need a complex (analytic) model")
    ds = _read_dataset(args.data)
    X = _model_inputs(ds, preprocess)
    if X.shape[0] == 0:
        raise DataError("no signals to analyze")
    stats = complex_nn.layer_amplitude_stats(ae, X)
    lines = ["layer,skewness,excess_kurtosis,ref_skewness,ref_excess_kurtosis"]
    for i, s in enumerate(stats):
        lines.append(f"{i},{s.skewness!r},{s.excess_kurtosis!r},0.0,-1.2")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        print(f"wrote {len(stats)} layer rows to {args.out}")
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fsvdd",
        description="Residual-focused data description pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a synthetic dataset")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train an autoencoder")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--model-out")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("fit", help="fit the boundary model")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("score", help="score signals with a fitted model")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--decision", required=True,
                   choices=("norm", "svdd", "focus_r", "focus_m"))
    p.add_argument("--out")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", help="run the ablation grid")
    p.add_argument("config")
    p.add_argument("--seed", type=int)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-prefix")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("stats", help="per-layer amplitude statistics")
    p.add_argument("model")
    p.add_argument("data")
    p.add_argument("--out")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
