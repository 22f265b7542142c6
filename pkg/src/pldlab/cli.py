"""Command-line front end.

Subcommands: losscheck, gradcheck, train-teacher, distill, landscape, bench.
Each run resolves its configuration from built-in defaults, then an optional
JSON config file (unknown keys are rejected), then command-line flags, and
echoes the fully-resolved result to ``<out>/config.json`` so any run can be
reproduced exactly from its own artifacts.

Exit codes: 0 success, 2 usage or configuration error, 3 verification
failure, 4 training failure, 5 I/O error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import os
import sys

import numpy as np

from .bench import bench_losses, bench_to_csv, growth_exponent
from .lab.data import make_blobs
from .lab.io import atomic_write_text
from .lab.model import load_model, model_to_dict
from .lab.optim import OptimizerConfig
from .lab.train import TrainingFailure, distill_student, metrics_to_csv, train_teacher
from .landscape import SliceSpec, make_slice, slice_to_csv
from .losses import (
    DIVERGENCES,
    DistillLossConfig,
    ce_loss,
    default_loss_config,
    evaluate_loss,
    grad_check,
    pld_loss,
)
from .numerics import make_rng
from .ranking import pl_enumerate, pl_log_likelihood, teacher_optimal_permutation

__all__ = ["main", "ConfigError", "VerificationFailure", "CONFIG_FORMAT_VERSION"]

CONFIG_FORMAT_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFICATION = 3
EXIT_TRAINING = 4
EXIT_IO = 5


class ConfigError(ValueError):
    """Configuration could not be parsed or validated."""


class VerificationFailure(RuntimeError):
    """A check suite ran to completion and found violations."""


_DATASET_DEFAULTS = {
    "n_classes": 10,
    "dim": 16,
    "train_per_class": 500,
    "test_per_class": 200,
    "spread": 1.0,
    "noise_rate": 0.1,
    "seed": 0,
}

_OPTIMIZER_DEFAULTS = {
    "learning_rate": 1e-3,
    "beta1": 0.9,
    "beta2": 0.999,
    "eps": 1e-8,
    "weight_decay": 0.01,
}

_LOSS_DEFAULTS = {
    "kind": "pld",
    "ce_mix": 0.1,
    "kd_temperature": 2.0,
    "teacher_temperature": 1.0,
    "dist_beta": 0.45,
    "dist_gamma": 0.45,
    "ls_epsilon": 0.1,
    "divergence": "forward-kl",
    "standardize": "none",
    "pld_scheme": "teacher-softmax",
}

_DEFAULTS = {
    "losscheck": {
        "seed": 0,
        "instances": 100,
        "oracle_max_classes": 6,
    },
    "gradcheck": {
        "seed": 0,
        "trials": 20,
        "step": 1e-5,
        "floor": 1e-8,
        "threshold": 1e-5,
        "class_counts": [2, 10, 100],
        "batch_sizes": [1, 8],
        "losses": ["ce", "ls", "kd", "dist", "listmle", "plistmle", "pld"],
        "teacher_temperatures": [0.5, 1.0, 4.0],
    },
    "train-teacher": {
        "seed": 0,
        "dataset": dict(_DATASET_DEFAULTS),
        "layer_sizes": [16, 256, 256, 10],
        "optimizer": dict(_OPTIMIZER_DEFAULTS),
        "epochs": 20,
        "batch_size": 128,
    },
    "distill": {
        "seed": 0,
        "teacher": "teacher.json",
        "dataset": dict(_DATASET_DEFAULTS),
        "layer_sizes": [16, 32, 10],
        "loss": dict(_LOSS_DEFAULTS),
        "optimizer": dict(_OPTIMIZER_DEFAULTS),
        "epochs": 30,
        "batch_size": 128,
    },
    "landscape": {
        "seed": 0,
        "n_classes": 100,
        "resolution": 41,
        "span": 5.0,
        "temperatures": [2.0, 1.0, 0.5, 0.1],
        "loss_kinds": ["pld", "kd", "dist"],
    },
    "bench": {
        "seed": 0,
        "sizes": [[256, 128], [256, 256], [256, 512], [256, 1024], [256, 1000]],
        "kinds": ["ce", "kd", "dist", "pld"],
        "trials": 11,
        "warmup": 3,
    },
}


def _merge(defaults, overrides, path=""):
    """Defaults updated by overrides; keys absent from defaults are rejected."""
    merged = copy.deepcopy(defaults)
    for key, value in overrides.items():
        where = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError(f"unknown config field {where!r}")
        if isinstance(defaults[key], dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config field {where!r} must be an object")
            merged[key] = _merge(defaults[key], value, where)
        else:
            merged[key] = value
    return merged


def _resolve_config(command: str, args) -> dict:
    resolved = copy.deepcopy(_DEFAULTS[command])
    if args.config is not None:
        try:
            with open(args.config) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config file: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config file must hold a JSON object")
        version = doc.pop("format_version", CONFIG_FORMAT_VERSION)
        if version != CONFIG_FORMAT_VERSION:
            raise ConfigError(f"unsupported config format_version {version!r}")
        file_command = doc.pop("command", command)
        if file_command != command:
            raise ConfigError(
                f"config file is for command {file_command!r}, not {command!r}"
            )
        resolved = _merge(resolved, doc)
    if args.seed is not None:
        resolved["seed"] = args.seed
    return resolved


def _echo_config(command: str, config: dict, out_dir: str) -> None:
    doc = {"format_version": CONFIG_FORMAT_VERSION, "command": command}
    doc.update(config)
    atomic_write_text(
        os.path.join(out_dir, "config.json"),
        json.dumps(doc, indent=2, sort_keys=True) + "\n",
    )


def _loss_config(doc: dict) -> DistillLossConfig:
    try:
        return DistillLossConfig(**doc).validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid loss config: {exc}") from exc


def _optimizer_config(doc: dict) -> OptimizerConfig:
    try:
        return OptimizerConfig(**doc).validate()
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid optimizer config: {exc}") from exc


def _dataset_from(doc: dict):
    try:
        return make_blobs(**doc)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid dataset config: {exc}") from exc


# ---------------------------------------------------------------------------
# losscheck


def _naive_weighted_ranking_loss(s, t, y, weights=None, tau_T=1.0):
    """Direct first-pick-first suffix evaluation, O(C^2); the identity oracle."""
    pi = teacher_optimal_permutation(t, y)
    if weights is None:
        z = np.asarray(t, dtype=np.float64) / tau_T
        e = np.exp(z - z.max())
        weights = (e / e.sum())[pi]
    total = 0.0
    for k in range(len(pi)):
        suffix = np.asarray(s)[pi[k:]]
        m = suffix.max()
        total += weights[k] * (-s[pi[k]] + m + math.log(np.exp(suffix - m).sum()))
    return total


def cmd_losscheck(config: dict, out_dir: str) -> int:
    rng = make_rng(config["seed"])
    instances = int(config["instances"])
    max_c = int(config["oracle_max_classes"])
    if instances < 1:
        raise ConfigError("instances must be positive")
    if not 2 <= max_c <= 8:
        raise ConfigError("oracle_max_classes must lie in [2, 8]")

    checks = []  # (name, worst, tolerance)

    worst_ce = worst_uni = worst_pl = worst_eq = 0.0
    worst_shift = worst_rowsum = 0.0
    for _ in range(instances):
        c = int(rng.integers(2, 13))
        n = int(rng.integers(1, 5))
        s = rng.normal(size=(n, c))
        t = rng.normal(size=(n, c))
        y = rng.integers(0, c, size=n)

        onehot = pld_loss(s, t, y, scheme="onehot-first")
        plain = ce_loss(s, y)
        worst_ce = max(
            worst_ce,
            abs(onehot.loss - plain.loss),
            float(np.abs(onehot.grad - plain.grad).max()),
        )

        uni = pld_loss(s, t, y, scheme="uniform")
        nll = np.mean(
            [
                -pl_log_likelihood(s[i], teacher_optimal_permutation(t[i], y[i]))
                for i in range(n)
            ]
        )
        worst_uni = max(worst_uni, abs(uni.loss - nll / c))

        pl = pld_loss(s, t, y, scheme="plistmle-exponential")
        raw = np.array([2.0 ** (c - k) - 1.0 for k in range(1, c + 1)])
        direct = np.mean(
            [
                _naive_weighted_ranking_loss(s[i], t[i], y[i], weights=raw / raw.sum())
                for i in range(n)
            ]
        )
        worst_pl = max(worst_pl, abs(pl.loss - direct))

        tau = float(rng.choice([0.5, 1.0, 2.0, 4.0]))
        res = pld_loss(s, t, y, tau_T=tau)
        direct = np.mean(
            [_naive_weighted_ranking_loss(s[i], t[i], y[i], tau_T=tau) for i in range(n)]
        )
        worst_eq = max(worst_eq, abs(res.loss - direct))

        shift = rng.uniform(-50.0, 50.0)
        for scheme in ("teacher-softmax", "uniform", "plistmle-exponential"):
            a = pld_loss(s, t, y, scheme=scheme)
            b = pld_loss(s + shift, t, y, scheme=scheme)
            worst_shift = max(worst_shift, abs(a.loss - b.loss))
            worst_rowsum = max(worst_rowsum, float(np.abs(a.grad.sum(axis=1)).max()))

    checks.append(("pld-onehot-equals-ce", worst_ce, 1e-10))
    checks.append(("pld-uniform-equals-scaled-listmle", worst_uni, 1e-10))
    checks.append(("pld-exponential-equals-plistmle", worst_pl, 1e-10))
    checks.append(("ascending-descending-equivalence", worst_eq, 1e-10))
    checks.append(("translation-invariance", worst_shift, 1e-8))
    checks.append(("gradient-rows-sum-to-zero", worst_rowsum, 1e-8))

    worst_total = worst_match = 0.0
    for c in range(2, max_c + 1):
        for _ in range(max(1, instances // 10)):
            s = rng.normal(size=c) * 2
            table = pl_enumerate(s)
            worst_total = max(worst_total, abs(sum(p for _, p in table) - 1.0))
            for pi, p in table:
                ll = pl_log_likelihood(s, list(pi))
                worst_match = max(worst_match, abs(math.exp(ll) - p))
    checks.append(("enumeration-total-probability", worst_total, 1e-9))
    checks.append(("likelihood-matches-enumeration", worst_match, 1e-10))

    lines = ["check,max_error,tolerance,status"]
    failed = False
    print(f"{'check':<38} {'max_error':>12} {'tolerance':>10} status")
    for name, err, tol in checks:
        status = "pass" if err <= tol else "FAIL"
        failed = failed or status == "FAIL"
        print(f"{name:<38} {err:>12.3e} {tol:>10.0e} {status}")
        lines.append(f"{name},{float(err)!r},{float(tol)!r},{status}")
    atomic_write_text(os.path.join(out_dir, "losscheck.csv"), "\n".join(lines) + "\n")
    if failed:
        raise VerificationFailure("loss identity checks failed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# gradcheck


def _gradcheck_variants(config: dict):
    for kind in config["losses"]:
        if kind == "kd":
            for div in DIVERGENCES:
                yield f"kd[{div}]", default_loss_config("kd", divergence=div)
        elif kind == "pld":
            for tau in config["teacher_temperatures"]:
                yield f"pld[tau_T={tau}]", default_loss_config(
                    "pld", teacher_temperature=float(tau)
                )
        else:
            yield kind, default_loss_config(kind)


def cmd_gradcheck(config: dict, out_dir: str) -> int:
    step = float(config["step"])
    if not step > 0:
        raise ConfigError("step must be positive")
    floor = float(config["floor"])
    if floor < 0:
        raise ConfigError("floor must be nonnegative")
    trials = int(config["trials"])
    if trials < 1:
        raise ConfigError("trials must be positive")
    threshold = float(config["threshold"])
    sizes = [
        (int(n), int(c))
        for c in config["class_counts"]
        for n in config["batch_sizes"]
    ]
    if not sizes:
        raise ConfigError("class_counts and batch_sizes must be nonempty")
    rng = make_rng(config["seed"])

    dist_row_only = default_loss_config("dist", dist_gamma=0.0)
    rows = []
    worst_overall = 0.0
    for label, loss_cfg in _gradcheck_variants(config):
        worst = {}
        for trial in range(trials):
            n, c = sizes[trial % len(sizes)]
            cfg_nc = loss_cfg
            if loss_cfg.kind == "dist" and n < 2:
                cfg_nc = dist_row_only  # intra-class term requires >= 2 rows
            s = rng.normal(size=(n, c))
            t = rng.normal(size=(n, c))
            y = rng.integers(0, c, size=n)
            err = grad_check(
                lambda x: evaluate_loss(cfg_nc, x, t, y), s, h=step, floor=floor
            )
            worst[(n, c)] = max(worst.get((n, c), 0.0), err)
        for (n, c), err in sorted(worst.items()):
            rows.append((label, c, n, err))
            worst_overall = max(worst_overall, err)

    lines = ["loss_kind,n_classes,batch,max_rel_error"]
    for label, c, n, err in rows:
        lines.append(f"{label},{c},{n},{float(err)!r}")
    atomic_write_text(os.path.join(out_dir, "gradcheck.csv"), "\n".join(lines) + "\n")
    print(f"gradcheck: {len(rows)} cells, worst relative error {worst_overall:.3e} "
          f"(threshold {threshold:.0e})")
    if worst_overall > threshold:
        raise VerificationFailure(
            f"gradient check failed: {worst_overall:.3e} > {threshold:.0e}"
        )
    return EXIT_OK


# ---------------------------------------------------------------------------
# training commands


def cmd_train_teacher(config: dict, out_dir: str) -> int:
    dataset = _dataset_from(config["dataset"])
    opt_cfg = _optimizer_config(config["optimizer"])
    model, records = train_teacher(
        dataset,
        config["layer_sizes"],
        opt_cfg=opt_cfg,
        epochs=int(config["epochs"]),
        seed=int(config["seed"]),
        batch_size=int(config["batch_size"]),
    )
    atomic_write_text(
        os.path.join(out_dir, "teacher.json"), json.dumps(model_to_dict(model))
    )
    atomic_write_text(os.path.join(out_dir, "metrics.csv"), metrics_to_csv(records))
    final = records[-1].test_top1 if records else float("nan")
    print(f"teacher trained: {len(records)} epochs, final test top-1 {final:.4f}")
    return EXIT_OK


def cmd_distill(config: dict, out_dir: str) -> int:
    teacher_path = config["teacher"]
    if not isinstance(teacher_path, str) or not teacher_path:
        raise ConfigError("'teacher' must be a path to a teacher model file")
    try:
        teacher = load_model(teacher_path)
    except OSError:
        raise
    except ValueError as exc:
        raise ConfigError(f"invalid teacher model: {exc}") from exc
    dataset = _dataset_from(config["dataset"])
    loss_cfg = _loss_config(config["loss"])
    opt_cfg = _optimizer_config(config["optimizer"])
    try:
        run = distill_student(
            dataset,
            teacher,
            config["layer_sizes"],
            loss_cfg,
            opt_cfg=opt_cfg,
            epochs=int(config["epochs"]),
            seed=int(config["seed"]),
            batch_size=int(config["batch_size"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    atomic_write_text(
        os.path.join(out_dir, "student.json"), json.dumps(model_to_dict(run.model))
    )
    atomic_write_text(os.path.join(out_dir, "metrics.csv"), metrics_to_csv(run.records))
    final = run.records[-1].test_top1 if run.records else float("nan")
    print(
        f"student distilled with loss={loss_cfg.kind}: {len(run.records)} epochs, "
        f"final test top-1 {final:.4f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# landscape and bench


def cmd_landscape(config: dict, out_dir: str) -> int:
    try:
        spec = SliceSpec(
            n_classes=int(config["n_classes"]),
            resolution=int(config["resolution"]),
            span=float(config["span"]),
            temperatures=tuple(float(t) for t in config["temperatures"]),
            loss_kinds=tuple(config["loss_kinds"]),
            seed=int(config["seed"]),
        ).validate()
    except ValueError as exc:
        raise ConfigError(f"invalid slice spec: {exc}") from exc
    grid = make_slice(spec)
    atomic_write_text(os.path.join(out_dir, "landscape.csv"), slice_to_csv(grid))
    points = spec.resolution**2 * len(spec.loss_kinds) * len(spec.temperatures)
    print(f"landscape: wrote {points} grid values")
    return EXIT_OK


def cmd_bench(config: dict, out_dir: str) -> int:
    try:
        results = bench_losses(
            sizes=[(int(n), int(c)) for n, c in config["sizes"]],
            kinds=tuple(config["kinds"]),
            trials=int(config["trials"]),
            warmup=int(config["warmup"]),
            seed=int(config["seed"]),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    atomic_write_text(os.path.join(out_dir, "bench.csv"), bench_to_csv(results))
    print(f"{'loss':<6} {'batch':>6} {'classes':>8} {'median_ms':>10}")
    for r in results:
        print(f"{r.loss_kind:<6} {r.batch:>6} {r.n_classes:>8} {r.median_seconds * 1e3:>10.3f}")
    try:
        print(f"pld growth exponent in C: {growth_exponent(results, 'pld'):.3f}")
    except ValueError:
        pass
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point


_COMMANDS = {
    "losscheck": cmd_losscheck,
    "gradcheck": cmd_gradcheck,
    "train-teacher": cmd_train_teacher,
    "distill": cmd_distill,
    "landscape": cmd_landscape,
    "bench": cmd_bench,
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pldlab",
        description="Ranking-loss distillation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} command")
        p.add_argument("--config", default=None, help="JSON config file")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", default=".", help="output directory (default: .)")
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _resolve_config(args.command, args)
        out_dir = args.out
        os.makedirs(out_dir, exist_ok=True)
        _echo_config(args.command, config, out_dir)
        return _COMMANDS[args.command](config, out_dir)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return EXIT_VERIFICATION
    except TrainingFailure as exc:
        print(f"training failure: {exc}", file=sys.stderr)
        return EXIT_TRAINING
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
