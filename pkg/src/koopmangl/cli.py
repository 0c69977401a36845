"""Command-line surface: generate, identify, evaluate, grid, compare, bounds,
export-augmented and the end-to-end reproduce pipeline.

Parameter precedence is flags > config file > defaults.  Every run writes a
resolved-config echo (JSON) capturing the values actually used; feeding an
echo file back through ``--config`` (plus ``--out``, which is never recorded
so output bundles stay byte-comparable) reproduces the outputs byte for byte.
All numeric output files use 17 significant digits and LF line endings.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .augmented import build_augmented, spectral_radius
from .bounds import complete_report, empirical_mz, gl_truncation_bound, kernel_mismatch
from .gl_kernel import fit_decay_constant, gl_weights, tail_mass
from .hereditary import (
    BenchmarkConfig,
    Dataset,
    generate_dataset,
    load_dataset,
    prony_kernel,
    save_dataset,
)
from .identification import identify, load_model, save_model
from .lifting import Dictionary, affine_dictionary, default_dictionary
from .prediction import evaluate_rollout, mean_relative_error_curve, one_step
from .selection import METHOD_NAMES, compare_baselines, grid_search

_F = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, float):
        return _F % v
    return str(v)


def _write_csv(path: Path, header: list[str], rows: list[list], comments: list[str] = ()) -> None:
    lines = [f"# {c}" for c in comments]
    lines.append(",".join(header))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, doc: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Parameter resolution
# ---------------------------------------------------------------------------

_int_list = lambda s: [int(v) for v in str(s).split(",")]
_float_list = lambda s: [float(v) for v in str(s).split(",")]


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path) as fh:
        doc = json.load(fh)
    return doc.get("resolved_config", doc)


def _resolve(args: argparse.Namespace, spec: dict[str, tuple]) -> dict:
    """Merge flags over config file over defaults. ``spec``: name -> (parser, default)."""
    cfg = _load_config(getattr(args, "config", None))
    resolved = {}
    for name, (parser, default) in spec.items():
        flag = getattr(args, name, None)
        if flag is not None:
            resolved[name] = parser(flag) if isinstance(flag, str) else flag
        elif name in cfg:
            value = cfg[name]
            resolved[name] = parser(value) if isinstance(value, str) else value
        else:
            resolved[name] = default
    return resolved


def _echo(out_dir_or_file: Path, subcommand: str, resolved: dict, suffix: bool = False) -> None:
    doc = {
        "subcommand": subcommand,
        "resolved_config": {k: v for k, v in resolved.items() if k != "out"},
        "tool_version": __version__,
    }
    path = (
        out_dir_or_file.with_name(out_dir_or_file.name + ".config.json")
        if suffix
        else out_dir_or_file / "resolved_config.json"
    )
    _write_json(path, doc)


def _benchmark_config(r: dict) -> BenchmarkConfig:
    return BenchmarkConfig(
        j_ref=r["j_ref"],
        prony_a=tuple(r["prony_a"]),
        prony_rho=tuple(r["prony_rho"]),
        noise_std=r["noise_std"],
        prbs_amplitude=r["prbs_amplitude"],
        prbs_hold=r["prbs_hold"],
        seed=r["seed"],
    )


def _parse_dictionary(spec: str, state_dim: int) -> Dictionary:
    if spec == "default":
        if state_dim != 2:
            raise ValueError("the default dictionary is defined for 2-D states")
        return default_dictionary()
    if spec == "affine":
        return affine_dictionary(state_dim)
    return Dictionary.from_descriptors(state_dim, [d.strip() for d in spec.split(";") if d.strip()])


_GEN_SPEC = {
    "seed": (int, 0),
    "n_traj": (int, 60),
    "traj_len": (int, 600),
    "split": (_float_list, [0.6, 0.2, 0.2]),
    "noise_std": (float, 1e-3),
    "prbs_amplitude": (float, 1.0),
    "prbs_hold": (int, 10),
    "j_ref": (int, 400),
    "prony_a": (_float_list, [25e-5, 7.5e-5]),
    "prony_rho": (_float_list, [0.995, 0.97]),
}

_GRID_DEFAULT_N = [10, 25, 50, 100]
_GRID_DEFAULT_ALPHA = [0.1, 0.2, 0.3, 0.5, 0.8]


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    r = _resolve(args, _GEN_SPEC)
    dataset = generate_dataset(
        _benchmark_config(r), n_traj=r["n_traj"], traj_len=r["traj_len"], split=tuple(r["split"])
    )
    out = Path(args.out)
    save_dataset(dataset, out)
    _echo(out, "generate", r)
    print(
        f"wrote {dataset.n_traj} trajectories to {out} "
        f"(train/validation/test = {len(dataset.train)}/{len(dataset.validation)}/{len(dataset.test)})"
    )
    return 0


_IDENTIFY_SPEC = {
    "alpha": (float, 0.2),
    "n_mem": (int, 100),
    "ridge": (float, 0.0),
    "dict": (str, "default"),
    "baseline": (str, "koopman-gl"),
    "dataset": (str, None),
}


def _apply_baseline(baseline: str, dict_spec: str, n_mem: int) -> tuple[str, int]:
    presets = {
        "koopman-gl": (dict_spec, n_mem),
        "koopman-markov": (dict_spec, 0),
        "state-gl": ("affine", n_mem),
        "state-markov": ("affine", 0),
    }
    if baseline not in presets:
        raise ValueError(f"unknown baseline {baseline!r} (choose from {sorted(presets)})")
    return presets[baseline]


def cmd_identify(args) -> int:
    r = _resolve(args, _IDENTIFY_SPEC)
    if not r["dataset"]:
        raise ValueError("--dataset is required")
    dataset = load_dataset(r["dataset"])
    state_dim = dataset.train[0].state_dim
    dict_spec, n_mem = _apply_baseline(r["baseline"], r["dict"], r["n_mem"])
    dict_ = _parse_dictionary(dict_spec, state_dim)
    model = identify(dataset, dict_, r["alpha"], n_mem, r["ridge"])
    out = Path(args.out)
    save_model(model, out)
    _echo(out, "identify", r, suffix=True)
    rep = model.fit_report
    print(f"model written to {out}")
    print(f"  p = {model.p}, m = {model.m}, N = {model.n_mem}, alpha = {model.kernel.alpha}")
    print(
        f"  residual ||Y - Theta Omega||_F = {rep.residual_fro:.6e}, mu = {rep.mu:.6e}, "
        f"error bound ||D||_F/sqrt(mu) = {rep.theta_error_bound():.6e}"
    )
    return 0


_EVAL_SPEC = {
    "model": (str, None),
    "dataset": (str, None),
    "split": (str, "test"),
    "horizon": (int, 100),
}


def cmd_evaluate(args) -> int:
    r = _resolve(args, _EVAL_SPEC)
    if not (r["model"] and r["dataset"]):
        raise ValueError("--model and --dataset are required")
    if r["horizon"] < 1:
        raise ValueError("horizon must be a positive integer")
    model = load_model(r["model"])
    dataset = load_dataset(r["dataset"])
    trajs = dataset.split(r["split"])
    if trajs[0].state_dim != model.n:
        raise ValueError(
            f"model state dimension {model.n} does not match dataset {trajs[0].state_dim}"
        )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for i, traj in enumerate(trajs):
        roll = evaluate_rollout(model, traj, r["horizon"])
        ones = one_step(model, traj)
        rows.append([i, ones.nrmse, roll.nrmse, roll.diverged])
    _write_csv(
        out / "per_trajectory_nrmse.csv",
        ["traj_index", "onestep_nrmse", "rollout_nrmse", "diverged"],
        rows,
    )
    curve = mean_relative_error_curve(model, trajs, r["horizon"])
    _write_csv(
        out / "error_curve.csv",
        ["step", "mean_relative_error"],
        [[s + 1, v] for s, v in enumerate(curve)],
        comments=["relative error = ||x - xhat||_2 / (||x||_2 + 1e-08), mean over trajectories"],
    )
    _echo(out, "evaluate", r)
    ones_mean = float(np.mean([row[1] for row in rows]))
    roll_mean = float(np.mean([row[2] for row in rows]))
    print(
        f"split {r['split']}: mean one-step NRMSE = {ones_mean:.6g}, "
        f"mean rollout NRMSE = {roll_mean:.6g} over {len(rows)} trajectories"
    )
    return 0


_GRID_SPEC = {
    "dataset": (str, None),
    "n_grid": (_int_list, _GRID_DEFAULT_N),
    "alpha_grid": (_float_list, _GRID_DEFAULT_ALPHA),
    "ridge": (float, 0.0),
    "horizon": (int, 100),
    "threads": (int, None),
    "dict": (str, "default"),
}


def _run_grid(dataset: Dataset, r: dict):
    dict_ = _parse_dictionary(r["dict"], dataset.train[0].state_dim)
    return (
        grid_search(
            dataset,
            dict_,
            r["n_grid"],
            r["alpha_grid"],
            ridge=r["ridge"],
            horizon=r["horizon"],
            max_workers=r["threads"],
        ),
        dict_,
    )


def _heatmap_rows(result) -> list[list]:
    return [
        [c.n_mem, c.alpha, c.rollout_nrmse, c.onestep_nrmse, c.diverged, c.feasible]
        for c in result.grid
    ]


_HEATMAP_HEADER = ["n_mem", "alpha", "rollout_nrmse", "onestep_nrmse", "diverged", "feasible"]


def cmd_grid(args) -> int:
    r = _resolve(args, _GRID_SPEC)
    if not r["dataset"]:
        raise ValueError("--dataset is required")
    dataset = load_dataset(r["dataset"])
    result, _ = _run_grid(dataset, r)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "heatmap.csv", _HEATMAP_HEADER, _heatmap_rows(result))
    _echo(out, "grid", r)
    best_cell = min(
        (c for c in result.grid if c.feasible and np.isfinite(c.rollout_nrmse)),
        key=lambda c: (c.rollout_nrmse, c.n_mem, c.alpha),
    )
    print(
        f"best (N, alpha) = {result.best} with validation rollout NRMSE "
        f"{best_cell.rollout_nrmse:.6g}"
    )
    return 0


_COMPARE_SPEC = {
    "dataset": (str, None),
    "n_mem": (int, 100),
    "alpha": (float, 0.2),
    "ridge": (float, 0.0),
    "horizon": (int, 100),
    "threads": (int, None),
    "dict": (str, "default"),
}


def _summary_text(rows: list[tuple[str, float, float]]) -> str:
    width = max(len(r[0]) for r in rows)
    lines = [f"{'Method'.ljust(width)}  NRMSE (1-step)  NRMSE (rollout)"]
    for name, ones, roll in rows:
        lines.append(f"{name.ljust(width)}  {ones:14.6g}  {roll:15.6g}")
    return "\n".join(lines) + "\n"


def cmd_compare(args) -> int:
    r = _resolve(args, _COMPARE_SPEC)
    if not r["dataset"]:
        raise ValueError("--dataset is required")
    dataset = load_dataset(r["dataset"])
    dict_ = _parse_dictionary(r["dict"], dataset.train[0].state_dim)
    comp = compare_baselines(
        dataset,
        dict_,
        (r["n_mem"], r["alpha"]),
        ridge=r["ridge"],
        horizon=r["horizon"],
        max_workers=r["threads"],
    )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = comp.summary_rows()
    _write_csv(out / "summary.csv", ["method", "onestep_nrmse", "rollout_nrmse"], rows)
    (out / "summary.txt").write_text(_summary_text(rows))
    per_rows = [
        [m.name, i, m.per_traj_onestep[i], m.per_traj_rollout[i]]
        for m in comp.methods
        for i in range(len(m.per_traj_rollout))
    ]
    _write_csv(
        out / "per_trajectory_nrmse.csv",
        ["method", "traj_index", "onestep_nrmse", "rollout_nrmse"],
        per_rows,
    )
    _echo(out, "compare", r)
    print(_summary_text(rows), end="")
    return 0


_BOUNDS_SPEC = {
    "alpha": (float, 0.2),
    "n_mem": (int, 100),
    "kernel": (str, "prony"),
    "j_ref": (int, 400),
    "prony_a": (_float_list, [25e-5, 7.5e-5]),
    "prony_rho": (_float_list, [0.995, 0.97]),
    "ref_len": (int, 10**5),
    "j_max": (int, 10**6),
    "dataset": (str, None),
    "dict": (str, "default"),
    "xi_bar": (float, 0.0),
}


def _bounds_report(r: dict, m_z: float | None = None, m_z_source: str | None = None) -> dict:
    from .gl_kernel import _weights_vector

    if r["kernel"] == "prony":
        cfg = BenchmarkConfig(
            j_ref=r["j_ref"], prony_a=tuple(r["prony_a"]), prony_rho=tuple(r["prony_rho"])
        )
        c_star = prony_kernel(cfg)
    elif r["kernel"] == "gl":
        c_star = _weights_vector(r["alpha"], r["ref_len"])[1:]
    else:
        raise ValueError(f"unknown reference kernel {r['kernel']!r} (choose prony or gl)")

    report = kernel_mismatch(r["alpha"], r["n_mem"], c_star)
    if m_z is None:
        if r["dataset"]:
            dataset = load_dataset(r["dataset"])
            dict_ = _parse_dictionary(r["dict"], dataset.train[0].state_dim)
            m_z = empirical_mz(dataset.train, dict_)
            m_z_source = "max lifted-state norm over the training split"
        else:
            m_z = 1.0
            m_z_source = "assumed (no dataset given)"
    report = complete_report(report, m_z, r["xi_bar"])
    c_alpha = fit_decay_constant(r["alpha"], 10**5)
    return {
        "alpha": report.alpha,
        "n_mem": report.n_mem,
        "reference_kernel": r["kernel"],
        "retained_mismatch": report.retained_mismatch,
        "tail": report.tail,
        "epsilon": report.epsilon,
        "m_z": report.m_z,
        "m_z_source": m_z_source,
        "xi_bar": report.xi_bar,
        "xi_bar_note": "residual bound assumed zero" if report.xi_bar == 0.0 else "user supplied",
        "disturbance_bound": report.d_bound,
        "decay_constant": c_alpha,
        "gl_tail_mass": tail_mass(r["alpha"], r["n_mem"], r["j_max"]),
        "gl_truncation_bound": gl_truncation_bound(r["alpha"], r["n_mem"], report.m_z, c_alpha),
    }


def cmd_bounds(args) -> int:
    r = _resolve(args, _BOUNDS_SPEC)
    doc = _bounds_report(r)
    out = Path(args.out)
    _write_json(out, doc)
    _echo(out, "bounds", r, suffix=True)
    print(
        f"epsilon(N={doc['n_mem']}, alpha={doc['alpha']}) = {doc['epsilon']:.6g} "
        f"(mismatch {doc['retained_mismatch']:.6g} + tail {doc['tail']:.6g}); "
        f"disturbance bound = {doc['disturbance_bound']:.6g}"
    )
    return 0


def cmd_export_augmented(args) -> int:
    model = load_model(args.model)
    real = build_augmented(model)
    A_aug, B_aug = real.dense()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "A_aug.csv", [f"c{j}" for j in range(A_aug.shape[1])], A_aug.tolist())
    _write_csv(out / "B_aug.csv", [f"c{j}" for j in range(B_aug.shape[1])], B_aug.tolist())
    _echo(out, "export-augmented", {"model": str(args.model)})
    print(f"wrote {A_aug.shape[0]}x{A_aug.shape[1]} A_aug and {B_aug.shape} B_aug to {out}")
    return 0


_REPRODUCE_SPEC = dict(
    _GEN_SPEC,
    **{
        "n_grid": (_int_list, _GRID_DEFAULT_N),
        "alpha_grid": (_float_list, _GRID_DEFAULT_ALPHA),
        "ridge": (float, 0.0),
        "horizon": (int, 100),
        "threads": (int, None),
        "dict": (str, "default"),
        "xi_bar": (float, 0.0),
        "j_max": (int, 10**6),
    },
)

_REPRODUCE_FILES = [
    "heatmap.csv",
    "per_trajectory_nrmse.csv",
    "error_curves.csv",
    "summary.csv",
    "manifest.json",
]


def cmd_reproduce(args) -> int:
    r = _resolve(args, _REPRODUCE_SPEC)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    def stage(name):
        print(f"[reproduce] {name}")

    stage("generate")
    dataset = generate_dataset(
        _benchmark_config(r), n_traj=r["n_traj"], traj_len=r["traj_len"], split=tuple(r["split"])
    )
    save_dataset(dataset, out / "dataset")

    stage("grid search")
    grid_result, dict_ = _run_grid(dataset, r)
    _write_csv(out / "heatmap.csv", _HEATMAP_HEADER, _heatmap_rows(grid_result))

    stage(f"compare baselines at (N, alpha) = {grid_result.best}")
    comp = compare_baselines(
        dataset,
        dict_,
        grid_result.best,
        ridge=r["ridge"],
        horizon=r["horizon"],
        max_workers=r["threads"],
    )
    rows = comp.summary_rows()
    _write_csv(out / "summary.csv", ["method", "onestep_nrmse", "rollout_nrmse"], rows)
    per_rows = [
        [m.name, i, m.per_traj_onestep[i], m.per_traj_rollout[i]]
        for m in comp.methods
        for i in range(len(m.per_traj_rollout))
    ]
    _write_csv(
        out / "per_trajectory_nrmse.csv",
        ["method", "traj_index", "onestep_nrmse", "rollout_nrmse"],
        per_rows,
    )

    stage("kernel-mismatch bounds")
    bounds_doc = _bounds_report(
        {
            "alpha": grid_result.best[1],
            "n_mem": grid_result.best[0],
            "kernel": "prony",
            "j_ref": r["j_ref"],
            "prony_a": r["prony_a"],
            "prony_rho": r["prony_rho"],
            "ref_len": 10**5,
            "j_max": r["j_max"],
            "dataset": None,
            "dict": r["dict"],
            "xi_bar": r["xi_bar"],
        },
        m_z=empirical_mz(dataset.train, dict_),
        m_z_source="max lifted-state norm over the training split",
    )

    stage("per-step error curves")
    models = {m.name: m.model for m in comp.methods}
    curves = {
        name: mean_relative_error_curve(models[name], dataset.test, r["horizon"])
        for name in METHOD_NAMES
    }
    curve_rows = [
        [s + 1] + [curves[name][s] for name in METHOD_NAMES] for s in range(r["horizon"])
    ]
    _write_csv(
        out / "error_curves.csv",
        ["step"] + [n.lower().replace("-", "_") for n in METHOD_NAMES],
        curve_rows,
        comments=[
            "mean relative error per rollout step over the test split",
            "relative error = ||x - xhat||_2 / (||x||_2 + 1e-08)",
            f"disturbance_bound = {_F % bounds_doc['disturbance_bound']} "
            "(m_z * epsilon_N + xi_bar for the selected Koopman-GL model)",
        ],
    )

    kgl = models["Koopman-GL"]
    rho = spectral_radius(build_augmented(kgl)) if kgl.n_mem >= 1 else None
    manifest = {
        "tool": "koopmangl",
        "tool_version": __version__,
        "numpy_version": np.__version__,
        "kernel_backend": _kernels.backend(),
        "resolved_config": {k: v for k, v in r.items() if k != "out"},
        "dataset_manifest_hash": dataset.manifest_hash(),
        "grid_best": {"n_mem": grid_result.best[0], "alpha": grid_result.best[1]},
        "grid_settings": grid_result.settings,
        "summary": [
            {"method": name, "onestep_nrmse": ones, "rollout_nrmse": roll}
            for name, ones, roll in rows
        ],
        "bounds": bounds_doc,
        "koopman_gl_fit": {
            "residual_fro": kgl.fit_report.residual_fro,
            "mu": kgl.fit_report.mu,
            "theta_error_bound": kgl.fit_report.theta_error_bound(),
            "augmented_spectral_radius": None if rho is None else rho.value,
            "spectral_radius_estimated": None if rho is None else rho.estimated,
        },
        "files": _REPRODUCE_FILES,
    }
    _write_json(out / "manifest.json", manifest)
    print(_summary_text(rows), end="")
    print(f"bundle written to {out} ({', '.join(_REPRODUCE_FILES)} + dataset/)")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_common(p: argparse.ArgumentParser, names: list[str]) -> None:
    flags = {
        "config": dict(help="JSON config file (flags override it)"),
        "seed": dict(type=int, help="root seed for all substreams"),
        "n_traj": dict(type=int),
        "traj_len": dict(type=int),
        "split": dict(help="train,validation,test fractions, e.g. 0.6,0.2,0.2"),
        "noise_std": dict(type=float),
        "prbs_amplitude": dict(type=float),
        "prbs_hold": dict(type=int),
        "j_ref": dict(type=int),
        "prony_a": dict(help="comma-separated pair, e.g. 25e-5,7.5e-5"),
        "prony_rho": dict(help="comma-separated pair, e.g. 0.995,0.97"),
        "alpha": dict(type=float),
        "n_mem": dict(type=int),
        "ridge": dict(type=float),
        "dict": dict(help='"default", "affine" or ";"-separated feature descriptors'),
        "horizon": dict(type=int),
        "threads": dict(type=int, help="worker threads (default: hardware parallelism)"),
        "n_grid": dict(help="comma-separated memory lengths"),
        "alpha_grid": dict(help="comma-separated fractional orders"),
        "dataset": dict(help="dataset directory"),
        "model": dict(help="model file"),
        "xi_bar": dict(type=float),
        "j_max": dict(type=int),
        "ref_len": dict(type=int),
        "kernel": dict(choices=["prony", "gl"]),
        "baseline": dict(choices=["koopman-gl", "koopman-markov", "state-gl", "state-markov"]),
    }
    for name in names:
        p.add_argument(f"--{name.replace('_', '-')}", default=None, **flags[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="koopmangl",
        description="Finite-memory Koopman-GL identification and benchmark toolkit",
    )
    parser.add_argument("--version", action="version", version=f"koopmangl {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="simulate a benchmark dataset directory")
    p.add_argument("--out", required=True)
    _add_common(p, ["config", *list(_GEN_SPEC)])
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("identify", help="fit a model from a dataset")
    p.add_argument("--out", required=True, help="model file to write")
    _add_common(p, ["config", "dataset", "alpha", "n_mem", "ridge", "dict", "baseline"])
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("evaluate", help="score a model on a dataset split")
    p.add_argument("--out", required=True, help="report directory")
    _add_common(p, ["config", "model", "dataset", "horizon"])
    p.add_argument("--split", default=None, choices=["train", "validation", "test"])
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("grid", help="grid search over (N, alpha)")
    p.add_argument("--out", required=True)
    _add_common(p, ["config", "dataset", "n_grid", "alpha_grid", "ridge", "horizon", "threads", "dict"])
    p.set_defaults(func=cmd_grid)

    p = sub.add_parser("compare", help="four-model comparison on the test split")
    p.add_argument("--out", required=True)
    _add_common(p, ["config", "dataset", "n_mem", "alpha", "ridge", "horizon", "threads", "dict"])
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("bounds", help="kernel-mismatch and truncation bound report")
    p.add_argument("--out", required=True, help="report file to write")
    _add_common(
        p,
        [
            "config", "alpha", "n_mem", "kernel", "j_ref", "prony_a", "prony_rho",
            "ref_len", "j_max", "dataset", "dict", "xi_bar",
        ],
    )
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("export-augmented", help="write dense (A_aug, B_aug) matrix files")
    p.add_argument("--out", required=True)
    p.add_argument("--model", required=True)
    p.set_defaults(func=cmd_export_augmented)

    p = sub.add_parser("reproduce", help="full pipeline: generate, grid, compare, bounds")
    p.add_argument("--out", required=True)
    _add_common(p, ["config", *list(_REPRODUCE_SPEC)])
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single CLI failure funnel
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
