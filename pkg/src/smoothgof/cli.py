"""Command-line interface: transform, test, diagnose, bands, simulate.

Every command writes its primary artifact plus a sidecar manifest named
``<output>.manifest.json`` recording the resolved configuration, seeds,
package versions and content hashes of the inputs, so a run can be
reproduced exactly.  Outputs themselves contain no timestamps; identical
inputs and seeds reproduce identical files.

Exit codes: 0 success, 2 input or parse error, 3 model or marginality
error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bands import band_grid, estimate_lkc, mc_sup_quantile, solve_c_alpha
from .basis import BasisConfig
from .errors import (
    BracketError,
    DomainError,
    MarginalityError,
    RankError,
    SupportError,
)
from .estimate import ComparisonDensity, fit
from .harness import (
    StudyConfig,
    catalog,
    catalog_names,
    diagnostic_study,
    type1_power_study,
)
from .infer import deviance_test, diagnostic_table
from .model import ModelSpec, model_from_json
from .numeric import RngSeed
from .select import select

_THREADS_ENV = "SMOOTHGOF_THREADS"


# --------------------------------------------------------------------------
# input loading
# --------------------------------------------------------------------------


def _load_model(spec: str):
    """A catalog name or a path to a model JSON document."""
    if spec in catalog_names():
        return catalog(spec)
    path = Path(spec)
    if not path.exists():
        raise FileNotFoundError(
            f"model {spec!r} is neither a catalog name ({', '.join(catalog_names())}) "
            f"nor an existing file"
        )
    return model_from_json(path.read_text())


def _read_csv(path: str):
    """Header names and a float matrix from a data file."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(header):
                raise DomainError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as err:
                raise DomainError(f"{path}:{lineno}: {err}") from None
    if not rows:
        raise DomainError(f"{path}: no data rows")
    return header, np.asarray(rows, dtype=float)


def _data_in_model_order(model: ModelSpec, header, values):
    missing = [name for name in model.names if name not in header]
    if missing:
        raise DomainError(f"data is missing column {missing[0]!r}")
    cols = [header.index(name) for name in model.names]
    return values[:, cols]


def _load_u_sample(args, model):
    header, values = _read_csv(args.data)
    if args.pre_transformed:
        if np.any(values < 0) or np.any(values > 1):
            raise DomainError("pre-transformed data must lie in [0, 1]")
        return values, header
    if model is None:
        raise DomainError("a model is required unless --pre-transformed is given")
    x = _data_in_model_order(model, header, values)
    return model.rosenblatt(x), header


def _parse_degrees(text: str, dimension: int | None = None) -> BasisConfig:
    parts = [p for p in text.replace(" ", "").split(",") if p]
    if len(parts) == 1 and dimension is not None:
        parts = parts * dimension
    config = BasisConfig(tuple(int(p) for p in parts))
    if dimension is not None and config.dimension != dimension:
        raise DomainError(
            f"--degrees has {config.dimension} entries but the data has {dimension}"
        )
    return config


def _parse_subsets(text: str, header):
    """Subsets split by '|'; tokens are coordinate names or 1-based columns."""
    out = []
    for chunk in text.split("|"):
        subset = []
        for token in chunk.split(","):
            token = token.strip()
            if not token:
                continue
            if token.isdigit():
                col = int(token)
                if not 1 <= col <= len(header):
                    raise DomainError(f"column {col} outside the data header")
                subset.append(header[col - 1])
            else:
                subset.append(token)
        if subset:
            out.append(subset)
    if not out:
        raise DomainError("no subsets given")
    return out


# --------------------------------------------------------------------------
# manifests and emitters
# --------------------------------------------------------------------------


def _sha256(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return "sha256:" + digest.hexdigest()


def _model_fingerprint(spec: str) -> str:
    if spec in catalog_names():
        model = catalog(spec)
        tag = getattr(model, "fingerprint", None)
        return f"catalog:{spec}" + (f":{tag()}" if callable(tag) else "")
    return _sha256(spec)


def _write_manifest(output: str, command: str, args_dict: dict, inputs: dict,
                    outputs, started: float, extras: dict | None = None) -> str:
    manifest_path = str(output) + ".manifest.json"
    doc = {
        "command": command,
        "arguments": args_dict,
        "inputs": inputs,
        "outputs": [str(o) for o in outputs],
        "versions": {
            "smoothgof": __version__,
            "numpy": np.__version__,
            "scipy": __import__("scipy").__version__,
            "python": sys.version.split()[0],
        },
        "wall_time_s": round(time.time() - started, 3),
    }
    if extras:
        doc["extras"] = extras
    Path(manifest_path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return manifest_path


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x) -> str:
    return repr(float(x))


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------


def _cmd_transform(args) -> int:
    started = time.time()
    model = _load_model(args.model)
    header, values = _read_csv(args.data)
    x = _data_in_model_order(model, header, values)
    u = model.rosenblatt(x)
    out_header = [f"u_{name}" for name in model.names]
    _write_csv(args.output, out_header, [[_fmt(v) for v in row] for row in u])
    _write_manifest(
        args.output,
        "transform",
        {"model": args.model, "data": args.data},
        {"model": _model_fingerprint(args.model), "data": _sha256(args.data)},
        [args.output],
        started,
    )
    print(f"wrote {args.output} ({u.shape[0]} rows)")
    return 0


def _cmd_test(args) -> int:
    started = time.time()
    model = None if args.pre_transformed else _load_model(args.model)
    u, _ = _load_u_sample(args, model)
    config = _parse_degrees(args.degrees, u.shape[1])
    coeffs = fit(u, config, with_cov=False)
    selection = None if args.no_selection else select(coeffs, args.criterion)
    report = deviance_test(coeffs, selection)
    doc = report.to_dict()
    doc["alpha"] = args.alpha
    doc["criterion"] = None if args.no_selection else args.criterion
    doc["manifest"] = str(args.output) + ".manifest.json"
    Path(args.output).write_text(json.dumps(doc, indent=2) + "\n")
    inputs = {"data": _sha256(args.data)}
    if not args.pre_transformed:
        inputs["model"] = _model_fingerprint(args.model)
    _write_manifest(
        args.output,
        "test",
        {
            "model": args.model,
            "data": args.data,
            "degrees": list(config.degrees),
            "criterion": doc["criterion"],
            "alpha": args.alpha,
            "pre_transformed": args.pre_transformed,
        },
        inputs,
        [args.output],
        started,
    )
    verdict = "reject" if report.p_value < args.alpha else "retain"
    print(
        f"deviance {report.statistic:.4f} on {report.df} df, "
        f"p = {report.p_value:.4g} (log10 {report.log10_p_value:.2f}) -> {verdict}"
    )
    return 0


def _cmd_diagnose(args) -> int:
    started = time.time()
    model = _load_model(args.model)
    header, values = _read_csv(args.data)
    x = _data_in_model_order(model, header, values)
    u = model.rosenblatt(x)
    config = _parse_degrees(args.degrees, u.shape[1])
    subsets = _parse_subsets(args.subsets, header)
    coeffs = fit(u, config, with_cov=False)
    selection = select(coeffs, args.criterion)
    rows = diagnostic_table(coeffs, selection, model, subsets)

    csv_path = args.output_prefix + ".csv"
    json_path = args.output_prefix + ".json"
    _write_csv(
        csv_path,
        ["subset", "df", "statistic", "p_value", "log10_p_value"],
        [
            [
                ",".join(r.labels),
                r.m_q,
                _fmt(r.statistic),
                _fmt(r.p_value),
                _fmt(r.log10_p_value),
            ]
            for r in rows
        ],
    )
    doc = {
        "rows": [r.to_dict() for r in rows],
        "criterion": args.criterion,
        "k_star": int(selection.k_star),
        "manifest": csv_path + ".manifest.json",
    }
    Path(json_path).write_text(json.dumps(doc, indent=2) + "\n")
    _write_manifest(
        csv_path,
        "diagnose",
        {
            "model": args.model,
            "data": args.data,
            "degrees": list(config.degrees),
            "subsets": args.subsets,
            "criterion": args.criterion,
        },
        {"model": _model_fingerprint(args.model), "data": _sha256(args.data)},
        [csv_path, json_path],
        started,
    )
    for r in rows:
        label = ",".join(r.labels)
        print(f"{label:<30} df={r.m_q:<6} p={r.p_value:.4g}")
    return 0


def _svg_heatmap(grid, path: str):
    """Static heatmap of the estimate with band-exceedance outlines."""
    res1, res2 = grid.resolution
    cell = 6
    width, height = res1 * cell, res2 * cell
    dev = grid.d_hat.reshape(res1, res2) - 1.0
    scale = max(np.max(np.abs(dev)), 1e-12)
    cls = grid.classification.reshape(res1, res2)
    buf = io.StringIO()
    buf.write(
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">\n'
    )
    for i in range(res1):
        for j in range(res2):
            v = dev[i, j] / scale
            if v >= 0:
                rgb = (255, int(255 * (1 - v)), int(255 * (1 - v)))
            else:
                rgb = (int(255 * (1 + v)), int(255 * (1 + v)), 255)
            y = height - (j + 1) * cell  # u2 grows upward
            stroke = ""
            if cls[i, j] > 0:
                stroke = ' stroke="#7f0000" stroke-width="1"'
            elif cls[i, j] < 0:
                stroke = ' stroke="#00007f" stroke-width="1"'
            buf.write(
                f'<rect x="{i * cell}" y="{y}" width="{cell}" height="{cell}" '
                f'fill="rgb{rgb}"{stroke}/>\n'
            )
    buf.write("</svg>\n")
    Path(path).write_text(buf.getvalue())


def _cmd_bands(args) -> int:
    started = time.time()
    model = None if args.pre_transformed else _load_model(args.model)
    u, _ = _load_u_sample(args, model)
    p = u.shape[1]
    if p > 3:
        raise DomainError("bands are limited to three dimensions")
    config = _parse_degrees(args.degrees, p)
    if args.method == "lkc" and p != 2:
        raise DomainError("the curvature method needs a two-dimensional model")
    if args.svg and p != 2:
        raise DomainError("the heatmap needs a two-dimensional model")

    coeffs = fit(u, config, with_cov=False)
    selection = select(coeffs, args.criterion)
    cd = ComparisonDensity(coeffs, selection.active)

    seed = RngSeed(args.seed)
    if args.method == "lkc":
        lkc = estimate_lkc(config, b=args.replicates, seed=seed)
        c = solve_c_alpha(lkc, args.alpha)
        method_info = {"l1": lkc.l1, "l2": lkc.l2, "residual_norm": lkc.residual_norm}
    else:
        c = mc_sup_quantile(
            config,
            args.alpha,
            max(args.replicates, 2000),
            resolution=args.grid,
            redo_selection=(args.method == "mc-reselect"),
            criterion=args.criterion,
            n=coeffs.n,
            seed=seed,
        )
        method_info = {}

    grid = band_grid(cd, c, resolution=args.grid)
    header = [f"u{d + 1}" for d in range(p)]
    columns = [grid.points[:, d] for d in range(p)]
    if model is not None:
        eps = 1e-9
        x_cols = model.inverse_rosenblatt(np.clip(grid.points, eps, 1 - eps))
        header += [f"x_{name}" for name in model.names]
        columns += [x_cols[:, d] for d in range(p)]
    header += ["d_hat", "se0", "classification"]
    columns += [grid.d_hat, grid.se0, grid.classification]
    rows = [
        [
            _fmt(col[i]) if col is not grid.classification else int(col[i])
            for col in columns
        ]
        for i in range(grid.points.shape[0])
    ]
    _write_csv(args.output, header, rows)
    outputs = [args.output]
    if args.svg:
        _svg_heatmap(grid, args.svg)
        outputs.append(args.svg)
    inputs = {"data": _sha256(args.data)}
    if not args.pre_transformed:
        inputs["model"] = _model_fingerprint(args.model)
    _write_manifest(
        args.output,
        "bands",
        {
            "model": args.model,
            "data": args.data,
            "degrees": list(config.degrees),
            "alpha": args.alpha,
            "method": args.method,
            "criterion": args.criterion,
            "grid": args.grid,
            "replicates": args.replicates,
            "seed": args.seed,
            "pre_transformed": args.pre_transformed,
        },
        inputs,
        outputs,
        started,
        extras={"c_alpha": c, "k_star": int(selection.k_star), **method_info},
    )
    exceed = int(np.sum(grid.classification != 0))
    print(f"c = {c:.4f}; {exceed} of {grid.points.shape[0]} grid points outside the band")
    return 0


def _cmd_simulate(args) -> int:
    started = time.time()
    null = _load_model(args.null)
    truth = _load_model(args.truth) if args.truth else null
    dimension = null.dimension
    config = StudyConfig(
        truth=truth,
        null=null,
        n=args.n,
        b=args.replicates,
        degrees=_parse_degrees(args.degrees, dimension),
        alpha=args.alpha,
        criterion=args.criterion,
        seed=RngSeed(args.seed),
    )
    threads = args.threads
    if args.study in ("type1", "power"):
        result = type1_power_study(config, threads=threads)
        rows = [[args.n, _fmt(result.rejection_rate), _fmt(result.standard_error), args.replicates]]
        _write_csv(args.output, ["n", "rate", "se", "b"], rows)
        print(f"{args.study}: rate {result.rejection_rate:.4f} +- {result.standard_error:.4f}")
    elif args.study == "diagnostic":
        header = list(null.names)
        subsets = _parse_subsets(args.subsets, header) if args.subsets else [header]
        result = diagnostic_study(config, subsets, threads=threads)
        rows = [
            [label, args.n, _fmt(rate), _fmt(se), args.replicates]
            for label, (rate, se) in result.subsets.items()
        ]
        _write_csv(args.output, ["subset", "n", "rate", "se", "b"], rows)
        for label, (rate, se) in result.subsets.items():
            print(f"{label:<30} rate {rate:.4f} +- {se:.4f}")
    else:
        raise DomainError(f"unknown study {args.study!r}")
    _write_manifest(
        args.output,
        "simulate",
        {
            "study": args.study,
            "truth": args.truth,
            "null": args.null,
            "n": args.n,
            "b": args.replicates,
            "degrees": args.degrees,
            "alpha": args.alpha,
            "criterion": args.criterion,
            "subsets": args.subsets,
            "seed": args.seed,
        },
        {
            "truth": _model_fingerprint(args.truth) if args.truth else "null",
            "null": _model_fingerprint(args.null),
        },
        [args.output],
        started,
    )
    return 0


# --------------------------------------------------------------------------
# parser and entry point
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smoothgof",
        description=(
            "Smooth goodness-of-fit for multivariate models: transform data "
            "to the unit cube, test the model, localize deviations and "
            "decompose mismodeling"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_data(p, model_required=True):
        p.add_argument("--model", required=model_required,
                       help="catalog name or model JSON file")
        p.add_argument("--data", required=True, help="CSV of observations")

    t = sub.add_parser("transform", help="map observations to the unit cube")
    common_data(t)
    t.add_argument("--output", default="u.csv")
    t.set_defaults(func=_cmd_transform)

    te = sub.add_parser("test", help="deviance goodness-of-fit test")
    te.add_argument("--model", help="catalog name or model JSON file")
    te.add_argument("--data", required=True)
    te.add_argument("--degrees", required=True, help="per-coordinate degrees, e.g. 4,3")
    te.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    te.add_argument("--no-selection", action="store_true",
                    help="test the full coefficient vector")
    te.add_argument("--pre-transformed", action="store_true",
                    help="data is already on the unit cube")
    te.add_argument("--alpha", type=float, default=0.05)
    te.add_argument("--output", default="report.json")
    te.set_defaults(func=_cmd_test)

    d = sub.add_parser("diagnose", help="per-subset mismodeling table")
    common_data(d)
    d.add_argument("--degrees", required=True)
    d.add_argument("--subsets", required=True,
                   help="groups split by '|'; names or 1-based data columns, "
                        "e.g. 'X1,X2,X5|X3,X4|X7'")
    d.add_argument("--criterion", choices=("aic", "bic"), default="bic")
    d.add_argument("--output-prefix", default="diagnostic")
    d.set_defaults(func=_cmd_diagnose)

    b = sub.add_parser("bands", help="confidence bands for the comparison density")
    b.add_argument("--model", help="catalog name or model JSON file")
    b.add_argument("--data", required=True)
    b.add_argument("--degrees", required=True)
    b.add_argument("--alpha", type=float, default=0.05)
    b.add_argument("--method", choices=("lkc", "mc", "mc-reselect"), default="lkc")
    b.add_argument("--criterion", choices=("aic", "bic"), default="aic")
    b.add_argument("--grid", type=int, default=101, help="lattice points per dimension")
    b.add_argument("--replicates", type=int, default=2000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--svg", help="also render a heatmap to this file")
    b.add_argument("--pre-transformed", action="store_true")
    b.add_argument("--output", default="grid.csv")
    b.set_defaults(func=_cmd_bands)

    s = sub.add_parser("simulate", help="type-I, power and diagnostic studies")
    s.add_argument("--study", choices=("type1", "power", "diagnostic"), required=True)
    s.add_argument("--truth", help="catalog name or model file; defaults to the null")
    s.add_argument("--null", required=True, help="catalog name or model file")
    s.add_argument("-n", type=int, required=True, help="sample size per replicate")
    s.add_argument("-B", "--replicates", type=int, required=True)
    s.add_argument("--degrees", default="3", help="per-coordinate degrees or one shared value")
    s.add_argument("--alpha", type=float, default=0.05)
    s.add_argument("--criterion", choices=("aic", "bic"))
    s.add_argument("--subsets", help="diagnostic study groups, as in diagnose")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int,
                   default=int(os.environ.get(_THREADS_ENV, "1")))
    s.add_argument("--output", default="study.csv")
    s.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MarginalityError, SupportError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 3
    except (BracketError, RankError, FloatingPointError) as err:
        print(f"numeric error: {err}", file=sys.stderr)
        return 4
    except (
        DomainError,
        FileNotFoundError,
        KeyError,
        json.JSONDecodeError,
        csv.Error,
        UnicodeDecodeError,
        ValueError,
    ) as err:
        message = err.args[0] if err.args else err
        print(f"error: {message}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
