"""Command-line entry point: ``pcax <command> [options]``.

Every command writes plain CSV/JSON files meant for plotting tools, named
``<dataset>__<mode>__<artifact>.<ext>`` inside ``--out-dir``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from . import lda, noise, pca, varfit
from .dataio import (
    DatasetManifest,
    LoadedDataset,
    atomic_write_text,
    load_csv,
    load_registry,
    resolve_source,
    rows_to_csv,
    verify_manifest,
)
from .errors import DataError, NumericalError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERICAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class Outputs:
    out_dir: Path
    written: list

    def path(self, dataset: str, mode: str, artifact: str, ext: str = "csv") -> Path:
        return self.out_dir / f"{dataset}__{mode}__{artifact}.{ext}"

    def write(self, dataset: str, mode: str, artifact: str, text: str, ext: str = "csv") -> Path:
        p = self.path(dataset, mode, artifact, ext)
        atomic_write_text(p, text)
        self.written.append(p)
        return p


def _outputs(args) -> Outputs:
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise UsageError(f"cannot create output directory {out}: {exc}") from None
    if not out.is_dir():
        raise UsageError(f"{out} is not a directory")
    return Outputs(out, [])


def _load_input(args, need_labels: bool = False) -> tuple[str, LoadedDataset, DatasetManifest | None]:
    """Resolve ``--input`` or ``--manifest/--dataset`` and load it."""
    manifest = None
    if args.dataset and args.manifest:
        registry = load_registry(args.manifest)
        found = [m for m in registry if m.name == args.dataset]
        if not found:
            raise DataError(f"dataset {args.dataset!r} is not in {args.manifest}")
        manifest = found[0]
        path = Path(args.input) if args.input else resolve_source(
            manifest, args.data_dir, Path(args.manifest).parent)
        if path is None:
            raise DataError(f"file for dataset {manifest.name!r} ({manifest.source}) not found")
    elif args.input:
        path = Path(args.input)
    else:
        raise UsageError("give --input, or --manifest together with --dataset")
    name = args.dataset or path.stem
    loaded = load_csv(path, manifest, missing_policy=args.missing_policy,
                      class_column=args.class_column)
    if need_labels and loaded.labels is None:
        raise DataError(f"{name}: no class column given (use --class-column)")
    return name, loaded, manifest


def _fmt(v) -> str:
    return repr(float(v))


def _variance_table(model: pca.PcaModel) -> str:
    report = pca.variance_report(model)
    n = model.n_features
    rows = [[m + 1, _fmt((m + 1) / n), _fmt(model.eigenvalues[m]), _fmt(report.cumulative[m]),
             _fmt(report.ratios[m])] for m in range(n)]
    return rows_to_csv(["components", "fraction", "eigenvalue", "cumulative_variance", "g_percent"], rows)


def cmd_fit(args) -> int:
    out = _outputs(args)
    name, (data, labels, report), _ = _load_input(args)
    model = pca.fit(data, mode=args.mode)
    out.write(name, args.mode, "model", model.to_json(indent=2) + "\n", ext="json")
    out.write(name, args.mode, "variance", _variance_table(model))
    m = pca.select_components(pca.variance_report(model), args.target_g)
    if args.components is not None:
        scores = pca.transform(model, data, args.components)
        header = [f"pc{i + 1}" for i in range(args.components)]
        out.write(name, args.mode, "scores", rows_to_csv(header, scores.T.tolist()))
    print(f"{name}: N={model.n_features} Q={data.n_objects} mode={args.mode} "
          f"components for G>={args.target_g:g}%: {m}")
    return EXIT_OK


def cmd_biplot(args) -> int:
    out = _outputs(args)
    name, (data, labels, _), _ = _load_input(args)
    model = pca.fit(data, mode="correlation")
    bp = pca.biplot_data(model, data)
    header = ["y1", "y2"] + (["label"] if labels is not None else [])
    rows = bp.scores.T.tolist()
    if labels is not None:
        rows = [r + [lab] for r, lab in zip(rows, labels)]
    out.write(name, "correlation", "biplot_scores", rows_to_csv(header, rows))
    out.write(name, "correlation", "biplot_loadings", rows_to_csv(
        ["feature", "l1", "l2"], [[f, *vec] for f, vec in zip(bp.feature_names, bp.loadings.tolist())]))
    print(f"{name}: {data.n_objects} score rows, {len(bp.feature_names)} loading rows")
    return EXIT_OK


def cmd_lda(args) -> int:
    out = _outputs(args)
    name, (data, labels, _), _ = _load_input(args, need_labels=True)
    model = lda.fit_lda(lda.LabeledData(data, labels), ridge=args.ridge)
    m = model.n_axes if args.components is None else args.components
    scores = lda.transform_lda(model, data, m)
    out.write(name, "lda", "model", model.to_json(indent=2) + "\n", ext="json")
    header = [f"ld{i + 1}" for i in range(m)] + ["label"]
    out.write(name, "lda", "scores", rows_to_csv(
        header, [r + [lab] for r, lab in zip(scores.T.tolist(), labels)]))
    print(f"{name}: {model.n_axes} discriminant axes, ridge={model.ridge:g}, "
          f"separation={model.separation:.6g}")
    return EXIT_OK


def _parse_grid(text: str | None) -> tuple[float, ...] | None:
    if text is None:
        return None
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise UsageError(f"--ratio-grid must be comma-separated numbers, got {text!r}") from None


def cmd_noise_sim(args) -> int:
    out = _outputs(args)
    grid = _parse_grid(args.ratio_grid)
    kwargs = dict(objects_per_trial=args.objects, realizations=args.realizations,
                  sigma_eps=args.sigma_eps, seed=args.seed)
    if grid is not None:
        kwargs["ratio_grid"] = grid
    try:
        config = noise.NoiseSimConfig(**kwargs)
    except DataError as exc:
        raise UsageError(str(exc)) from None
    result = noise.simulate(config)
    p = out.write("noise", "correlation", "simulation", result.to_csv())
    print(f"{len(result.points)} grid points written to {p}")
    return EXIT_OK


def _majority(values: Sequence[bool]) -> bool:
    return bool(values) and 2 * sum(values) >= len(values)


def cmd_benchmark(args) -> int:
    out = _outputs(args)
    if not args.manifest:
        raise UsageError("benchmark needs --manifest")
    registry = load_registry(args.manifest)
    if not registry:
        raise DataError(f"{args.manifest} lists no datasets")
    if args.dataset:
        registry = [m for m in registry if m.name in set(args.dataset.split(","))]
    reg_dir = Path(args.manifest).parent

    curves: dict[str, list[varfit.VarianceCurve]] = {mode: [] for mode in pca.MODES}
    fits, fit_manifests, summary, discrepancies, skipped = [], [], [], [], []
    for manifest in registry:
        path = resolve_source(manifest, args.data_dir, reg_dir)
        if path is None:
            skipped.append(manifest.name)
            continue
        data, _, report = load_csv(path, manifest, missing_policy=args.missing_policy)
        discrepancies += [[manifest.name, d] for d in verify_manifest(report, manifest)]
        g = {}
        for mode in pca.MODES:
            model = pca.fit(data, mode=mode)
            out.write(manifest.name, mode, "curve", _variance_table(model))
            ratios = pca.variance_report(model).ratios
            g[mode] = ratios
            curves[mode].append(varfit.VarianceCurve.from_ratios(manifest.name, ratios, args.normalize_x))
        fit = varfit.lm_fit_exponential(curves["correlation"][-1])
        fits.append(varfit.AlphaFit(fit.alpha, fit.rss, fit.iterations, fit.converged, manifest.name))
        fit_manifests.append(manifest)
        std, raw = g["correlation"], g["covariance"]
        summary.append([manifest.name, report.n_features, report.n_objects,
                        "" if report.n_classes is None else report.n_classes,
                        _fmt(std[min(2, std.size - 1)]), _fmt(raw[min(1, raw.size - 1)]),
                        _fmt(fit.alpha)])
    if not fits:
        raise DataError(f"no dataset in {args.manifest} could be found "
                        f"(looked under --data-dir, $PCAX_DATA_DIR and {reg_dir})")

    out.write("all", "correlation", "alpha", varfit.fits_to_csv(fits))
    for mode in pca.MODES:
        for normalized, tag in ((False, "average_raw"), (True, "average_normalized")):
            source = [c if not normalized else _as_fraction(c) for c in curves[mode]]
            avg = varfit.average_curves(source, normalized=normalized)
            out.write("all", mode, tag, rows_to_csv(
                ["x", "mean", "std", "n_curves"],
                [[_fmt(x), _fmt(mu), _fmt(sd), avg.n_curves] for x, mu, sd in zip(avg.xs, avg.mean, avg.std)]))
    out.write("all", "ingest", "discrepancies", rows_to_csv(["dataset", "discrepancy"], discrepancies))
    out.write("all", "benchmark", "summary", rows_to_csv(
        ["dataset", "n_features", "n_objects", "n_classes", "g3_standardized", "g2_raw", "alpha"], summary))

    std_rule = _majority([float(r[4]) > 50.0 for r in summary])
    raw_rule = _majority([float(r[5]) >= 60.0 for r in summary])
    corr_rows = []
    labeled_count = sum(m.expected_classes is not None for m in fit_manifests)
    if len(fits) >= 3 and labeled_count >= 3:
        try:
            rs = varfit.alpha_property_correlations(fits, fit_manifests)
        except DataError as exc:
            print(f"alpha correlations skipped: {exc}", file=sys.stderr)
        else:
            counts = (labeled_count, len(fits), len(fits))
            corr_rows = [[prop, _fmt(r), n] for prop, r, n in
                         zip(("classes", "samples", "measurements"), rs, counts)]
            out.write("all", "correlation", "alpha_correlations",
                      rows_to_csv(["property", "pearson_r", "n_datasets"], corr_rows))

    for name in skipped:
        print(f"skipped {name}: file not found", file=sys.stderr)
    print(f"{len(fits)} datasets, {len(skipped)} skipped, {len(discrepancies)} manifest discrepancies")
    print(f"standardized G(3) > 50% majority: {'yes' if std_rule else 'no'}")
    print(f"raw G(2) >= 60% majority: {'yes' if raw_rule else 'no'}")
    for prop, r, n in corr_rows:
        print(f"corr(alpha, {prop}) = {float(r):+.3f} over {n} datasets")
    return EXIT_OK


def _as_fraction(curve: varfit.VarianceCurve) -> varfit.VarianceCurve:
    n = curve.xs.size
    return varfit.VarianceCurve(curve.dataset_name, np.arange(1, n + 1) / n, curve.ys)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, modes=True):
        p.add_argument("--input", help="CSV file, one object per row")
        p.add_argument("--manifest", help="dataset registry JSON")
        p.add_argument("--dataset", help="dataset name in the registry (also names outputs)")
        p.add_argument("--data-dir", help="root for registry sources (default: $PCAX_DATA_DIR)")
        p.add_argument("--class-column", help="column holding class labels")
        p.add_argument("--missing-policy", choices=("drop_row", "drop_column"), default="drop_row")
        p.add_argument("--out-dir", default=".", help="where output files go")
        if modes:
            p.add_argument("--mode", choices=pca.MODES, default="correlation")

    p = sub.add_parser("fit", help="fit PCA, write model JSON and G(M) table")
    common(p)
    p.add_argument("--target-g", type=float, default=70.0, help="target variance ratio in percent")
    p.add_argument("--components", type=int, help="also write scores of the first M components")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("biplot", help="normalized scores and loadings of the first two components")
    common(p, modes=False)
    p.set_defaults(func=cmd_biplot)

    p = sub.add_parser("lda", help="fit LDA, write model JSON and projected scores")
    common(p, modes=False)
    p.add_argument("--components", type=int, help="number of axes to project on (default: all retained)")
    p.add_argument("--ridge", type=float, help="regularization added to S_intra (default: automatic)")
    p.set_defaults(func=cmd_lda)

    p = sub.add_parser("noise-sim", help="Pearson attenuation Monte-Carlo experiment")
    p.add_argument("--ratio-grid", help="comma-separated sigma_P/sigma_eps values")
    p.add_argument("--realizations", type=int, default=1000)
    p.add_argument("--objects", type=int, default=200)
    p.add_argument("--sigma-eps", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", default=".")
    p.set_defaults(func=cmd_noise_sim)

    p = sub.add_parser("benchmark", help="variance curves, alpha fits and averages over a registry")
    common(p, modes=False)
    p.add_argument("--normalize-x", action="store_true", help="fit alpha against M/N instead of M")
    p.set_defaults(func=cmd_benchmark)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
