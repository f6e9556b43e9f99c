"""Command-line surface: synth, demix, learn-dict, baseline, diagnose.

Each subcommand is deterministic given its flags, writes a JSON report
when ``--out`` is given, and prints a one-line summary to stdout.
Exit codes: 0 success, 2 usage error, 3 data error, 4 numeric failure.
"""

import argparse
import json
import sys

import numpy as np

from . import baselines, dataio, diagnostics, evaluation, matrices, solver
from .dictlearn import DictLearnConfig, learn_dictionary
from .errors import (
    DataFormatError,
    DegenerateInputError,
    DimensionError,
    HsdemixError,
    MissingClassError,
    NonFiniteError,
    NumericError,
    PreconditionError,
    SingularMatrixError,
    UndefinedRocError,
)
from .solver import DemixConfig, Sparsity

_DATA_ERRORS = (
    DataFormatError,
    DegenerateInputError,
    DimensionError,
    MissingClassError,
    NonFiniteError,
    PreconditionError,
    SingularMatrixError,
    UndefinedRocError,
)


def _write_report(report: dict, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(report, indent=2, sort_keys=True))
        fh.write("\n")


def _matrix_as_cube(mat) -> dataio.HsCube:
    return dataio.fold(mat, 1, mat.shape[1])


def _load_matrix(path):
    return dataio.unfold(dataio.read_cube(path))


def _binary_labels(label_map: dataio.LabelMap, class_id) -> np.ndarray:
    ids = label_map.class_ids
    if class_id is None:
        return (ids != 0).astype(np.int64)
    if not np.any(ids == class_id):
        present = sorted(int(c) for c in np.unique(ids) if c != 0)
        raise MissingClassError(
            f"class {class_id} absent from labels; present classes: {present}"
        )
    return (ids == class_id).astype(np.int64)


def cmd_synth(args) -> int:
    spec = dataio.SynthSpec(
        f=args.f,
        d=args.d,
        nm=args.nm,
        r=args.r,
        mode=Sparsity(args.mode),
        sparsity=args.sparsity,
        seed=args.seed,
    )
    gen = dataio.synthesize_separated if args.separated else dataio.synthesize
    m, gt, dic = gen(spec)

    prefix = args.out_prefix
    dataio.write_cube(_matrix_as_cube(m), f"{prefix}_data.hsc")
    dataio.write_cube(_matrix_as_cube(gt.l), f"{prefix}_gt_l.hsc")
    dataio.write_cube(_matrix_as_cube(gt.s), f"{prefix}_gt_s.hsc")
    dataio.write_dict(dic, f"{prefix}_dict.hsd")
    labels = dataio.support_labels(gt)
    dataio.write_labels(
        dataio.LabelMap(n=1, m=spec.nm, class_ids=labels), f"{prefix}_labels.hsl"
    )
    print(
        f"synth: wrote {prefix}_data.hsc ({spec.f}x{spec.nm}), dict {spec.f}x{spec.d}, "
        f"{int(labels.sum())} target columns"
    )
    return 0


def _demix_config(args, mode) -> DemixConfig:
    return DemixConfig(
        mode=mode,
        lam=args.lam if args.lam is not None else 1.0,
        shrink_factor=args.v,
        nu_bar=args.nu_bar,
        max_iters=args.max_iters,
        rel_tol=args.tol,
    )


def _load_demix_inputs(args):
    m = _load_matrix(args.data)
    dic = dataio.read_dict(args.dict)
    dmat = dic.mat
    if args.normalize:
        m, scale = dataio.normalize_data(m)
        if not dic.unit_columns:
            dmat = dataio.normalize_dictionary(dmat, scale).mat
    return m, dmat


def _run_single(m, dmat, cfg, labels):
    sol = solver.apg_demix(m, dmat, cfg)
    scores = evaluation.solution_scores(sol)
    report = {
        "lambda": cfg.lam,
        "iters": sol.iters_used,
        "converged": sol.converged,
        "objective_final": sol.objective_trace[-1],
        "score_max": float(scores.max()),
    }
    curve = None
    if labels is not None:
        curve = evaluation.roc(evaluation.LabeledScores(scores=scores, labels=labels))
        report.update(evaluation.curve_dict(curve))
    return report, sol, curve


def _sweep_or_single(args, m, dmat, mode, method_name):
    labels = None
    if args.labels:
        labels = _binary_labels(dataio.read_labels(args.labels), args.class_id)
    cfg = _demix_config(args, mode)
    if args.sweep:
        if labels is None:
            raise PreconditionError("--sweep needs --labels to rank lambdas by AUC")
        base = DemixConfig(
            mode=mode,
            lam=1.0,
            shrink_factor=args.v,
            nu_bar=args.nu_bar,
            max_iters=args.max_iters,
            rel_tol=args.tol,
        )
        curve, entries = evaluation.lambda_sweep(
            m, dmat, base, args.sweep, labels, jobs=args.jobs
        )
        report = evaluation.sweep_report(method_name, entries, curve)
        summary = f"{method_name}: best auc {curve.auc:.4f} over {args.sweep} lambdas"
    else:
        if args.lam is None:
            raise PreconditionError("provide --lambda or --sweep N")
        report, sol, curve = _run_single(m, dmat, cfg, labels)
        report["method"] = method_name
        auc = report.get("auc")
        summary = (
            f"{method_name}: lambda {cfg.lam:.6g}, {sol.iters_used} iters"
            + (f", auc {auc:.4f}" if auc is not None else "")
        )
    return report, summary, curve


def cmd_demix(args) -> int:
    m, dmat = _load_demix_inputs(args)
    mode = Sparsity(args.mode)
    report, summary, curve = _sweep_or_single(args, m, dmat, mode, f"demix-{mode.value}")
    if args.out:
        _write_report(report, args.out)
    if args.curve_csv and curve is not None:
        evaluation.write_curve_csv(curve, args.curve_csv)
    print(summary)
    return 0


def cmd_baseline(args) -> int:
    m, dmat = _load_demix_inputs(args)
    method = args.method
    if method in ("mf", "mf-pinv"):
        if not args.labels:
            raise PreconditionError(f"--labels is required for {method}")
        labels = _binary_labels(dataio.read_labels(args.labels), args.class_id)
        scores = (
            baselines.matched_filter(m, dmat)
            if method == "mf"
            else baselines.matched_filter_pinv(m, dmat)
        )
        curve = evaluation.roc(evaluation.LabeledScores(scores=scores, labels=labels))
        report = {"method": method, "scores": [float(v) for v in scores]}
        report.update(evaluation.curve_dict(curve))
        summary = f"{method}: auc {curve.auc:.4f}" + (" (flipped)" if curve.flipped else "")
    else:
        mode = Sparsity.ENTRY if method == "rpca-pinv" else Sparsity.COLUMN
        mt = baselines.transform_pinv(m, dmat)
        eye = matrices.matrix(np.eye(dmat.shape[1]))
        report, summary, curve = _sweep_or_single(args, mt, eye, mode, method)
    if args.out:
        _write_report(report, args.out)
    if args.curve_csv and curve is not None:
        evaluation.write_curve_csv(curve, args.curve_csv)
    print(summary)
    return 0


def cmd_learn_dict(args) -> int:
    m = _load_matrix(args.data)
    label_map = dataio.read_labels(args.labels)
    if label_map.n * label_map.m != m.shape[1]:
        raise DimensionError(
            f"label map covers {label_map.n * label_map.m} voxels, data has {m.shape[1]}"
        )
    mask = _binary_labels(label_map, args.class_id).astype(bool)
    y = matrices.frozen(np.asarray(m)[:, mask])
    cfg = DictLearnConfig(
        d=args.atoms,
        rho=args.rho,
        epsilon=args.epsilon,
        seed=args.seed,
    )
    dic, fits = learn_dictionary(y, cfg)
    dataio.write_dict(dic, args.out)
    print(
        f"learn-dict: class {args.class_id}, {int(mask.sum())} voxels, "
        f"{args.atoms} atoms, final fit {fits[-1]:.4f} -> {args.out}"
    )
    return 0


def cmd_diagnose(args) -> int:
    dic = dataio.read_dict(args.dict)
    mode = Sparsity(args.mode)
    l = _load_matrix(args.gt_l)

    if args.gt_s:
        s = _load_matrix(args.gt_s)
        gt = diagnostics.GroundTruth.from_parts(l, s, mode)
        report = (
            diagnostics.entrywise_certificate(gt, dic.mat)
            if mode is Sparsity.ENTRY
            else diagnostics.columnwise_certificate(gt, dic.mat)
        )
        payload = report.to_dict()
        summary = f"diagnose: theorem_holds={report.theorem_holds}"
        if report.failure_reasons:
            summary += f" ({'; '.join(report.failure_reasons)})"
    else:
        mu_ub = diagnostics.mu_upper_bound(l, dic.mat)
        alpha_l, alpha_u = diagnostics.frame_bounds(dic.mat)
        payload = {
            "mode": mode.value,
            "mu": mu_ub,
            "mu_is_upper_bound": True,
            "alpha_l": alpha_l,
            "alpha_u": alpha_u,
            "gfp_ok": alpha_l > 0.0,
            "theorem_holds": None,
            "notes": ["no ground-truth sparse part: mu is the support-free upper bound"],
        }
        summary = f"diagnose: mu upper bound {mu_ub:.4f} (no ground-truth S)"

    if args.out:
        _write_report(payload, args.out)
    print(summary)
    return 0


def _add_demix_flags(p) -> None:
    p.add_argument("--data", required=True, help="HSC cube with the data matrix")
    p.add_argument("--dict", required=True, help="HSD dictionary file")
    p.add_argument("--mode", choices=[m.value for m in Sparsity], default="entry")
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--sweep", type=int, default=None, metavar="N")
    p.add_argument("--v", type=float, default=0.95, help="continuation shrink factor")
    p.add_argument("--nu-bar", type=float, default=1e-4)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=5000)
    p.add_argument("--labels", default=None, help="HSL labels for ROC evaluation")
    p.add_argument("--class", dest="class_id", type=int, default=None)
    p.add_argument("--normalize", action="store_true")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--out", default=None, help="JSON report path")
    p.add_argument("--curve-csv", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hsdemix",
        description="Low-rank + dictionary-sparse demixing toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a planted instance")
    p.add_argument("--f", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nm", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--mode", choices=[m.value for m in Sparsity], default="entry")
    p.add_argument("--sparsity", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--separated", action="store_true",
                   help="well-separated construction meeting the recovery conditions")
    p.add_argument("--out-prefix", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("demix", help="run the demixing solver or a lambda sweep")
    _add_demix_flags(p)
    p.set_defaults(func=cmd_demix)

    p = sub.add_parser("baseline", help="run a comparison method")
    p.add_argument("--method", required=True, choices=["rpca-pinv", "op-pinv", "mf", "mf-pinv"])
    _add_demix_flags(p)
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("learn-dict", help="learn a dictionary from labeled voxels")
    p.add_argument("--data", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--class", dest="class_id", type=int, required=True)
    p.add_argument("--atoms", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_learn_dict)

    p = sub.add_parser("diagnose", help="incoherence diagnostics and certificates")
    p.add_argument("--data", default=None)
    p.add_argument("--dict", required=True)
    p.add_argument("--gt-l", dest="gt_l", required=True)
    p.add_argument("--gt-s", dest="gt_s", default=None)
    p.add_argument("--mode", choices=[m.value for m in Sparsity], default="entry")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_diagnose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 2
    try:
        return args.func(args)
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 4
    except (*_DATA_ERRORS, HsdemixError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
