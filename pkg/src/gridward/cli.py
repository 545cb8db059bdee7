"""Command-line front end. One subcommand per pipeline operation:

  generate   synthesize a labeled dataset CSV
  detect     stream stored series through the outlier detector
  featurize  turn a dataset CSV into a feature CSV
  train      fit a classifier on a feature CSV, write a model file
  eval       repeated stratified train/test trials on a feature CSV
  sweep      accuracy vs training-set fraction
  preempt    accuracy vs post-onset sample budget
  cluster    DTW k-medoids subgroups within one fault class
  run        full pipeline: detect, classify, optionally cluster

A top-level `--config <file>` reads `key = value` lines (flag names with
- or _) and applies them as defaults for the chosen subcommand; explicit
flags win. Errors print a single `error: ...` line and exit nonzero.
"""

import argparse
import csv
import sys

from .anomaly import DetectorConfig, Severity, find_trigger, heatmap_scores, outlier_vector
from .classify import LabeledDataset, evaluate, train_model
from .classify.evaluation import MODEL_KINDS, budget_sweep, preemptive_curve
from .classify.model_io import save_model
from .cluster import dtw_matrix, elbow, geo_export, minmax_normalize, pam
from .features import METHODS, extract, load_features, save_features
from .ingest import (
    ScenarioSpec,
    generate_corpus,
    generate_scenario,
    load_dataset,
    parse_config_file,
    save_dataset,
)
from .pipeline import PipelineConfig, run_pipeline
from .types import FaultLabel, GridwardError


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # one line, no usage dump
        self.exit(2, f"error: {message}\n")


def _severity(text: str) -> Severity:
    t = text.strip().lower()
    if t == "moderate":
        return Severity.MODERATE
    if t == "severe":
        return Severity.SEVERE
    raise GridwardError(f"severity must be 'moderate' or 'severe', got {text!r}")


def _int_list(text: str):
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise GridwardError(f"expected comma-separated integers, got {text!r}")


def _float_list(text: str):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise GridwardError(f"expected comma-separated numbers, got {text!r}")


def _kind_list(text: str):
    kinds = [k.strip() for k in text.split(",") if k.strip()]
    for k in kinds:
        if k not in MODEL_KINDS:
            raise GridwardError(f"unknown model kind {k!r}; valid: {MODEL_KINDS}")
    return kinds


def _count_pair(text: str):
    vals = _int_list(text)
    if len(vals) != 2:
        raise GridwardError(f"expected two counts 'A,B', got {text!r}")
    return tuple(vals)


def _l_range(text: str):
    """'2..10' inclusive, or a comma list '2,3,5', or a single int."""
    t = text.strip()
    if ".." in t:
        lo, _, hi = t.partition("..")
        try:
            lo, hi = int(lo), int(hi)
        except ValueError:
            raise GridwardError(f"bad L range {text!r}; use like 2..10")
        if hi < lo:
            raise GridwardError(f"empty L range {text!r}")
        return list(range(lo, hi + 1))
    return _int_list(t)


def _need(args, *names):
    for n in names:
        if getattr(args, n) is None:
            raise GridwardError(f"missing --{n.replace('_', '-')}")


def _hyper_for(kind: str, args) -> dict:
    if kind == "svm":
        return {
            "gamma": args.gamma,
            "C": args.C,
            "tol": args.tol,
            "max_iter": args.max_iter,
        }
    if kind == "rf":
        h = {"n_trees": args.trees}
        if args.mtry is not None:
            h["features_per_split"] = args.mtry
        return h
    return {
        "hidden": args.hidden,
        "epochs": args.epochs,
        "learning_rate": args.lr,
        "batch_size": args.batch,
    }


def _add_hyper_flags(p):
    g = p.add_argument_group("svm hyperparameters")
    g.add_argument("--gamma", type=float, default=0.05, help="RBF width (default 0.05)")
    g.add_argument("--C", type=float, default=1.0, help="box constraint (default 1)")
    g.add_argument("--tol", type=float, default=1e-3, help="KKT gap tolerance")
    g.add_argument("--max-iter", type=int, default=1_000_000, help="SMO iteration cap")
    g = p.add_argument_group("random-forest hyperparameters")
    g.add_argument("--trees", type=int, default=500, help="forest size (default 500)")
    g.add_argument("--mtry", type=int, default=None, help="features per split (default ceil(sqrt(d)))")
    g = p.add_argument_group("network hyperparameters")
    g.add_argument("--hidden", type=int, default=5, help="hidden units (default 5)")
    g.add_argument("--epochs", type=int, default=2000, help="training epochs")
    g.add_argument("--lr", type=float, default=0.01, help="learning rate")
    g.add_argument("--batch", type=int, default=32, help="mini-batch size")


def _add_detector_flags(p):
    p.add_argument("--trigger-n", type=int, default=70, help="consecutive outliers to trigger (default 70)")
    p.add_argument("--severity", type=_severity, default=Severity.SEVERE, help="counting threshold: moderate|severe (default severe)")
    p.add_argument("--warmup", type=int, default=30, help="samples before flagging starts (default 30)")


def _build_parser():
    parser = _Parser(prog="gridward", description="streaming grid fault analysis")
    from . import __version__

    parser.add_argument("--version", action="version", version=f"gridward {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub_map = {}

    p = sub.add_parser("generate", parents=[], help="synthesize a labeled dataset CSV", add_help=True)
    p.add_argument("--out", help="output dataset CSV (required)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--class", dest="fault_class", type=FaultLabel.from_text, default=None, help="single-class mode: one scenario of this fault class")
    p.add_argument("--n-stations", type=int, default=126, help="stations in single-class mode (default 126)")
    p.add_argument("--minor-count", type=int, default=126, help="per-class count for the seven small classes")
    p.add_argument("--major-counts", type=_count_pair, default=(560, 559), help="counts for the two consolidated classes, 'A,B'")
    p.add_argument("--series-length", type=int, default=1802)
    p.add_argument("--noise-sigma", type=float, default=0.002)
    p.add_argument("--onset", type=int, default=600, help="earliest fault onset sample")
    p.add_argument("--onset-jitter", type=int, default=900, help="uniform extra onset delay")
    p.add_argument("--amp-jitter", type=float, default=0.25, help="per-station amplitude spread")
    p.add_argument("--baseline-jitter", type=float, default=0.15, help="per-station operating-point spread")
    p.add_argument("--geo", type=float, default=0.3, help="zone amplitude attenuation in [0,1)")
    p.add_argument("--long-fraction", type=float, default=0.1, help="share of series stretched to --long-length")
    p.add_argument("--long-length", type=int, default=3000)
    p.set_defaults(func=cmd_generate)
    sub_map["generate"] = p

    p = sub.add_parser("detect", help="run the streaming outlier detector")
    p.add_argument("--input", help="dataset CSV (required)")
    _add_detector_flags(p)
    p.add_argument("--emit-outliers", metavar="CSV", help="write station_id,t,severity rows")
    p.add_argument("--emit-heatmap", metavar="SVG", help="write the geographic score map")
    p.add_argument("--heatmap-window", type=int, default=40)
    p.set_defaults(func=cmd_detect)
    sub_map["detect"] = p

    p = sub.add_parser("featurize", help="dataset CSV -> feature CSV")
    p.add_argument("--input", help="dataset CSV (required)")
    p.add_argument("--method", choices=METHODS, default="acf")
    p.add_argument("--lags", type=int, default=20, help="feature count K (default 20)")
    p.add_argument("--output", help="feature CSV (required)")
    p.set_defaults(func=cmd_featurize)
    sub_map["featurize"] = p

    p = sub.add_parser("train", help="fit a classifier, write a model file")
    p.add_argument("--model", choices=MODEL_KINDS, help="classifier kind (required)")
    p.add_argument("--features", help="feature CSV (required)")
    p.add_argument("--out", help="model file (required)")
    p.add_argument("--seed", type=int, default=0)
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_train)
    sub_map["train"] = p

    p = sub.add_parser("eval", help="repeated stratified train/test trials")
    p.add_argument("--model-kind", choices=MODEL_KINDS, help="classifier kind (required)")
    p.add_argument("--features", help="feature CSV (required)")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", metavar="CSV", help="write trial,accuracy rows")
    p.add_argument("--confusion", metavar="CSV", help="write true_label,pred_label,count rows")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_eval)
    sub_map["eval"] = p

    p = sub.add_parser("sweep", help="accuracy vs training-set fraction")
    p.add_argument("--features", help="feature CSV (required)")
    p.add_argument("--model-kinds", type=_kind_list, default=list(MODEL_KINDS))
    p.add_argument("--fractions", type=_float_list, default=[0.05, 0.1, 0.2, 0.4, 0.8])
    p.add_argument("--trials", type=int, default=10, help="trials per sweep point")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", metavar="CSV", help="write fraction,kind,mean_accuracy,std rows")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_sweep)
    sub_map["sweep"] = p

    p = sub.add_parser("preempt", help="accuracy vs post-onset sample budget")
    p.add_argument("--input", help="dataset CSV of raw series (required)")
    p.add_argument("--samples", type=_int_list, default=[30, 60, 120, 300, 600], help="window sizes in samples")
    p.add_argument("--model-kinds", type=_kind_list, default=["rf"])
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--lags", type=int, default=20)
    p.add_argument("--seed", type=int, default=0)
    _add_detector_flags(p)
    p.add_argument("--report", metavar="CSV", help="write samples,kind,mean_accuracy,std,n_series rows")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_preempt)
    sub_map["preempt"] = p

    p = sub.add_parser("cluster", help="DTW k-medoids within one fault class")
    p.add_argument("--input", help="dataset CSV (required)")
    p.add_argument("--class", dest="fault_class", type=FaultLabel.from_text, default=None, help="restrict to one fault class, e.g. GMD2")
    p.add_argument("--L", type=int, default=None, help="cluster count")
    p.add_argument("--elbow", type=_l_range, default=None, help="L range for the elbow table, e.g. 2..10")
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--band", type=int, default=None, help="Sakoe-Chiba band half-width (default exact)")
    p.add_argument("--emit-assignments", metavar="CSV", help="write station_id,lat,lon,cluster rows")
    p.add_argument("--emit-geo", metavar="SVG", help="write the colored geographic scatter")
    p.add_argument("--emit-elbow", metavar="CSV", help="write L,avg_intra_dtw rows")
    p.set_defaults(func=cmd_cluster)
    sub_map["cluster"] = p

    p = sub.add_parser("run", help="full pipeline over a dataset CSV")
    p.add_argument("--input", help="dataset CSV (required)")
    p.add_argument("--model", help="model file from `train` (required)")
    p.add_argument("--method", choices=METHODS, default="acf")
    p.add_argument("--lags", type=int, default=20)
    p.add_argument("--classify-window", type=int, default=600, help="post-onset samples the classifier sees")
    _add_detector_flags(p)
    p.add_argument("--heatmap-window", type=int, default=40)
    p.add_argument("--cluster-class", type=FaultLabel.from_text, default=None, help="also cluster stations predicted as this class")
    p.add_argument("--L", type=int, default=5)
    p.add_argument("--restarts", type=int, default=5)
    p.add_argument("--band", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-alerts", metavar="CSV")
    p.add_argument("--emit-outliers", metavar="CSV")
    p.add_argument("--emit-heatmap", metavar="SVG")
    p.add_argument("--emit-cluster", metavar="CSV")
    p.add_argument("--emit-cluster-geo", metavar="SVG")
    p.set_defaults(func=cmd_run)
    sub_map["run"] = p

    return parser, sub_map


def _strip_config(argv):
    path = None
    rest = []
    i = 0
    while i < len(argv):
        a = argv[i]
        if a == "--config" or a.startswith("--config="):
            if path is not None:
                raise GridwardError("--config given twice")
            if a == "--config":
                if i + 1 >= len(argv):
                    raise GridwardError("--config needs a file path")
                path = argv[i + 1]
                i += 2
            else:
                path = a.partition("=")[2]
                i += 1
            continue
        rest.append(a)
        i += 1
    return path, rest


def _apply_config(path, argv, sub_map):
    opts = parse_config_file(path)
    cmd = next((a for a in argv if not a.startswith("-")), None)
    if cmd not in sub_map:
        raise GridwardError("--config requires a subcommand")
    p = sub_map[cmd]
    actions = {a.dest: a for a in p._actions if a.dest != "help"}
    defaults = {}
    for key, raw in opts.items():
        dest = key.replace("-", "_")
        if dest not in actions:
            raise GridwardError(f"config key {key!r} is not a flag of {cmd!r}")
        conv = actions[dest].type
        try:
            defaults[dest] = conv(raw) if conv is not None else raw
        except (TypeError, ValueError) as e:
            raise GridwardError(f"config key {key!r}: {e}") from None
    p.set_defaults(**defaults)


# ---------------------------------------------------------------------------
# subcommand bodies


def cmd_generate(args) -> int:
    _need(args, "out")
    overrides = dict(
        series_length=args.series_length,
        noise_sigma=args.noise_sigma,
        onset_index=args.onset,
        onset_jitter=args.onset_jitter,
        amp_jitter=args.amp_jitter,
        baseline_jitter=args.baseline_jitter,
        geo_attenuation=args.geo,
        long_fraction=args.long_fraction,
        long_length=args.long_length,
    )
    if args.fault_class is not None:
        spec = ScenarioSpec(
            fault_class=args.fault_class,
            n_stations=args.n_stations,
            seed=args.seed,
            **overrides,
        )
        data = [(s, lab) for s, lab, _ in generate_scenario(spec)]
    else:
        data = generate_corpus(
            seed=args.seed,
            minor_count=args.minor_count,
            major_counts=args.major_counts,
            **overrides,
        )
    save_dataset(data, args.out)
    print(f"wrote {len(data)} series to {args.out}")
    return 0


def cmd_detect(args) -> int:
    _need(args, "input")
    det = DetectorConfig(
        trigger_n=args.trigger_n,
        severity_threshold=args.severity,
        warmup=args.warmup,
    )
    data = load_dataset(args.input)
    if not data:
        raise GridwardError(f"{args.input}: empty dataset")
    stations = []
    truncated = []
    triggers = []
    for series, _ in data:
        sev = outlier_vector(series, det)
        tr = find_trigger(sev, det)
        stations.append(series.station)
        truncated.append(sev if tr is None else sev[: tr + 1])
        triggers.append(tr)
    if args.emit_outliers:
        with open(args.emit_outliers, "w", newline="") as fh:
            fh.write("station_id,t,severity\n")
            for st, sev in zip(stations, truncated):
                fh.writelines(
                    f"{st.station_id},{t},{int(s)}\n"
                    for t, s in enumerate(sev, start=1)
                )
    if args.emit_heatmap:
        from .viz import heatmap_svg

        scores = [
            heatmap_scores([sev], sev.shape[0], args.heatmap_window)[0]
            for sev in truncated
        ]
        heatmap_svg(
            [(st.latitude, st.longitude) for st in stations],
            scores,
            args.emit_heatmap,
            window=args.heatmap_window,
        )
    n_trig = 0
    for st, tr in zip(stations, triggers):
        if tr is not None:
            n_trig += 1
            print(f"triggered station_id={st.station_id} t={tr + 1}")
    print(f"triggered {n_trig} of {len(stations)} stations")
    return 0


def cmd_featurize(args) -> int:
    _need(args, "input", "output")
    data = load_dataset(args.input)
    if not data:
        raise GridwardError(f"{args.input}: empty dataset")
    ids = [s.station.station_id for s, _ in data]
    labels = [lab for _, lab in data]
    X = [extract(s, args.method, args.lags).values for s, _ in data]
    save_features(args.output, ids, labels, X)
    print(f"wrote {len(ids)} x {len(X[0])} features to {args.output}")
    return 0


def _load_labeled(path) -> LabeledDataset:
    ids, labels, X = load_features(path)
    return LabeledDataset.from_feature_rows(ids, labels, X)


def cmd_train(args) -> int:
    _need(args, "model", "features", "out")
    data = _load_labeled(args.features)
    model = train_model(
        args.model, data, seed=args.seed, hyper=_hyper_for(args.model, args)
    )
    save_model(model, args.out)
    print(
        f"trained {args.model} on {len(data)} x {data.feature_dim} -> {args.out}"
    )
    return 0


def cmd_eval(args) -> int:
    _need(args, "model_kind", "features")
    data = _load_labeled(args.features)
    rep = evaluate(
        data,
        args.model_kind,
        n_trials=args.trials,
        train_fraction=args.train_frac,
        seed=args.seed,
        hyper=_hyper_for(args.model_kind, args),
    )
    if args.report:
        with open(args.report, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["trial", "accuracy"])
            for i, a in enumerate(rep.accuracies):
                w.writerow([i, repr(float(a))])
    if args.confusion:
        with open(args.confusion, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["true_label", "pred_label", "count"])
            for i, ci in enumerate(rep.classes):
                for j, cj in enumerate(rep.classes):
                    w.writerow(
                        [
                            FaultLabel(int(ci)).name,
                            FaultLabel(int(cj)).name,
                            int(rep.confusion[i, j]),
                        ]
                    )
    print(
        f"kind={rep.model_kind} trials={args.trials} mean={rep.mean!r} "
        f"std={rep.std!r} train_s={rep.train_time_s:.2f} "
        f"predict_s={rep.predict_time_s:.2f}"
    )
    return 0


def cmd_sweep(args) -> int:
    _need(args, "features")
    data = _load_labeled(args.features)
    hyper = {k: _hyper_for(k, args) for k in args.model_kinds}
    rows = budget_sweep(
        data,
        args.model_kinds,
        args.fractions,
        trials_per_point=args.trials,
        seed=args.seed,
        hyper=hyper,
    )
    if args.report:
        with open(args.report, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fraction", "kind", "mean_accuracy", "std"])
            for r in rows:
                w.writerow(
                    [repr(r["fraction"]), r["kind"], repr(r["mean_accuracy"]), repr(r["std"])]
                )
    for r in rows:
        print(
            f"fraction={r['fraction']} kind={r['kind']} "
            f"mean_accuracy={r['mean_accuracy']!r}"
        )
    return 0


def cmd_preempt(args) -> int:
    _need(args, "input")
    data = load_dataset(args.input)
    det = DetectorConfig(
        trigger_n=args.trigger_n,
        severity_threshold=args.severity,
        warmup=args.warmup,
    )
    hyper = {k: _hyper_for(k, args) for k in args.model_kinds}
    rows = preemptive_curve(
        data,
        det_config=det,
        sample_counts=args.samples,
        model_kinds=args.model_kinds,
        trials=args.trials,
        train_fraction=args.train_frac,
        seed=args.seed,
        max_lag=args.lags,
        hyper=hyper,
    )
    if args.report:
        with open(args.report, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["samples", "kind", "mean_accuracy", "std", "n_series"])
            for r in rows:
                w.writerow(
                    [
                        r["samples"],
                        r["kind"],
                        repr(r["mean_accuracy"]),
                        repr(r["std"]),
                        r["n_series"],
                    ]
                )
    for r in rows:
        print(
            f"samples={r['samples']} kind={r['kind']} "
            f"mean_accuracy={r['mean_accuracy']!r} n_series={r['n_series']}"
        )
    return 0


def cmd_cluster(args) -> int:
    _need(args, "input")
    if args.L is None and args.elbow is None:
        raise GridwardError("nothing to do: give --L and/or --elbow")
    data = load_dataset(args.input)
    if args.fault_class is not None:
        data = [(s, lab) for s, lab in data if lab == args.fault_class]
        if not data:
            raise GridwardError(
                f"no series labeled {args.fault_class.name} in {args.input}"
            )
    if len(data) < 2:
        raise GridwardError("clustering needs at least 2 series")
    samples = [minmax_normalize(s) for s, _ in data]
    stations = [s.station for s, _ in data]
    dist = dtw_matrix(samples, band=args.band)
    if args.L is not None:
        clustering = pam(dist, args.L, seed=args.seed, restarts=args.restarts)
        sizes = ",".join(str(int(c)) for c in clustering.cluster_sizes())
        print(
            f"L={clustering.L} total_cost={clustering.total_cost!r} sizes={sizes}"
        )
        if args.emit_assignments or args.emit_geo:
            geo_export(
                clustering,
                stations,
                csv_path=args.emit_assignments,
                svg_path=args.emit_geo,
            )
    if args.elbow is not None:
        rows = elbow(
            None,
            args.elbow,
            seed=args.seed,
            restarts=args.restarts,
            dist=dist,
            csv_path=args.emit_elbow,
        )
        for L, avg in rows:
            print(f"elbow L={L} avg_intra_dtw={avg!r}")
    return 0


def cmd_run(args) -> int:
    _need(args, "input", "model")
    cfg = PipelineConfig(
        input_path=args.input,
        model_path=args.model,
        trigger_n=args.trigger_n,
        severity_threshold=args.severity,
        warmup=args.warmup,
        heatmap_window=args.heatmap_window,
        method=args.method,
        K=args.lags,
        classify_window=args.classify_window,
        cluster_class=args.cluster_class,
        L=args.L,
        restarts=args.restarts,
        band=args.band,
        alerts_csv=args.emit_alerts,
        outliers_csv=args.emit_outliers,
        heatmap_svg=args.emit_heatmap,
        cluster_csv=args.emit_cluster,
        cluster_svg=args.emit_cluster_geo,
        seed=args.seed,
    )
    alerts = run_pipeline(cfg)
    for a in alerts:
        print(
            f"alert station_id={a.station_id} t={a.trigger_index} "
            f"time_s={a.timestamp_s:.4f} label={a.label.name} "
            f"confidence={a.confidence:.4f}"
        )
    print(f"alerts {len(alerts)}")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    try:
        parser, sub_map = _build_parser()
        conf_path, argv = _strip_config(argv)
        if conf_path is not None:
            _apply_config(conf_path, argv, sub_map)
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            parser.error("a subcommand is required")
        return args.func(args)
    except SystemExit as e:
        return int(e.code) if e.code else 0
    except (GridwardError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
