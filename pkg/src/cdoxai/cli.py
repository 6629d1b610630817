"""Stage-per-subcommand pipeline orchestration.

Each subcommand reads its inputs from disk, writes versioned outputs into the
output directory, and prints a one-line summary. Every output file embeds the
config hash and seed, so any report is reproducible from its header alone.

Exit codes: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import fexai as fz
from . import forest, shapley
from .errors import CdoError
from .features import (
    FEATURE_COLUMNS,
    label_flight,
    extract_operational_features,
    join_weather,
    read_feature_csv,
    read_weather_csv,
    segment_track,
    write_feature_csv,
    write_weather_csv,
)
from .ingest import TmaConfig, clip_to_tma, parse_track_csv, write_track_csv
from .synth import SynthSpec, gen_fleet


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    """Flat, file-overridable knobs for the whole pipeline."""

    seed: int = 7
    out_dir: str = "out"
    # terminal area
    tma_center_lat: float = 25.273
    tma_center_lon: float = 51.608
    tma_radius_nm: float = 45.0
    floor_ft: float = 3500.0
    # labeling
    level_threshold: float = 0.005
    cdocat_low: float = 0.30
    cdocat_high: float = 0.55
    # modeling
    scenario: str = "low_vs_notlow"
    positive_class: str = ""
    model: str = "gradient_boosting"
    k_folds: int = 5
    n_trees: int = 200
    max_depth: int = 12
    min_leaf: int = 1
    feature_subsample: str = "sqrt"
    n_rounds: int = 200
    learning_rate: float = 0.1
    boost_depth: int = 4
    boost_min_leaf: int = 1
    # fuzzy projection thresholds
    mdrate_low: float = 0.026
    mdrate_high: float = 0.044
    fltsegments_low: float = 238.0
    fltsegments_high: float = 767.0
    mdirection_low: float = 1.375
    mdirection_high: float = 2.125
    # synthetic fleet
    n_flights: int = 1000
    synth_mode: str = "geometric"

    def __post_init__(self):
        if self.k_folds < 2:
            raise UsageError("k_folds must be at least 2")
        for lo, hi, what in (
            (self.cdocat_low, self.cdocat_high, "cdocat"),
            (self.mdrate_low, self.mdrate_high, "mdrate"),
            (self.fltsegments_low, self.fltsegments_high, "fltsegments"),
            (self.mdirection_low, self.mdirection_high, "mdirection"),
        ):
            if not lo < hi:
                raise UsageError(f"{what} thresholds must be ordered low < high")
        if self.scenario not in forest.SCENARIOS:
            raise UsageError(f"unknown scenario {self.scenario!r}")
        if self.model not in ("random_forest", "gradient_boosting"):
            raise UsageError(f"unknown model {self.model!r}")

    def canonical_text(self) -> str:
        pairs = [(f.name, getattr(self, f.name)) for f in fields(self)]
        return "".join(f"{k} = {v}\n" for k, v in sorted(pairs))

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:12]

    def tma(self) -> TmaConfig:
        return TmaConfig(
            self.tma_center_lat, self.tma_center_lon, self.tma_radius_nm, self.floor_ft
        )

    def memberships(self):
        return fz.default_memberships(
            {
                "mdrate": (self.mdrate_low, self.mdrate_high),
                "flt_segments": (self.fltsegments_low, self.fltsegments_high),
                "mdirection": (self.mdirection_low, self.mdirection_high),
            }
        )

    def scenario_spec(self, scenario_id: str | None = None) -> forest.ScenarioSpec:
        spec = forest.SCENARIOS[scenario_id or self.scenario]
        if self.positive_class and len(spec.classes) == 2:
            spec = spec.with_positive(self.positive_class)
        return spec

    def forest_params(self) -> forest.ForestParams:
        return forest.ForestParams(
            n_trees=self.n_trees,
            max_depth=self.max_depth,
            min_leaf=self.min_leaf,
            feature_subsample=self.feature_subsample,
            seed=self.seed,
        )

    def boost_params(self) -> forest.BoostParams:
        return forest.BoostParams(
            n_rounds=self.n_rounds,
            learning_rate=self.learning_rate,
            max_depth=self.boost_depth,
            min_leaf=self.boost_min_leaf,
            seed=self.seed,
        )


def load_config(path) -> PipelineConfig:
    """Parse the flat key = value config file."""
    defaults = {f.name: f for f in fields(PipelineConfig)}
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            key = key.strip()
            value = value.strip()
            if key not in defaults:
                raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
            kind = type(defaults[key].default)
            try:
                values[key] = kind(value) if kind is not bool else value == "true"
            except ValueError as exc:
                raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return PipelineConfig(**values)


# stage outputs and the subcommand that writes them, for diagnostics
PRODUCERS = {
    "tracks.csv": "synth",
    "weather.csv": "synth",
    "truth.csv": "synth",
    "tracks_clipped.csv": "ingest",
    "features.csv": "features",
    "cv_report.json": "train",
    "model_full.json": "train",
    "shap_values.csv": "explain",
    "shap_summary.json": "explain",
    "rules.txt": "fexai",
    "fexai_cv.json": "fexai",
}


def _require(path: Path) -> Path:
    if not path.exists():
        producer = PRODUCERS.get(path.name)
        hint = f"; run the `{producer}` subcommand first" if producer else ""
        raise CdoError(f"missing input {path}{hint}")
    return path


def _stamp(cfg: PipelineConfig) -> str:
    return f"config={cfg.config_hash} seed={cfg.seed} format=1"


def _write_json(path: Path, payload: dict, cfg: PipelineConfig) -> None:
    payload = {"config_hash": cfg.config_hash, "seed": cfg.seed, "format_version": "1", **payload}
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n", encoding="utf-8")


def _save_model(model, path: Path, cfg: PipelineConfig) -> None:
    # the ensemble document plus the provenance key every output carries
    doc = json.loads(forest.ensemble_to_json(model))
    doc["config_hash"] = cfg.config_hash
    path.write_text(json.dumps(doc, sort_keys=True, indent=2), encoding="utf-8")


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_synth(cfg: PipelineConfig, args) -> None:
    spec = SynthSpec(
        n_flights=cfg.n_flights,
        seed=cfg.seed,
        label_mode=cfg.synth_mode,
        level_threshold=cfg.level_threshold,
        tma=cfg.tma(),
        rule_table=fz.reference_rules() if cfg.synth_mode == "rule" else None,
    )
    fleet = gen_fleet(spec)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_track_csv(fleet.tracks, out / "tracks.csv", header_comment=_stamp(cfg))
    write_weather_csv(fleet.weather, out / "weather.csv", header_comment=_stamp(cfg))
    with open(out / "truth.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {_stamp(cfg)}\n")
        fh.write("flight_id,n_segments,level_count,adherence,cdocat,label\n")
        for truth, label in zip(fleet.truths, fleet.labels):
            fh.write(
                f"{truth.flight_id},{truth.n_segments},{truth.level_count},"
                f"{truth.adherence!r},{truth.cdocat},{label}\n"
            )
    print(
        f"synth: wrote {len(fleet.tracks)} flights ({cfg.synth_mode} mode) to "
        f"{out / 'tracks.csv'}, {out / 'weather.csv'}, {out / 'truth.csv'}"
    )


def cmd_ingest(cfg: PipelineConfig, args) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tracks_path = Path(args.tracks) if args.tracks else _require(out / "tracks.csv")
    tracks = parse_track_csv(_require(Path(tracks_path)))
    tma = cfg.tma()
    kept = []
    dropped = 0
    for track in tracks:
        try:
            kept.append(clip_to_tma(track, tma))
        except CdoError:
            dropped += 1
    write_track_csv(kept, out / "tracks_clipped.csv", header_comment=_stamp(cfg))
    print(
        f"ingest: clipped {len(kept)} tracks ({dropped} dropped) to "
        f"{out / 'tracks_clipped.csv'}"
    )


def cmd_features(cfg: PipelineConfig, args) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tracks_path = Path(args.tracks) if args.tracks else out / "tracks_clipped.csv"
    weather_path = Path(args.weather) if args.weather else out / "weather.csv"
    tracks = parse_track_csv(_require(tracks_path))
    weather = read_weather_csv(_require(weather_path))
    tma = cfg.tma()
    rows = []
    for track in tracks:
        segments = segment_track(track)
        ff = extract_operational_features(track, segments, tma)
        label_flight(ff, segments, cfg.level_threshold, cfg.cdocat_low, cfg.cdocat_high)
        if track.flight_id not in weather:
            raise CdoError(f"no weather rows for flight {track.flight_id}")
        wx = weather[track.flight_id]
        if "start" not in wx or "end" not in wx:
            raise CdoError(f"flight {track.flight_id} needs both start and end weather")
        join_weather(ff, wx["start"], wx["end"])
        rows.append(ff)
    write_feature_csv(rows, out / "features.csv", header_comment=_stamp(cfg))
    print(f"features: wrote {len(rows)} x {len(FEATURE_COLUMNS)} matrix to {out / 'features.csv'}")


def _run_cv(cfg: PipelineConfig, X, labels, scenario, kind) -> forest.CvResult:
    return forest.cross_validate(
        X,
        labels,
        scenario,
        kind,
        forest_params=cfg.forest_params(),
        boost_params=cfg.boost_params(),
        k=cfg.k_folds,
        seed=cfg.seed,
        feature_names=FEATURE_COLUMNS,
    )


def cmd_train(cfg: PipelineConfig, args) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features_path = Path(args.features) if args.features else out / "features.csv"
    X, labels, _, _ = read_feature_csv(_require(features_path))
    scenario = cfg.scenario_spec()
    result = _run_cv(cfg, X, labels, scenario, cfg.model)
    for i, model in enumerate(result.fold_models):
        forest.save_ensemble(model, out / f"model_fold{i}.json")
    scenario_labels = forest.relabel(labels, scenario)
    if cfg.model == "random_forest":
        full = forest.train_random_forest(
            X, scenario_labels, list(scenario.classes), cfg.forest_params(), FEATURE_COLUMNS
        )
    else:
        full = forest.train_gradient_boosting(
            X, scenario_labels, list(scenario.classes), cfg.boost_params(), FEATURE_COLUMNS
        )
    forest.save_ensemble(full, out / "model_full.json")
    _write_json(
        out / "cv_report.json",
        {
            "scenario": scenario.id,
            "positive_class": scenario.positive_class,
            "model": cfg.model,
            "report": result.report.as_dict(),
        },
        cfg,
    )
    mean = result.report.mean
    print(
        f"train: {cfg.model} on {scenario.id}, mean accuracy {mean.accuracy:.3f} "
        f"(report {out / 'cv_report.json'})"
    )


def _fold_shaps(cfg: PipelineConfig, X, labels, scenario):
    """Per-fold attribution matrices on each fold's test rows."""
    scenario_labels = forest.relabel(labels, scenario)
    folds = forest.stratified_kfold(scenario_labels, k=cfg.k_folds, seed=cfg.seed)
    out = Path(cfg.out_dir)
    shap_mats = []
    fold_X = []
    fold_labels = []
    for i, test_idx in enumerate(folds):
        model = forest.load_ensemble(_require(out / f"model_fold{i}.json"))
        shap_mats.append(shapley.ensemble_shap(model, X[test_idx]))
        fold_X.append(X[test_idx])
        fold_labels.append([scenario_labels[j] for j in test_idx])
    return shap_mats, fold_X, fold_labels, folds


def cmd_explain(cfg: PipelineConfig, args) -> None:
    out = Path(cfg.out_dir)
    features_path = Path(args.features) if args.features else out / "features.csv"
    X, labels, _, ids = read_feature_csv(_require(features_path))
    scenario = cfg.scenario_spec()
    shap_mats, fold_X, fold_labels, folds = _fold_shaps(cfg, X, labels, scenario)

    with open(out / "shap_values.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {_stamp(cfg)}\n")
        fh.write("sample_id,feature,class,shap_value\n")
        for sm, test_idx in zip(shap_mats, folds):
            for row, sample in enumerate(test_idx):
                for fi, fname in enumerate(sm.feature_names):
                    for ci, cname in enumerate(scenario.classes):
                        fh.write(f"{ids[sample]},{fname},{cname},{sm.values[row, fi, ci]!r}\n")

    gi = shapley.global_importance(shap_mats, scenario)
    summary = {
        "scenario": scenario.id,
        "positive_class": scenario.positive_class,
        "output_space": shap_mats[0].output_space,
        "global_importance": {
            name: float(score) for name, score in zip(gi.feature_names, gi.scores)
        },
        "ranking": gi.top(len(gi.feature_names)),
        "top3": gi.top(3),
    }
    if len(scenario.classes) == 2:
        wd = shapley.wd_report(shap_mats, fold_labels, scenario)
        summary["wd"] = {
            "per_feature": {n: float(v) for n, v in zip(wd.feature_names, wd.per_feature)},
            "mean_wd": wd.mean_wd,
            "top5_mean_wd": wd.top5_mean_wd,
            "count_above_half": wd.count_above_half,
        }
    _write_json(out / "shap_summary.json", summary, cfg)

    for fname in gi.top(3):
        pairs = shapley.class_specific_shap(shap_mats, fold_X, fname, scenario) if len(
            scenario.classes
        ) == 2 else None
        if pairs is None:
            continue
        with open(out / f"dependence_{fname}.csv", "w", encoding="utf-8") as fh:
            fh.write(f"# {_stamp(cfg)}\n")
            fh.write("feature_value,shap_value\n")
            for v, s in pairs:
                fh.write(f"{v!r},{s!r}\n")
    print(
        f"explain: top-3 features {', '.join(gi.top(3))} "
        f"(summary {out / 'shap_summary.json'})"
    )


def cmd_fexai(cfg: PipelineConfig, args) -> None:
    out = Path(cfg.out_dir)
    features_path = Path(args.features) if args.features else out / "features.csv"
    X, labels, _, _ = read_feature_csv(_require(features_path))
    scenario = forest.SCENARIOS["low_vs_notlow"]
    binary = forest.relabel(labels, scenario)
    cols = [FEATURE_COLUMNS.index(f) for f in fz.RULE_FEATURES]
    report, rule_base = fz.evaluate_fexai(
        X[:, cols], binary, k=cfg.k_folds, seed=cfg.seed, memberships=cfg.memberships()
    )
    fz.write_rule_base(rule_base, out / "rules.txt")
    _write_json(
        out / "fexai_cv.json",
        {"scenario": scenario.id, "n_rules": len(rule_base), "report": report.as_dict()},
        cfg,
    )
    print(
        f"fexai: {len(rule_base)} rules, mean accuracy {report.mean.accuracy:.3f} "
        f"(rules {out / 'rules.txt'})"
    )


def _pct(x: float) -> str:
    return f"{100.0 * x:.2f}"


def _plot_importance(gi: shapley.GlobalImportance, path: Path, title: str) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    top = gi.ranking[:15][::-1]
    fig, ax = plt.subplots(figsize=(7, 6))
    ax.barh(range(len(top)), gi.scores[top], color="#2b6cb0")
    ax.set_yticks(range(len(top)))
    ax.set_yticklabels([gi.feature_names[i] for i in top])
    ax.set_xlabel("normalized mean |attribution|")
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def _plot_dependence(pairs: np.ndarray, feature: str, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6, 4.5))
    ax.scatter(pairs[:, 0], pairs[:, 1], s=6, alpha=0.4, color="#b03030")
    ax.axhline(0.0, lw=0.8, color="gray")
    ax.set_xlabel(feature)
    ax.set_ylabel("attribution toward positive class")
    ax.set_title(f"dependence: {feature}")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def cmd_report(cfg: PipelineConfig, args) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    features_path = Path(args.features) if args.features else out / "features.csv"
    X, labels, _, _ = read_feature_csv(_require(features_path))

    kinds = ["random_forest", "gradient_boosting"]
    scenario_ids = ["three_class", "low_vs_notlow", "high_vs_nothigh"]
    results: dict[tuple[str, str], forest.CvResult] = {}
    with open(out / "report_scenarios.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {_stamp(cfg)}\n")
        fh.write("scenario,classifier,Acc,Pr,Recall,F1\n")
        for sid in scenario_ids:
            scenario = cfg.scenario_spec(sid)
            for kind in kinds:
                res = _run_cv(cfg, X, labels, scenario, kind)
                results[(sid, kind)] = res
                m = res.report.mean
                fh.write(
                    f"{sid},{kind},{_pct(m.accuracy)},{_pct(m.precision)},"
                    f"{_pct(m.recall)},{_pct(m.f1)}\n"
                )

    def best_kind(sid: str) -> str:
        return max(kinds, key=lambda k: results[(sid, k)].report.mean.accuracy)

    # Per-scenario separability for the binary scenarios, using the stronger
    # model's fold ensembles.
    shap_cache: dict[str, tuple] = {}
    with open(out / "report_separability.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {_stamp(cfg)}\n")
        fh.write("scenario,classifier,mean_wd,top5_mean_wd,count_wd_above_0.5\n")
        for sid in ("low_vs_notlow", "high_vs_nothigh"):
            scenario = cfg.scenario_spec(sid)
            kind = best_kind(sid)
            res = results[(sid, kind)]
            shap_mats = [
                shapley.ensemble_shap(model, X[idx])
                for model, idx in zip(res.fold_models, res.fold_test_indices)
            ]
            fold_labels = [
                [res.scenario_labels[j] for j in idx] for idx in res.fold_test_indices
            ]
            fold_X = [X[idx] for idx in res.fold_test_indices]
            shap_cache[sid] = (scenario, shap_mats, fold_X, fold_labels)
            wd = shapley.wd_report(shap_mats, fold_labels, scenario)
            fh.write(
                f"{sid},{kind},{wd.mean_wd:.4f},{wd.top5_mean_wd:.4f},{wd.count_above_half}\n"
            )

    # Importance and dependence plots from the strongest binary scenario.
    scenario, shap_mats, fold_X, fold_labels = shap_cache["low_vs_notlow"]
    gi = shapley.global_importance(shap_mats, scenario)
    _plot_importance(gi, out / "importance_low_vs_notlow.svg", "global importance (Low vs NotLow)")
    for fname in gi.top(3):
        pairs = shapley.class_specific_shap(shap_mats, fold_X, fname, scenario)
        _plot_dependence(pairs, fname, out / f"dependence_{fname}.svg")

    # Top-three-feature comparison: the fuzzy classifier against both
    # ensembles restricted to the same three drivers.
    cols = [FEATURE_COLUMNS.index(f) for f in fz.RULE_FEATURES]
    X3 = X[:, cols]
    binary = forest.relabel(labels, cfg.scenario_spec("low_vs_notlow"))
    fx_report, rule_base = fz.evaluate_fexai(
        X3, binary, k=cfg.k_folds, seed=cfg.seed, memberships=cfg.memberships()
    )
    with open(out / "report_top3.csv", "w", encoding="utf-8") as fh:
        fh.write(f"# {_stamp(cfg)}\n")
        fh.write("classifier,Acc,Pr,Recall,F1\n")
        m = fx_report.mean
        fh.write(f"fexai,{_pct(m.accuracy)},{_pct(m.precision)},{_pct(m.recall)},{_pct(m.f1)}\n")
        for kind in kinds:
            res = forest.cross_validate(
                X3,
                labels,
                cfg.scenario_spec("low_vs_notlow"),
                kind,
                forest_params=cfg.forest_params(),
                boost_params=cfg.boost_params(),
                k=cfg.k_folds,
                seed=cfg.seed,
                feature_names=list(fz.RULE_FEATURES),
            )
            m = res.report.mean
            fh.write(
                f"{kind},{_pct(m.accuracy)},{_pct(m.precision)},{_pct(m.recall)},{_pct(m.f1)}\n"
            )
    fz.write_rule_base(rule_base, out / "report_rules.txt")
    print(
        "report: wrote report_scenarios.csv, report_separability.csv, report_top3.csv, "
        f"report_rules.txt and SVG plots to {out}"
    )


# ---------------------------------------------------------------------------
# Argument parsing
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="cdoxai", description=__doc__)
    parser.add_argument("--config", help="flat key = value config file")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--out-dir", help="override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic fleet")
    p.add_argument("--n-flights", type=int)
    p.add_argument("--mode", choices=["geometric", "rule"])

    p = sub.add_parser("ingest", help="clip raw tracks to the terminal area")
    p.add_argument("--tracks")
    p.add_argument("--tma", help="center_lat,center_lon,radius_nm")
    p.add_argument("--floor-ft", type=float)

    p = sub.add_parser("features", help="extract the 29-feature matrix")
    p.add_argument("--tracks")
    p.add_argument("--weather")

    p = sub.add_parser("train", help="cross-validated ensemble training")
    p.add_argument("--features")
    p.add_argument("--model", choices=["random_forest", "gradient_boosting"])
    p.add_argument("--scenario", choices=list(forest.SCENARIOS))
    p.add_argument("--positive-class")

    p = sub.add_parser("explain", help="per-fold attributions and separability")
    p.add_argument("--features")

    p = sub.add_parser("fexai", help="fuzzy rule extraction and evaluation")
    p.add_argument("--features")

    p = sub.add_parser("report", help="assemble tables, rules, and plots")
    p.add_argument("--features")

    return parser


def _apply_overrides(cfg: PipelineConfig, args) -> PipelineConfig:
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.out_dir:
        updates["out_dir"] = args.out_dir
    if getattr(args, "n_flights", None) is not None:
        updates["n_flights"] = args.n_flights
    if getattr(args, "mode", None):
        updates["synth_mode"] = args.mode
    if getattr(args, "model", None):
        updates["model"] = args.model
    if getattr(args, "scenario", None):
        updates["scenario"] = args.scenario
    if getattr(args, "positive_class", None):
        updates["positive_class"] = args.positive_class
    if getattr(args, "floor_ft", None) is not None:
        updates["floor_ft"] = args.floor_ft
    if getattr(args, "tma", None):
        try:
            lat, lon, radius = (float(x) for x in args.tma.split(","))
        except ValueError as exc:
            raise UsageError(f"--tma expects center_lat,center_lon,radius_nm: {exc}") from exc
        updates.update(tma_center_lat=lat, tma_center_lon=lon, tma_radius_nm=radius)
    return replace(cfg, **updates) if updates else cfg


COMMANDS = {
    "synth": cmd_synth,
    "ingest": cmd_ingest,
    "features": cmd_features,
    "train": cmd_train,
    "explain": cmd_explain,
    "fexai": cmd_fexai,
    "report": cmd_report,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        cfg = load_config(args.config) if args.config else PipelineConfig()
        cfg = _apply_overrides(cfg, args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        COMMANDS[args.command](cfg, args)
    except (CdoError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
