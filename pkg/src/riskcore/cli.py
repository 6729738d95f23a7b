"""Command line entry point: ``riskcore {run,importance,ablate,pca,synth,check}``.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal error.
The log level comes from the RISKCORE_LOG environment variable.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
import time
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .classic import LogisticRegression
from .config import ExperimentConfig, load_config
from .dataset import generate_synthetic, synthetic_truth, write_csv, write_truth
from .errors import ConfigError, DataError, MissingArtifacts
from .importance import mean_ranking
from .metrics import ALL_METRICS, compare_runs, pvalue_matrix
from .mlp import MlpModel
from .pca import project_layers, separability_probe
from .protocol import (
    ALL_MODELS,
    DISPLAY_NAMES,
    MODEL_NAMES,
    dnn_rankings,
    fit_model,
    lr_rankings,
    prepare_repeat,
    run_ablation,
    run_protocol,
)
from .reporting import (
    MANIFEST,
    OutputCollector,
    formatted_report,
    results_table_header,
    results_table_rows,
    verify_manifest,
)

log = logging.getLogger("riskcore")

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


def _seed_record(seeds) -> list[dict]:
    return [asdict(s) for s in seeds]


# -- run ------------------------------------------------------------------------------------


def cmd_run(cfg: ExperimentConfig, out: Path | None = None) -> OutputCollector:
    out = Path(cfg.out) if out is None else out
    t0 = time.perf_counter()
    data = cfg.load_data()
    pc = cfg.protocol_config()
    t_load = time.perf_counter()
    result = run_protocol(data, pc, cfg.models)
    t_fit = time.perf_counter()

    col = OutputCollector(out)
    trainable = [m for m in MODEL_NAMES if m in result.runs]
    for r, seeds in enumerate(result.seeds):
        col.json(f"runs/run_{r:02d}.json", {
            "repeat": r,
            "seeds": asdict(seeds),
            "metrics": {m: result.runs[m][r].to_dict() for m in trainable},
        })
    ordered = [m for m in ALL_MODELS if m in result.models]
    reports = {m: result.aggregate(m) for m in ordered}
    payload = {}
    for m in ordered:
        entry = {
            "display_name": DISPLAY_NAMES[m],
            "formatted": formatted_report(reports[m]),
            "aggregate": reports[m].to_dict(),
        }
        if m == "baseline":
            entry["per_run"] = {k: [getattr(result.baseline, k)] for k in ALL_METRICS}
        else:
            entry["per_run"] = {k: [getattr(run, k) for run in result.runs[m]] for k in ALL_METRICS}
        payload[m] = entry
    col.json("metrics.json", {"repeats": pc.repeats, "base_seed": pc.base_seed, "models": payload})
    col.csv("results_table.csv", results_table_header(), results_table_rows(reports))
    col.json("pvalues.json", {
        metric: pvalue_matrix({m: [getattr(run, metric) for run in result.runs[m]]
                               for m in trainable})
        for metric in ALL_METRICS
    })
    for name, models in result.trained.items():
        for r, model in enumerate(models):
            col.json(f"models/{name}_r{r:02d}.json", model.to_dict())
    for r, sigma in enumerate(result.sigmas):
        col.json(f"models/sigma_r{r:02d}.json", {"sigma": sigma.tolist()})
    col.finalize("run", {
        "config": cfg.to_dict(),
        "seeds": _seed_record(result.seeds),
        "constant_columns": result.constant_columns,
        "dataset": {"rows": len(data), "dimension": data.dimension,
                    "positives": int(data.labels.sum())},
        "timings": {"load": t_load - t0, "fit_evaluate": t_fit - t_load,
                    "write": time.perf_counter() - t_fit},
    })
    return col


def cmd_run_check(cfg: ExperimentConfig) -> list[str]:
    """Re-run into a scratch directory and compare digests with the existing manifest."""
    manifest_path = Path(cfg.out) / MANIFEST
    if not manifest_path.exists():
        raise MissingArtifacts(f"no {MANIFEST} in {cfg.out} to check against")
    recorded = json.loads(manifest_path.read_text("utf-8")).get("artifacts", {})
    with tempfile.TemporaryDirectory() as tmp:
        fresh = cmd_run(cfg, Path(tmp)).written
    problems = []
    for rel, digest in sorted(fresh.items()):
        if rel not in recorded:
            problems.append(f"not in manifest: {rel}")
        elif recorded[rel] != digest:
            problems.append(f"differs on re-run: {rel}")
    return problems


# -- importance ----------------------------------------------------------------------------


def _load_artifacts(cfg: ExperimentConfig):
    root = Path(cfg.out) / "models"
    dnn, lr, sigmas = [], [], []
    for r in range(cfg.repeats):
        paths = [root / f"{kind}_r{r:02d}.json" for kind in ("dnn", "lr", "sigma")]
        missing = [p for p in paths if not p.exists()]
        if missing:
            raise MissingArtifacts(
                f"missing {missing[0]}; run `riskcore run` with dnn and lr first, or pass --train"
            )
        dnn.append(MlpModel.load(paths[0]))
        lr.append(LogisticRegression.from_dict(json.loads(paths[1].read_text("utf-8"))))
        sigmas.append(np.asarray(json.loads(paths[2].read_text("utf-8"))["sigma"]))
    return dnn, lr, sigmas


def _score_rows(ranking, std):
    ranks = ranking.ranks()
    return [[name, repr(float(ranking.scores[i])), repr(float(std[i])), int(ranks[i]) + 1]
            for i, name in enumerate(ranking.factor_names)]


def cmd_importance(cfg: ExperimentConfig, train: bool = False, top_fraction: float = 0.10):
    data = cfg.load_data()
    pc = cfg.protocol_config()
    if train:
        res = run_protocol(data, pc, ["lr", "dnn"])
        dnn, lr, sigmas = res.trained["dnn"], res.trained["lr"], res.sigmas
    else:
        dnn, lr, sigmas = _load_artifacts(cfg)
    names = data.factor_names
    d_rank = dnn_rankings(dnn, sigmas, names)
    l_rank = lr_rankings(lr, sigmas, names, pc.lr_importance_mode)
    d_mean, d_std = mean_ranking(d_rank)
    l_mean, l_std = mean_ranking(l_rank)
    col = OutputCollector(cfg.out)
    header = ["factor", "mean_score", "std_score", "rank"]
    col.csv("importance_dnn.csv", header, _score_rows(d_mean, d_std))
    col.csv("importance_lr.csv", header, _score_rows(l_mean, l_std))
    col.json("importance_top.json", {
        "fraction": top_fraction,
        "lr_mode": pc.lr_importance_mode,
        "dnn_top": d_mean.top_names(top_fraction),
        "lr_top": l_mean.top_names(top_fraction),
        "dnn_top_per_repeat": [r.top_names(top_fraction) for r in d_rank],
        "lr_top_per_repeat": [r.top_names(top_fraction) for r in l_rank],
    })
    col.finalize("importance", {"config": cfg.to_dict(), "inline_training": train})
    return col


# -- ablation ----------------------------------------------------------------------------------


def cmd_ablate(cfg: ExperimentConfig):
    data = cfg.load_data()
    pc = cfg.protocol_config()
    t0 = time.perf_counter()
    result = run_ablation(data, pc, cfg.fractions)
    full = result.by_fraction(1.0)
    rows, detail = [], []
    for fr in result.fractions:
        rep = fr.report
        row = [f"{fr.fraction:.2f}", fr.k]
        for m in ("sensitivity", "fpr", "auc"):
            s = rep[m]
            row += [_num(s.mean), _num(s.std)]
        rows.append(row)
        pvals = {}
        for m in ("sensitivity", "fpr"):
            try:
                pvals[m] = compare_runs([getattr(r, m) for r in fr.runs],
                                        [getattr(r, m) for r in full.runs])
            except DataError:
                pvals[m] = None
        detail.append({
            "fraction": fr.fraction,
            "k": fr.k,
            "selected_factors": [[data.factor_names[i] for i in sel] for sel in fr.selected],
            "per_run": {m: [getattr(r, m) for r in fr.runs] for m in ALL_METRICS},
            "aggregate": rep.to_dict(),
            "p_value_vs_all_factors": pvals,
        })
    col = OutputCollector(cfg.out)
    col.csv("ablation.csv", ["fraction", "n_factors", "sensitivity_mean", "sensitivity_std",
                             "fpr_mean", "fpr_std", "auc_mean", "auc_std"], rows)
    col.json("ablation.json", {"ranking_mode": result.ranking_mode, "fractions": detail})
    col.finalize("ablate", {"config": cfg.to_dict(), "timings": {"total": time.perf_counter() - t0}})
    return col


def _num(v):
    return "None" if v is None else repr(float(v))


# -- pca ----------------------------------------------------------------------------------------


def cmd_pca(cfg: ExperimentConfig):
    data = cfg.load_data()
    pc = cfg.protocol_config()
    r = cfg.pca_repeat
    rd = prepare_repeat(data, pc, r)
    path = Path(cfg.out) / "models" / f"dnn_r{r:02d}.json"
    if path.exists():
        model = MlpModel.load(path)
        source = str(path.relative_to(cfg.out))
    else:
        model = fit_model("dnn", rd.train.features, rd.train.labels, pc, rd.seeds.model)
        source = "trained inline"
    if model.input_size != data.dimension:
        raise DataError(f"stored network expects {model.input_size} inputs, data has {data.dimension}")
    col = OutputCollector(cfg.out)
    summary = []
    for proj in project_layers(model, rd.test.features, rd.test.labels):
        col.csv(f"pca_{proj.name}.csv", ["pc1", "pc2", "label"],
                [[repr(float(a)), repr(float(b)), int(y)]
                 for (a, b), y in zip(proj.coords, proj.labels)])
        summary.append({
            "layer": proj.name,
            "probe_accuracy": separability_probe(proj.coords, proj.labels),
            "explained_variance": proj.explained_variance.tolist(),
            "degenerate": proj.degenerate,
        })
    col.json("pca_summary.json", {"repeat": r, "model": source, "layers": summary})
    col.finalize("pca", {"config": cfg.to_dict()})
    return col


# -- synth ----------------------------------------------------------------------------------------


def cmd_synth(cfg: ExperimentConfig):
    scfg = cfg.synthetic_config()
    data = generate_synthetic(scfg)
    col = OutputCollector(cfg.out)
    target = (cfg.synthetic or {}).get("output", "dataset.csv")
    write_csv(data, col.root / target)
    col.adopt(target)
    write_truth(synthetic_truth(scfg), col.root / "truth.json")
    col.adopt("truth.json")
    col.finalize("synth", {"config": cfg.to_dict(), "rows": len(data),
                           "positives": int(data.labels.sum())})
    return col


# -- entry point ------------------------------------------------------------------------------------


def _list(conv):
    def parse(text):
        try:
            return [conv(x) for x in text.split(",") if x.strip()]
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse list {text!r}") from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riskcore", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON experiment config")
    common.add_argument("--seed", type=int, help="base seed")
    common.add_argument("--repeats", type=int, help="number of repeated runs")
    common.add_argument("--out", help="output directory")
    common.add_argument("--models", type=_list(str), help=f"comma list from {','.join(ALL_MODELS)}")
    common.add_argument("--fractions", type=_list(float), help="comma list of top fractions")
    sub = parser.add_subparsers(dest="verb", required=True)
    p = sub.add_parser("run", parents=[common], help="repeated evaluation of all models")
    p.add_argument("--check", action="store_true",
                   help="re-run and compare digests against the existing manifest")
    p = sub.add_parser("importance", parents=[common], help="contribution scores")
    p.add_argument("--train", action="store_true", help="train models instead of loading them")
    sub.add_parser("ablate", parents=[common], help="retrain on top-ranked factors")
    sub.add_parser("pca", parents=[common], help="2-D PCA of layer representations")
    sub.add_parser("synth", parents=[common], help="write a synthetic dataset")
    sub.add_parser("check", parents=[common], help="verify artifact digests in --out")
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("RISKCORE_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    overrides = {"seed": args.seed, "repeats": args.repeats, "out": args.out,
                 "models": args.models, "fractions": args.fractions}
    try:
        if args.verb == "check":
            problems = verify_manifest(args.out or load_config(args.config, overrides).out)
            return _report(problems)
        cfg = load_config(args.config, overrides)
        if args.verb == "run":
            if args.check:
                return _report(cmd_run_check(cfg))
            cmd_run(cfg)
        elif args.verb == "importance":
            cmd_importance(cfg, train=args.train)
        elif args.verb == "ablate":
            cmd_ablate(cfg)
        elif args.verb == "pca":
            cmd_pca(cfg)
        elif args.verb == "synth":
            cmd_synth(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL
    return EXIT_OK


def _report(problems) -> int:
    for p in problems:
        print(p, file=sys.stderr)
    if problems:
        return EXIT_DATA
    print("ok")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
