"""Command-line entry point: ``adaptive-ids <command> ...``.

Commands: gen, train, tune, cv, run, eval. Exit status is 0 on success,
1 when a command fails at runtime and 2 for usage errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Optional, Sequence

from . import netmodel
from .dataset import load_labeled_csv, save_generic_csv
from .errors import IdsError
from .evalmetrics import cross_validate, format_summary_table
from .firefly import FITNESS_KINDS, SVM_SPACE, FireflyParams, tune_svm
from .models import ClassifierSpec, fit_classifier, save_model
from .pipeline import (DEFAULT_THETA_A, DEFAULT_THETA_S, PLUGIN_KINDS, PluginSpec, RunLog,
                       build_pipeline, evaluate_run, process)
from .rules import default_ruleset, load_ruleset
from .svm import DEFAULT_C, DEFAULT_GAMMA
from .trafficgen import GroundTruth, bundled_scenario, feature_dataset, load_scenario, mix, write_outputs

log = logging.getLogger("adaptive_ids")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits on its own; route usage problems through one exit path instead
    def error(self, message):
        raise UsageError(f"{self.format_usage().rstrip()}\n{self.prog}: error: {message}")


def _scenario(arg: str):
    p = Path(arg)
    if p.exists():
        return load_scenario(p)
    return bundled_scenario(arg)


def _write_json(obj, path: Optional[str]) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


# -- commands ----------------------------------------------------------------

def cmd_gen(a) -> int:
    spec = _scenario(a.scenario)
    if a.seed is not None:
        spec = replace(spec, seed=a.seed)
    frames, truth = mix(spec)
    write_outputs(frames, truth, a.out, a.truth)
    log.info("wrote %d frames to %s and %d truth records to %s", len(frames), a.out, len(truth), a.truth)
    if a.features:
        save_generic_csv(feature_dataset(frames, truth), a.features)
    return 0


def _spec_from_args(a) -> ClassifierSpec:
    kw = {"kind": a.model, "c_param": a.c, "gamma_rbf": a.gamma, "max_depth": a.depth, "min_leaf": a.leaf,
          "fuzzy_config": a.fuzzy_config}
    return ClassifierSpec(**kw)


def cmd_train(a) -> int:
    ds = load_labeled_csv(a.data, a.format)
    spec = _spec_from_args(a)
    model = fit_classifier(spec, ds)
    save_model(model, a.out, {"spec": str(spec), "data": str(a.data), "samples": len(ds)})
    log.info("trained %s on %d samples -> %s", spec, len(ds), a.out)
    return 0


def cmd_tune(a) -> int:
    ds = load_labeled_csv(a.data, a.format)
    params = FireflyParams(population=a.population, iterations=a.iterations, seed=a.seed)
    res = tune_svm(ds, SVM_SPACE, params, cv_k=a.cv_k, fitness=a.fitness)
    report = res.report()
    model = fit_classifier(ClassifierSpec("svm", res.c_param, res.gamma_rbf), ds)
    save_model(model, a.out, {"tuned_by": "firefly", "best_c": res.c_param, "best_gamma": res.gamma_rbf,
                              "fitness": res.fitness, "seed": a.seed})
    _write_json(report, a.report)
    log.info("best C=%.4g gamma=%.4g fitness=%.4g", res.c_param, res.gamma_rbf, res.fitness)
    return 0


def cmd_cv(a) -> int:
    ds = load_labeled_csv(a.data, a.data_format)
    res = cross_validate(ds, a.model, k=a.k, seed=a.seed)
    if a.format == "table":
        print(format_summary_table({res.spec: res.report}))
        print("per fold:")
        print(format_summary_table({f"fold {i + 1}": r for i, r in enumerate(res.folds)}))
    else:
        _write_json(res.to_json(), a.out)
    return 0


def _plugin_kind(path: str, requested: Optional[str]) -> str:
    if requested:
        return requested
    try:
        d = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError):
        return "svm"  # the loader reports the real problem
    kind = d.get("kind", "svm")
    if kind == "svm" and (d.get("meta") or {}).get("tuned_by") == "firefly":
        return "firefly_svm"
    return kind


def cmd_run(a) -> int:
    ruleset = default_ruleset() if a.rules == "default" else load_ruleset(a.rules)
    plugin = None
    if a.plugin:
        plugin = PluginSpec(_plugin_kind(a.plugin, a.plugin_kind), a.plugin, a.fuzzy_config,
                            a.theta_s, a.theta_a)
    pipe = build_pipeline(ruleset, plugin)
    run_log = process(pipe, netmodel.iter_pcap(a.pcap))
    run_log.write_jsonl(a.out)
    t = run_log.totals()
    log.info("%d alarms from %d rule hits (%d suppressed), %d windows, %d malformed frames",
             t["alarms"], t["rule_hits"], t["suppressed_hits"], t["windows"], t["malformed"])
    return 0


def cmd_eval(a) -> int:
    table = evaluate_run(RunLog.read_jsonl(a.log), GroundTruth.read_jsonl(a.truth))
    if a.format == "table":
        print(table.render())
    else:
        _write_json(table.to_json(), a.out)
    return 0


# -- parser ------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="adaptive-ids", description="Signature rules with a learned false-alarm filter.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a scenario's pcap and ground truth")
    g.add_argument("--scenario", required=True, help="scenario JSON file or bundled name (mixed_seed42, train_seed7)")
    g.add_argument("--out", required=True, help="pcap to write")
    g.add_argument("--truth", required=True, help="ground-truth JSON Lines to write")
    g.add_argument("--features", help="also write labelled flow features as CSV")
    g.add_argument("--seed", type=int, help="override the scenario seed")
    g.set_defaults(func=cmd_gen)

    def model_args(q, kinds):
        q.add_argument("--model", required=True, choices=kinds)
        q.add_argument("--c", type=float, default=DEFAULT_C)
        q.add_argument("--gamma", type=float, default=DEFAULT_GAMMA)
        q.add_argument("--depth", type=int, default=8, help="cart: maximum depth")
        q.add_argument("--leaf", type=int, default=1, help="cart: minimum samples per leaf")
        q.add_argument("--fuzzy-config", help="fuzzy/hybrid: system JSON or bundled name")

    t = sub.add_parser("train", help="fit a classifier on a labelled CSV")
    model_args(t, ["svm", "nb", "cart", "fuzzy", "hybrid"])
    t.add_argument("--data", required=True)
    t.add_argument("--format", choices=["nsl_kdd", "generic"], default="generic")
    t.add_argument("--out", required=True)
    t.set_defaults(func=cmd_train)

    u = sub.add_parser("tune", help="firefly search for SVM (C, gamma), then train with the winner")
    u.add_argument("--data", required=True)
    u.add_argument("--format", choices=["nsl_kdd", "generic"], default="generic")
    u.add_argument("--seed", type=int, required=True)
    u.add_argument("--population", type=int, default=20)
    u.add_argument("--iterations", type=int, default=50)
    u.add_argument("--cv-k", type=int, default=10)
    u.add_argument("--fitness", choices=FITNESS_KINDS, default="da_dr")
    u.add_argument("--out", required=True, help="model JSON to write")
    u.add_argument("--report", required=True, help="tuning report JSON to write")
    u.set_defaults(func=cmd_tune)

    c = sub.add_parser("cv", help="stratified k-fold cross-validation")
    c.add_argument("--data", required=True)
    c.add_argument("--data-format", choices=["nsl_kdd", "generic"], default="generic")
    c.add_argument("--model", required=True, help="classifier spec, e.g. svm:c=1,gamma=0.1 or cart:depth=6")
    c.add_argument("--k", type=int, default=10)
    c.add_argument("--seed", type=int, required=True)
    c.add_argument("--format", choices=["json", "table"], default="json")
    c.add_argument("--out", help="write the JSON report here instead of stdout")
    c.set_defaults(func=cmd_cv)

    r = sub.add_parser("run", help="run the rule engine (and optional plug-in) over a pcap")
    r.add_argument("--pcap", required=True)
    r.add_argument("--rules", required=True, help="rules file, or 'default' for the bundled set")
    r.add_argument("--plugin", help="plug-in model JSON")
    r.add_argument("--plugin-kind", choices=PLUGIN_KINDS, help="defaults to the model file's kind")
    r.add_argument("--fuzzy-config", help="hybrid plug-in built from an svm model: fuzzy system to use")
    r.add_argument("--theta-s", type=float, default=DEFAULT_THETA_S, help="suppression confidence threshold")
    r.add_argument("--theta-a", type=float, default=DEFAULT_THETA_A, help="anomaly confidence threshold")
    r.add_argument("--out", required=True, help="alarm log (JSON Lines) to write")
    r.set_defaults(func=cmd_run)

    e = sub.add_parser("eval", help="score an alarm log against ground truth")
    e.add_argument("--log", required=True)
    e.add_argument("--truth", required=True)
    e.add_argument("--format", choices=["json", "table"], default="json")
    e.add_argument("--out", help="write the JSON report here instead of stdout")
    e.set_defaults(func=cmd_eval)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (IdsError, OSError, ValueError, KeyError) as exc:
        print(f"adaptive-ids {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
