"""Rules alone versus rules with a learned filter, on a scenario small enough to run in seconds.

    python demos/small_pipeline.py
"""

from adaptive_ids.models import ClassifierSpec, fit_classifier
from adaptive_ids.pipeline import PluginSpec, build_pipeline, evaluate_run, process
from adaptive_ids.rules import default_ruleset
from adaptive_ids.trafficgen import ScenarioSpec, feature_dataset, mix


def scenario(seed):
    # web clients whose payloads sometimes contain rule strings, plus a web attack and a port scan
    return ScenarioSpec.from_json({"seed": seed, "collision_fraction": 0.3, "streams": [
        {"kind": "legit_tcp", "rate": 300, "count": 1500, "collision_prob": 0.2, "session_len": 8,
         "endpoints": {"hosts": 12}, "host_skew": 1.0, "category": "HTTP"},
        {"kind": "legit_icmp", "rate": 60, "count": 300, "category": "ICMP"},
        {"kind": "atk_http", "rate": 150, "count": 450, "start": 1.0, "endpoints": {"hosts": 4}},
        {"kind": "atk_scan", "rate": 300, "count": 900, "start": 0.5},
    ]})


ruleset = default_ruleset()

# train on one seed, evaluate on another
train_frames, train_truth = mix(scenario(7), ruleset)
train = feature_dataset(train_frames, train_truth)
print(f"training windows: {len(train)} ({int((train.y == 1).sum())} malicious)")
model = fit_classifier(ClassifierSpec("svm", c_param=10.0, gamma_rbf=1.0), train)

frames, truth = mix(scenario(42), ruleset)
print(f"evaluation: {len(frames)} frames, {len(truth)} windows\n")

for title, plugin in [("rules only", None), ("rules + SVM plug-in", PluginSpec("svm", model=model))]:
    log = process(build_pipeline(ruleset, plugin), frames)
    t = log.totals()
    print(evaluate_run(log, truth).render(title))
    print(f"  rule hits {t['rule_hits']}, alarms {t['alarms']}, suppressed hits {t['suppressed_hits']}\n")
