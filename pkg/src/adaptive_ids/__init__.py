"""Signature-rule intrusion detection with a learned plug-in that filters false alarms.

Modules: ``netmodel`` (frames, pcap), ``rules`` (rule language and matcher),
``dataset`` (flow windows, features, CSV loaders, CV folds), ``svm`` (SMO
trainer), ``baselines`` (naive Bayes, CART), ``fuzzy`` (Mamdani inference),
``firefly`` (metaheuristic and SVM tuning), ``evalmetrics``, ``pipeline``,
``trafficgen`` and ``cli``.
"""

__version__ = "0.1.0"
