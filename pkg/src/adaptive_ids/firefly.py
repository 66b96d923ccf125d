"""Firefly metaheuristic and its use for choosing SVM (C, gamma).

Positions live in *search coordinates*: ``log10`` of the value on log-scaled
dimensions and the value itself elsewhere. Distances, moves and clamping all
happen there; objectives always receive the real (external) values.

Per iteration each firefly, in index order, moves toward every firefly that
was brighter at the start of the iteration (a firefly with no brighter peer
takes a pure random step). Moved fireflies are evaluated once, after all their
moves. The best point ever evaluated is kept, so the history never increases.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dataset import LabeledDataset, apply_minmax, fit_minmax, stratified_kfold
from .errors import NonFinite
from .evalmetrics import confusion, detection_accuracy, rates
from .svm import solve_dual, sq_distances

# weight of the tie-breaking term in the tuning objective; far below one fold-level rate step
TIEBREAK = 1e-6

# "da":    1 - DA. With positives in every fold DA = 1 / (1 + FPR), so this ignores
#          missed attacks entirely and a model that never flags anything scores 0.
#          Ties go to the lower mean FNR.
# "da_dr": (1 - DA) + (1 - DR), i.e. the DA term plus the mean miss rate, so a
#          candidate with a poor detection rate cannot win on FPR alone.
#          Ties go to the lower mean FPR.
FITNESS_KINDS = ("da_dr", "da")


@dataclass(frozen=True)
class FireflyParams:
    population: int = 20
    iterations: int = 50
    beta0: float = 1.0
    gamma_attract: float = 1.0
    alpha0: float = 0.2
    alpha_decay: float = 0.97
    seed: int = 0

    def __post_init__(self):
        if self.population < 1:
            raise ValueError("population must be >= 1")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.gamma_attract < 0 or self.alpha0 < 0:
            raise ValueError("gamma_attract and alpha0 must be >= 0")
        if not 0 < self.alpha_decay <= 1:
            raise ValueError("alpha_decay must lie in (0, 1]")

    def alpha(self, t: int) -> float:
        return self.alpha0 * self.alpha_decay ** t


@dataclass(frozen=True)
class SearchSpace:
    lo: tuple[float, ...]
    hi: tuple[float, ...]
    log_scale: tuple[bool, ...] = ()

    def __post_init__(self):
        log = self.log_scale or (False,) * len(self.lo)
        object.__setattr__(self, "log_scale", tuple(bool(v) for v in log))
        if not (len(self.lo) == len(self.hi) == len(self.log_scale)):
            raise ValueError("bounds and log flags must have equal length")
        for lo, hi, lg in zip(self.lo, self.hi, self.log_scale):
            if not lo < hi:
                raise ValueError(f"lower bound {lo} is not below upper bound {hi}")
            if lg and lo <= 0:
                raise ValueError("log-scaled dimensions need positive bounds")

    @property
    def dim(self) -> int:
        return len(self.lo)

    def _search_bounds(self):
        lo = np.array([math.log10(v) if lg else v for v, lg in zip(self.lo, self.log_scale)])
        hi = np.array([math.log10(v) if lg else v for v, lg in zip(self.hi, self.log_scale)])
        return lo, hi

    def clamp(self, u: np.ndarray) -> np.ndarray:
        lo, hi = self._search_bounds()
        return np.minimum(np.maximum(u, lo), hi)

    def to_external(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.where(self.log_scale, 10.0 ** u, u)

    def to_search(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(self.log_scale, np.log10(np.where(self.log_scale, x, 1.0)), x)

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Uniform in search coordinates, i.e. log-uniform on log dimensions."""
        lo, hi = self._search_bounds()
        return lo + rng.random(self.dim) * (hi - lo)

    def to_json(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "log_scale": list(self.log_scale)}


SVM_SPACE = SearchSpace((0.01, 0.001), (100.0, 10.0), (True, True))


def brightness(f: float) -> float:
    """Light intensity for objective value ``f`` (lower objective shines brighter)."""
    if not math.isfinite(f):
        raise NonFinite(f"objective value {f!r} is not finite")
    return 1.0 / f if f > 0 else 1.0 + abs(f)


def attractiveness(r: float, beta0: float, gamma_attract: float) -> float:
    return beta0 / (1.0 + gamma_attract * r * r)


def _scale(space: Optional[SearchSpace]):
    """Random kicks are proportional to each dimension's extent in search coordinates."""
    if space is None:
        return 1.0
    lo, hi = space._search_bounds()
    return hi - lo


def move(xi, xj, params: FireflyParams, t: int, rng: np.random.Generator,
         space: Optional[SearchSpace] = None) -> np.ndarray:
    """Step ``xi`` toward the brighter ``xj`` (search coordinates), plus a decaying random kick.

    The kick is ``alpha_t * eps`` with ``eps`` uniform in [-0.5, 0.5] per dimension,
    multiplied by the dimension's search extent when ``space`` is given.
    """
    xi = np.asarray(xi, dtype=float)
    xj = np.asarray(xj, dtype=float)
    r2 = float(np.sum((xj - xi) ** 2))
    beta = params.beta0 * math.exp(-params.gamma_attract * r2)
    kick = params.alpha(t) * (rng.random(xi.shape) - 0.5) * _scale(space)
    # (1 - beta) xi + beta xj rather than xi + beta (xj - xi): a full step lands on xj exactly
    out = (1.0 - beta) * xi + beta * xj + kick
    return out if space is None else space.clamp(out)


def random_step(xi, params: FireflyParams, t: int, rng: np.random.Generator,
                space: Optional[SearchSpace] = None) -> np.ndarray:
    out = np.asarray(xi, dtype=float) + params.alpha(t) * (rng.random(np.shape(xi)) - 0.5) * _scale(space)
    return out if space is None else space.clamp(out)


@dataclass
class FireflyResult:
    best_position: np.ndarray  # external coordinates
    best_objective: float
    history: list[float]       # best after the initial population, then after each iteration
    evaluations: int = 0


def optimize(objective: Callable[[np.ndarray], float], space: SearchSpace,
             params: FireflyParams = FireflyParams()) -> FireflyResult:
    rng = np.random.default_rng(params.seed)
    n = params.population

    def evaluate(u):
        f = float(objective(space.to_external(u)))
        if not math.isfinite(f):
            raise NonFinite(f"objective returned {f!r}")
        return f

    pos = [space.sample(rng) for _ in range(n)]
    obj = [evaluate(u) for u in pos]
    evals = n
    best_i = int(np.argmin(obj))
    best_u, best_f = pos[best_i].copy(), obj[best_i]
    history = [best_f]

    for t in range(params.iterations):
        light = [brightness(f) for f in obj]
        for i in range(n):
            brighter = [j for j in range(n) if light[j] > light[i]]
            if brighter:
                for j in brighter:
                    pos[i] = move(pos[i], pos[j], params, t, rng, space)
            else:
                pos[i] = random_step(pos[i], params, t, rng, space)
        for i in range(n):
            obj[i] = evaluate(pos[i])
            evals += 1
            if obj[i] < best_f:
                best_u, best_f = pos[i].copy(), obj[i]
        history.append(best_f)

    return FireflyResult(space.to_external(best_u), best_f, history, evals)


# -- SVM tuning --------------------------------------------------------------

@dataclass
class TuneResult:
    c_param: float
    gamma_rbf: float
    fitness: float          # cross-validated fitness of the chosen kind (tie-break term excluded)
    mean_fpr: float
    mean_fnr: float
    history: list[float]
    params: FireflyParams
    space: SearchSpace
    cv_k: int
    evaluations: int = 0
    fitness_kind: str = "da_dr"

    def report(self) -> dict:
        return {"seed": self.params.seed, "params": asdict(self.params), "bounds": self.space.to_json(),
                "cv_k": self.cv_k, "fitness_kind": self.fitness_kind, "best_c": self.c_param,
                "best_gamma": self.gamma_rbf, "fitness": self.fitness, "mean_fpr": self.mean_fpr,
                "mean_fnr": self.mean_fnr, "evaluations": self.evaluations, "history": list(self.history)}


@dataclass
class _Fold:
    D_train: np.ndarray  # squared distances among training rows
    D_test: np.ndarray   # test x train squared distances
    y_train: np.ndarray
    y_test: np.ndarray


class SvmCvObjective:
    """Cross-validated SVM score for many (C, gamma) with folds and distances computed once."""

    def __init__(self, ds: LabeledDataset, cv_k: int = 10, seed: int = 0, kkt_tol: float = 1e-3,
                 fitness: str = "da_dr"):
        if fitness not in FITNESS_KINDS:
            raise ValueError(f"unknown fitness {fitness!r}; expected one of {FITNESS_KINDS}")
        self.fitness = fitness
        self.kkt_tol = kkt_tol
        self.folds: list[_Fold] = []
        for train_idx, test_idx in stratified_kfold(ds, cv_k, seed):
            norm = fit_minmax(ds.X[train_idx])
            Xtr = apply_minmax(norm, ds.X[train_idx])
            Xte = apply_minmax(norm, ds.X[test_idx])
            self.folds.append(_Fold(sq_distances(Xtr, Xtr), sq_distances(Xte, Xtr),
                                    ds.y[train_idx].astype(float), ds.y[test_idx]))
        self.cache: dict[tuple[float, float], tuple[float, float, float]] = {}

    def scores(self, c_param: float, gamma_rbf: float) -> tuple[float, float, float]:
        """(fitness, mean FPR, mean FNR) for one parameter pair."""
        key = (float(c_param), float(gamma_rbf))
        if key in self.cache:
            return self.cache[key]
        fpr, fnr = [], []
        for f in self.folds:
            alpha, bias, _ = solve_dual(np.exp(-gamma_rbf * f.D_train), f.y_train, c_param, self.kkt_tol)
            dec = np.exp(-gamma_rbf * f.D_test) @ (alpha * f.y_train) + bias
            _, fp_rate, fn_rate = rates(confusion(f.y_test, np.where(dec > 0, 1, -1)))
            fpr.append(fp_rate)
            fnr.append(fn_rate)
        mfpr, mfnr = float(np.mean(fpr)), float(np.mean(fnr))
        fit = 1.0 - detection_accuracy(1.0 - mfnr, mfnr, mfpr)
        if self.fitness == "da_dr":
            fit += mfnr  # 1 - DR with DR = mean TPR
        out = (fit, mfpr, mfnr)
        self.cache[key] = out
        return out

    def __call__(self, x) -> float:
        fit, fpr, fnr = self.scores(x[0], x[1])
        return fit + TIEBREAK * (fnr if self.fitness == "da" else fpr)


def tune_svm(ds: LabeledDataset, space: SearchSpace = SVM_SPACE, params: FireflyParams = FireflyParams(),
             cv_k: int = 10, fitness: str = "da_dr") -> TuneResult:
    """Search (log C, log gamma) for the best cross-validated fitness (see ``FITNESS_KINDS``).

    The fold partition comes from ``params.seed`` and is shared by every
    evaluation.
    """
    objective = SvmCvObjective(ds, cv_k, params.seed, fitness=fitness)
    res = optimize(objective, space, params)
    c, g = (float(v) for v in res.best_position)
    fit, fpr, fnr = objective.scores(c, g)
    return TuneResult(c, g, fit, fpr, fnr, list(res.history), params, space, cv_k, res.evaluations, fitness)


def grid_search_svm(ds: LabeledDataset, c_values: Sequence[float], gamma_values: Sequence[float],
                    cv_k: int = 10, seed: int = 0, fitness: str = "da_dr") -> tuple[float, float, float]:
    """Exhaustive (C, gamma) search on the same folds ``tune_svm`` would use; returns (C, gamma, fitness)."""
    objective = SvmCvObjective(ds, cv_k, seed, fitness=fitness)
    best = None
    for c in c_values:
        for g in gamma_values:
            key = objective([c, g])
            if best is None or key < best[0]:
                best = (key, float(c), float(g))
    _, c, g = best
    return c, g, objective.scores(c, g)[0]
