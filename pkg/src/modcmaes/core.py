"""The configurable evolution strategy engine.

One :func:`run` executes a nested loop: an outer restart loop (optional
IPOP/BIPOP population schedules) around an inner generation loop of
mutation, evaluation (with optional sequential early stopping),
selection, recombination, and strategy-parameter adaptation. All eleven
switchable mechanisms are driven by a
:class:`~modcmaes.configuration.ConfigurationVector`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .configuration import ConfigurationVector, decode, encode
from .sampling import Sampler, SamplerSpec

__all__ = [
    "Individual",
    "StrategyParams",
    "RestartState",
    "RestartCriteria",
    "RunRecord",
    "SelectionShortfallError",
    "ZeroMutationError",
    "default_lambda",
    "resolve_interactions",
    "apply_threshold",
    "evaluate_offspring",
    "select",
    "recombination_weights",
    "recombine",
    "adapt",
    "run",
    "ALPHA_TPA",
    "C_ALPHA",
]

# Two-point step-size adaptation constants: probe offset factor and
# smoothing rate of the probe signal.
ALPHA_TPA = 0.5
C_ALPHA = 0.3


class SelectionShortfallError(RuntimeError):
    """Fewer candidates than parents survived the selection rules."""


class ZeroMutationError(ValueError):
    """A zero-length sample cannot be pushed out to the threshold."""


class _BudgetExhausted(Exception):
    pass


class _TargetReached(Exception):
    pass


def default_lambda(dimension: int) -> int:
    """Standard offspring count 4 + floor(3 ln D)."""
    return 4 + int(math.floor(3.0 * math.log(dimension)))


def resolve_interactions(
    cfg: ConfigurationVector, lambda_: int, mu: int
) -> tuple[int, int, int, int]:
    """Repair module interactions; returns (lambda, mu, lambda_eff, seq_cutoff).

    Pairwise selection consumes two candidates per surviving parent, so
    it forces lambda >= 2*mu (and an even lambda). Two-point adaptation
    reserves two offspring, shrinking the pool to lambda_eff; when that
    collides with pairwise at lambda == 2*mu, mu shrinks to
    lambda_eff/2. The sequential-selection cutoff is mu normally, 2*mu
    under pairwise, and capped by lambda_eff when all three interact.
    """
    if not 1 <= mu <= lambda_:
        raise ValueError(f"need 1 <= mu <= lambda, got mu={mu} lambda={lambda_}")
    if cfg.pairwise:
        lambda_ = max(lambda_, 2 * mu)
        if lambda_ % 2:
            lambda_ += 1
    lambda_eff = lambda_ - 2 if cfg.tpa else lambda_
    if cfg.pairwise and cfg.tpa and lambda_ == 2 * mu:
        mu = lambda_eff // 2
    if cfg.pairwise:
        seq_cutoff = 2 * mu
        if cfg.tpa and cfg.sequential:
            seq_cutoff = min(2 * mu, lambda_eff)
    else:
        seq_cutoff = mu
    return lambda_, mu, lambda_eff, seq_cutoff


def apply_threshold(z: np.ndarray, threshold: float) -> np.ndarray:
    """Push a short sample vector out across the length threshold.

    Vectors at least ``threshold`` long pass unchanged; shorter ones are
    mirrored across the threshold to length ``2*threshold - |z|``,
    keeping the direction and avoiding a point mass at the threshold.
    """
    if threshold < 0:
        raise ValueError("threshold must be >= 0")
    if threshold == 0.0:
        return z
    norm = float(np.linalg.norm(z))
    if norm >= threshold:
        return z
    if norm == 0.0:
        raise ZeroMutationError("cannot scale a zero vector to the threshold")
    return z * ((2.0 * threshold - norm) / norm)


@dataclass
class Individual:
    """One candidate: raw sample z, scaled step y, solution x, value f."""

    z: np.ndarray
    y: np.ndarray
    x: np.ndarray
    f: float | None = None


def evaluate_offspring(
    pop: list[Individual],
    objective,
    seq_active: bool,
    seq_cutoff: int,
    f_best: float = math.inf,
) -> list[Individual]:
    """Evaluate offspring in order, optionally stopping early.

    With sequential selection active, evaluation stops as soon as at
    least ``seq_cutoff`` individuals are evaluated and one of them
    improved on ``f_best``. Returns the evaluated prefix.
    """
    evaluated: list[Individual] = []
    improved = False
    for ind in pop:
        f = float(objective(ind.x))
        ind.f = f
        evaluated.append(ind)
        if f < f_best:
            f_best = f
            improved = True
        if seq_active and len(evaluated) >= seq_cutoff and improved:
            break
    return evaluated


def select(
    pop: list[Individual],
    parents: list[Individual],
    mu: int,
    cfg: ConfigurationVector,
) -> list[Individual]:
    """Pick the mu parents of the next generation, ranked best-first."""
    candidates = pop
    if cfg.pairwise:
        winners = []
        for i in range(0, len(pop), 2):
            pair = pop[i : i + 2]
            winners.append(min(pair, key=lambda ind: ind.f))
        candidates = winners
    if cfg.elitist and parents:
        candidates = candidates + list(parents)
    if len(candidates) < mu:
        raise SelectionShortfallError(
            f"need {mu} parents but only {len(candidates)} candidates"
        )
    return sorted(candidates, key=lambda ind: ind.f)[:mu]


def recombination_weights(mu: int, option: str) -> np.ndarray:
    """Parent weights: normalized log-rank ("log") or uniform ("equal")."""
    if option == "equal":
        return np.full(mu, 1.0 / mu)
    if option == "log":
        w = np.log(mu + 0.5) - np.log(np.arange(1, mu + 1))
        return w / w.sum()
    raise ValueError(f"unknown weights option {option!r}")


def recombine(parents: list[Individual], cfg: ConfigurationVector) -> np.ndarray:
    """Weighted average of the parents' solution vectors."""
    w = recombination_weights(len(parents), cfg.weights_option)
    xs = np.array([p.x for p in parents])
    return w @ xs


@dataclass
class RestartCriteria:
    """Thresholds of the local stop tests; all configurable."""

    condition_limit: float = 1e14
    tol_sigma: float = 1e-12
    tol_improvement: float = 1e-12
    stagnation_base: int = 10
    stagnation_scale: float = 30.0

    def stagnation_window(self, dimension: int, lambda_: int) -> int:
        return math.ceil(
            self.stagnation_base + self.stagnation_scale * dimension / lambda_
        )


class StrategyParams:
    """All endogenous state of one local ES run.

    Derived constants (weights, learning rates) follow the standard
    published defaults; the switchable mechanisms only consume them.
    """

    def __init__(
        self,
        dimension: int,
        cfg: ConfigurationVector,
        lambda_: int | None = None,
        mu: int | None = None,
        sigma0: float | None = None,
        lower: np.ndarray | None = None,
        upper: np.ndarray | None = None,
        mean: np.ndarray | None = None,
        sampler_seed: int | None = None,
        criteria: RestartCriteria | None = None,
    ):
        d = dimension
        self.dimension = d
        self.lower = np.full(d, -5.0) if lower is None else np.asarray(lower, float)
        self.upper = np.full(d, 5.0) if upper is None else np.asarray(upper, float)

        lam = lambda_ if lambda_ is not None else default_lambda(d)
        mu_ = mu if mu is not None else lam // 2
        self.lambda_, self.mu, self.lambda_eff, self.seq_cutoff = (
            resolve_interactions(cfg, lam, mu_)
        )

        self.weights = recombination_weights(self.mu, cfg.weights_option)
        self.mu_eff = 1.0 / float(self.weights @ self.weights)

        m = self.mu_eff
        self.c_sigma = (m + 2.0) / (d + m + 5.0)
        self.d_sigma = (
            1.0 + 2.0 * max(0.0, math.sqrt((m - 1.0) / (d + 1.0)) - 1.0)
            + self.c_sigma
        )
        self.c_c = (4.0 + m / d) / (d + 4.0 + 2.0 * m / d)
        self.c_1 = 2.0 / ((d + 1.3) ** 2 + m)
        self.c_mu = min(
            1.0 - self.c_1, 2.0 * (m - 2.0 + 1.0 / m) / ((d + 2.0) ** 2 + m)
        )
        self.beta_active = (4.0 * m - 2.0) / ((d + 12.0) ** 2 + 4.0 * m)
        self.chi_n = math.sqrt(d) * (1.0 - 1.0 / (4.0 * d) + 1.0 / (21.0 * d * d))

        width = float(self.upper[0] - self.lower[0])
        self.sigma0 = sigma0 if sigma0 is not None else 0.2 * width
        self.sigma = self.sigma0
        self.mean = (
            np.zeros(d) if mean is None else np.asarray(mean, dtype=float).copy()
        )

        self.C = np.eye(d)
        self.B = np.eye(d)
        self.eig_vals = np.ones(d)
        self.d_sqrt = np.ones(d)
        self.inv_root_C = np.eye(d)
        self.p_sigma = np.zeros(d)
        self.p_c = np.zeros(d)
        self.tpa_state = 0.0
        self.t = 0
        self.repair_count = 0
        self.parents: list[Individual] = []

        self.criteria = criteria or RestartCriteria()
        self.diameter = float(np.linalg.norm(self.upper - self.lower))
        self.threshold = 0.2 * self.diameter

        # Lazy eigendecomposition interval, in generations.
        self.eig_interval = max(
            1, int(1.0 / (10.0 * d * (self.c_1 + self.c_mu)))
        )
        self._gens_since_eig = 0

        self.sampler = Sampler(
            SamplerSpec(
                base=cfg.base_sampler,
                mirrored=cfg.mirrored,
                orthogonal=cfg.orthogonal,
                dimension=d,
                seed=sampler_seed,
            )
        )

        # Local-run stop bookkeeping.
        self.best_f = math.inf
        self.last_improvement_gen = 0
        self.stop_reason: str | None = None

    def update_threshold(self, used: int, budget: int) -> None:
        remaining = max(budget - used, 0) / budget
        self.threshold = 0.2 * self.diameter * remaining**0.995

    def decompose(self, force: bool = False) -> None:
        """Refresh the eigendecomposition of C, repairing if needed."""
        self._gens_since_eig += 1
        if not force and self._gens_since_eig < self.eig_interval:
            return
        self._gens_since_eig = 0
        if not np.all(np.isfinite(self.C)):
            self.C = np.eye(self.dimension)
            self.p_c = np.zeros(self.dimension)
            self.repair_count += 1
        if not (1e-32 < self.sigma < 1e32) or not np.all(
            np.isfinite(self.mean)
        ):
            self.sigma = self.sigma0
            self.C = np.eye(self.dimension)
            self.p_c = np.zeros(self.dimension)
            self.p_sigma = np.zeros(self.dimension)
            self.mean = np.where(np.isfinite(self.mean), self.mean, 0.0)
            self.repair_count += 1
        vals, vecs = np.linalg.eigh(self.C)
        if vals[0] <= 0.0:
            floor = max(vals[-1] * 1e-14, 1e-30)
            vals = np.maximum(vals, floor)
            self.C = (vecs * vals) @ vecs.T
            self.C = np.triu(self.C) + np.triu(self.C, 1).T
            self.repair_count += 1
        self.eig_vals = vals
        self.d_sqrt = np.sqrt(vals)
        self.B = vecs
        self.inv_root_C = (vecs / self.d_sqrt) @ vecs.T


def adapt(
    params: StrategyParams,
    selected: list[Individual],
    all_evaluated: list[Individual],
    cfg: ConfigurationVector,
    tpa_sign: int = 0,
    old_mean: np.ndarray | None = None,
) -> StrategyParams:
    """One generation of strategy-parameter adaptation.

    Updates the evolution paths, the step size (cumulative adaptation
    or the two-point probe signal), and the covariance matrix (rank-one
    plus rank-mu, optionally with the negative update built from the
    worst offspring of the generation).
    """
    p = params
    d = p.dimension
    if old_mean is None:
        old_mean = p.mean
    dm = (p.mean - old_mean) / p.sigma

    if cfg.tpa:
        p.tpa_state = (1.0 - C_ALPHA) * p.tpa_state + C_ALPHA * tpa_sign
        p.sigma *= math.exp(p.tpa_state / p.d_sigma)
    else:
        p.p_sigma = (1.0 - p.c_sigma) * p.p_sigma + math.sqrt(
            p.c_sigma * (2.0 - p.c_sigma) * p.mu_eff
        ) * (p.inv_root_C @ dm)
        arg = (p.c_sigma / p.d_sigma) * (
            np.linalg.norm(p.p_sigma) / p.chi_n - 1.0
        )
        # A single-generation factor beyond e^20 only occurs in runs
        # already degenerate; clip instead of overflowing.
        p.sigma *= math.exp(min(max(arg, -20.0), 20.0))

    h_sig = float(
        np.linalg.norm(p.p_sigma)
        / math.sqrt(1.0 - (1.0 - p.c_sigma) ** (2.0 * (p.t + 1)))
        < (1.4 + 2.0 / (d + 1.0)) * p.chi_n
    )
    p.p_c = (1.0 - p.c_c) * p.p_c + h_sig * math.sqrt(
        p.c_c * (2.0 - p.c_c) * p.mu_eff
    ) * dm

    ys = np.array([ind.y for ind in selected])
    w = p.weights[: len(selected)]
    rank_mu = (w[:, None] * ys).T @ ys
    dhs = (1.0 - h_sig) * p.c_c * (2.0 - p.c_c)
    p.C = (
        (1.0 - p.c_1 - p.c_mu + p.c_1 * dhs) * p.C
        + p.c_1 * np.outer(p.p_c, p.p_c)
        + p.c_mu * rank_mu
    )

    if cfg.active and all_evaluated:
        worst = sorted(all_evaluated, key=lambda ind: ind.f, reverse=True)
        worst = worst[: p.mu]
        yw = np.array([ind.y for ind in worst])
        ww = p.weights[: len(worst)]
        p.C -= p.beta_active * ((ww[:, None] * yw).T @ yw)

    p.C = np.triu(p.C) + np.triu(p.C, 1).T
    p.t += 1
    p.decompose()
    return p


@dataclass
class RestartState:
    """Outer-loop bookkeeping across local restarts."""

    regime: str
    lambda_default: int
    restarts_done: int = 0
    lambda_large: int = 0
    budget_large: int = 0
    budget_small: int = 0
    current: str = "initial"

    def __post_init__(self):
        self.lambda_large = max(self.lambda_large, self.lambda_default)

    def next_lambda(self, rng: np.random.Generator) -> int:
        """Population size for the upcoming local run."""
        if self.restarts_done == 0:
            self.current = "initial"
            return self.lambda_default
        if self.regime == "ipop":
            self.current = "large"
            return self.lambda_default * 2**self.restarts_done
        if self.regime == "bipop":
            if self.budget_large <= self.budget_small:
                self.current = "large"
                self.lambda_large *= 2
                return self.lambda_large
            self.current = "small"
            u = rng.uniform()
            lam = int(
                self.lambda_default
                * (self.lambda_large / (2.0 * self.lambda_default)) ** (u * u)
            )
            return max(self.lambda_default, lam)
        self.current = "none"
        return self.lambda_default

    def note_finished(self, consumed: int) -> None:
        if self.current == "large":
            self.budget_large += consumed
        elif self.current == "small":
            self.budget_small += consumed
        self.restarts_done += 1


@dataclass
class RunRecord:
    """Outcome of one seeded ES run on one problem."""

    config: str
    function_id: str
    dimension: int
    seed: int
    evaluations_used: int
    best_error: float
    hit_index: int | None
    trajectory: np.ndarray | None = None
    generation_best_f: list[float] | None = None
    restarts: int = 0

    @property
    def success(self) -> bool:
        return self.hit_index is not None


class _Accountant:
    """Budgeted objective wrapper; the only path to the test function."""

    def __init__(self, problem, budget: int, target: float, record: bool):
        self.problem = problem
        self.budget = budget
        self.target = target
        self.used = 0
        self.best_error = math.inf
        self.hit_index: int | None = None
        self.trajectory: list[float] | None = [] if record else None

    def __call__(self, x: np.ndarray) -> float:
        if self.used >= self.budget:
            raise _BudgetExhausted
        self.used += 1
        err = self.problem.error(x)
        if not math.isfinite(err):
            err = math.inf
        if err < self.best_error:
            self.best_error = err
        if self.trajectory is not None:
            self.trajectory.append(self.best_error)
        if self.best_error <= self.target and self.hit_index is None:
            self.hit_index = self.used
            raise _TargetReached
        return err


def _local_stop(params: StrategyParams, gen_best: float) -> str | None:
    """Check the local restart criteria after a completed generation."""
    p = params
    crit = p.criteria
    if gen_best < p.best_f - crit.tol_improvement:
        p.best_f = min(p.best_f, gen_best)
        p.last_improvement_gen = p.t
    elif gen_best < p.best_f:
        p.best_f = gen_best
    window = crit.stagnation_window(p.dimension, p.lambda_)
    if p.t - p.last_improvement_gen >= window:
        return "stagnation"
    if p.eig_vals[-1] / max(p.eig_vals[0], 1e-300) > crit.condition_limit:
        return "condition"
    if p.sigma * math.sqrt(p.eig_vals[-1]) < crit.tol_sigma * p.sigma0:
        return "tol_sigma"
    axis = p.t % p.dimension
    probe = 0.1 * p.sigma * p.d_sqrt[axis] * p.B[:, axis]
    if np.all(p.mean + probe == p.mean):
        return "no_effect_axis"
    coord = 0.2 * p.sigma * np.sqrt(np.diag(p.C))
    if np.any(p.mean + coord == p.mean):
        return "no_effect_coord"
    return None


def _mutation_vectors(params: StrategyParams, cfg, use_threshold: bool):
    zs = params.sampler.next_batch(params.lambda_eff)
    out = []
    for z in zs:
        if use_threshold:
            for _ in range(16):
                try:
                    z = apply_threshold(z, params.threshold)
                    break
                except ZeroMutationError:
                    z = params.sampler.next_batch(1)[0]
        out.append(z)
    return out


def _run_local(
    cfg: ConfigurationVector,
    params: StrategyParams,
    acct: _Accountant,
    budget: int,
    generation_best: list[float] | None,
) -> None:
    """Inner generation loop; returns when a local stop criterion fires."""
    while True:
        if cfg.threshold:
            params.update_threshold(acct.used, budget)
        zs = _mutation_vectors(params, cfg, cfg.threshold)
        offspring = []
        for z in zs:
            y = params.B @ (params.d_sqrt * z)
            x = params.mean + params.sigma * y
            offspring.append(Individual(z=z, y=y, x=x))

        evaluated = evaluate_offspring(
            offspring, acct, cfg.sequential, params.seq_cutoff, acct.best_error
        )
        parents = select(evaluated, params.parents, params.mu, cfg)
        params.parents = parents

        old_mean = params.mean
        new_mean = recombine(parents, cfg)

        tpa_sign = 0
        if cfg.tpa:
            dm = (new_mean - old_mean) / params.sigma
            probe = params.sigma * ALPHA_TPA * dm
            f_plus = acct(new_mean + probe)
            f_minus = acct(new_mean - probe)
            if f_plus < f_minus:
                tpa_sign = 1
            elif f_minus < f_plus:
                tpa_sign = -1

        params.mean = new_mean
        adapt(params, parents, evaluated, cfg, tpa_sign, old_mean=old_mean)

        if generation_best is not None:
            generation_best.append(min(par.f for par in parents))

        reason = _local_stop(params, min(ind.f for ind in evaluated))
        if reason is not None:
            params.stop_reason = reason
            return


def run(
    cfg: ConfigurationVector | str,
    problem,
    budget: int,
    seed: int,
    lambda_: int | None = None,
    mu: int | None = None,
    sigma0: float | None = None,
    target: float | None = None,
    criteria: RestartCriteria | None = None,
    record_trajectory: bool = False,
    record_generations: bool = False,
) -> RunRecord:
    """Execute one seeded ES run under a fixed evaluation budget.

    The run stops when the error target is reached, the budget is
    exhausted, or (without a restart regime) a local stop criterion
    fires. Identical arguments always reproduce the identical record.
    """
    if isinstance(cfg, str):
        cfg = decode(cfg)
    if budget < 1:
        raise ValueError("budget must be >= 1")
    d = problem.dimension
    if target is None:
        target = getattr(problem, "target_precision", 1e-8)
    rng = np.random.default_rng(seed)
    acct = _Accountant(problem, budget, target, record_trajectory)
    base_lambda = lambda_ if lambda_ is not None else default_lambda(d)
    restart = RestartState(regime=cfg.restart_regime, lambda_default=base_lambda)
    generation_best: list[float] | None = [] if record_generations else None

    starts = 0
    try:
        while True:
            lam = restart.next_lambda(rng)
            # A population larger than the remaining budget cannot
            # finish a generation; cap it so schedules never balloon.
            lam = max(4, min(lam, budget - acct.used + 2))
            mu_ = mu if (mu is not None and starts == 0) else lam // 2
            consumed_before = acct.used
            params = StrategyParams(
                dimension=d,
                cfg=cfg,
                lambda_=lam,
                mu=mu_,
                sigma0=sigma0,
                lower=problem.lower,
                upper=problem.upper,
                mean=rng.uniform(problem.lower, problem.upper),
                sampler_seed=int(rng.integers(2**63)),
                criteria=criteria,
            )
            starts += 1
            _run_local(cfg, params, acct, budget, generation_best)
            restart.note_finished(acct.used - consumed_before)
            if cfg.restart_regime == "none":
                break
    except (_BudgetExhausted, _TargetReached):
        pass

    return RunRecord(
        config=encode(cfg),
        function_id=getattr(problem, "function_id", "?"),
        dimension=d,
        seed=seed,
        evaluations_used=acct.used,
        best_error=acct.best_error,
        hit_index=acct.hit_index,
        trajectory=(
            np.array(acct.trajectory) if acct.trajectory is not None else None
        ),
        generation_best_f=generation_best,
        restarts=max(starts - 1, 0),
    )
