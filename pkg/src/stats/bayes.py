"""
Bayesian comparison of two learning curves.

The proposed method's returns are noisy observations of a latent Gaussian
random walk mu[t]; the baseline's returns are observations of
mu[t] - delta[t], where delta[t] is a Cauchy random walk:

    mu[t]    ~ Normal(mu[t-1], sigma_mu)
    delta[t] ~ Cauchy(delta[t-1], sigma_x)
    R_P[t]   ~ Normal(mu[t], sigma_r)
    R_X[t]   ~ Normal(mu[t] - delta[t], sigma_r)

Every run's return enters the likelihood independently. Priors are uniform
on a bounded box scaled by the data. The posterior is sampled with
component-wise random-walk Metropolis: latent states are updated in
even/odd blocks (conditionally independent given the other parity), each
latent path also gets a whole-path shift move, and the scales are updated
on the log scale. Step sizes adapt during burn-in only.
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..config import McmcConfig
from ..errors import ContractError
from .curves import CurveSet, check_shared_grid

logger = logging.getLogger(__name__)

ACCEPTANCE_RANGE = (0.1, 0.6)
TARGET_ACCEPTANCE = 0.44
RHAT_LIMIT = 1.1
SIGMA_NAMES = ("sigma_mu", "sigma_x", "sigma_r")
# Lower edge of the scale box, as a fraction of the data scale.
SIGMA_FLOOR = 1e-6


@dataclass(frozen=True)
class PriorBounds:
    """Uniform prior box."""
    mu: Tuple[float, float]
    delta: Tuple[float, float]
    sigma: Tuple[float, float]

    def to_dict(self) -> dict:
        return {"mu": list(self.mu), "delta": list(self.delta), "sigma": list(self.sigma)}


def prior_bounds(proposed: np.ndarray, baseline: np.ndarray, prior_scale: float) -> PriorBounds:
    """Box of +-prior_scale data ranges for latents, (floor, prior_scale * sd] for scales."""
    pooled = np.concatenate([proposed.ravel(), baseline.ravel()])
    spread = float(np.ptp(pooled)) or 1.0
    scale = float(np.std(pooled)) or spread
    return PriorBounds(
        mu=(float(pooled.min()) - prior_scale * spread, float(pooled.max()) + prior_scale * spread),
        delta=(-prior_scale * spread, prior_scale * spread),
        sigma=(SIGMA_FLOOR * scale, prior_scale * scale),
    )


@dataclass
class _ChainOutput:
    delta: np.ndarray
    mu: np.ndarray
    sigma: np.ndarray
    accepted: Dict[str, float]
    proposed: Dict[str, float]


class _Sampler:
    """One Markov chain over (mu, delta, sigma_mu, sigma_x, sigma_r)."""

    def __init__(self, P: np.ndarray, X: np.ndarray, bounds: PriorBounds, cfg: McmcConfig, seed):
        self.P = P
        self.X = X
        self.T = P.shape[0]
        self.n_obs = P.size + X.size
        self.bounds = bounds
        self.cfg = cfg
        self.rng = np.random.default_rng(seed)
        self.blocks = [np.arange(0, self.T, 2), np.arange(1, self.T, 2)]
        self.blocks = [b for b in self.blocks if b.size]

        p_mean = P.mean(axis=1)
        self.mu = np.clip(p_mean, *bounds.mu)
        self.delta = np.clip(p_mean - X.mean(axis=1), *bounds.delta)
        lo, hi = bounds.sigma
        resid = np.concatenate([(P - self.mu[:, None]).ravel(), (X - (self.mu - self.delta)[:, None]).ravel()])
        fallback = 0.1 * hi / self.cfg.prior_scale
        init = [
            np.std(np.diff(self.mu)) if self.T > 1 else fallback,
            np.std(np.diff(self.delta)) if self.T > 1 else fallback,
            np.std(resid),
        ]
        self.sigma = np.clip(np.where(np.asarray(init) > 0, init, fallback), lo, hi)

        obs_sd = max(float(self.sigma[2]), lo)
        n_per_step = P.shape[1] + X.shape[1]
        self.mu_step = np.full(self.T, obs_sd / np.sqrt(n_per_step))
        self.delta_step = np.full(self.T, 2.0 * obs_sd / np.sqrt(X.shape[1]))
        self.shift_step = np.full(2, obs_sd / np.sqrt(n_per_step * self.T))
        self.sigma_step = np.full(3, 0.1)
        self._reset_window()
        self.accepted = {name: 0.0 for name in ("mu", "delta", "shift", *SIGMA_NAMES)}
        self.proposals = dict.fromkeys(self.accepted, 0.0)

    def _reset_window(self):
        self.mu_acc = np.zeros(self.T)
        self.delta_acc = np.zeros(self.T)
        self.shift_acc = np.zeros(2)
        self.sigma_acc = np.zeros(3)

    # Log conditionals ---------------------------------------------------

    def _mu_logp(self, vals: np.ndarray, idx: np.ndarray) -> np.ndarray:
        s_mu, _, s_r = self.sigma
        lp = -(
            ((self.P[idx] - vals[:, None]) ** 2).sum(axis=1)
            + ((self.X[idx] - (vals - self.delta[idx])[:, None]) ** 2).sum(axis=1)
        ) / (2.0 * s_r ** 2)
        prev = self.mu[np.maximum(idx - 1, 0)]
        nxt = self.mu[np.minimum(idx + 1, self.T - 1)]
        lp -= np.where(idx > 0, (vals - prev) ** 2, 0.0) / (2.0 * s_mu ** 2)
        lp -= np.where(idx < self.T - 1, (nxt - vals) ** 2, 0.0) / (2.0 * s_mu ** 2)
        lo, hi = self.bounds.mu
        return np.where((vals < lo) | (vals > hi), -np.inf, lp)

    def _delta_logp(self, vals: np.ndarray, idx: np.ndarray) -> np.ndarray:
        _, s_x, s_r = self.sigma
        mean_x = self.mu[idx] - vals
        lp = -((self.X[idx] - mean_x[:, None]) ** 2).sum(axis=1) / (2.0 * s_r ** 2)
        prev = self.delta[np.maximum(idx - 1, 0)]
        nxt = self.delta[np.minimum(idx + 1, self.T - 1)]
        lp -= np.where(idx > 0, np.log1p(((vals - prev) / s_x) ** 2), 0.0)
        lp -= np.where(idx < self.T - 1, np.log1p(((nxt - vals) / s_x) ** 2), 0.0)
        lo, hi = self.bounds.delta
        return np.where((vals < lo) | (vals > hi), -np.inf, lp)

    def _likelihood(self, mu: np.ndarray, delta: np.ndarray) -> float:
        s_r = self.sigma[2]
        ss = ((self.P - mu[:, None]) ** 2).sum() + ((self.X - (mu - delta)[:, None]) ** 2).sum()
        return -ss / (2.0 * s_r ** 2)

    def _sigma_logp(self, i: int, s: float, stats: Tuple[np.ndarray, np.ndarray, float]) -> float:
        lo, hi = self.bounds.sigma
        if not lo <= s <= hi:
            return -np.inf
        d_mu, d_delta, ss = stats
        if i == 0:
            lp = -d_mu.size * np.log(s) - (d_mu ** 2).sum() / (2.0 * s ** 2)
        elif i == 1:
            lp = -d_delta.size * np.log(s) - np.log1p((d_delta / s) ** 2).sum()
        else:
            lp = -self.n_obs * np.log(s) - ss / (2.0 * s ** 2)
        # Jacobian of the log-scale proposal.
        return lp + np.log(s)

    # Moves ------------------------------------------------------------------

    def _block_update(self, values, steps, acc, logp, idx):
        current = values[idx]
        proposal = current + steps[idx] * self.rng.standard_normal(idx.size)
        log_ratio = logp(proposal, idx) - logp(current, idx)
        accept = np.log(self.rng.random(idx.size)) < log_ratio
        values[idx] = np.where(accept, proposal, current)
        acc[idx] += accept
        return int(accept.sum()), idx.size

    def _shift_update(self, which: int):
        c = self.shift_step[which] * self.rng.standard_normal()
        if which == 0:
            new_mu, new_delta = self.mu + c, self.delta
            lo, hi = self.bounds.mu
            inside = new_mu.min() >= lo and new_mu.max() <= hi
        else:
            new_mu, new_delta = self.mu, self.delta + c
            lo, hi = self.bounds.delta
            inside = new_delta.min() >= lo and new_delta.max() <= hi
        if not inside:
            return False
        log_ratio = self._likelihood(new_mu, new_delta) - self._likelihood(self.mu, self.delta)
        if np.log(self.rng.random()) < log_ratio:
            self.mu, self.delta = new_mu.copy(), new_delta.copy()
            return True
        return False

    def sweep(self, record: bool):
        counts = {}
        acc_mu = acc_delta = n_mu = n_delta = 0
        for idx in self.blocks:
            a, n = self._block_update(self.mu, self.mu_step, self.mu_acc, self._mu_logp, idx)
            acc_mu, n_mu = acc_mu + a, n_mu + n
        for idx in self.blocks:
            a, n = self._block_update(self.delta, self.delta_step, self.delta_acc, self._delta_logp, idx)
            acc_delta, n_delta = acc_delta + a, n_delta + n
        counts["mu"] = (acc_mu, n_mu)
        counts["delta"] = (acc_delta, n_delta)

        shifted = 0
        for which in (0, 1):
            ok = self._shift_update(which)
            self.shift_acc[which] += ok
            shifted += ok
        counts["shift"] = (shifted, 2)

        stats = (
            np.diff(self.mu),
            np.diff(self.delta),
            float(((self.P - self.mu[:, None]) ** 2).sum()
                  + ((self.X - (self.mu - self.delta)[:, None]) ** 2).sum()),
        )
        for i, name in enumerate(SIGMA_NAMES):
            current = self.sigma[i]
            proposal = current * np.exp(self.sigma_step[i] * self.rng.standard_normal())
            log_ratio = self._sigma_logp(i, proposal, stats) - self._sigma_logp(i, current, stats)
            ok = np.log(self.rng.random()) < log_ratio
            if ok:
                self.sigma[i] = proposal
            self.sigma_acc[i] += ok
            counts[name] = (int(ok), 1)

        if record:
            for name, (a, n) in counts.items():
                self.accepted[name] += a
                self.proposals[name] += n

    def adapt(self):
        """Scale step sizes toward the target acceptance of the last window."""
        w = self.cfg.adapt_interval
        for steps, acc in (
            (self.mu_step, self.mu_acc),
            (self.delta_step, self.delta_acc),
            (self.shift_step, self.shift_acc),
            (self.sigma_step, self.sigma_acc),
        ):
            steps *= np.exp(2.0 * (acc / w - TARGET_ACCEPTANCE))
        self._reset_window()

    def run(self) -> _ChainOutput:
        cfg = self.cfg
        kept_delta, kept_mu, kept_sigma = [], [], []
        for it in range(cfg.iterations):
            burning = it < cfg.burn_in
            self.sweep(record=not burning)
            if burning and (it + 1) % cfg.adapt_interval == 0:
                self.adapt()
            if not burning and (it - cfg.burn_in) % cfg.thin == 0:
                kept_delta.append(self.delta.copy())
                kept_mu.append(self.mu.copy())
                kept_sigma.append(self.sigma.copy())
        return _ChainOutput(
            delta=np.array(kept_delta),
            mu=np.array(kept_mu),
            sigma=np.array(kept_sigma),
            accepted=dict(self.accepted),
            proposed=dict(self.proposals),
        )


def _run_chain(args) -> _ChainOutput:
    P, X, bounds, cfg, seed = args
    return _Sampler(P, X, bounds, cfg, seed).run()


def _effective_sample_size(x: np.ndarray) -> float:
    """Autocorrelation-based ESS, summing lags until the first negative one."""
    n = x.size
    if n < 4:
        return float(n)
    centered = x - x.mean()
    var = centered.var()
    if var == 0:
        return float(n)
    spectrum = np.fft.rfft(centered, n=2 * n)
    acf = np.fft.irfft(spectrum * np.conj(spectrum))[:n] / (var * n)
    tau = 1.0
    for rho in acf[1:]:
        if rho < 0:
            break
        tau += 2.0 * rho
    return float(n / tau)


def _split_rhat(chains: np.ndarray) -> np.ndarray:
    """Split R-hat per step for samples shaped [chains, draws, T]."""
    n = chains.shape[1] // 2
    if n < 2:
        return np.full(chains.shape[2], np.nan)
    halves = np.concatenate([chains[:, :n], chains[:, n:2 * n]], axis=0)
    within = halves.var(axis=1, ddof=1).mean(axis=0)
    between = n * halves.mean(axis=1).var(axis=0, ddof=1)
    var_hat = (n - 1) / n * within + between / n
    with np.errstate(divide="ignore", invalid="ignore"):
        rhat = np.sqrt(np.where(within > 0, var_hat / within, 1.0))
    return rhat


@dataclass
class PosteriorSummary:
    """Per-step posterior of delta = proposed - baseline, with diagnostics."""
    steps: np.ndarray
    delta_mean: np.ndarray
    delta_lower: np.ndarray
    delta_upper: np.ndarray
    delta_sd: np.ndarray
    mu_mean: np.ndarray
    sigma_mean: Dict[str, float]
    acceptance_rate: float
    block_acceptance: Dict[str, float]
    rhat_max: float
    ess_min: float
    prior_bounds: Dict[str, List[float]]
    seed: int
    labels: Tuple[str, str]
    settings: dict
    warnings: List[str] = field(default_factory=list)

    def significant_intervals(self) -> List[Tuple[int, int]]:
        return significant_intervals(self)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "step": self.steps,
            "delta_mean": self.delta_mean,
            "q2.5": self.delta_lower,
            "q97.5": self.delta_upper,
        })

    def to_dict(self) -> dict:
        return {
            "proposed": self.labels[0],
            "baseline": self.labels[1],
            "significant_intervals": [list(iv) for iv in self.significant_intervals()],
            "diagnostics": {
                "acceptance_rate": self.acceptance_rate,
                "block_acceptance": self.block_acceptance,
                "rhat_max": self.rhat_max,
                "ess_min": self.ess_min,
                "warnings": list(self.warnings),
            },
            "sigma_mean": self.sigma_mean,
            "prior_bounds": self.prior_bounds,
            "seed": self.seed,
            "settings": self.settings,
            "decisions": {
                "sampler": "component-wise random-walk Metropolis, adaptive during burn-in",
                "prior": "uniform on a bounded box scaled by the data",
                "replicates": "each run's return enters the likelihood independently",
                "smoothing": f"trailing mean over {self.settings.get('smooth_window')} evaluations",
                "sign": "delta = proposed - baseline",
            },
        }


def fit_curve_model(
    proposed: CurveSet,
    baseline: CurveSet,
    mcmc_cfg: Optional[McmcConfig] = None,
) -> PosteriorSummary:
    """
    Sample the posterior of the random-walk comparison model.

    A chain whose post-burn-in acceptance rate leaves [0.1, 0.6], or whose
    split R-hat exceeds 1.1, adds a warning; the summary is still returned.

    Raises:
        GridMismatchError: The curve sets use different evaluation steps.
        ContractError: Fewer than 2 runs in an arm, or no evaluation steps.
    """
    cfg = mcmc_cfg or McmcConfig()
    check_shared_grid(proposed, baseline)
    if proposed.run_count < 2 or baseline.run_count < 2:
        raise ContractError("each arm needs at least 2 runs")
    if proposed.steps.size == 0:
        raise ContractError("curves have no evaluation steps")

    P = proposed.smoothed(cfg.smooth_window).returns
    X = baseline.smoothed(cfg.smooth_window).returns
    bounds = prior_bounds(P, X, cfg.prior_scale)
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.chains)
    jobs = [(P, X, bounds, cfg, s) for s in seeds]

    if cfg.workers > 1 and cfg.chains > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, cfg.chains)) as pool:
            outputs = list(pool.map(_run_chain, jobs))
    else:
        outputs = [_run_chain(job) for job in jobs]

    draws = min(o.delta.shape[0] for o in outputs)
    delta_chains = np.stack([o.delta[:draws] for o in outputs])
    delta = delta_chains.reshape(-1, P.shape[0])
    mu = np.concatenate([o.mu for o in outputs])
    sigma = np.concatenate([o.sigma for o in outputs])

    accepted = {k: sum(o.accepted[k] for o in outputs) for k in outputs[0].accepted}
    tried = {k: sum(o.proposed[k] for o in outputs) for k in outputs[0].proposed}
    block_rates = {k: accepted[k] / tried[k] if tried[k] else float("nan") for k in accepted}
    overall = sum(accepted.values()) / max(sum(tried.values()), 1.0)

    rhat = _split_rhat(delta_chains)
    rhat_max = float(np.nanmax(rhat)) if np.any(np.isfinite(rhat)) else float("nan")
    ess = [
        sum(_effective_sample_size(delta_chains[c, :, t]) for c in range(delta_chains.shape[0]))
        for t in range(delta_chains.shape[2])
    ]

    warnings = []
    lo, hi = ACCEPTANCE_RANGE
    if not lo <= overall <= hi:
        warnings.append(f"acceptance rate {overall:.3f} outside [{lo}, {hi}]")
    if np.isfinite(rhat_max) and rhat_max > RHAT_LIMIT:
        warnings.append(f"split R-hat {rhat_max:.3f} above {RHAT_LIMIT}")
    for w in warnings:
        logger.warning("%s vs %s: %s", proposed.label, baseline.label, w)

    lower, upper = np.quantile(delta, [0.025, 0.975], axis=0)
    return PosteriorSummary(
        steps=proposed.steps.copy(),
        delta_mean=delta.mean(axis=0),
        delta_lower=lower,
        delta_upper=upper,
        delta_sd=delta.std(axis=0),
        mu_mean=mu.mean(axis=0),
        sigma_mean={name: float(sigma[:, i].mean()) for i, name in enumerate(SIGMA_NAMES)},
        acceptance_rate=float(overall),
        block_acceptance={k: float(v) for k, v in block_rates.items()},
        rhat_max=rhat_max,
        ess_min=float(min(ess)),
        prior_bounds=bounds.to_dict(),
        seed=cfg.seed,
        labels=(proposed.label, baseline.label),
        settings=cfg.model_dump(),
        warnings=warnings,
    )


def significant_intervals(summary: PosteriorSummary) -> List[Tuple[int, int]]:
    """Maximal runs of evaluation steps whose lower 2.5% quantile is above 0."""
    return positive_runs(summary.steps, summary.delta_lower)


def positive_runs(steps, lower) -> List[Tuple[int, int]]:
    intervals = []
    start = None
    prev = None
    for step, lo in zip(steps, lower):
        if lo > 0:
            if start is None:
                start = int(step)
            prev = int(step)
        elif start is not None:
            intervals.append((start, prev))
            start = None
    if start is not None:
        intervals.append((start, prev))
    return intervals
