"""Joint user scheduling and power control with dual (multiplier) updates.

One user owns each resource block per slot. For fixed multipliers the per-RB
problem separates: every candidate user gets its individually optimal power
(closed form for reflected users, derivative bisection for direct users), and
the block goes to the candidate with the largest weighted-rate-minus-power
score. Multipliers then follow a stochastic subgradient with step 1/t.

Rates here are per-slot sums of ln(1 + SNR) ("nats"), the units in which the
closed-form power optimum holds; convert with rb_bandwidth / ln(2) for bits/s.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beamforming import (
    BeamformResult,
    LinkBudget,
    PhaseSet,
    algorithm1,
    make_phase_set,
)
from .channel import NetworkState, Scenario, ScenarioGeometry, sample_network_state
from .modulation import SymbolSet, build_symbol_set, modulated_reflection
from .rng import substream

_OMEGA_KEY = 0xF00D


@dataclass
class AllocationConfig:
    """Constraint levels and side parameters of the scheduling problem.

    `min_rate` is a per-slot rate floor in nats (sum over owned RBs of
    ln(1 + SNR)); `avg_power` caps the long-run average of the total (summed
    over RBs) transmit power per slot; `max_power` caps each RB instantly.
    """

    min_rate: float = 0.0
    avg_power: float = 4.0
    max_power: float = 4.0
    alpha: float = 0.1
    n_s: int = 12
    phase_bits: int = 1
    symbol_set: SymbolSet = field(default_factory=lambda: build_symbol_set("bpsk", 2))

    def __post_init__(self):
        if not 0 < self.avg_power <= self.max_power:
            raise ValueError("need 0 < avg_power <= max_power")
        if self.min_rate < 0:
            raise ValueError("min_rate must be >= 0")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must be in (0, 1)")
        if self.n_s < 1:
            raise ValueError("n_s must be >= 1")


@dataclass
class DualState:
    """Multipliers for the per-user rate floors (lambdas) and the average
    power cap (mu); all projected non-negative after every update."""

    lambdas: np.ndarray
    mu: float
    t: int = 1

    def __post_init__(self):
        self.lambdas = np.asarray(self.lambdas, dtype=float)
        if np.any(self.lambdas < 0) or self.mu < 0:
            raise ValueError("multipliers must be non-negative")
        if self.t < 1:
            raise ValueError("slot counter starts at 1")

    @classmethod
    def initial(cls, num_ues: int) -> "DualState":
        return cls(lambdas=np.zeros(num_ues), mu=0.0, t=1)


@dataclass
class Schedule:
    """Per-slot RB ownership (one-hot per column) and per-RB powers."""

    q: np.ndarray      # (K, F) binary
    power: np.ndarray  # (F,)

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=int)
        self.power = np.asarray(self.power, dtype=float)
        if not np.all(self.q.sum(axis=0) == 1):
            raise ValueError("exactly one user per resource block")
        if np.any(self.power < 0):
            raise ValueError("powers must be non-negative")


@dataclass
class RateReport:
    """Per-slot achieved rates (nats) and the per-RB SINR components."""

    per_ue: np.ndarray   # (K,)
    sum_rate: float
    gamma_d: np.ndarray  # (num_due, F)
    gamma_r: np.ndarray  # (num_rue, F)
    gamma_a: np.ndarray  # (num_rue, F)


@dataclass
class RbContext:
    """Everything schedule_rb needs for one resource block: the fading state,
    greedy beamformers per reflected user, and the symbols loaded on idle
    surfaces (drawn per slot/RB, since they carry data)."""

    state: NetworkState
    beams: list[BeamformResult]
    omegas: np.ndarray

    @property
    def num_rue(self) -> int:
        return len(self.beams)


def build_rb_context(
    scenario: Scenario,
    t: int,
    f: int,
    seed: int,
    geometry: ScenarioGeometry,
    phase_set: PhaseSet,
    symbol_set: SymbolSet,
) -> RbContext:
    state = sample_network_state(scenario, t, f, seed, geometry)
    beams = [
        algorithm1(state.f[k], state.G[k], phase_set) for k in range(scenario.num_rue)
    ]
    omega_rng = substream(seed, t, f, _OMEGA_KEY)
    idx = omega_rng.integers(0, len(symbol_set.angles), size=scenario.num_rue)
    return RbContext(state=state, beams=beams, omegas=symbol_set.angles[idx])


def _alg1_gain(context: RbContext, rue: int) -> float:
    """|f^H Phi_hat g_mhat|^2 of the greedy reflection with antenna selection."""
    beam = context.beams[rue]
    eff = beam.reflection.apply(context.state.f[rue], context.state.G[rue])
    return float(np.abs(eff[beam.selected_antenna]) ** 2)


def _ideal_gain(context: RbContext, rue: int) -> float:
    """Ideal-reflection surrogate sum_m (sum_n |f_n||g_nm|)^2."""
    col = np.abs(context.state.f[rue]) @ np.abs(context.state.G[rue])
    return float(np.sum(col**2))


def _urue_cross_terms(
    context: RbContext, k: int, i_due: int, cfg: AllocationConfig, noise: float
) -> tuple[float, float, float]:
    """(signal factor A, noise constant c, interference slope B) of the
    unscheduled-user SINR gamma_a(P) = alpha A P / (c + B P)."""
    state = context.state
    h = state.h[i_due]
    coef_k = modulated_reflection(context.omegas[k], state.f.shape[1]).coefficients
    sig = np.abs((np.conj(state.f[k]) * coef_k) @ state.G[k] @ h) ** 2
    c = noise * float(np.linalg.norm(h) ** 2) / cfg.n_s
    b = 0.0
    for j in range(context.num_rue):
        if j == k:
            continue
        coef_j = modulated_reflection(context.omegas[j], state.f.shape[1]).coefficients
        b += float(np.abs((np.conj(state.f_cross[j, k]) * coef_j) @ state.G[j] @ h) ** 2)
    return float(sig), c, b


def urue_sinr(
    context: RbContext,
    k: int,
    i_due: int,
    power: float,
    cfg: AllocationConfig,
    budget: LinkBudget,
) -> float:
    """SINR of unscheduled reflected user `k` while direct user `i_due` owns
    the block at transmit power `power`."""
    if power < 0:
        raise ValueError("power must be >= 0")
    if power == 0:
        return 0.0
    sig, c, b = _urue_cross_terms(context, k, i_due, cfg, budget.noise)
    return power * cfg.alpha * sig / (c + power * b)


def per_ue_rate(
    contexts: list[RbContext],
    schedule: Schedule,
    scenario: Scenario,
    cfg: AllocationConfig,
    budget: LinkBudget,
) -> RateReport:
    """Realized per-slot rates (nats) under a schedule, and the sum rate
    accumulated independently across blocks; the two routes agree exactly."""
    nd, nr = scenario.num_due, scenario.num_rue
    k_total = nd + nr
    num_rbs = len(contexts)
    if schedule.q.shape != (k_total, num_rbs):
        raise ValueError("schedule shape does not match scenario")
    noise = budget.noise

    per_ue = np.zeros(k_total)
    sum_rate = 0.0
    gamma_d = np.zeros((nd, num_rbs))
    gamma_r = np.zeros((nr, num_rbs))
    gamma_a = np.zeros((nr, num_rbs))

    for f, ctx in enumerate(contexts):
        k_hat = int(np.argmax(schedule.q[:, f]))
        p = float(schedule.power[f])
        if k_hat < nd:
            g_d = p * float(np.linalg.norm(ctx.state.h[k_hat]) ** 2) / noise
            gamma_d[k_hat, f] = g_d
            block = math.log1p(g_d)
            per_ue[k_hat] += block
            for k in range(nr):
                g_a = urue_sinr(ctx, k, k_hat, p, cfg, budget)
                gamma_a[k, f] = g_a
                per_ue[nd + k] += math.log1p(g_a)
                block += math.log1p(g_a)
            sum_rate += block
        else:
            rue = k_hat - nd
            g_r = p * _alg1_gain(ctx, rue) / noise
            gamma_r[rue, f] = g_r
            per_ue[k_hat] += math.log1p(g_r)
            sum_rate += math.log1p(g_r)

    return RateReport(
        per_ue=per_ue,
        sum_rate=sum_rate,
        gamma_d=gamma_d,
        gamma_r=gamma_r,
        gamma_a=gamma_a,
    )


def optimal_power_rue(
    lambda_k: float, mu: float, channel_gain: float, noise: float, p_max: float
) -> float:
    """Water-filling style optimum of (1+lambda) ln(1 + P g / N0) - mu P over
    [0, p_max]: clamp((1+lambda)/mu - N0/g). mu = 0 saturates at p_max."""
    if channel_gain <= 0:
        raise ValueError("channel gain must be positive")
    if mu <= 0:
        return p_max
    p = (1.0 + lambda_k) / mu - noise / channel_gain
    return min(max(p, 0.0), p_max)


def _due_objective_terms(
    context: RbContext, due: int, cfg: AllocationConfig, noise: float
) -> tuple[float, list[tuple[float, float, float]]]:
    g_d = float(np.linalg.norm(context.state.h[due]) ** 2)
    cross = [
        _urue_cross_terms(context, k, due, cfg, noise) for k in range(context.num_rue)
    ]
    return g_d, cross


def _due_rate(p: float, g_d: float, cross, cfg: AllocationConfig, noise: float) -> float:
    rate = math.log1p(p * g_d / noise)
    for sig, c, b in cross:
        rate += math.log1p(cfg.alpha * sig * p / (c + b * p)) if p > 0 else 0.0
    return rate


def _due_rate_derivative(
    p: float, g_d: float, cross, cfg: AllocationConfig, noise: float
) -> float:
    d = g_d / (noise + p * g_d)
    for sig, c, b in cross:
        top = b + cfg.alpha * sig
        d += top / (c + top * p) - b / (c + b * p)
    return d


def optimal_power_due(
    lambda_k: float,
    mu: float,
    context: RbContext,
    due: int,
    cfg: AllocationConfig,
    budget: LinkBudget,
    p_max: float,
    tol: float = 1e-8,
) -> float:
    """Maximizer of the direct user's weighted rate minus power cost over
    [0, p_max] via bisection on the (strictly decreasing) derivative."""
    g_d, cross = _due_objective_terms(context, due, cfg, budget.noise)
    weight = 1.0 + lambda_k

    def dphi(p: float) -> float:
        return weight * _due_rate_derivative(p, g_d, cross, cfg, budget.noise) - mu

    if dphi(0.0) <= 0:
        return 0.0
    if dphi(p_max) >= 0:
        return p_max
    lo, hi = 0.0, p_max
    while hi - lo > tol:
        mid = (lo + hi) / 2.0
        if dphi(mid) > 0:
            lo = mid
        else:
            hi = mid
    return (lo + hi) / 2.0


def weighted_rb_objective(
    context: RbContext,
    k: int,
    p: float,
    dual: DualState,
    scenario: Scenario,
    cfg: AllocationConfig,
    budget: LinkBudget,
    snr_mode: str = "ideal-upper",
) -> float:
    """(1 + lambda_k) * rate_k(p) - mu * p for candidate user k on this block,
    with the reflected-user rate taken from the mode's SNR surrogate."""
    lam = float(dual.lambdas[k])
    if k < scenario.num_due:
        g_d, cross = _due_objective_terms(context, k, cfg, budget.noise)
        rate = _due_rate(p, g_d, cross, cfg, budget.noise)
    else:
        rue = k - scenario.num_due
        gain = _ideal_gain(context, rue) if snr_mode == "ideal-upper" else _alg1_gain(
            context, rue
        )
        rate = math.log1p(p * gain / budget.noise)
    return (1.0 + lam) * rate - dual.mu * p


def schedule_rb(
    context: RbContext,
    dual: DualState,
    scenario: Scenario,
    cfg: AllocationConfig,
    budget: LinkBudget,
    snr_mode: str = "ideal-upper",
) -> tuple[np.ndarray, float, int]:
    """Optimal user and power for one block at fixed multipliers: each user
    gets its individually optimal power, the block goes to the best weighted
    score. Ties break to the lowest user index."""
    if snr_mode not in ("ideal-upper", "alg1"):
        raise ValueError(f"unknown snr_mode {snr_mode!r}")
    k_total = scenario.num_due + scenario.num_rue
    best_p = np.zeros(k_total)
    scores = np.empty(k_total)
    for k in range(k_total):
        if k < scenario.num_due:
            p = optimal_power_due(
                float(dual.lambdas[k]), dual.mu, context, k, cfg, budget, cfg.max_power
            )
        else:
            rue = k - scenario.num_due
            gain = (
                _ideal_gain(context, rue)
                if snr_mode == "ideal-upper"
                else _alg1_gain(context, rue)
            )
            if gain <= 0:
                p = 0.0
            else:
                p = optimal_power_rue(
                    float(dual.lambdas[k]), dual.mu, gain, budget.noise, cfg.max_power
                )
        best_p[k] = p
        scores[k] = weighted_rb_objective(
            context, k, p, dual, scenario, cfg, budget, snr_mode
        )
    k_hat = int(np.argmax(scores))
    q = np.zeros(k_total, dtype=int)
    q[k_hat] = 1
    return q, float(best_p[k_hat]), k_hat


def subgradient_step(
    dual: DualState,
    rates: np.ndarray,
    total_power: float,
    cfg: AllocationConfig,
) -> DualState:
    """One multiplier update with step 1/t and non-negative projection."""
    step = 1.0 / dual.t
    lambdas = np.maximum(
        dual.lambdas - step * (np.asarray(rates, dtype=float) - cfg.min_rate), 0.0
    )
    mu = max(dual.mu - step * (cfg.avg_power - total_power), 0.0)
    return DualState(lambdas=lambdas, mu=mu, t=dual.t + 1)


@dataclass
class Trajectory:
    """Slot-by-slot record of one scheduling run."""

    rates: np.ndarray        # (T, K) nats per slot
    powers: np.ndarray       # (T,) total transmit power per slot
    lambdas: np.ndarray      # (T, K) multipliers before each slot's update
    mus: np.ndarray          # (T,)
    schedules_khat: np.ndarray  # (T, F) scheduled user index per RB

    def trailing_mean_rates(self, window: int) -> np.ndarray:
        return self.rates[-window:].mean(axis=0)

    def trailing_mean_power(self, window: int) -> float:
        return float(self.powers[-window:].mean())

    def running_mean_rates(self) -> np.ndarray:
        return np.cumsum(self.rates, axis=0) / np.arange(1, len(self.rates) + 1)[:, None]

    def running_mean_power(self) -> np.ndarray:
        return np.cumsum(self.powers) / np.arange(1, len(self.powers) + 1)


def run_algorithm2(
    scenario: Scenario,
    cfg: AllocationConfig,
    slots: int,
    snr_mode: str = "ideal-upper",
    seed: int = 0,
) -> Trajectory:
    """Run the scheduler for `slots` slots: fresh fading per slot and RB,
    per-RB scheduling at the current multipliers, then a subgradient update
    from the realized rates and spent power."""
    if slots < 1:
        raise ValueError("slots must be >= 1")
    geometry = ScenarioGeometry(scenario)
    phase_set = make_phase_set(cfg.phase_bits)
    budget = LinkBudget(tx_power=1.0, noise=scenario.noise_power_rb)
    k_total = scenario.num_ues
    num_rbs = scenario.num_rbs

    dual = DualState.initial(k_total)
    rates = np.zeros((slots, k_total))
    powers = np.zeros(slots)
    lambdas = np.zeros((slots, k_total))
    mus = np.zeros(slots)
    khats = np.zeros((slots, num_rbs), dtype=int)

    for t in range(1, slots + 1):
        lambdas[t - 1] = dual.lambdas
        mus[t - 1] = dual.mu
        contexts = []
        q = np.zeros((k_total, num_rbs), dtype=int)
        p = np.zeros(num_rbs)
        for f in range(num_rbs):
            ctx = build_rb_context(
                scenario, t, f, seed, geometry, phase_set, cfg.symbol_set
            )
            contexts.append(ctx)
            q[:, f], p[f], khats[t - 1, f] = schedule_rb(
                ctx, dual, scenario, cfg, budget, snr_mode
            )
        schedule = Schedule(q=q, power=p)
        report = per_ue_rate(contexts, schedule, scenario, cfg, budget)
        rates[t - 1] = report.per_ue
        powers[t - 1] = float(p.sum())
        dual = subgradient_step(dual, report.per_ue, powers[t - 1], cfg)

    return Trajectory(
        rates=rates, powers=powers, lambdas=lambdas, mus=mus, schedules_khat=khats
    )
