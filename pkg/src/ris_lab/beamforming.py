"""Reflection model, greedy phase selection, precoders, and SNR analysis.

The per-element reflection coefficient is A(theta) e^{j theta} with the
amplitude tied to the phase by a varactor power-loss fit; amplitudes are never
free parameters. The greedy selector walks the elements once, growing a
running phasor sum, and reaches the same quadratic-in-N SNR scaling as the
lossless exhaustive optimum.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .channel import RicianParams
from .numerics import mean_abs_noncentral

#: Minimum reflection amplitude of the varactor model.
AMPLITUDE_MIN = 0.2
_AMP_RANGE = 1.0 - AMPLITUDE_MIN
_AMP_PHASE_SHIFT = 0.43 * math.pi
_AMP_EXPONENT = 1.6


def reflection_amplitude(theta):
    """Reflection amplitude coupled to the phase shift `theta` in [-pi, pi]:

        A(theta) = 0.8 * ((sin(theta - 0.43 pi) + 1) / 2)^1.6 + 0.2
    """
    th = np.asarray(theta, dtype=float)
    if np.any(th < -math.pi - 1e-12) or np.any(th > math.pi + 1e-12):
        raise ValueError("phase outside [-pi, pi]; wrap before calling")
    amp = _AMP_RANGE * ((np.sin(th - _AMP_PHASE_SHIFT) + 1.0) / 2.0) ** _AMP_EXPONENT
    amp = amp + AMPLITUDE_MIN
    return float(amp) if np.isscalar(theta) else amp


@dataclass(frozen=True)
class PhaseSet:
    """Quantized reflection phases: 2^bits values starting at -pi, or the
    continuous mode (bits None) where each element aligns its own phase."""

    bits: int | None
    phases: np.ndarray = field(default_factory=lambda: np.empty(0))

    @property
    def continuous(self) -> bool:
        return self.bits is None

    def __len__(self) -> int:
        return 0 if self.continuous else len(self.phases)


def make_phase_set(b: int) -> PhaseSet:
    """The 2^b equally spaced phases {-pi + i 2pi/2^b}; always holds -pi and 0."""
    if b < 1:
        raise ValueError(f"control bits must be >= 1, got {b}")
    count = 2**b
    return PhaseSet(bits=b, phases=-math.pi + 2.0 * math.pi * np.arange(count) / count)


def continuous_phase_set() -> PhaseSet:
    return PhaseSet(bits=None)


@dataclass
class ReflectionMatrix:
    """Diagonal reflection coefficients; amplitudes follow the phases."""

    phases: np.ndarray
    amplitudes: np.ndarray

    def __post_init__(self):
        self.phases = np.asarray(self.phases, dtype=float)
        self.amplitudes = np.asarray(self.amplitudes, dtype=float)
        expected = reflection_amplitude(self.phases)
        if not np.allclose(self.amplitudes, expected, rtol=0, atol=1e-9):
            raise ValueError("amplitudes inconsistent with the reflection model")

    @classmethod
    def from_phases(cls, phases) -> "ReflectionMatrix":
        phases = np.asarray(phases, dtype=float)
        return cls(phases=phases, amplitudes=reflection_amplitude(phases))

    @property
    def coefficients(self) -> np.ndarray:
        """Diagonal entries A(theta) e^{j theta}."""
        return self.amplitudes * np.exp(1j * self.phases)

    def apply(self, f: np.ndarray, G: np.ndarray) -> np.ndarray:
        """Effective row vector f^H Phi G of length M."""
        return (np.conj(f) * self.coefficients) @ G


@dataclass(frozen=True)
class LinkBudget:
    """Per-RB transmit power, noise power, and symbol energies."""

    tx_power: float = 1.0
    noise: float = 1.0
    symbol_energy_due: float = 1.0
    symbol_energy_rue: float = 1.0

    def __post_init__(self):
        for name in ("tx_power", "noise", "symbol_energy_due", "symbol_energy_rue"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class BeamformResult:
    reflection: ReflectionMatrix
    selected_antenna: int          # 0-based index of the strongest BS column
    trace: np.ndarray              # |s_i| after each element, non-decreasing
    snr: float                     # ||f^H Phi G||^2 at unit budget (MRT combining)
    evaluations: int               # candidate phases scored


def _wrap_phase(theta: float) -> float:
    """Wrap into [-pi, pi)."""
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def algorithm1(f: np.ndarray, G: np.ndarray, phase_set: PhaseSet) -> BeamformResult:
    """Greedy per-element reflection phase selection.

    Picks the BS antenna with the largest channel norm, then for each element
    i chooses the phase maximizing |s_{i-1} + a_i A(theta) e^{j theta}| where
    a_i = |f_i||g_i| e^{j(angle(f_i*) + angle(g_i))}, accumulating s. Exactly
    N * 2^b candidates are scored for a 2^b phase set. Ties break to the
    lowest phase index; zero-magnitude elements get -pi.
    """
    f = np.asarray(f, dtype=complex).ravel()
    G = np.asarray(G, dtype=complex)
    if G.ndim != 2 or G.shape[0] != f.shape[0]:
        raise ValueError(f"shape mismatch: f {f.shape}, G {G.shape}")
    n = f.shape[0]
    if not phase_set.continuous and len(phase_set) == 0:
        raise ValueError("empty phase set")

    m_hat = int(np.argmax(np.linalg.norm(G, axis=0)))
    g = G[:, m_hat]
    a = np.abs(f) * np.abs(g) * np.exp(1j * (-np.angle(f) + np.angle(g)))

    if phase_set.continuous:
        evaluations = n
        phases = (-np.angle(a) + math.pi) % (2.0 * math.pi) - math.pi
        phases[a == 0] = -math.pi
        steps = a * reflection_amplitude(phases) * np.exp(1j * phases)
        trace = np.abs(np.cumsum(steps))
    else:
        phases = np.empty(n)
        trace = np.empty(n)
        s = 0.0 + 0.0j
        phi_table = reflection_amplitude(phase_set.phases) * np.exp(
            1j * phase_set.phases
        )
        evaluations = n * len(phase_set)
        for i in range(n):
            if a[i] == 0:
                idx = 0  # phase set starts at -pi
            else:
                idx = int(np.argmax(np.abs(s + a[i] * phi_table)))
            phases[i] = phase_set.phases[idx]
            s += a[i] * phi_table[idx]
            trace[i] = abs(s)

    reflection = ReflectionMatrix.from_phases(phases)
    snr = float(np.sum(np.abs(reflection.apply(f, G)) ** 2))
    return BeamformResult(
        reflection=reflection,
        selected_antenna=m_hat,
        trace=trace,
        snr=snr,
        evaluations=evaluations,
    )


def exhaustive_oracle(
    f: np.ndarray, G: np.ndarray, phase_set: PhaseSet
) -> tuple[ReflectionMatrix, float]:
    """Globally optimal discrete configuration maximizing ||f^H Phi G||^2.

    Enumerates all 2^(bN) assignments; refuses search spaces beyond 2^20.
    """
    if phase_set.continuous:
        raise ValueError("exhaustive search needs a finite phase set")
    f = np.asarray(f, dtype=complex).ravel()
    G = np.asarray(G, dtype=complex)
    n, m = G.shape
    p = len(phase_set)
    if p**n > 2**20:
        raise ValueError(f"search space {p}^{n} exceeds 2^20")

    phi_table = reflection_amplitude(phase_set.phases) * np.exp(1j * phase_set.phases)
    # contrib[i, p, m] = conj(f_i) phi_p G[i, m]
    contrib = np.conj(f)[:, None, None] * phi_table[None, :, None] * G[:, None, :]
    sums = np.zeros((1, m), dtype=complex)
    for i in range(n):
        # configs ordered so element i's choice is digit i from the left
        sums = (sums[:, None, :] + contrib[i][None, :, :]).reshape(-1, m)
    values = np.sum(np.abs(sums) ** 2, axis=1)
    best = int(np.argmax(values))
    digits = np.empty(n, dtype=int)
    rem = best
    for i in range(n - 1, -1, -1):
        rem, digits[i] = divmod(rem, p)
    reflection = ReflectionMatrix.from_phases(phase_set.phases[digits])
    return reflection, float(values[best])


def antenna_selection_precoder(G: np.ndarray) -> np.ndarray:
    """One-hot precoder on the BS antenna with the largest channel norm."""
    G = np.asarray(G, dtype=complex)
    w = np.zeros(G.shape[1], dtype=complex)
    w[int(np.argmax(np.linalg.norm(G, axis=0)))] = 1.0
    return w


def mrt_precoder(effective_channel: np.ndarray) -> np.ndarray:
    """Matched (maximum ratio transmission) unit-norm precoder."""
    v = np.asarray(effective_channel, dtype=complex).ravel()
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("zero effective channel")
    return v / norm


def _check_unit(w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=complex).ravel()
    if abs(np.linalg.norm(w) - 1.0) > 1e-8:
        raise ValueError("precoder must have unit norm")
    return w


def snr_rue(
    f: np.ndarray,
    reflection: ReflectionMatrix,
    G: np.ndarray,
    w: np.ndarray,
    budget: LinkBudget,
) -> float:
    """Instantaneous SNR of the reflected link: P E_r |f^H Phi G w|^2 / N0."""
    w = _check_unit(w)
    gain = np.abs(reflection.apply(f, G) @ w) ** 2
    return budget.tx_power * budget.symbol_energy_rue * float(gain) / budget.noise


def snr_due(h: np.ndarray, w: np.ndarray, budget: LinkBudget) -> float:
    """Instantaneous SNR of the direct link: P E_d |h^H w|^2 / N0."""
    h = np.asarray(h, dtype=complex).ravel()
    w = _check_unit(w)
    if h.shape != w.shape:
        raise ValueError("dimension mismatch")
    gain = np.abs(np.vdot(h, w)) ** 2
    return budget.tx_power * budget.symbol_energy_due * float(gain) / budget.noise


def snr_upper_ideal(f: np.ndarray, G: np.ndarray, budget: LinkBudget) -> float:
    """Ideal-reflection SNR ceiling (P/N0) sum_m (sum_n |f_n||g_nm|)^2:
    lossless amplitudes, per-element phases aligned to every antenna at once."""
    f = np.asarray(f, dtype=complex).ravel()
    G = np.asarray(G, dtype=complex)
    col = np.abs(f) @ np.abs(G)
    return budget.tx_power * float(np.sum(col**2)) / budget.noise


def snr_lower_bound_realization(
    f: np.ndarray, G: np.ndarray, m0: int, budget: LinkBudget
) -> float:
    """Per-realization SNR floor from aligning phases to antenna `m0` with the
    minimum reflection amplitude on every element."""
    f = np.asarray(f, dtype=complex).ravel()
    G = np.asarray(G, dtype=complex)
    n, m = G.shape
    if not 0 <= m0 < m:
        raise ValueError(f"antenna index {m0} out of range for M={m}")
    fabs = np.abs(f)
    gabs = np.abs(G)
    aligned = float(np.sum(fabs * gabs[:, m0]) ** 2)
    rest = 0.0
    if m > 1:
        delta = np.angle(G) - np.angle(G)[:, m0][:, None]
        terms = np.sum(fabs[:, None] * gabs * np.exp(1j * delta), axis=0)
        mask = np.arange(m) != m0
        rest = float(np.sum(np.abs(terms[mask]) ** 2))
    scale = (
        budget.tx_power
        * budget.symbol_energy_rue
        * AMPLITUDE_MIN**2
        / budget.noise
    )
    return scale * (aligned + rest)


def lemma1_lower_bound(
    g_params: RicianParams,
    f_params: RicianParams,
    budget: LinkBudget,
    m0: int = 0,
) -> float:
    """Deterministic lower bound on E[snr_lower_bound_realization] for
    correlated Rician links:

        (P E_r A_min^2 / N0) * (sum_n mu_b[n] mu_r[n])^2,

    where mu_b[n], mu_r[n] are the folded-magnitude means of the n-th entries
    of the two links. With unit-diagonal correlation the per-entry variance is
    the diagonal entry, which keeps the expression a true bound (Jensen) for
    any correlation structure.
    """
    los_g = np.abs(np.asarray(g_params.los)[:, m0])
    los_f = np.abs(np.asarray(f_params.los).ravel())
    kb, kr = g_params.kappa, f_params.kappa
    pl_g, pl_f = g_params.pathloss_linear, f_params.pathloss_linear
    mu_b = np.array(
        [
            mean_abs_noncentral(
                math.sqrt(kb / (kb + 1.0) * pl_g) * v, pl_g / (kb + 1.0)
            )
            for v in los_g
        ]
    )
    mu_r = np.array(
        [
            mean_abs_noncentral(
                math.sqrt(kr / (kr + 1.0) * pl_f) * v, pl_f / (kr + 1.0)
            )
            for v in los_f
        ]
    )
    scale = (
        budget.tx_power
        * budget.symbol_energy_rue
        * AMPLITUDE_MIN**2
        / budget.noise
    )
    return scale * float(np.sum(mu_b * mu_r) ** 2)


def rayleigh_snr_moments(n: int, m: int, budget: LinkBudget) -> tuple[float, float]:
    """Mean and variance of the aligned-phase SNR floor over i.i.d. Rayleigh
    links (closed forms from the central-limit regime)."""
    if n < 1 or m < 1:
        raise ValueError("n and m must be >= 1")
    scale = (
        budget.tx_power * budget.symbol_energy_rue * AMPLITUDE_MIN**2 / budget.noise
    )
    pi2_16 = math.pi**2 / 16.0
    mean = n * scale * (m + pi2_16 * (n - 1))
    variance = (
        n**2
        * scale**2
        * ((1.0 - pi2_16) * (2.0 - math.pi**2 / 8.0 + n * math.pi**2 / 4.0) + m - 1.0)
    )
    return mean, variance
