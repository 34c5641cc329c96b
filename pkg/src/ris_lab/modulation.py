"""Reflection-based PSK modulation for unscheduled reflected users.

An idle reflecting surface loads one PSK symbol onto all of its elements and
re-radiates the ambient downlink signal; the served user recovers the symbol
from the phase of a matched-filter output. The analytic symbol error rate
treats each symbol's correct-decision region as the phase wedge of width
`spacing` centered on its angle, so the demodulator here slices phase wedges;
a matched-filter phase outside every wedge is a detection failure (NaN), which
counts as a symbol error.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .beamforming import LinkBudget, ReflectionMatrix, reflection_amplitude
from .numerics import integrate
from .rng import substream

_HOST_CONSTELLATIONS: dict[str, np.ndarray] = {
    "bpsk": np.array([1.0 + 0.0j, -1.0 + 0.0j]),
    "qpsk": np.exp(1j * (np.pi / 4 + np.pi / 2 * np.arange(4))),
}


def _square_qam(order: int) -> np.ndarray:
    side = int(math.isqrt(order))
    if side * side != order:
        raise ValueError(f"{order}-QAM is not square")
    levels = np.arange(-side + 1, side, 2.0)
    pts = (levels[:, None] + 1j * levels[None, :]).ravel()
    return pts / math.sqrt(float(np.mean(np.abs(pts) ** 2)))


for _order in (16, 64):
    _HOST_CONSTELLATIONS[f"{_order}qam"] = _square_qam(_order)


def host_min_angle(host: str) -> float:
    """Smallest nonzero angular gap between host constellation points."""
    pts = _HOST_CONSTELLATIONS[host.lower()]
    ang = np.angle(pts)
    diffs = np.abs((ang[:, None] - ang[None, :] + np.pi) % (2 * np.pi) - np.pi)
    nz = diffs[diffs > 1e-12]
    return float(nz.min())


@dataclass
class SymbolSet:
    """PSK alphabet carried by the reflection phase, nested inside the host
    modulation's angular gaps so both data streams stay separable."""

    order_exponent: int
    angles: np.ndarray
    spacing: float
    host_constellation: np.ndarray

    def __post_init__(self):
        self.angles = np.asarray(self.angles, dtype=float)
        if len(self.angles) != 2**self.order_exponent:
            raise ValueError("angle count must be 2^order_exponent")
        gaps = np.diff(self.angles)
        if np.any(gaps <= 0) or not np.allclose(gaps, self.spacing, atol=1e-12):
            raise ValueError("angles must increase in uniform steps of `spacing`")
        # composite points A(mu) e^{j mu} x must be pairwise distinct
        amps = reflection_amplitude(self.angles)
        composite = (
            (amps * np.exp(1j * self.angles))[:, None] * self.host_constellation[None, :]
        ).ravel()
        dist = np.abs(composite[:, None] - composite[None, :])
        np.fill_diagonal(dist, np.inf)
        if dist.min() < 1e-9:
            raise ValueError("ambiguous composite constellation")

    @property
    def amplitudes(self) -> np.ndarray:
        return reflection_amplitude(self.angles)

    def index_of(self, omega: float) -> int:
        idx = int(np.argmin(np.abs(self.angles - omega)))
        if abs(self.angles[idx] - omega) > 1e-9:
            raise ValueError(f"{omega} is not a symbol of this set")
        return idx


@dataclass(frozen=True)
class UrueLink:
    """One reflected-modulation transmission: symbol, repetition count, and
    the throughput-loss factor charged against the host's modulation order."""

    omega: float
    repetitions: int
    snr_loss: float

    def __post_init__(self):
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 < self.snr_loss <= 1.0:
            raise ValueError("snr_loss must be in (0, 1]")


def build_symbol_set(host: str, order_exponent: int) -> SymbolSet:
    """Nest 2^order_exponent equally spaced reflection phases inside the
    host's minimum inter-symbol angle."""
    if order_exponent < 1:
        raise ValueError("order_exponent must be >= 1")
    key = host.lower()
    if key not in _HOST_CONSTELLATIONS:
        raise ValueError(f"unknown host modulation {host!r}")
    count = 2**order_exponent
    spacing = host_min_angle(key) / count
    angles = spacing * np.arange(count)
    return SymbolSet(
        order_exponent=order_exponent,
        angles=angles,
        spacing=spacing,
        host_constellation=_HOST_CONSTELLATIONS[key],
    )


def modulated_reflection(omega: float, n: int) -> ReflectionMatrix:
    """Uniform reflection matrix loading symbol `omega` on all n elements."""
    if not -math.pi <= omega <= math.pi:
        raise ValueError("omega outside [-pi, pi]")
    return ReflectionMatrix.from_phases(np.full(n, omega))


def passive_reflection(n: int) -> ReflectionMatrix:
    """Uncontrolled state during channel sounding: every element at -pi."""
    return ReflectionMatrix.from_phases(np.full(n, -math.pi))


def urue_receive(
    f: np.ndarray,
    G: np.ndarray,
    w: np.ndarray,
    omega: float,
    host_symbols: np.ndarray,
    budget: LinkBudget,
    rng: np.random.Generator,
) -> np.ndarray:
    """Received samples at the reflected user over one data period:

        y_t = sqrt(P) (f^H G w) A(omega) e^{j omega} x_t + n_t,
    """
    f = np.asarray(f, dtype=complex).ravel()
    G = np.asarray(G, dtype=complex)
    w = np.asarray(w, dtype=complex).ravel()
    if G.shape != (f.shape[0], w.shape[0]):
        raise ValueError("dimension mismatch")
    x = np.asarray(host_symbols, dtype=complex).ravel()
    c = np.conj(f) @ G @ w
    gain = reflection_amplitude(omega) * np.exp(1j * omega)
    noise = (
        rng.standard_normal(x.shape) + 1j * rng.standard_normal(x.shape)
    ) * math.sqrt(budget.noise / 2.0)
    return math.sqrt(budget.tx_power) * c * gain * x + noise


def matched_filter(
    samples: np.ndarray,
    effective_scalar: complex,
    host_symbols: np.ndarray,
    budget: LinkBudget,
) -> complex:
    """Coherent combine over known channel and host data; noiseless output is
    A(omega) e^{j omega}."""
    if effective_scalar == 0:
        raise ValueError("zero effective channel")
    y = np.asarray(samples, dtype=complex).ravel()
    x = np.asarray(host_symbols, dtype=complex).ravel()
    if y.shape != x.shape:
        raise ValueError("samples and host symbols must align")
    num = np.sum(y * np.conj(effective_scalar * x))
    den = math.sqrt(budget.tx_power) * np.sum(np.abs(effective_scalar * x) ** 2)
    return complex(num / den)


def wedge_decide(z_angle, symbol_set: SymbolSet):
    """Phase-wedge slicer: symbol index whose +-spacing/2 wedge contains the
    angle, -1 when outside every wedge. Boundary ties go to the lower index."""
    ang = np.atleast_1d(np.asarray(z_angle, dtype=float))
    dev = np.abs(
        (ang[:, None] - symbol_set.angles[None, :] + np.pi) % (2 * np.pi) - np.pi
    )
    inside = dev <= symbol_set.spacing / 2.0 + 1e-12
    idx = np.where(inside.any(axis=1), inside.argmax(axis=1), -1)
    return int(idx[0]) if np.isscalar(z_angle) else idx


def demodulate(
    samples: np.ndarray,
    effective_scalar: complex,
    symbol_set: SymbolSet,
    host_symbols: np.ndarray,
    budget: LinkBudget,
) -> float:
    """Recover the reflection symbol from received samples.

    Matched-filters the samples with the known effective channel and host
    data, then slices the output phase into the symbol wedges. Returns the
    decided angle, or NaN when the phase lies outside the constellation arc
    (a detection failure; callers count it as a symbol error).
    """
    z = matched_filter(samples, effective_scalar, host_symbols, budget)
    idx = wedge_decide(float(np.angle(z)), symbol_set)
    return float(symbol_set.angles[idx]) if idx >= 0 else math.nan


def theoretical_ser(
    symbol_set: SymbolSet, n: int, n_s: int, es_over_n0: float, panels: int = 64
) -> float:
    """Average symbol error rate of the reflected PSK link over independent
    Rayleigh fading, by the MGF method with 1/pi normalization:

        (1/2^Mo) sum_p (1/pi) Integral_0^{pi - spacing/2}
            sin^2(theta) / (sin^2(theta) + c_p) d(theta),

    with c_p = n * n_s * es_over_n0 * A(mu_p)^2 * sin^2(spacing/2).
    """
    if es_over_n0 < 0:
        raise ValueError("es_over_n0 must be >= 0")
    if n < 1 or n_s < 1:
        raise ValueError("n and n_s must be >= 1")
    upper = math.pi - symbol_set.spacing / 2.0
    sin2 = math.sin(symbol_set.spacing / 2.0) ** 2
    total = 0.0
    for amp in symbol_set.amplitudes:
        c = n * n_s * es_over_n0 * amp**2 * sin2

        def integrand(theta, c=c):
            s2 = np.sin(np.asarray(theta)) ** 2
            return s2 / (s2 + c)

        total += integrate(integrand, 0.0, upper, panels) / math.pi
    return total / len(symbol_set.angles)


def simulate_ser(
    scenario,
    symbol_set: SymbolSet,
    n: int,
    n_s: int,
    es_over_n0: float,
    trials: int,
    seed: int,
) -> tuple[float, float, float]:
    """Monte Carlo symbol error rate over i.i.d. Rayleigh channels.

    Each trial draws fresh unit-power channels, a uniform reflection symbol,
    and random host data, then runs the matched-filter wedge receiver.
    Returns (estimate, ci_low, ci_high) with a 95% binomial interval.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m_ant = scenario.num_bs_antennas
    angles = symbol_set.angles
    points = symbol_set.amplitudes * np.exp(1j * angles)
    host = symbol_set.host_constellation
    sqrt_es = math.sqrt(es_over_n0)

    errors = 0
    done = 0
    chunk_size = 1 << 14
    chunk_id = 0
    while done < trials:
        t = min(chunk_size, trials - done)
        rng = substream(seed, 0x5E12, chunk_id)
        f = (rng.standard_normal((t, n)) + 1j * rng.standard_normal((t, n)))
        f /= math.sqrt(2.0)
        G = (
            rng.standard_normal((t, n, m_ant))
            + 1j * rng.standard_normal((t, n, m_ant))
        ) / math.sqrt(2.0)
        h = (
            rng.standard_normal((t, m_ant)) + 1j * rng.standard_normal((t, m_ant))
        ) / math.sqrt(2.0)
        w = h / np.linalg.norm(h, axis=1, keepdims=True)
        c = np.einsum("tn,tnm,tm->t", np.conj(f), G, w)
        sym = rng.integers(0, len(angles), size=t)
        x = host[rng.integers(0, len(host), size=(t, n_s))]
        noise = (
            rng.standard_normal((t, n_s)) + 1j * rng.standard_normal((t, n_s))
        ) / math.sqrt(2.0)
        y = sqrt_es * c[:, None] * points[sym][:, None] * x + noise
        # wedge slicing only needs the angle, so the positive matched-filter
        # normalization can be dropped (also keeps es_over_n0 = 0 finite)
        z = np.einsum("ts,ts->t", y, np.conj(c[:, None] * x))
        decided = wedge_decide(np.angle(z), symbol_set)
        errors += int(np.sum(decided != sym))
        done += t
        chunk_id += 1

    p = errors / trials
    half = 1.959963984540054 * math.sqrt(max(p * (1.0 - p), 0.0) / trials)
    return p, max(p - half, 0.0), min(p + half, 1.0)
