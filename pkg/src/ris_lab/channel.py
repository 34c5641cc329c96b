"""Scenario geometry, path loss, spatial correlation, and per-slot Rician fading.

Channels follow the usual Rician split: a deterministic unit-magnitude
steering (LoS) part weighted by sqrt(kappa/(kappa+1)) plus a spatially
correlated complex-Gaussian (NLoS) part weighted by sqrt(1/(kappa+1)), all
scaled by the square root of the link's linear path loss.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .rng import substream

# Fixed base keys for deterministic per-link draws (angles, fading).
_ANGLE_KEY = 0x10531
_LINK_H, _LINK_G, _LINK_F, _LINK_CROSS = 1, 2, 3, 4


@dataclass
class Scenario:
    """System constants for one deployment; defaults are the desk-scale setup."""

    num_bs_antennas: int = 2
    num_elements: int = 64
    num_due: int = 2
    num_rue: int = 2
    num_rbs: int = 5
    d_bu: float = 50.0
    d_br: float = 100.0
    d_ru: float = 3.0
    height_bs: float = 25.0
    height_ris: float = 10.0
    height_ue: float = 1.5
    pathloss_exp_bs_due: float = 3.7
    pathloss_exp_bs_ris: float = 2.2
    pathloss_exp_ris_rue: float = 2.2
    pathloss_const_db: float = -30.0
    wavelength: float = 0.1
    element_spacing: float = 0.05
    rician_k_bs_ris: float = 1.0
    rician_k_ris_rue: float = 1.0
    rician_k_bs_due: float = 1.0
    tx_psd_dbm_hz: float = -20.0
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = 10e6

    def __post_init__(self):
        for name in ("num_bs_antennas", "num_elements", "num_rbs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("num_due", "num_rue"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")
        for name in (
            "d_bu", "d_br", "d_ru", "height_bs", "height_ris", "height_ue",
            "wavelength", "element_spacing", "bandwidth_hz",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        for name in ("rician_k_bs_ris", "rician_k_ris_rue", "rician_k_bs_due"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def num_ues(self) -> int:
        return self.num_due + self.num_rue

    @property
    def rb_bandwidth_hz(self) -> float:
        return self.bandwidth_hz / self.num_rbs

    @property
    def tx_power_rb(self) -> float:
        """Per-RB transmit power in watts."""
        return 10 ** ((self.tx_psd_dbm_hz - 30.0) / 10.0) * self.rb_bandwidth_hz

    @property
    def noise_power_rb(self) -> float:
        """Per-RB noise power in watts."""
        return 10 ** ((self.noise_psd_dbm_hz - 30.0) / 10.0) * self.rb_bandwidth_hz

    def with_overrides(self, **kw) -> "Scenario":
        return replace(self, **kw)


def pathloss_linear(distance: float, exponent: float, const_db: float) -> float:
    """Log-distance path loss, linear scale, 1 m reference distance."""
    if distance < 1.0:
        raise ValueError(f"distance below 1 m reference: {distance}")
    return 10 ** ((const_db - 10.0 * exponent * math.log10(distance)) / 10.0)


def grid_shape(n: int) -> tuple[int, int]:
    """(height, width) of the planar element grid: square when possible,
    otherwise the nearest rectangular factorization with width >= height."""
    h = int(math.isqrt(n))
    while h > 1 and n % h:
        h -= 1
    return h, n // h


def element_positions(n: int, spacing: float) -> np.ndarray:
    """(n, 2) in-plane coordinates of the reflecting elements."""
    h, w = grid_shape(n)
    rows, cols = np.divmod(np.arange(n), w)
    return np.stack([cols * spacing, rows * spacing], axis=1)


def upa_correlation(n: int, spacing: float, wavelength: float) -> np.ndarray:
    """Isotropic-scattering spatial correlation over the planar element grid:
    entry (i, j) = sinc(2 d_ij / wavelength), unit diagonal, Hermitian PSD."""
    if spacing <= 0 or wavelength <= 0:
        raise ValueError("spacing and wavelength must be positive")
    pos = element_positions(n, spacing)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)
    return np.sinc(2.0 * dist / wavelength).astype(complex)


def correlation_sqrt(corr: np.ndarray) -> np.ndarray:
    """Hermitian square root with tiny negative eigenvalues clipped to zero."""
    vals, vecs = np.linalg.eigh(corr)
    vals = np.clip(vals, 0.0, None)
    return (vecs * np.sqrt(vals)) @ vecs.conj().T


@dataclass
class RicianParams:
    """One link's fading description: Rician factor, LoS matrix, correlation
    square root (None for spatially white), and linear path loss."""

    kappa: float
    los: np.ndarray
    correlation_sqrt: np.ndarray | None
    pathloss_linear: float


def sample_rician(
    params: RicianParams, rows: int, cols: int, rng: np.random.Generator
) -> np.ndarray:
    """Draw one Rician fading realization of shape (rows, cols)."""
    los = np.asarray(params.los, dtype=complex).reshape(rows, cols)
    w = (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols)))
    w /= math.sqrt(2.0)
    if params.correlation_sqrt is not None:
        if params.correlation_sqrt.shape != (rows, rows):
            raise ValueError(
                f"correlation square root shape {params.correlation_sqrt.shape} "
                f"does not match {rows} rows"
            )
        w = params.correlation_sqrt @ w
    k = params.kappa
    out = math.sqrt(k / (k + 1.0)) * los + math.sqrt(1.0 / (k + 1.0)) * w
    return math.sqrt(params.pathloss_linear) * out


def _steering(phases_scale: np.ndarray, azimuth: float, elevation: float) -> np.ndarray:
    """Unit-magnitude planar-wavefront entries for in-plane positions scaled
    by 2 pi / wavelength."""
    u = math.sin(azimuth) * math.cos(elevation)
    v = math.sin(elevation)
    return np.exp(1j * (phases_scale[:, 0] * u + phases_scale[:, 1] * v))


def _link_angles(*ids: int) -> tuple[float, float]:
    """Deterministic per-link LoS angles derived by hashing structural ids."""
    g = substream(_ANGLE_KEY, *ids)
    az = g.uniform(-math.pi, math.pi)
    el = g.uniform(-math.pi / 2, math.pi / 2)
    return az, el


@dataclass
class NetworkState:
    """One slot/RB fading realization of every link in the scenario."""

    h: np.ndarray        # (num_due, M) BS -> DUE
    G: np.ndarray        # (num_rue, N, M) BS -> RIS
    f: np.ndarray        # (num_rue, N) RIS -> own RUE
    f_cross: np.ndarray  # (num_rue, num_rue, N); [j, k] = RIS j -> RUE k
    slot: int
    rb: int

    def __post_init__(self):
        for arr in (self.h, self.G, self.f, self.f_cross):
            if not np.all(np.isfinite(arr)):
                raise ValueError("non-finite channel entries")


class ScenarioGeometry:
    """UE/RIS placement and the per-link Rician parameters it implies.

    UEs sit evenly on circles centered at the BS (DUEs at d_bu, RIS/RUE pairs
    at d_br with the RUE displaced radially by d_ru); cross-link distances
    between one RIS and another's RUE follow from these positions.
    """

    def __init__(self, scenario: Scenario):
        self.scenario = scenario
        s = scenario
        n, m = s.num_elements, s.num_bs_antennas
        self._ris_phase_scale = element_positions(n, s.element_spacing) * (
            2.0 * math.pi / s.wavelength
        )
        bs_pos = np.stack(
            [np.arange(m) * s.element_spacing, np.zeros(m)], axis=1
        )
        self._bs_phase_scale = bs_pos * (2.0 * math.pi / s.wavelength)
        corr = upa_correlation(n, s.element_spacing, s.wavelength)
        self.correlation = corr
        self._corr_sqrt = correlation_sqrt(corr)

        k_total = max(s.num_ues, 1)
        angles = 2.0 * math.pi * np.arange(k_total) / k_total
        self._due_angles = angles[: s.num_due]
        self._rue_angles = angles[s.num_due : s.num_ues]

        pl_g = pathloss_linear(s.d_br, s.pathloss_exp_bs_ris, s.pathloss_const_db)
        pl_f = pathloss_linear(s.d_ru, s.pathloss_exp_ris_rue, s.pathloss_const_db)
        pl_h = pathloss_linear(s.d_bu, s.pathloss_exp_bs_due, s.pathloss_const_db)

        self.h_params = [
            RicianParams(
                kappa=s.rician_k_bs_due,
                los=self._bs_steering(_LINK_H, k)[:, None],
                correlation_sqrt=None,
                pathloss_linear=pl_h,
            )
            for k in range(s.num_due)
        ]
        self.g_params = [
            RicianParams(
                kappa=s.rician_k_bs_ris,
                los=np.outer(
                    self._ris_steering(_LINK_G, k),
                    self._bs_steering(_LINK_G, k).conj(),
                ),
                correlation_sqrt=self._corr_sqrt,
                pathloss_linear=pl_g,
            )
            for k in range(s.num_rue)
        ]
        self.f_params = [
            RicianParams(
                kappa=s.rician_k_ris_rue,
                los=self._ris_steering(_LINK_F, k)[:, None],
                correlation_sqrt=self._corr_sqrt,
                pathloss_linear=pl_f,
            )
            for k in range(s.num_rue)
        ]
        # Cross links RIS j -> RUE k (j != k) with distances from placement.
        self.cross_params: dict[tuple[int, int], RicianParams] = {}
        for j in range(s.num_rue):
            for k in range(s.num_rue):
                if j == k:
                    continue
                d = self._cross_distance(j, k)
                self.cross_params[(j, k)] = RicianParams(
                    kappa=s.rician_k_ris_rue,
                    los=self._ris_steering(_LINK_CROSS, j * s.num_rue + k)[:, None],
                    correlation_sqrt=self._corr_sqrt,
                    pathloss_linear=pathloss_linear(
                        max(d, 1.0), s.pathloss_exp_ris_rue, s.pathloss_const_db
                    ),
                )

    def _ris_steering(self, link: int, ue: int) -> np.ndarray:
        az, el = _link_angles(link, ue, 0)
        return _steering(self._ris_phase_scale, az, el)

    def _bs_steering(self, link: int, ue: int) -> np.ndarray:
        az, el = _link_angles(link, ue, 1)
        return _steering(self._bs_phase_scale, az, el)

    def _cross_distance(self, j: int, k: int) -> float:
        s = self.scenario
        aj, ak = self._rue_angles[j], self._rue_angles[k]
        ris_j = np.array(
            [s.d_br * math.cos(aj), s.d_br * math.sin(aj), s.height_ris]
        )
        rue_k = np.array(
            [
                (s.d_br + s.d_ru) * math.cos(ak),
                (s.d_br + s.d_ru) * math.sin(ak),
                s.height_ue,
            ]
        )
        return float(np.linalg.norm(ris_j - rue_k))


def sample_network_state(
    scenario: Scenario,
    t: int,
    f: int,
    seed: int,
    geometry: ScenarioGeometry | None = None,
) -> NetworkState:
    """Draw fresh fading for every link at slot `t`, resource block `f`.

    Each link uses its own (seed, t, f, link, index) substream, so identical
    arguments are bit-reproducible and distinct slots/RBs are independent.
    """
    s = scenario
    geo = geometry if geometry is not None else ScenarioGeometry(scenario)
    n, m = s.num_elements, s.num_bs_antennas

    h = np.zeros((s.num_due, m), dtype=complex)
    for k in range(s.num_due):
        h[k] = sample_rician(
            geo.h_params[k], m, 1, substream(seed, t, f, _LINK_H, k)
        ).ravel()

    G = np.zeros((s.num_rue, n, m), dtype=complex)
    fch = np.zeros((s.num_rue, n), dtype=complex)
    for k in range(s.num_rue):
        G[k] = sample_rician(
            geo.g_params[k], n, m, substream(seed, t, f, _LINK_G, k)
        )
        fch[k] = sample_rician(
            geo.f_params[k], n, 1, substream(seed, t, f, _LINK_F, k)
        ).ravel()

    f_cross = np.zeros((s.num_rue, s.num_rue, n), dtype=complex)
    for (j, k), params in geo.cross_params.items():
        f_cross[j, k] = sample_rician(
            params, n, 1, substream(seed, t, f, _LINK_CROSS, j * s.num_rue + k)
        ).ravel()
    for k in range(s.num_rue):
        f_cross[k, k] = fch[k]

    return NetworkState(h=h, G=G, f=fch, f_cross=f_cross, slot=t, rb=f)
