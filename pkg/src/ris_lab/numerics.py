"""Special functions, fixed-order quadrature, and mergeable running statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ive


def laguerre_half(x: float) -> float:
    """Laguerre polynomial of order 1/2 for non-positive arguments.

    Evaluated through the modified-Bessel closed form

        L_{1/2}(x) = e^{x/2} [(1 - x) I_0(-x/2) - x I_1(-x/2)],

    using exponentially scaled Bessel functions so large |x| stays stable.
    The series form loses precision beyond |x| ~ 30; the closed form does not.
    """
    if x > 0:
        raise ValueError(f"laguerre_half defined for x <= 0, got {x}")
    # e^{x/2} I_n(-x/2) == ive(n, -x/2) exactly, since -x/2 >= 0.
    z = -x / 2.0
    return float((1.0 - x) * ive(0, z) - x * ive(1, z))


def mean_abs_noncentral(los_magnitude: float, variance: float) -> float:
    """Mean of |z| for z complex Gaussian with mean magnitude `los_magnitude`
    and total variance `variance` (a non-central chi with two degrees of freedom):

        E|z| = sqrt(pi * variance / 4) * L_{1/2}(-los_magnitude^2 / variance).
    """
    if variance <= 0:
        raise ValueError(f"variance must be positive, got {variance}")
    if los_magnitude < 0:
        raise ValueError(f"los_magnitude must be non-negative, got {los_magnitude}")
    return float(
        np.sqrt(np.pi * variance / 4.0)
        * laguerre_half(-(los_magnitude**2) / variance)
    )


# 16-point Gauss-Legendre rule applied per panel; nodes are interior, so
# integrands with removable endpoint singularities are safe.
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def integrate(fn, lower: float, upper: float, panels: int = 64) -> float:
    """Composite Gauss-Legendre quadrature of `fn` over [lower, upper].

    Deterministic for fixed inputs; `fn` may be scalar or numpy-vectorized.
    """
    if lower > upper:
        raise ValueError(f"reversed bounds: [{lower}, {upper}]")
    if panels < 1:
        raise ValueError(f"panels must be >= 1, got {panels}")
    if lower == upper:
        return 0.0
    edges = np.linspace(lower, upper, panels + 1)
    half = np.diff(edges) / 2.0
    mids = (edges[:-1] + edges[1:]) / 2.0
    # (panels, order) grid of abscissae
    xs = mids[:, None] + half[:, None] * _GL_NODES[None, :]
    try:
        vals = np.asarray(fn(xs), dtype=float)
        if vals.shape != xs.shape:
            raise ValueError
    except (TypeError, ValueError):
        vals = np.vectorize(fn, otypes=[float])(xs)
    return float(np.sum(vals * _GL_WEIGHTS[None, :] * half[:, None]))


@dataclass
class StatAccumulator:
    """Streaming mean/variance (Welford) with an associative merge.

    Single writer per instance; merge partial accumulators for parallel
    reductions. Merging in a fixed order keeps results bit-stable.
    """

    count: int = 0
    mean: float = 0.0
    m2: float = 0.0

    def add(self, value: float) -> None:
        self.count += 1
        delta = value - self.mean
        self.mean += delta / self.count
        self.m2 += delta * (value - self.mean)

    def add_many(self, values) -> None:
        arr = np.asarray(values, dtype=float).ravel()
        if arr.size == 0:
            return
        other = StatAccumulator(
            count=int(arr.size),
            mean=float(arr.mean()),
            m2=float(((arr - arr.mean()) ** 2).sum()),
        )
        merged = self.merge(other)
        self.count, self.mean, self.m2 = merged.count, merged.mean, merged.m2

    def merge(self, other: "StatAccumulator") -> "StatAccumulator":
        if self.count == 0:
            return StatAccumulator(other.count, other.mean, other.m2)
        if other.count == 0:
            return StatAccumulator(self.count, self.mean, self.m2)
        n = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / n
        m2 = self.m2 + other.m2 + delta**2 * self.count * other.count / n
        return StatAccumulator(n, mean, m2)

    @property
    def variance(self) -> float:
        """Unbiased sample variance; defined only for count >= 2."""
        if self.count < 2:
            raise ValueError("variance requires at least two samples")
        return self.m2 / (self.count - 1)

    @property
    def std_error(self) -> float:
        """Standard error of the mean."""
        return float(np.sqrt(self.variance / self.count))

    def ci95(self) -> tuple[float, float]:
        """Normal-approximation 95% confidence interval for the mean."""
        if self.count < 2:
            return (self.mean, self.mean)
        half = 1.959963984540054 * self.std_error
        return (self.mean - half, self.mean + half)


@dataclass
class BivariateAccumulator:
    """Joint running moments of paired samples, mergeable like StatAccumulator.

    Tracks what a delta-method confidence interval for the ratio of means
    needs: counts, means, centered second moments, and the cross term.
    """

    count: int = 0
    mean_x: float = 0.0
    mean_y: float = 0.0
    m2x: float = 0.0
    m2y: float = 0.0
    cxy: float = 0.0

    def add_many(self, xs, ys) -> None:
        x = np.asarray(xs, dtype=float).ravel()
        y = np.asarray(ys, dtype=float).ravel()
        if x.shape != y.shape:
            raise ValueError("paired samples must align")
        if x.size == 0:
            return
        mx, my = float(x.mean()), float(y.mean())
        other = BivariateAccumulator(
            count=int(x.size),
            mean_x=mx,
            mean_y=my,
            m2x=float(((x - mx) ** 2).sum()),
            m2y=float(((y - my) ** 2).sum()),
            cxy=float(((x - mx) * (y - my)).sum()),
        )
        merged = self.merge(other)
        for name in ("count", "mean_x", "mean_y", "m2x", "m2y", "cxy"):
            setattr(self, name, getattr(merged, name))

    def merge(self, other: "BivariateAccumulator") -> "BivariateAccumulator":
        if self.count == 0:
            return BivariateAccumulator(**vars(other))
        if other.count == 0:
            return BivariateAccumulator(**vars(self))
        n = self.count + other.count
        dx = other.mean_x - self.mean_x
        dy = other.mean_y - self.mean_y
        w = self.count * other.count / n
        return BivariateAccumulator(
            count=n,
            mean_x=self.mean_x + dx * other.count / n,
            mean_y=self.mean_y + dy * other.count / n,
            m2x=self.m2x + other.m2x + dx**2 * w,
            m2y=self.m2y + other.m2y + dy**2 * w,
            cxy=self.cxy + other.cxy + dx * dy * w,
        )

    def ratio_of_means(self) -> float:
        if self.mean_y == 0:
            raise ZeroDivisionError("denominator mean is zero")
        return self.mean_x / self.mean_y

    def ratio_ci95(self) -> tuple[float, float]:
        """Delta-method 95% interval for mean_x / mean_y."""
        if self.count < 2:
            r = self.ratio_of_means()
            return (r, r)
        n = self.count
        vx = self.m2x / (n - 1)
        vy = self.m2y / (n - 1)
        cov = self.cxy / (n - 1)
        r = self.ratio_of_means()
        var = (
            vx / self.mean_y**2
            + self.mean_x**2 * vy / self.mean_y**4
            - 2.0 * self.mean_x * cov / self.mean_y**3
        ) / n
        half = 1.959963984540054 * np.sqrt(max(var, 0.0))
        return (r - half, r + half)
