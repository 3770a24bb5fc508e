"""Real test functions on a uniform grid and their quasi-free pairings.

The Fourier transform is fhat(p) = kappa**0.5 / sqrt(2 pi) * int f(x) e^{-ipx} dx.
kappa = 1 is the unitary transform; kappa = sqrt(2) reproduces the convention
in which fer(f, g) + fer(g, f) = sqrt(2) (f, g).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np
from numpy.polynomial.hermite import hermval
from numpy.polynomial.legendre import leggauss

DEFAULT_GRID = 4096
DEFAULT_LENGTH = 40.0
DECAY_TOL = 1e-12


class DecayError(ValueError):
    pass


class TestFunction:
    """Samples of a real rapidly decreasing function on x_n = x0 + n h."""

    __test__ = False  # not a pytest class

    def __init__(self, samples, h: float, x0: float, name: str = ""):
        self.samples = np.asarray(samples, dtype=float)
        if self.samples.ndim != 1:
            raise ValueError("samples must be one-dimensional")
        self.h = float(h)
        self.x0 = float(x0)
        self.name = name
        self._fft = None

    @property
    def G(self) -> int:
        return len(self.samples)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + self.h * np.arange(self.G)

    @classmethod
    def from_callable(cls, fn, grid: int = DEFAULT_GRID, length: float = DEFAULT_LENGTH, name: str = "") -> "TestFunction":
        h = length / grid
        x0 = -length / 2
        x = x0 + h * np.arange(grid)
        return cls(fn(x), h, x0, name)

    @classmethod
    def preset(cls, spec: str, grid: int = DEFAULT_GRID, length: float = DEFAULT_LENGTH, **params) -> "TestFunction":
        """gaussian(amplitude, center, width), translated-gaussian(shift, width), hermite-k."""
        amp = float(params.get("amplitude", 1.0))
        width = float(params.get("width", 1.0))
        if spec == "gaussian":
            c = float(params.get("center", 0.0))
            fn = lambda x: amp * np.exp(-(((x - c) / width) ** 2))
        elif spec == "translated-gaussian":
            s = float(params.get("shift", 1.0))
            fn = lambda x: amp * np.exp(-(((x - s) / width) ** 2))
        else:
            m = re.fullmatch(r"hermite-(\d+)", spec)
            if not m:
                raise ValueError(f"unknown test function preset {spec!r}")
            k = int(m.group(1))
            coef = [0] * k + [1]
            norm = 1.0 / math.sqrt(2.0**k * math.factorial(k) * math.sqrt(math.pi))
            fn = lambda x: amp * norm * hermval(x / width, coef) * np.exp(-((x / width) ** 2) / 2)
        f = cls.from_callable(fn, grid, length, name=spec)
        f.check_decay()
        return f

    def check_decay(self, tol: float = DECAY_TOL) -> None:
        edge = max(abs(self.samples[0]), abs(self.samples[-1]))
        if edge > tol:
            raise DecayError(f"test function {self.name or '<anon>'} is {edge:.2e} at the grid edge (> {tol:g})")

    def _like(self, samples, name: str) -> "TestFunction":
        return TestFunction(samples, self.h, self.x0, name)

    def _check_grid(self, other: "TestFunction") -> None:
        if self.G != other.G or self.h != other.h or self.x0 != other.x0:
            raise ValueError("test functions live on different grids")

    def fft(self) -> np.ndarray:
        if self._fft is None:
            self._fft = np.fft.fft(self.samples)
        return self._fft

    def derivative(self) -> "TestFunction":
        """Spectral derivative (the samples are periodic to within the decay tolerance)."""
        k = 2 * np.pi * np.fft.fftfreq(self.G, d=self.h)
        d = np.fft.ifft(1j * k * self.fft()).real
        return self._like(d, f"{self.name}'")

    def translate(self, t: float) -> "TestFunction":
        """f_t(x) = f(x - t), computed as the phase e^{-ipt} on the transform."""
        k = 2 * np.pi * np.fft.fftfreq(self.G, d=self.h)
        d = np.fft.ifft(np.exp(-1j * k * t) * self.fft()).real
        return self._like(d, f"{self.name}@{t:g}")

    def scale(self, c: float) -> "TestFunction":
        return self._like(c * self.samples, f"{c:g}*{self.name}")

    def __add__(self, other: "TestFunction") -> "TestFunction":
        self._check_grid(other)
        return self._like(self.samples + other.samples, f"{self.name}+{other.name}")

    def __neg__(self) -> "TestFunction":
        return self.scale(-1.0)

    def inner(self, other: "TestFunction") -> float:
        """(f, g) = int f g dx."""
        self._check_grid(other)
        return float(self.h * np.dot(self.samples, other.samples))

    def hat(self, p, kappa: float = 1.0) -> np.ndarray:
        """Fourier transform at arbitrary momenta, by the trapezoid sum over the grid."""
        p = np.atleast_1d(np.asarray(p, dtype=float))
        x = self.x
        out = np.empty(p.shape, dtype=complex)
        chunk = max(1, 2**22 // self.G)
        for s in range(0, len(p), chunk):
            ph = np.exp(-1j * np.outer(p[s : s + chunk], x))
            out[s : s + chunk] = ph @ self.samples
        return out * (self.h * math.sqrt(kappa) / math.sqrt(2 * math.pi))

    def p_max(self, rel: float = 1e-17) -> float:
        """Momentum beyond which the grid transform is negligible (capped at Nyquist)."""
        a = np.abs(self.fft())
        k = np.abs(2 * np.pi * np.fft.fftfreq(self.G, d=self.h))
        big = k[a > rel * a.max()] if a.max() > 0 else np.zeros(1)
        return float(min(big.max() * 1.25 + 1.0, np.pi / self.h))

    def sigma(self, other: "TestFunction") -> float:
        """sigma(f, g) = int f g' dx, evaluated in x-space."""
        return self.inner(other.derivative())

    def __repr__(self) -> str:
        return f"TestFunction({self.name or '<anon>'}, G={self.G}, h={self.h:g})"


def _panel_nodes(p_max: float, panels: int, order: int):
    t, w = leggauss(order)
    edges = np.linspace(0.0, p_max, panels + 1)
    a, b = edges[:-1, None], edges[1:, None]
    nodes = (0.5 * (b - a) * t[None, :] + 0.5 * (a + b)).ravel()
    weights = (0.5 * (b - a) * w[None, :]).ravel()
    return nodes, weights


def _half_line(f: TestFunction, g: TestFunction, power: int, kappa: float, panels: int, order: int) -> complex:
    pm = max(f.p_max(), g.p_max())
    p, w = _panel_nodes(pm, panels, order)
    fh = f.hat(p, kappa)
    gh = g.hat(p, kappa)
    # g real, so ghat(-p) = conj(ghat(p))
    return complex(np.sum(w * p**power * fh * np.conj(gh)))


@dataclass
class Pairings:
    fer: complex
    bos: complex
    bos_swapped: complex
    sigma: float
    kappa: float
    fer_error: float
    bos_error: float

    @property
    def symplectic_residual(self) -> float:
        """|bos(f,g) - bos(g,f) - i kappa sigma(f,g)|; the p-space and x-space routes are independent."""
        return abs(self.bos - self.bos_swapped - 1j * self.kappa * self.sigma)

    def to_dict(self) -> dict:
        return {
            "fer": [self.fer.real, self.fer.imag],
            "bos": [self.bos.real, self.bos.imag],
            "bos_swapped": [self.bos_swapped.real, self.bos_swapped.imag],
            "sigma": self.sigma,
            "kappa": self.kappa,
            "fer_error": self.fer_error,
            "bos_error": self.bos_error,
            "symplectic_residual": self.symplectic_residual,
        }


def fer(f: TestFunction, g: TestFunction, kappa: float = 1.0, panels: int = 32, order: int = 24) -> complex:
    """int_0^inf fhat(p) ghat(-p) dp."""
    return _half_line(f, g, 0, kappa, panels, order)


def bos(f: TestFunction, g: TestFunction, kappa: float = 1.0, panels: int = 32, order: int = 24) -> complex:
    """int_0^inf p fhat(p) ghat(-p) dp."""
    return _half_line(f, g, 1, kappa, panels, order)


def compute_pairings(f: TestFunction, g: TestFunction, kappa: float = 1.0, panels: int = 32, order: int = 24) -> Pairings:
    """Both pairings with an error estimate from halving the panel width."""
    for u in (f, g):
        u.check_decay()
    f_c = fer(f, g, kappa, panels, order)
    b_c = bos(f, g, kappa, panels, order)
    f_f = fer(f, g, kappa, 2 * panels, order)
    b_f = bos(f, g, kappa, 2 * panels, order)
    b_s = bos(g, f, kappa, 2 * panels, order)
    return Pairings(f_f, b_f, b_s, f.sigma(g), kappa, abs(f_f - f_c), abs(b_f - b_c))


def covariance_matrix(fs: list[TestFunction], kind: str = "bos", kappa: float = 1.0) -> np.ndarray:
    """Hermitian matrix of two-point functions; positive semidefinite for a state."""
    pair = bos if kind == "bos" else fer
    n = len(fs)
    m = np.empty((n, n), dtype=complex)
    for i in range(n):
        for j in range(n):
            m[i, j] = pair(fs[i], fs[j], kappa)
    return m


def covariance_psd(fs: list[TestFunction], kind: str = "bos", kappa: float = 1.0) -> dict:
    m = covariance_matrix(fs, kind, kappa)
    herm = float(np.max(np.abs(m - m.conj().T)))
    eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    return {"kind": kind, "min_eigenvalue": float(eig[0]), "hermiticity_defect": herm, "psd": bool(eig[0] >= -1e-12 * max(1.0, eig[-1]))}


def wick_residual(f: TestFunction, g: TestFunction, kappa: float = 1.0) -> dict:
    """|fer(f, g') + i bos(f, g)|: g' enters through its own transform, bos through p ghat."""
    lhs = fer(f, g.derivative(), kappa, panels=64)
    rhs = bos(f, g, kappa, panels=64)
    return {"fer_f_dg": [lhs.real, lhs.imag], "bos_fg": [rhs.real, rhs.imag], "residual": abs(lhs + 1j * rhs)}


def covariance_under_translation(f: TestFunction, g: TestFunction, t: float, kappa: float = 1.0) -> dict:
    """Pairings of (f_t, g_t) against those of (f, g)."""
    a = compute_pairings(f, g, kappa)
    b = compute_pairings(f.translate(t), g.translate(t), kappa)
    return {
        "t": t,
        "fer_change": abs(a.fer - b.fer),
        "bos_change": abs(a.bos - b.bos),
        "sigma_change": abs(a.sigma - b.sigma),
    }
