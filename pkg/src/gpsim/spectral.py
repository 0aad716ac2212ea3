"""Fourier transform facilities: exact free-propagation step and spectral derivatives.

Convention: a field is expanded as psi(x) = sum_j c_j e^{i k_j x} with the
forward transform carrying e^{-i k_j x}. Under this convention the free
Schroedinger flow i dpsi/dt = -1/2 psi_xx multiplies mode j by
e^{-i tau k_j^2 / 2}; the plane-wave oracle e^{ikx} -> e^{-i k^2 t/2} e^{ikx}
pins the sign independently of the transform convention.
"""

from __future__ import annotations

import numpy as np

from .errors import LengthMismatch, UnsupportedOrder
from .model import Grid


class SpectralWorkspace:
    """Per-grid buffers: wavenumbers, optional 2/3-rule mask, and a one-slot
    cache of the propagation phase for the most recent step size.

    Single-owner (the phase cache is mutable); use one workspace per thread.
    """

    def __init__(self, grid: Grid, dealias: bool = False):
        self.grid = grid
        self.k = grid.wavenumbers
        self.k_sq = self.k * self.k
        self.dealias = bool(dealias)
        if self.dealias:
            # 2/3 rule: drop modes with |j'| > m/3.
            index = np.fft.fftfreq(grid.m, d=1.0 / grid.m)
            self._mask = (np.abs(index) <= grid.m / 3.0).astype(np.float64)
        else:
            self._mask = None
        self._cached_tau: float | None = None
        self._cached_phase: np.ndarray | None = None
        # First derivative symbol: i*k with the Nyquist mode zeroed so that
        # odd derivatives of real fields stay real.
        ik = 1j * self.k.astype(np.complex128)
        ik[grid.m // 2] = 0.0
        self._ik = ik

    def kinetic_phase(self, tau: float) -> np.ndarray:
        if tau != self._cached_tau:
            self._cached_phase = np.exp(-0.5j * tau * self.k_sq)
            self._cached_tau = tau
        return self._cached_phase  # type: ignore[return-value]


def _check_length(f: np.ndarray, ws: SpectralWorkspace, what: str) -> np.ndarray:
    f = np.asarray(f)
    if f.ndim != 1 or f.shape[0] != ws.grid.m:
        raise LengthMismatch(f"{what} has length {f.shape}, grid expects ({ws.grid.m},)")
    return f


def kinetic_step(psi: np.ndarray, tau: float, ws: SpectralWorkspace) -> np.ndarray:
    """Advance psi exactly by time tau under i dpsi/dt = -1/2 psi_xx.

    tau may have either sign (the flow is a group). The discrete L2 norm is
    preserved up to FFT rounding.
    """
    psi = _check_length(psi, ws, "psi")
    if not np.isfinite(tau):
        raise ValueError(f"tau must be finite, got {tau!r}")
    hat = np.fft.fft(psi)
    hat *= ws.kinetic_phase(float(tau))
    if ws._mask is not None:
        hat *= ws._mask
    return np.fft.ifft(hat)


def spectral_derivative(f: np.ndarray, order: int, ws: SpectralWorkspace) -> np.ndarray:
    """Differentiate a periodic field by multiplying mode j with (i k_j)^order.

    order 1 zeroes the Nyquist mode (standard pseudospectral convention);
    order 2 uses -k^2. Real input yields real output.
    """
    f = _check_length(f, ws, "field")
    if order not in (1, 2):
        raise UnsupportedOrder(f"derivative order must be 1 or 2, got {order!r}")
    real_in = not np.iscomplexobj(f)
    hat = np.fft.fft(f)
    if order == 1:
        hat *= ws._ik
    else:
        hat *= -ws.k_sq
    out = np.fft.ifft(hat)
    return out.real if real_in else out


def l2_norm(f: np.ndarray, grid: Grid) -> float:
    """Discrete L2 norm sqrt(h * sum |f_j|^2)."""
    return float(np.sqrt(grid.h * np.sum(np.abs(f) ** 2)))
