"""Spatial refinement by weighted selective approximation in the 2-D Fourier basis.

The basis functions on an ``M x N`` area are

    phi_k[m, n] = exp(2j*pi*(k_m*m/M + k_n*n/N)),   k = k_m*N + k_n

so the weighted projection numerators for all ``k`` at once are the FFT of
``w * r`` and every denominator is ``sum(w)``. The residual stays real because
each step adds a selected frequency together with its conjugate partner
``(-k_m mod M, -k_n mod N)``; self-paired bins (DC and Nyquist) are added
alone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DegenerateWeightsError(ValueError):
    """All weights are zero, so no projection is defined."""


@dataclass
class ProjectionArea:
    """Signal ``f`` on the projection area and the mask of the centred block.

    ``block`` is True on the temporally extrapolated region, False on the
    received surrounding samples.
    """

    f: np.ndarray
    block: np.ndarray
    block_size: int

    @classmethod
    def centered(cls, f: np.ndarray, block_size: int) -> "ProjectionArea":
        f = np.asarray(f, dtype=np.float64)
        M, N = f.shape
        if (M - block_size) % 2 or (N - block_size) % 2:
            raise ValueError(f"block of {block_size} cannot be centred in a {M}x{N} area")
        block = np.zeros((M, N), dtype=bool)
        top, left = (M - block_size) // 2, (N - block_size) // 2
        block[top : top + block_size, left : left + block_size] = True
        return cls(f, block, block_size)

    @property
    def shape(self) -> tuple[int, int]:
        return self.f.shape

    @property
    def block_slices(self) -> tuple[slice, slice]:
        M, N = self.f.shape
        top, left = (M - self.block_size) // 2, (N - self.block_size) // 2
        return slice(top, top + self.block_size), slice(left, left + self.block_size)


@dataclass
class WeightFunction:
    w: np.ndarray
    mu: float
    rho_hat: float


@dataclass
class ModelState:
    """Result of the model generation.

    ``coeffs`` maps a flat frequency index to its accumulated complex
    expansion coefficient; its keys form the set of selected basis functions.
    ``energy`` holds the weighted residual energy before the first and after
    every iteration.
    """

    g: np.ndarray
    r: np.ndarray
    coeffs: dict[int, complex] = field(default_factory=dict)
    selected: list[int] = field(default_factory=list)
    energy: list[float] = field(default_factory=list)

    @property
    def K(self) -> set[int]:
        return set(self.coeffs)

    def dump(self) -> str:
        """Text listing of ``index re im`` per selected basis, for regression diffs."""
        return "".join(
            f"{k} {c.real:.12e} {c.imag:.12e}\n" for k, c in sorted(self.coeffs.items())
        )


def compute_mu(e_hat_t: float, e_max: float = 25.0, rho_hat: float = 0.8,
               block_size: int = 16) -> float:
    """Weight of the temporally extrapolated block, linear in the estimated error.

    Equals ``rho_hat**(B/2)`` at zero error and drops to 0 at ``e_max``.
    """
    if e_max <= 0:
        raise ValueError("e_max must be positive")
    if not 0.0 < rho_hat < 1.0:
        raise ValueError("rho_hat must lie in (0, 1)")
    return rho_hat ** (block_size / 2) * max(0.0, 1.0 - e_hat_t / e_max)


def isotropic_weights(shape: tuple[int, int], rho_hat: float) -> np.ndarray:
    M, N = shape
    m = np.arange(M)[:, None] - (M - 1) / 2
    n = np.arange(N)[None, :] - (N - 1) / 2
    return rho_hat ** np.sqrt(m * m + n * n)


def build_weights(area: ProjectionArea, mu: float, rho_hat: float = 0.8) -> WeightFunction:
    if not 0.0 < rho_hat < 1.0:
        raise ValueError("rho_hat must lie in (0, 1)")
    w = isotropic_weights(area.shape, rho_hat)
    w[area.block] = mu
    return WeightFunction(w, mu, rho_hat)


def basis_function(shape: tuple[int, int], k: int) -> np.ndarray:
    M, N = shape
    km, kn = divmod(k, N)
    em = np.exp(2j * np.pi * km * np.arange(M) / M)
    en = np.exp(2j * np.pi * kn * np.arange(N) / N)
    return em[:, None] * en[None, :]


def conjugate_index(shape: tuple[int, int], k: int) -> int:
    M, N = shape
    km, kn = divmod(k, N)
    return ((-km) % M) * N + ((-kn) % N)


def project_all(r: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Weighted projection coefficients of ``r`` onto every basis function, shape ``(M, N)``."""
    total = float(w.sum())
    if total <= 0.0:
        raise DegenerateWeightsError("weighting function is zero everywhere")
    return np.fft.fft2(w * r) / total


def project(r: np.ndarray, w: WeightFunction | np.ndarray, k: int) -> complex:
    """Projection coefficient for the single basis function ``k``, evaluated directly."""
    w = w.w if isinstance(w, WeightFunction) else np.asarray(w)
    phi = basis_function(r.shape, k)
    den = float(np.sum(w * np.abs(phi) ** 2))
    if den <= 0.0:
        raise DegenerateWeightsError("weighting function is zero everywhere")
    return complex(np.sum(r * np.conj(phi) * w) / den)


def select_basis(p: np.ndarray, w: WeightFunction | np.ndarray | None = None) -> int:
    """Index maximising the energy decrement ``|p_k|^2 * sum(w |phi_k|^2)``.

    With the unit-magnitude Fourier basis the weight sum is the same for all
    ``k`` and drops out. Ties resolve to the smallest index.
    """
    mag = np.abs(np.asarray(p)).ravel() ** 2
    return int(np.argmax(mag))


def compensate(p_u: complex, gamma: float = 0.75) -> complex:
    """Scale a projection coefficient to counter orthogonality deficiency."""
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    return gamma * p_u


def generate_model(
    area: ProjectionArea,
    w: WeightFunction | np.ndarray,
    iterations: int = 200,
    gamma: float = 0.75,
    track_energy: bool = False,
) -> ModelState:
    """Iteratively build the real-valued model ``g`` of ``area.f``.

    Each iteration counts one selection: a conjugate pair or a self-paired
    bin. The residual ``r = f - g`` is carried alongside ``g``.
    """
    if iterations < 0:
        raise ValueError("iterations must be non-negative")
    if not 0.0 < gamma <= 1.0:
        raise ValueError("gamma must lie in (0, 1]")
    weights = w.w if isinstance(w, WeightFunction) else np.asarray(w, dtype=np.float64)
    shape = area.shape
    M, N = shape
    r = np.array(area.f, dtype=np.float64)
    g = np.zeros(shape)
    state = ModelState(g, r)
    if track_energy:
        state.energy.append(float(np.sum(weights * r * r)))
    if iterations == 0:
        return state
    total = float(weights.sum())
    if total <= 0.0:
        raise DegenerateWeightsError("weighting function is zero everywhere")

    two_pi_i = 2j * np.pi
    row_phase = np.exp(two_pi_i * np.outer(np.arange(M), np.arange(M)) / M)  # [k_m, m]
    col_phase = np.exp(two_pi_i * np.outer(np.arange(N), np.arange(N)) / N)  # [k_n, n]

    for _ in range(iterations):
        p = np.fft.fft2(weights * r) / total
        u = select_basis(p)
        km, kn = divmod(u, N)
        partner = ((-km) % M) * N + ((-kn) % N)
        if partner < u:
            # same update either way; keep the lower index of the pair
            u, partner = partner, u
            km, kn = divmod(u, N)
        c = compensate(complex(p[km, kn]), gamma)
        phi = row_phase[km][:, None] * col_phase[kn][None, :]
        if partner == u:
            step = c.real * phi.real
            state.coeffs[u] = state.coeffs.get(u, 0j) + c.real
        else:
            step = 2.0 * (c * phi).real
            state.coeffs[u] = state.coeffs.get(u, 0j) + c
            state.coeffs[partner] = state.coeffs.get(partner, 0j) + c.conjugate()
        g += step
        r -= step
        state.selected.append(u)
        if track_energy:
            state.energy.append(float(np.sum(weights * r * r)))
    return state


def synthesize(shape: tuple[int, int], coeffs: dict[int, complex]) -> np.ndarray:
    """Evaluate ``sum_k c_k phi_k`` on the grid (complex result)."""
    out = np.zeros(shape, dtype=complex)
    for k, c in coeffs.items():
        out += c * basis_function(shape, k)
    return out


def refine_block(area: ProjectionArea, g: np.ndarray) -> np.ndarray:
    """Cut the centred block out of the model, round and clip to 8 bits."""
    block = np.asarray(g)[area.block_slices]
    return np.clip(np.rint(block), 0, 255).astype(np.uint8)
