"""Deterministic, platform-independent sampling of Haar and
sector-constrained random pure states.

Stream derivation: SHA-256 of "master:experiment:task" truncated to a
128-bit Philox key.  Uniform variates come from the bit generator's raw
64-bit output (the layer numpy guarantees stream-stable across versions);
Gaussians use an explicit Box-Muller transform with a fixed consumption
of two raw draws per complex amplitude, so there is no data-dependent
rejection and parallel tasks are bit-reproducible.
"""

from __future__ import annotations

import hashlib
import logging
import math

import numpy as np

from .sectors import SectorBasisMap, apply_frame_rotation, enumerate_sector

__all__ = [
    "SeedPolicy",
    "GaussianStream",
    "haar_state",
    "constrained_haar_state",
    "constrained_haar_state_direct",
]

log = logging.getLogger(__name__)

_TWO_PI = 2.0 * math.pi


class GaussianStream:
    """Counter-based random stream with deterministic Gaussian output."""

    def __init__(self, key: int):
        self.key = key
        self._bitgen = np.random.Philox(key=key)

    def raw(self, n: int) -> np.ndarray:
        return self._bitgen.random_raw(n)

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on (0, 1] (left-open so log is always finite)."""
        return ((self.raw(n) >> 11) + 1) * 2.0 ** -53

    def standard_normals(self, n: int) -> np.ndarray:
        """n i.i.d. N(0, 1) variates via Box-Muller (pairs, fixed draw count)."""
        m = (n + 1) // 2
        u = self.uniforms(2 * m)
        r = np.sqrt(-2.0 * np.log(u[:m]))
        ang = _TWO_PI * u[m:]
        z = np.empty(2 * m)
        z[0::2] = r * np.cos(ang)
        z[1::2] = r * np.sin(ang)
        return z[:n]

    def complex_normals(self, n: int) -> np.ndarray:
        """n i.i.d. standard complex Gaussians (E|z|^2 = 1): sqrt(-ln u) e^{2 pi i v}."""
        u = self.uniforms(2 * n)
        r = np.sqrt(-np.log(u[:n]))
        return r * np.exp(1j * _TWO_PI * u[n:])


class SeedPolicy:
    """Derives independent child streams from one master seed.

    child key = SHA-256(master_seed ':' experiment_id ':' task_index)
    truncated to 128 bits; identical inputs give bit-identical streams on
    every platform.
    """

    def __init__(self, master_seed: int):
        self.master_seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF

    def child_key(self, experiment_id: str, task_index: int) -> int:
        msg = f"{self.master_seed}:{experiment_id}:{task_index}".encode()
        return int.from_bytes(hashlib.sha256(msg).digest()[:16], "little")

    def stream(self, experiment_id: str, task_index: int) -> GaussianStream:
        return GaussianStream(self.child_key(experiment_id, task_index))


def _as_stream(seed) -> GaussianStream:
    if isinstance(seed, GaussianStream):
        return seed
    return SeedPolicy(int(seed)).stream("adhoc", 0)


def haar_state(L: int, seed) -> np.ndarray:
    """Haar-random pure state: 2^L i.i.d. complex Gaussians, normalized."""
    if L < 1:
        raise ValueError("L must be >= 1")
    stream = _as_stream(seed)
    psi = stream.complex_normals(2 ** L)
    psi /= np.linalg.norm(psi)
    return psi


def _sector_or_raise(L: int, q: int) -> SectorBasisMap:
    basis = enumerate_sector(L, q)
    if basis.dimension == 0:
        from .moments import SectorError

        raise SectorError(f"empty sector: L={L}, q={q}")
    return basis


def constrained_haar_state_direct(L: int, q: int, seed) -> np.ndarray:
    """Sector-q random state sampled directly: d_q complex Gaussians placed
    on the sector basis, normalized (z frame)."""
    basis = _sector_or_raise(L, q)
    stream = _as_stream(seed)
    coeffs = stream.complex_normals(basis.dimension)
    coeffs /= np.linalg.norm(coeffs)
    return basis.embed(coeffs)


def constrained_haar_state(
    L: int, q: int, frame="z", seed=0, method: str = "direct"
) -> np.ndarray:
    """Haar-random state constrained to charge sector q in the given frame.

    frame: 'x' | 'y' | 'z' or a Direction.  method 'direct' draws d_q
    Gaussians on the sector and rotates; 'project' draws a full Haar state,
    projects onto the sector in the requested frame, and renormalizes.  The
    two agree in distribution (unitary invariance of the Gaussian measure).
    """
    basis = _sector_or_raise(L, q)
    stream = _as_stream(seed)
    if method == "direct":
        coeffs = stream.complex_normals(basis.dimension)
        coeffs /= np.linalg.norm(coeffs)
        psi = basis.embed(coeffs)
        if frame != "z":
            psi = apply_frame_rotation(psi, frame)
        return psi
    if method == "project":
        for attempt in range(4):
            psi = stream.complex_normals(2 ** L)
            if frame != "z":
                psi = apply_frame_rotation(psi, frame, inverse=True)
            sector = psi[basis.states]
            weight = float(np.sum(np.abs(sector) ** 2))
            if weight > 1e-280:
                out = basis.embed(sector / math.sqrt(weight))
                if frame != "z":
                    out = apply_frame_rotation(out, frame)
                return out
            # probability-zero sector weight: derive a fresh stream
            log.warning(
                "zero sector weight at L=%d q=%d, resampling (attempt %d)",
                L, q, attempt + 1,
            )
            stream = GaussianStream(
                int.from_bytes(
                    hashlib.sha256(
                        f"resample:{stream.key}:{attempt}".encode()
                    ).digest()[:16],
                    "little",
                )
            )
        raise ArithmeticError("persistent zero sector weight")
    raise ValueError(f"unknown method {method!r}")
