"""Dense spin-chain and complex-fermion Hamiltonians with a conserved (or
deliberately broken) U(1) charge, plus sector extraction and a checked
eigensolver.

Models
------
csyk     complex SYK_4: H = 4 (2L)^{-3/2} sum_{i<j, k<l} J_{ij;kl}
         cdag_i cdag_j c_k c_l on L fermion modes, J Hermitian in the
         pair indices, mapped to qubits by Jordan-Wigner.  Charge
         Q = 2 N_f - L.
xxz_nnn  open XXZ chain with a three-site ZZZ coupling, boundary z
         fields of opposite sign, and an optional transverse field that
         breaks the U(1).  Charge q = L - 2 N_down (z magnetization).
mfim     mixed-field Ising chain (no conserved charge).

Qubit 0 is the least significant bit of the basis index.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .sectors import SectorBasisMap
from .sampler import GaussianStream, SeedPolicy

__all__ = [
    "NumericalContractError",
    "CouplingTensor",
    "HamiltonianMatrix",
    "EigenSystem",
    "build_csyk",
    "build_xxz_nnn",
    "build_mfim",
    "extract_sector_block",
    "embed_eigenvector",
    "diagonalize",
    "midspectrum_filter",
    "adjacent_gap_ratio",
]

_HERMITICITY_TOL = 1e-12
_EIG_TOL = 1e-10


class NumericalContractError(RuntimeError):
    """A numerical post-condition (Hermiticity, residual, orthonormality)
    failed beyond tolerance."""


@dataclass(frozen=True)
class CouplingTensor:
    """Hermitian two-body couplings J[(i<j), (k<l)] over ordered mode pairs."""

    L: int
    pairs: tuple  # tuple of (i, j) with i < j, lexicographic
    values: np.ndarray  # (P, P) complex, values[p, p'] = J_{pairs[p]; pairs[p']}

    def __post_init__(self):
        v = self.values
        if np.max(np.abs(v - v.conj().T)) > _HERMITICITY_TOL:
            raise NumericalContractError("coupling tensor not Hermitian")


@dataclass(frozen=True)
class HamiltonianMatrix:
    """Dense Hamiltonian with its model tag and diagonal charge (or None)."""

    matrix: np.ndarray
    L: int
    model: str
    charge_diag: np.ndarray | None = None  # length 2^L integer charges
    couplings: CouplingTensor | None = None

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def charges(self) -> np.ndarray:
        if self.charge_diag is None:
            raise ValueError(f"model {self.model!r} has no conserved charge")
        return self.charge_diag


@dataclass(frozen=True)
class EigenSystem:
    """Ascending eigenvalues and phase-fixed orthonormal eigenvectors
    (column i belongs to values[i])."""

    values: np.ndarray
    vectors: np.ndarray

    @property
    def dimension(self) -> int:
        return self.values.size


def _as_stream(seed) -> GaussianStream:
    if isinstance(seed, GaussianStream):
        return seed
    return SeedPolicy(int(seed)).stream("hamiltonian", 0)


# ---------------------------------------------------------------------------
# complex SYK
# ---------------------------------------------------------------------------

_CSYK_INDEX_CACHE: dict = {}


def _fermion_sign(x: int, site: int) -> int:
    """Jordan-Wigner string (-1)^{n_0 + ... + n_{site-1}} evaluated on x."""
    return -1 if bin(x & ((1 << site) - 1)).count("1") & 1 else 1


def _csyk_index_maps(L: int):
    """Sparse assembly maps for the two-body term: for every basis state and
    every ((i<j), (k<l)) with k, l occupied and i, j free after removal,
    record row, column, fermionic sign and the flat coupling index."""
    cached = _CSYK_INDEX_CACHE.get(L)
    if cached is not None:
        return cached
    pairs = tuple(itertools.combinations(range(L), 2))
    pair_pos = {p: n for n, p in enumerate(pairs)}
    P = len(pairs)
    rows, cols, signs, cidx = [], [], [], []
    for x in range(2 ** L):
        occ = [m for m in range(L) if (x >> m) & 1]
        for k, l in itertools.combinations(occ, 2):
            # annihilate l then k (rightmost operator first)
            s0 = _fermion_sign(x, l)
            y0 = x ^ (1 << l)
            s0 *= _fermion_sign(y0, k)
            y0 ^= 1 << k
            col_pair = pair_pos[(k, l)]
            free = [m for m in range(L) if not (y0 >> m) & 1]
            for i, j in itertools.combinations(free, 2):
                s = s0 * _fermion_sign(y0, j)
                y = y0 ^ (1 << j)
                s *= _fermion_sign(y, i)
                y ^= 1 << i
                rows.append(y)
                cols.append(x)
                signs.append(s)
                cidx.append(pair_pos[(i, j)] * P + col_pair)
    maps = (
        np.asarray(rows, dtype=np.int64),
        np.asarray(cols, dtype=np.int64),
        np.asarray(signs, dtype=np.float64),
        np.asarray(cidx, dtype=np.int64),
        pairs,
    )
    _CSYK_INDEX_CACHE[L] = maps
    return maps


def build_csyk(L: int, seed=0) -> HamiltonianMatrix:
    """Draw one complex-SYK realization on L modes.

    The pair-basis coupling matrix is J = (G + Gdag)/sqrt(2) with G iid
    standard complex Gaussian, so J_{kl;ij} = conj(J_{ij;kl}), off-diagonal
    entries have unit mean square modulus and diagonal entries are real
    N(0, 1).  Prefactor 4 (2L)^{-3/2}.
    """
    if not 2 <= L <= 14:
        raise ValueError(f"csyk supports 2 <= L <= 14, got {L}")
    stream = _as_stream(seed)
    rows, cols, signs, cidx, pairs = _csyk_index_maps(L)
    P = len(pairs)
    g = stream.complex_normals(P * P).reshape(P, P)
    J = (g + g.conj().T) / math.sqrt(2.0)
    coupling = CouplingTensor(L=L, pairs=pairs, values=J)

    dim = 2 ** L
    H = np.zeros((dim, dim), dtype=np.complex128)
    np.add.at(H, (rows, cols), signs * J.reshape(-1)[cidx])
    H *= 4.0 * (2 * L) ** -1.5

    delta = float(np.max(np.abs(H - H.conj().T)))
    if delta > _HERMITICITY_TOL:
        raise NumericalContractError(f"csyk assembly non-Hermitian by {delta}")
    H = (H + H.conj().T) / 2

    states = np.arange(dim, dtype=np.int64)
    charge = 2 * np.bitwise_count(states).astype(np.int64) - L
    return HamiltonianMatrix(matrix=H, L=L, model="csyk",
                             charge_diag=charge, couplings=coupling)


# ---------------------------------------------------------------------------
# spin chains
# ---------------------------------------------------------------------------

def _z_diagonals(L: int) -> np.ndarray:
    """(L, 2^L) array of sigma^z eigenvalues: bit 0 -> +1, bit 1 -> -1."""
    states = np.arange(2 ** L, dtype=np.int64)
    return 1.0 - 2.0 * ((states[None, :] >> np.arange(L)[:, None]) & 1)


def build_xxz_nnn(L: int, J1=1.0, delta=0.5, J2=0.0, h_b=0.0,
                  h_x=0.0) -> HamiltonianMatrix:
    """Open XXZ chain with a three-site ZZZ term and boundary pinning:

        H = sum_j [J1 (X_j X_{j+1} + Y_j Y_{j+1}) + delta Z_j Z_{j+1}]
          + J2 sum_j Z_j Z_{j+1} Z_{j+2} + h_b (Z_0 - Z_{L-1})
          + h_x sum_j X_j.

    The odd-Z triple term breaks global spin flip, and h_b breaks
    inversion, so no discrete symmetry survives inside a magnetization
    sector.  h_x != 0 breaks the U(1) itself; the charge diagonal is still
    attached and sector extraction then fails its conservation check.
    """
    if L < 2:
        raise ValueError(f"xxz_nnn needs L >= 2, got {L}")
    dim = 2 ** L
    z = _z_diagonals(L)
    diag = np.zeros(dim)
    for j in range(L - 1):
        diag += delta * z[j] * z[j + 1]
    for j in range(L - 2):
        diag += J2 * z[j] * z[j + 1] * z[j + 2]
    diag += h_b * (z[0] - z[L - 1])

    H = np.zeros((dim, dim))
    np.fill_diagonal(H, diag)
    states = np.arange(dim, dtype=np.int64)
    for j in range(L - 1):
        flip = np.nonzero(((states >> j) & 1) != ((states >> (j + 1)) & 1))[0]
        H[flip ^ (3 << j), flip] += 2.0 * J1
    if h_x != 0.0:
        for j in range(L):
            H[states ^ (1 << j), states] += h_x

    charge = L - 2 * np.bitwise_count(states).astype(np.int64)
    return HamiltonianMatrix(matrix=H, L=L, model="xxz_nnn",
                             charge_diag=charge)


def build_mfim(L: int, g=1.1, h=0.35, h1=0.25, hL=-0.25) -> HamiltonianMatrix:
    """Mixed-field Ising chain (open) with boundary longitudinal fields:

        H = sum_j Z_j Z_{j+1} + g sum_j X_j + h sum_j Z_j + h1 Z_0 + hL Z_{L-1}.

    Nonintegrable at the default couplings; no conserved charge.
    """
    if L < 2:
        raise ValueError(f"mfim needs L >= 2, got {L}")
    dim = 2 ** L
    z = _z_diagonals(L)
    diag = h * z.sum(axis=0) + h1 * z[0] + hL * z[L - 1]
    for j in range(L - 1):
        diag += z[j] * z[j + 1]

    H = np.zeros((dim, dim))
    np.fill_diagonal(H, diag)
    states = np.arange(dim, dtype=np.int64)
    for j in range(L):
        H[states ^ (1 << j), states] += g
    return HamiltonianMatrix(matrix=H, L=L, model="mfim", charge_diag=None)


# ---------------------------------------------------------------------------
# sectors and diagonalization
# ---------------------------------------------------------------------------

def extract_sector_block(H: HamiltonianMatrix, q: int):
    """Restrict H to the charge-q sector.

    Verifies [H, Q] = 0 exactly (every matrix element between states of
    unequal charge must vanish) and returns (block, basis) where basis maps
    sector positions back to full basis states.
    """
    charge = H.charges()
    # chunked [H, Q] check: integer charges, so any off-sector element makes
    # |H_xy (q_y - q_x)| >= |H_xy| and the max must be exactly zero
    bad = 0.0
    for lo in range(0, charge.size, 1024):
        rows = slice(lo, min(lo + 1024, charge.size))
        diff = np.abs(charge[None, :] - charge[rows, None]).astype(float)
        bad = max(bad, float(np.max(np.abs(H.matrix[rows]) * diff)))
    if bad != 0.0:
        raise NumericalContractError(
            f"charge not conserved: off-sector element {bad}")
    states = np.nonzero(charge == q)[0]
    if states.size == 0:
        raise ValueError(f"charge {q} absent for model {H.model!r} at L={H.L}")
    block = np.ascontiguousarray(H.matrix[np.ix_(states, states)])
    basis = SectorBasisMap(L=H.L, q=q, states=states.astype(np.int64))
    return block, basis


def embed_eigenvector(v: np.ndarray, basis: SectorBasisMap) -> np.ndarray:
    """Lift a sector eigenvector to the full 2^L Hilbert space."""
    return basis.embed(np.asarray(v))


def diagonalize(matrix: np.ndarray) -> EigenSystem:
    """Full Hermitian eigendecomposition with deterministic phases.

    Each eigenvector is rotated so its largest-modulus component (first
    index on ties) is real positive.  Residual ||Hv - Ev|| <= 1e-10 ||H||
    and orthonormality to 1e-10 are enforced.
    """
    Hm = np.asarray(matrix)
    if np.max(np.abs(Hm - Hm.conj().T)) > _HERMITICITY_TOL * max(
            1.0, float(np.max(np.abs(Hm)))):
        raise NumericalContractError("matrix is not Hermitian")
    evals, evecs = scipy.linalg.eigh(Hm)

    pivot = np.argmax(np.abs(evecs), axis=0)
    lead = evecs[pivot, np.arange(evecs.shape[1])]
    phase = np.where(np.abs(lead) > 0, lead / np.abs(lead), 1.0)
    evecs = evecs / phase[None, :]
    if np.iscomplexobj(evecs):
        evecs = np.ascontiguousarray(evecs)
    else:
        evecs = np.ascontiguousarray(evecs.real)

    scale = float(np.max(np.abs(evals))) if evals.size else 0.0
    resid = np.max(np.abs(Hm @ evecs - evecs * evals[None, :]))
    if resid > _EIG_TOL * max(scale, 1.0):
        raise NumericalContractError(f"eigen residual {resid} too large")
    gram = evecs.conj().T @ evecs
    ortho = np.max(np.abs(gram - np.eye(gram.shape[0])))
    if ortho > _EIG_TOL:
        raise NumericalContractError(f"eigenvectors not orthonormal: {ortho}")
    return EigenSystem(values=evals, vectors=evecs)


def midspectrum_filter(evals: np.ndarray, L: int, window: float | None = None,
                       fraction: float | None = None) -> np.ndarray:
    """Indices of mid-spectrum eigenvalues.

    window:   keep |E / L| < window (strict).
    fraction: keep the central round(fraction * n) eigenvalues by sorted
              position, starting at (n - k) // 2.
    Exactly one selector must be given.
    """
    evals = np.asarray(evals)
    if (window is None) == (fraction is None):
        raise ValueError("give exactly one of window= or fraction=")
    if window is not None:
        return np.nonzero(np.abs(evals / L) < window)[0]
    n = evals.size
    k = int(round(fraction * n))
    order = np.argsort(evals, kind="stable")
    start = (n - k) // 2
    return np.sort(order[start : start + k])


def adjacent_gap_ratio(evals: np.ndarray) -> float:
    """Mean adjacent-gap ratio <r> = <min(s_i, s_{i+1}) / max(s_i, s_{i+1})>.

    Pairs with a vanishing larger gap (exact degeneracies) are excluded;
    returns nan if nothing survives.
    """
    s = np.diff(np.sort(np.asarray(evals, dtype=float)))
    a = np.minimum(s[:-1], s[1:])
    b = np.maximum(s[:-1], s[1:])
    keep = b > 0
    if not np.any(keep):
        return float("nan")
    return float(np.mean(a[keep] / b[keep]))
