"""Multi-mode Fock basis, ladder operators and the Kerr-coupler Hamiltonian.

Everything is dense: at the sizes used here ((d+1)^M <= 729) dense complex
matrices are simpler and fast enough.  hbar = 1, couplings in s^-1.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

HERMITIAN_RTOL = 1e-12
NORM_TOL = 1e-12

# (d+1)**M must stay addressable by a signed 64-bit index
_MAX_DIM = np.iinfo(np.int64).max


@dataclass(frozen=True)
class FockBasis:
    """Occupation-number basis ``|n_1, ..., n_M>`` with ``0 <= n_p <= cutoff``.

    States are ordered lexicographically with mode 1 most significant, so the
    index of ``(n_1, ..., n_M)`` is the base-(cutoff+1) number ``n_1 n_2 ... n_M``.
    """

    modes: int
    cutoff: int

    def __post_init__(self):
        if self.modes < 1:
            raise ValueError(f"modes must be >= 1, got {self.modes}")
        if self.cutoff < 1:
            raise ValueError(f"cutoff must be >= 1, got {self.cutoff}")
        if (self.cutoff + 1) ** self.modes > _MAX_DIM:
            raise OverflowError(
                f"basis dimension ({self.cutoff}+1)^{self.modes} overflows the index type"
            )

    @property
    def levels(self) -> int:
        return self.cutoff + 1

    @property
    def dim(self) -> int:
        return self.levels**self.modes

    @cached_property
    def occupations(self) -> np.ndarray:
        """``(dim, modes)`` integer array; row ``i`` is the occupation tuple of index ``i``."""
        rows = itertools.product(range(self.levels), repeat=self.modes)
        return np.array(list(rows), dtype=np.int64).reshape(self.dim, self.modes)

    def occupation(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.dim:
            raise IndexError(f"basis index {i} out of range 0..{self.dim - 1}")
        return tuple(int(n) for n in self.occupations[i])

    def index(self, occupation) -> int:
        occ = tuple(int(n) for n in occupation)
        if len(occ) != self.modes:
            raise ValueError(f"expected {self.modes} occupations, got {len(occ)}")
        i = 0
        for n in occ:
            if not 0 <= n <= self.cutoff:
                raise ValueError(f"occupation {occ} exceeds cutoff {self.cutoff}")
            i = i * self.levels + n
        return i

    @cached_property
    def qubit_indices(self) -> np.ndarray:
        """Indices of the 2^M states with every occupation <= 1, in qubit-basis order."""
        return np.array(
            [self.index(occ) for occ in itertools.product((0, 1), repeat=self.modes)],
            dtype=np.int64,
        )

    def labels(self) -> list[str]:
        return ["".join(str(n) for n in occ) for occ in self.occupations]


def build_basis(modes: int, cutoff: int) -> FockBasis:
    return FockBasis(modes, cutoff)


@dataclass(frozen=True)
class SystemSpec:
    """Couplings of an M-mode pumped Kerr coupler.

    ``epsilon`` is shared by every mode pair.  A zero entry in ``pumps`` means
    that mode is not driven.
    """

    modes: int
    chi: tuple[float, ...]
    epsilon: complex
    pumps: tuple[complex, ...]

    def __post_init__(self):
        object.__setattr__(self, "chi", tuple(float(c) for c in self.chi))
        object.__setattr__(self, "pumps", tuple(complex(a) for a in self.pumps))
        object.__setattr__(self, "epsilon", complex(self.epsilon))
        if self.modes not in (2, 3):
            raise ValueError(f"modes must be 2 or 3, got {self.modes}")
        if len(self.chi) != self.modes:
            raise ValueError(f"chi has {len(self.chi)} entries for {self.modes} modes")
        if len(self.pumps) != self.modes:
            raise ValueError(f"pumps has {len(self.pumps)} entries for {self.modes} modes")
        if any(c < 0 for c in self.chi):
            raise ValueError(f"Kerr constants must be nonnegative, got {self.chi}")
        values = [*self.chi, self.epsilon, *self.pumps]
        if not all(np.isfinite(v) for v in values):
            raise ValueError("couplings must be finite")

    @property
    def max_coupling(self) -> float:
        return max([abs(self.epsilon), *(abs(a) for a in self.pumps)])

    @property
    def weak_coupling_ratio(self) -> float:
        """min(chi) / max(|epsilon|, |alpha_p|); the truncation assumes this is large."""
        coupling = self.max_coupling
        if coupling == 0:
            return np.inf
        return min(self.chi) / coupling

    def with_chi(self, chi: float) -> "SystemSpec":
        return SystemSpec(self.modes, (chi,) * self.modes, self.epsilon, self.pumps)


@dataclass(frozen=True)
class StateVector:
    basis: FockBasis
    amplitudes: np.ndarray = field(repr=False)

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.basis.dim,):
            raise ValueError(f"expected {self.basis.dim} amplitudes, got shape {amps.shape}")
        amps = amps.copy()
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def fock(cls, basis: FockBasis, occupation) -> "StateVector":
        amps = np.zeros(basis.dim, dtype=complex)
        amps[basis.index(occupation)] = 1.0
        return cls(basis, amps)

    @classmethod
    def vacuum(cls, basis: FockBasis) -> "StateVector":
        return cls.fock(basis, (0,) * basis.modes)

    @classmethod
    def from_qubit(cls, amplitudes, cutoff: int = 2) -> "StateVector":
        """Embed 2^M qubit-subspace amplitudes (order 0..0, 0..1, ...) into a larger basis."""
        amps = np.asarray(amplitudes, dtype=complex)
        modes = int(round(np.log2(amps.size)))
        if 2**modes != amps.size:
            raise ValueError(f"qubit amplitude count {amps.size} is not a power of two")
        basis = FockBasis(modes, cutoff)
        full = np.zeros(basis.dim, dtype=complex)
        full[basis.qubit_indices] = amps
        return cls(basis, full)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def __getitem__(self, occupation) -> complex:
        return complex(self.amplitudes[self.basis.index(occupation)])


def _check_mode(basis: FockBasis, mode: int):
    if not 1 <= mode <= basis.modes:
        raise IndexError(f"mode {mode} out of range 1..{basis.modes}")


def annihilation_matrix(basis: FockBasis, mode: int) -> np.ndarray:
    """Dense ``a_mode`` on ``basis`` (modes are 1-based).

    Acts as ``sqrt(n)|n-1><n|`` on the chosen mode and identity elsewhere.  The
    matrix is truncated at the cutoff, so ``[a, a^dag] = 1`` only holds below it.
    """
    _check_mode(basis, mode)
    single = np.diag(np.sqrt(np.arange(1, basis.levels, dtype=float)), k=1)
    ops = [np.eye(basis.levels)] * basis.modes
    ops[mode - 1] = single
    out = ops[0]
    for op in ops[1:]:
        out = np.kron(out, op)
    return out.astype(complex)


def number_matrix(basis: FockBasis, mode: int) -> np.ndarray:
    _check_mode(basis, mode)
    return np.diag(basis.occupations[:, mode - 1].astype(complex))


def build_hamiltonian(spec: SystemSpec, basis: FockBasis) -> np.ndarray:
    """Kerr + linear coupling + classical pump Hamiltonian on ``basis``.

    H = sum_p chi_p/2 a_p^dag^2 a_p^2
        + sum_{p<q} (eps a_p^dag a_q + eps^* a_p a_q^dag)
        + sum_p (alpha_p a_p^dag + alpha_p^* a_p)

    On a cutoff-1 basis the Kerr terms vanish and this is exactly the
    qubit-truncated model.
    """
    if basis.modes != spec.modes:
        raise ValueError(f"basis has {basis.modes} modes but spec has {spec.modes}")
    a = [annihilation_matrix(basis, p) for p in range(1, spec.modes + 1)]
    H = np.zeros((basis.dim, basis.dim), dtype=complex)

    for p in range(spec.modes):
        n = basis.occupations[:, p].astype(float)
        H[np.diag_indices(basis.dim)] += 0.5 * spec.chi[p] * n * (n - 1)

    eps = spec.epsilon
    for p, q in itertools.combinations(range(spec.modes), 2):
        hop = a[p].conj().T @ a[q]
        H += eps * hop + np.conj(eps) * hop.conj().T

    for p, alpha in enumerate(spec.pumps):
        if alpha != 0:
            H += alpha * a[p].conj().T + np.conj(alpha) * a[p]

    return H


def is_hermitian(H: np.ndarray, rtol: float = HERMITIAN_RTOL) -> bool:
    scale = np.abs(H).max()
    if scale == 0:
        return True
    return bool(np.abs(H - H.conj().T).max() <= rtol * scale)


def project_qubit(state: StateVector) -> tuple[np.ndarray, float]:
    """Amplitudes on the all-occupations-<=1 subspace (not renormalised) and the leaked weight."""
    kept = state.amplitudes[state.basis.qubit_indices].copy()
    leakage = 1.0 - float(np.sum(np.abs(kept) ** 2))
    return kept, min(max(leakage, 0.0), 1.0)
