"""Quadrature operators, variances, and the published closed-form variance sets.

The amplitude path (state -> operator moments with full bosonic matrix
elements) is the reference.  Qubit states are embedded in a cutoff-2 basis
before evaluation so that ``a a^dag |1> = 2|1>`` is not clipped by truncation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    AnalyticModel,
    analytic_no_pump,
    analytic_two_mode_single_pump,
    analytic_two_mode_two_pump,
)
from .fock import FockBasis, StateVector, annihilation_matrix

VACUUM = 0.25
NORM_TOL = 1e-9
IMAG_TOL = 1e-12
SQRT5 = np.sqrt(5.0)


class ObservableError(ValueError):
    pass


@dataclass(frozen=True)
class QuadratureVariances:
    """``dX2[p]`` and ``dY2[p]`` for modes ``p = 0..M-1``; arrays may carry a leading time axis."""

    dX2: np.ndarray
    dY2: np.ndarray

    @property
    def modes(self) -> int:
        return np.shape(self.dX2)[-1]

    def as_columns(self) -> np.ndarray:
        """Stack as ``[dX2_1..dX2_M, dY2_1..dY2_M]`` along the last axis."""
        return np.concatenate([np.asarray(self.dX2), np.asarray(self.dY2)], axis=-1)

    def squeezed(self) -> tuple[np.ndarray, np.ndarray]:
        return np.asarray(self.dX2) < VACUUM, np.asarray(self.dY2) < VACUUM


def quadrature_operators(basis: FockBasis, mode: int) -> tuple[np.ndarray, np.ndarray]:
    a = annihilation_matrix(basis, mode)
    ad = a.conj().T
    return (a + ad) / 2, (a - ad) / 2j


def _moments(basis: FockBasis, amps: np.ndarray) -> QuadratureVariances:
    """Vectorised variances for a batch of states ``amps`` with shape ``(..., dim)``."""
    norms = np.linalg.norm(amps, axis=-1)
    if np.any(np.abs(norms - 1) > NORM_TOL):
        worst = np.abs(norms - 1).max()
        raise ObservableError(f"state is not normalised (|norm - 1| = {worst:.3e})")
    dX2, dY2 = [], []
    for p in range(1, basis.modes + 1):
        for out, Q in zip((dX2, dY2), quadrature_operators(basis, p)):
            Qpsi = amps @ Q.T
            mean = np.einsum("...i,...i->...", amps.conj(), Qpsi)
            # <Q^2> = ||Q psi||^2 for Hermitian Q
            second = np.einsum("...i,...i->...", Qpsi.conj(), Qpsi).real
            if np.any(np.abs(mean.imag) > IMAG_TOL):
                raise ObservableError(
                    f"imaginary residue {np.abs(mean.imag).max():.3e} in a Hermitian expectation"
                )
            out.append(second - mean.real**2)
    return QuadratureVariances(np.stack(dX2, axis=-1), np.stack(dY2, axis=-1))


def quadrature_variances(state: StateVector, basis: FockBasis | None = None) -> QuadratureVariances:
    basis = state.basis if basis is None else basis
    if basis != state.basis:
        raise ValueError("state and basis disagree")
    if basis.cutoff < 2:
        # X^2 on |1> needs the |2> component of a^dag|1>
        state = StateVector.from_qubit(state.amplitudes, cutoff=2)
        basis = state.basis
    return _moments(basis, state.amplitudes)


def qubit_variances(qubit_amps) -> QuadratureVariances:
    """Variances of qubit-subspace amplitudes ``(..., 2^M)`` via a cutoff-2 embedding."""
    qubit_amps = np.asarray(qubit_amps, dtype=complex)
    modes = int(round(np.log2(qubit_amps.shape[-1])))
    basis = FockBasis(modes, 2)
    full = np.zeros(qubit_amps.shape[:-1] + (basis.dim,), dtype=complex)
    full[..., basis.qubit_indices] = qubit_amps
    return _moments(basis, full)


def model_variances(model: AnalyticModel, t) -> QuadratureVariances:
    return qubit_variances(model.amplitudes(t))


# ---------------------------------------------------------------------------
# published variance expressions


def analytic_variances_single_pump(alpha1: float, t, *, as_printed: bool = True) -> QuadratureVariances:
    """The four single-pump variance expressions.

    With ``as_printed=False`` the ``dX2_2`` expression uses ``gamma1/20`` in place
    of the published ``gamma1/5`` prefactor; that is the only change needed to
    agree with the amplitude path.
    """
    t = np.asarray(t, dtype=float)
    g1, p1 = np.cos(0.5 * SQRT5 * alpha1 * t), np.sin(0.5 * SQRT5 * alpha1 * t)
    g2, p2 = np.cos(0.5 * alpha1 * t), np.sin(0.5 * alpha1 * t)
    X1 = -(SQRT5 / 5) * g1 * g2 * p1 * p2 + 0.25 * ((2 * p1**2 + 1) * g2**2 + (2 * g1**2 + 1) * p2**2)
    pre = 5 if as_printed else 20
    X2 = (
        -4 * p1**4 / 25
        - g1 / pre * (4 * SQRT5 * g2 * p1 * p2 - (2 * p2**2 + 1) * 5 * g1)
        + p1**2 / 20 * (6 * p2**2 + 7)
    )
    Y1 = (
        0.25 * ((3 - 2 * g2**2) * g1**2 + (3 - 2 * p2**2) * p1**2)
        + 16 / 25 * (SQRT5 * (2 * p2**2 - 1) * g1 - g2 * p1 * p2) * g2 * p1**3 * p2
        + 0.2 * ((-SQRT5 + 8 * g1 * g2 * p1 * p2) * g1 * g2 * p1 * p2 - 4 * (g2**4 + p2**4) * p1**2 * g1**2)
    )
    Y2 = (
        (5 + 2 * p1**2) * g2**2 + 13 * p1**2 * p2**2 - g1 * p2 * (4 * SQRT5 * g2 * p1 - 15 * g1 * p2)
    ) / 20
    return QuadratureVariances(np.stack([X1, X2], -1), np.stack([Y1, Y2], -1))


def xi_coefficients(epsilon: float, lam: float, *, as_printed: bool = True) -> np.ndarray:
    """Xi_1 .. Xi_12 (returned 0-indexed).

    ``as_printed=False`` applies the two dimensional repairs: Xi_4's denominator
    ``4 eps^4 -> 4 lam^4`` and Xi_8's ``65 lam^2 -> 65 lam^2 eps^2``.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    e, L = np.float64(epsilon), np.float64(lam)
    e2, e4, L2, L4 = e * e, e**4, L * L, L**4
    xi4_den = 4 * e4 if as_printed else 4 * L4
    xi8_term = 65 * L2 if as_printed else 65 * L2 * e2
    # the printed Xi_4 is 0/0 at eps = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        xi4 = (8 * L2 * e2 - 16 * e4) / xi4_den
    return np.array(
        [
            (L4 + 32 * e4 - 25 * L2 * e2) / (4 * L4),
            (L2 * e - 16 * e**3) / (2 * L4),
            (17 * L2 * e2 + L4 - 16 * e4) / (4 * L4),
            xi4,
            2 * (L2 * e2 - e4) / L4,
            8 * e * (e2 - L2 / 32) / L**3,
            (49 * L2 * e2 + L4 - 32 * e4) / (8 * L4),
            (64 * e4 + L4 - xi8_term) / (8 * L4),
            (L2 - 9 * e2) / (4 * L2),
            (L2 + 9 * e2) / (4 * L2),
            (L2 - 33 * e2) / (8 * L2),
            (L2 + 33 * e2) / (8 * L2),
        ]
    )


def analytic_variances_two_pump(
    alpha: float, epsilon: float, t, *, as_printed: bool = True
) -> QuadratureVariances:
    """The four published two-pump expressions, using ``tau1 = lam t/2``, ``tau2 = eps t/2``.

    These do not agree with the amplitude path even after the Xi repairs; see
    :func:`reconciliation_report`.
    """
    lam = np.sqrt(16 * alpha**2 + epsilon**2)
    xi = xi_coefficients(epsilon, lam, as_printed=as_printed)
    t = np.asarray(t, dtype=float)
    t1, t2 = 0.5 * lam * t, 0.5 * epsilon * t
    c1, s1, s2 = np.cos(t1), np.sin(t1), np.sin(t2)
    cos2t2 = np.cos(2 * t2)
    r = epsilon / lam
    X1 = (
        xi[0] * c1**2
        + xi[1] * s1 * s2 * c1
        + xi[2]
        + xi[3] * c1**4
        + (r**2 / 2) * cos2t2 * np.sin(2 * t1) ** 2
        - 0.25 * c1
        + s2 * s1 * ((2 * r) ** 3 * c1**3 - r / 4)
    )
    X2 = (
        xi[4] * c1**4
        - xi[5] * s1 * s2 * c1
        + xi[6]
        + xi[7] * c1**2
        + (r**2 / 2) * cos2t2 * np.sin(2 * t1) ** 2
        + (2 * r) ** 3 * s2 * s1 * c1**3
    )
    Y1 = xi[8] * c1**2 + xi[9] - 2 * r**2 * cos2t2 * s1**2 - (r / 2) * s2 * s1 * (0.5 - c1) - 0.25 * c1
    Y2 = (
        xi[10] * c1**2
        + xi[11]
        - (2 / lam**2) * cos2t2 * (epsilon**2 - c1**2)
        + (r / 4) * s2 * s1 * c1
    )
    return QuadratureVariances(np.stack([X1, X2], -1), np.stack([Y1, Y2], -1))


def analytic_variances_no_pump(epsilon: float, t) -> QuadratureVariances:
    et = epsilon * np.asarray(t, dtype=float)
    m1 = (1 + 2 * np.cos(et) ** 2) / 4
    m2 = (1 + 2 * np.sin(et) ** 2) / 4
    return QuadratureVariances(np.stack([m1, m2], -1), np.stack([m1, m2], -1))


# ---------------------------------------------------------------------------
# printed-vs-amplitude reconciliation

MATCH_TOL = 1e-9


@dataclass(frozen=True)
class ReconciliationRow:
    model: str
    expression: str
    printed_deviation: float
    corrected_deviation: float
    correction: str
    status: str  # "matched", "matched-corrected" or "irrecoverable"


_CORRECTIONS = {
    ("single-pump", "dX2_2"): "gamma1/5 -> gamma1/20",
    ("two-pump", "dX2_1"): "Xi_4: 4 eps^4 -> 4 lam^4",
    ("two-pump", "dX2_2"): "Xi_8: 65 lam^2 -> 65 lam^2 eps^2",
}


def reconciliation_report(
    alpha: float, epsilon: float | None = None, t_max: float = 20e-6, n: int = 1000
) -> list[ReconciliationRow]:
    """Max deviation of every published variance expression from the amplitude path.

    The single-pump set is checked at ``alpha1 = alpha`` (eps = alpha), the
    two-pump set at ``(alpha, epsilon)``, the no-pump set at ``epsilon``.
    """
    epsilon = alpha if epsilon is None else epsilon
    t = np.linspace(0.0, t_max, n)
    cases = [
        (
            "single-pump",
            qubit_variances(analytic_two_mode_single_pump(alpha, t)),
            analytic_variances_single_pump(alpha, t, as_printed=True),
            analytic_variances_single_pump(alpha, t, as_printed=False),
        ),
        (
            "two-pump",
            qubit_variances(analytic_two_mode_two_pump(alpha, epsilon, t)),
            analytic_variances_two_pump(alpha, epsilon, t, as_printed=True),
            analytic_variances_two_pump(alpha, epsilon, t, as_printed=False),
        ),
        (
            "no-pump",
            qubit_variances(analytic_no_pump(epsilon, t)),
            analytic_variances_no_pump(epsilon, t),
            analytic_variances_no_pump(epsilon, t),
        ),
    ]
    rows = []
    for model, ref, printed, corrected in cases:
        names = [f"dX2_{p}" for p in (1, 2)] + [f"dY2_{p}" for p in (1, 2)]
        ref_c, pr_c, co_c = ref.as_columns(), printed.as_columns(), corrected.as_columns()
        for k, name in enumerate(names):
            dp = float(np.abs(pr_c[:, k] - ref_c[:, k]).max())
            dc = float(np.abs(co_c[:, k] - ref_c[:, k]).max())
            correction = _CORRECTIONS.get((model, name), "")
            if dp <= MATCH_TOL:
                status = "matched"
            elif correction and dc <= MATCH_TOL:
                status = "matched-corrected"
            else:
                status = "irrecoverable"
            rows.append(ReconciliationRow(model, name, dp, dc, correction, status))
    return rows
