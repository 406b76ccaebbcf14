"""Time evolution: spectral propagator, adaptive RK integration, closed forms."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .fock import FockBasis, StateVector, SystemSpec, build_hamiltonian, is_hermitian

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)
SQRT7 = np.sqrt(7.0)


class PropagationError(RuntimeError):
    pass


class IntegrationError(RuntimeError):
    def __init__(self, message: str, t_reached: float):
        super().__init__(f"{message} (reached t = {t_reached:.6e} s)")
        self.t_reached = t_reached


@dataclass(frozen=True)
class Propagator:
    """Eigendecomposition ``H = V diag(w) V^dag`` of a time-independent Hamiltonian."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def from_hamiltonian(cls, H: np.ndarray) -> "Propagator":
        H = np.asarray(H, dtype=complex)
        if H.ndim != 2 or H.shape[0] != H.shape[1]:
            raise PropagationError(f"Hamiltonian must be square, got shape {H.shape}")
        if not is_hermitian(H):
            dev = np.abs(H - H.conj().T).max()
            raise PropagationError(f"Hamiltonian is not Hermitian (max |H - H^dag| = {dev:.3e})")
        try:
            w, V = np.linalg.eigh(H)
        except np.linalg.LinAlgError as exc:
            raise PropagationError(f"eigendecomposition failed: {exc}") from exc
        return cls(w, V)

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.conj().T

    def evolve(self, psi0: np.ndarray, times) -> np.ndarray:
        """Rows are ``exp(-iHt) psi0`` for each ``t`` in ``times`` (seconds)."""
        times = np.atleast_1d(np.asarray(times, dtype=float))
        V = self.eigenvectors
        coeffs = V.conj().T @ np.asarray(psi0, dtype=complex)
        phases = np.exp(-1j * np.outer(times, self.eigenvalues))
        out = (phases * coeffs) @ V.T
        # exact at t = 0 rather than V V^dag psi0
        out[times == 0] = psi0
        return out


def _check_times(times) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be a 1-d sequence")
    if np.any(times < 0):
        raise ValueError("times must be nonnegative")
    if np.any(np.diff(times) < 0):
        raise ValueError("times must be ordered")
    return times


def propagate(H: np.ndarray, psi0: StateVector, times) -> list[StateVector]:
    times = _check_times(times)
    prop = Propagator.from_hamiltonian(H)
    rows = prop.evolve(psi0.amplitudes, times)
    return [StateVector(psi0.basis, row) for row in rows]


def integrate_ode(
    spec: SystemSpec,
    basis: FockBasis,
    psi0: StateVector,
    times,
    tol: float = 1e-10,
    *,
    t0: float = 0.0,
) -> list[StateVector]:
    """Integrate ``i dc/dt = H c`` with a Dormand-Prince 5(4) pair.

    On a cutoff-1 basis this is the qubit-truncated amplitude system; on larger
    bases it is the full coupled set including Kerr shifts.
    """
    if not 0 < tol <= 1e-3:
        raise ValueError(f"tol must lie in (0, 1e-3], got {tol}")
    times = _check_times(times)
    if times.size and times[0] < t0:
        raise ValueError("times must not precede t0")
    H = build_hamiltonian(spec, basis)
    return _integrate(H, basis, psi0, times, tol, t0)


def _integrate(H, basis, psi0, times, tol, t0=0.0) -> list[StateVector]:
    if times.size == 0:
        return []
    mH = -1j * H
    t_end = float(times[-1])
    if t_end == t0:
        return [StateVector(basis, psi0.amplitudes) for _ in times]
    sol = solve_ivp(
        lambda t, y: mH @ y,
        (t0, t_end),
        np.asarray(psi0.amplitudes, dtype=complex),
        method="RK45",
        t_eval=times,
        rtol=tol,
        atol=tol * 1e-2,
    )
    if sol.status != 0:
        reached = float(sol.t[-1]) if sol.t.size else t0
        raise IntegrationError(f"integration failed: {sol.message}", reached)
    return [StateVector(basis, col) for col in sol.y.T]


# ---------------------------------------------------------------------------
# closed-form truncated solutions


class Variant(enum.Enum):
    TWO_MODE_SINGLE_PUMP = "two-mode-single-pump"
    TWO_MODE_TWO_PUMP = "two-mode-two-pump"
    TWO_MODE_NO_PUMP = "two-mode-no-pump"
    THREE_MODE_SYMMETRIC = "three-mode-symmetric"


def _positive(name, value):
    if not (np.isreal(value) and float(np.real(value)) > 0):
        raise ValueError(f"{name} must be real and positive, got {value}")
    return float(np.real(value))


def analytic_two_mode_single_pump(alpha1: float, t, *, as_printed: bool = False) -> np.ndarray:
    """Truncated amplitudes ``(c00, c01, c10, c11)`` for a pump on mode 1 with eps = alpha1.

    The qubit-truncated system is a four-site chain 00-10-01-11 with equal
    hopping, whose frequencies are ``(sqrt5 +- 1) alpha1 / 2``; hence
    ``x = alpha1/2`` and ``y = sqrt5 x``.  ``as_printed=True`` reproduces the
    published form literally (``x = alpha1`` and a ``+`` inside ``c11``), which
    is neither normalised nor a solution; it exists for comparison only.
    """
    alpha1 = _positive("alpha1", alpha1)
    t = np.asarray(t, dtype=float)
    x = alpha1 * t if as_printed else 0.5 * alpha1 * t
    y = SQRT5 * x
    cx, sx, cy, sy = np.cos(x), np.sin(x), np.cos(y), np.sin(y)
    c00 = cx * cy + sx * sy / SQRT5
    c01 = -(2 / SQRT5) * sx * sy
    c10 = -1j * (2 / SQRT5) * cx * sy
    sign = 1.0 if as_printed else -1.0
    c11 = 1j * (cx * sy / SQRT5 + sign * sx * cy)
    return np.stack(np.broadcast_arrays(c00 + 0j, c01 + 0j, c10, c11), axis=-1)


def analytic_two_mode_two_pump(alpha: float, epsilon: float, t) -> np.ndarray:
    """Truncated amplitudes for equal pumps ``alpha`` on both modes."""
    alpha = _positive("alpha", alpha)
    epsilon = _positive("epsilon", epsilon)
    t = np.asarray(t, dtype=float)
    lam = np.sqrt(16 * alpha**2 + epsilon**2)
    half = 0.5 * lam * t
    rot = np.exp(-0.5j * epsilon * t)
    c00 = 0.5 * (1 + (np.cos(half) + 1j * (epsilon / lam) * np.sin(half)) * rot)
    c01 = -(2j * alpha / lam) * np.sin(half) * rot
    return np.stack(np.broadcast_arrays(c00, c01, c01, c00 - 1), axis=-1)


def analytic_no_pump(epsilon: float, t) -> np.ndarray:
    """Unpumped exchange ``cos(eps t)|10> - i sin(eps t)|01>``."""
    epsilon = _positive("epsilon", epsilon)
    t = np.asarray(t, dtype=float)
    zero = np.zeros_like(t, dtype=complex)
    return np.stack(
        np.broadcast_arrays(zero, -1j * np.sin(epsilon * t), np.cos(epsilon * t) + 0j, zero),
        axis=-1,
    )


def analytic_three_mode_symmetric(epsilon: float, t) -> np.ndarray:
    """Truncated amplitudes ``c000 .. c111`` for alpha_1 = alpha_2 = alpha_3 = eps."""
    epsilon = _positive("epsilon", epsilon)
    et = epsilon * np.asarray(t, dtype=float)
    s3, c3 = np.sin(SQRT3 * et), np.cos(SQRT3 * et)
    s7, c7 = np.sin(SQRT7 * et), np.cos(SQRT7 * et)
    c000 = np.exp(-2j * et) * (1j * s7 / SQRT7 + 0.5 * c7) + 0.5 * c3
    c001 = -(SQRT7 / 14) * (1j * np.cos(2 * et) * s7 + np.sin(2 * et) * s7) - (SQRT3 / 6) * 1j * s3
    c011 = c001 + (SQRT3 / 3) * 1j * s3
    c111 = c000 - c3
    # order 000, 001, 010, 011, 100, 101, 110, 111
    return np.stack(np.broadcast_arrays(c000, c001, c001, c011, c001, c011, c011, c111), axis=-1)


@dataclass(frozen=True)
class AnalyticModel:
    """One of the closed-form truncated solutions, with the couplings it needs."""

    variant: Variant
    epsilon: float
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "variant", Variant(self.variant))
        _positive("epsilon", self.epsilon)
        if self.variant is Variant.TWO_MODE_SINGLE_PUMP and self.alpha != self.epsilon:
            raise ValueError("single-pump closed form requires alpha1 == epsilon")
        if self.variant is Variant.THREE_MODE_SYMMETRIC and self.alpha not in (0.0, self.epsilon):
            raise ValueError("symmetric three-mode closed form requires alpha == epsilon")
        if self.variant is Variant.TWO_MODE_TWO_PUMP:
            _positive("alpha", self.alpha)
        if self.variant is Variant.TWO_MODE_NO_PUMP and self.alpha != 0:
            raise ValueError("no-pump model takes alpha = 0")

    @classmethod
    def single_pump(cls, alpha1: float) -> "AnalyticModel":
        return cls(Variant.TWO_MODE_SINGLE_PUMP, alpha1, alpha1)

    @classmethod
    def two_pump(cls, alpha: float, epsilon: float) -> "AnalyticModel":
        return cls(Variant.TWO_MODE_TWO_PUMP, epsilon, alpha)

    @classmethod
    def no_pump(cls, epsilon: float) -> "AnalyticModel":
        return cls(Variant.TWO_MODE_NO_PUMP, epsilon)

    @classmethod
    def three_mode_symmetric(cls, epsilon: float) -> "AnalyticModel":
        return cls(Variant.THREE_MODE_SYMMETRIC, epsilon, epsilon)

    @classmethod
    def from_spec(cls, spec: SystemSpec) -> "AnalyticModel":
        """Pick the closed form matching ``spec``'s couplings, or raise if none applies."""
        eps = spec.epsilon
        pumps = spec.pumps
        if eps.imag != 0 or any(a.imag != 0 for a in pumps) or eps.real <= 0:
            raise ValueError("closed forms need real couplings with epsilon > 0")
        eps = eps.real
        alphas = [a.real for a in pumps]
        if spec.modes == 2:
            if alphas == [0.0, 0.0]:
                return cls.no_pump(eps)
            if alphas[1] == 0.0 and alphas[0] == eps:
                return cls.single_pump(eps)
            if alphas[0] == alphas[1] and alphas[0] > 0:
                return cls.two_pump(alphas[0], eps)
        elif alphas == [eps] * 3:
            return cls.three_mode_symmetric(eps)
        raise ValueError(f"no closed form for modes={spec.modes}, epsilon={eps}, pumps={alphas}")

    @property
    def modes(self) -> int:
        return 3 if self.variant is Variant.THREE_MODE_SYMMETRIC else 2

    @property
    def initial_occupation(self) -> tuple[int, ...]:
        if self.variant is Variant.TWO_MODE_NO_PUMP:
            return (1, 0)
        return (0,) * self.modes

    def to_spec(self, chi: float = 0.0) -> SystemSpec:
        if self.variant is Variant.TWO_MODE_SINGLE_PUMP:
            pumps = (self.alpha, 0.0)
        elif self.variant is Variant.TWO_MODE_TWO_PUMP:
            pumps = (self.alpha, self.alpha)
        elif self.variant is Variant.TWO_MODE_NO_PUMP:
            pumps = (0.0, 0.0)
        else:
            pumps = (self.epsilon,) * 3
        return SystemSpec(self.modes, (chi,) * self.modes, self.epsilon, pumps)

    def amplitudes(self, t) -> np.ndarray:
        """Qubit-subspace amplitudes at time(s) ``t`` in seconds; last axis is the 2^M states."""
        if self.variant is Variant.TWO_MODE_SINGLE_PUMP:
            return analytic_two_mode_single_pump(self.alpha, t)
        if self.variant is Variant.TWO_MODE_TWO_PUMP:
            return analytic_two_mode_two_pump(self.alpha, self.epsilon, t)
        if self.variant is Variant.TWO_MODE_NO_PUMP:
            return analytic_no_pump(self.epsilon, t)
        return analytic_three_mode_symmetric(self.epsilon, t)
