"""Conditional evolution under repeated null measurements.

Two equivalent routes are provided and kept independent: iterated
application of the survival operator with per-step renormalization, and
the spectral formula summing disk and circle eigencomponents.  The
asymptotic regime (dark dominated, fixed point, oscillatory, exceptional)
is classified from the spectrum and the initial state.
"""

from __future__ import annotations

import dataclasses
import math

import numpy as np

from .charges import DEFAULT_TIE_TOL
from .errors import (
    CertainDetectionError,
    ExceptionalSpectrumError,
    InvalidParameterError,
    UnsupportedMultiplicityError,
)

#: A raw step norm below this means the next measurement detects for sure.
CERTAIN_DETECTION_TOL = 1e-14

#: Default dark-overlap threshold separating regime A from the disk regimes.
DEFAULT_DARK_OVERLAP_TOL = 1e-10

#: Amplitude-ratio threshold defining the reported crossover step.
CROSSOVER_RATIO = 0.01

DARK_DOMINATED = "DarkDominated"
FIXED_POINT = "FixedPoint"
OSCILLATORY = "Oscillatory"
EXCEPTIONAL = "Exceptional"


@dataclasses.dataclass(frozen=True, eq=False)
class TrajectoryRecord:
    state: np.ndarray
    survival_amplitude: float
    cumulative_no_detection_probability: float
    mean_energy: float
    phase: float


@dataclasses.dataclass(frozen=True, eq=False)
class Trajectory:
    """Per-step records, including the n = 0 initial state."""

    records: tuple
    n_steps: int

    def energies(self):
        return np.array([r.mean_energy for r in self.records])

    def amplitudes(self):
        return np.array([r.survival_amplitude for r in self.records])


@dataclasses.dataclass(frozen=True, eq=False)
class AsymptoticRegime:
    """Large-n classification of one (spectrum, initial state) pair."""

    kind: str
    dominant: tuple
    predicted_energy: float = None
    oscillation: dict = None


@dataclasses.dataclass(frozen=True, eq=False)
class OscillationDescriptor:
    """Two-eigenvalue oscillation data and the closed-form state family."""

    a1: complex
    a2: complex
    energies: tuple
    mean_phase: float
    relative_phase: float
    state_at: object


def _as_vector(psi):
    return np.asarray(psi.vector if hasattr(psi, "vector") else psi, dtype=complex).ravel()


def step(S, psi):
    """One conditional step: apply S, record the norm, renormalize."""
    m = S.matrix if hasattr(S, "matrix") else np.asarray(S, dtype=complex)
    raw = m @ _as_vector(psi)
    amp = float(np.linalg.norm(raw))
    if amp < CERTAIN_DETECTION_TOL:
        raise CertainDetectionError()
    return raw / amp, amp


def evolve(S, psi_in, n_steps, H):
    """Iterate the survival operator, recording energy, norm, and phase.

    The cumulative no-detection probability is accumulated in log space;
    the phase record accumulates arg <psi_{n-1}|S|psi_{n-1}>, which equals
    n arg(xi) when starting in an eigenvector.
    """
    m = S.matrix if hasattr(S, "matrix") else np.asarray(S, dtype=complex)
    h = np.asarray(H, dtype=complex)
    psi = _as_vector(psi_in)
    psi = psi / np.linalg.norm(psi)

    def energy(v):
        return float(np.real(np.vdot(v, h @ v)))

    records = [TrajectoryRecord(psi, 1.0, 1.0, energy(psi), 0.0)]
    log_p = 0.0
    phase = 0.0
    for n in range(1, n_steps + 1):
        raw = m @ psi
        amp = float(np.linalg.norm(raw))
        if amp < CERTAIN_DETECTION_TOL:
            raise CertainDetectionError(step=n)
        phase += float(np.angle(np.vdot(psi, raw)))
        psi = raw / amp
        log_p += 2.0 * math.log(amp)
        records.append(
            TrajectoryRecord(psi, amp, math.exp(log_p), energy(psi), phase)
        )
    return Trajectory(tuple(records), n_steps)


def _spectral_terms(spectrum, psi):
    """(xi, coefficient, right) for every non-zero-class triple."""
    terms = []
    for t in spectrum.triples:
        if t.kind == "zero":
            continue
        denom = np.vdot(t.left, t.right)
        coeff = np.vdot(t.left, psi) / denom
        terms.append((t.xi, coeff, t.right))
    return terms


def evolve_spectral(spectrum, psi_in, n, H):
    """State and mean energy after n steps from the eigensystem sum.

    Powers xi^n are evaluated with a shared log-modulus shift so that
    deep-disk components underflow gracefully instead of zeroing the
    whole sum.
    """
    if spectrum.exceptional_flag:
        raise ExceptionalSpectrumError("spectral evolution needs a diagonalizable S")
    psi = _as_vector(psi_in)
    psi = psi / np.linalg.norm(psi)
    h = np.asarray(H, dtype=complex)
    if n == 0:
        return psi, float(np.real(np.vdot(psi, h @ psi)))

    terms = _spectral_terms(spectrum, psi)
    logmods = [
        n * math.log(abs(xi)) if abs(xi) > 0 else -math.inf
        for xi, coeff, _ in terms
    ]
    active = [lm for lm, (_, c, _) in zip(logmods, terms) if abs(c) > 0]
    if not active:
        raise CertainDetectionError(step=1)
    shift = max(active)
    out = np.zeros(psi.size, dtype=complex)
    for lm, (xi, coeff, right) in zip(logmods, terms):
        if lm == -math.inf:
            continue
        mag = math.exp(lm - shift) if lm - shift > -745.0 else 0.0
        out += coeff * mag * np.exp(1j * n * np.angle(xi)) * right
    norm = np.linalg.norm(out)
    if norm < CERTAIN_DETECTION_TOL:
        raise CertainDetectionError(step=1)
    out = out / norm
    return out, float(np.real(np.vdot(out, h @ out)))


def _hamiltonian_of(spectrum):
    if spectrum.operator is None or spectrum.operator.source_decomp is None:
        raise InvalidParameterError(
            "spectrum carries no source decomposition; cannot recover H"
        )
    return spectrum.operator.source_decomp.hamiltonian()


def classify_regime(
    spectrum,
    psi_in,
    tie_tol=DEFAULT_TIE_TOL,
    dark_overlap_tol=DEFAULT_DARK_OVERLAP_TOL,
):
    """Classify the large-n behaviour for one initial state.

    Dark overlap is checked first: any nonzero dark component outlives
    every disk component.  Otherwise the dominant disk tie decides between
    a fixed point (single root) and persistent oscillation (tied pair or
    larger, reported with the full tie).
    """
    psi = _as_vector(psi_in)
    psi = psi / np.linalg.norm(psi)
    if spectrum.exceptional_flag:
        return AsymptoticRegime(EXCEPTIONAL, ())

    darks = spectrum.by_kind("circle")
    weights = [abs(np.vdot(t.right, psi)) ** 2 for t in darks]
    total = float(sum(weights))
    if total > dark_overlap_tol:
        energy = float(sum(w * t.energy for w, t in zip(weights, darks)) / total)
        dominant = tuple(
            t for w, t in zip(weights, darks) if w > dark_overlap_tol
        )
        return AsymptoticRegime(DARK_DOMINATED, dominant, predicted_energy=energy)

    disk = spectrum.by_kind("disk")
    if not disk:
        raise CertainDetectionError(step=1)
    max_abs = max(abs(t.xi) for t in disk)
    dominant = tuple(t for t in disk if max_abs - abs(t.xi) <= tie_tol)
    h = _hamiltonian_of(spectrum)
    if len(dominant) == 1:
        r = dominant[0].right
        energy = float(np.real(np.vdot(r, h @ r)))
        return AsymptoticRegime(FIXED_POINT, dominant, predicted_energy=energy)
    energies = tuple(
        float(np.real(np.vdot(t.right, h @ t.right))) for t in dominant
    )
    osc = {"energies": energies}
    if len(dominant) == 2:
        phi = [float(np.angle(t.xi)) for t in dominant]
        osc["relative_phase"] = 0.5 * (phi[0] - phi[1])
    return AsymptoticRegime(OSCILLATORY, dominant, oscillation=osc)


def oscillation_descriptor(regime, psi_in):
    """Closed-form large-n family for a dominant eigenvalue pair."""
    if regime.kind != OSCILLATORY or len(regime.dominant) != 2:
        raise UnsupportedMultiplicityError(
            f"oscillation descriptor needs exactly 2 dominant eigenvalues, "
            f"got {len(regime.dominant)} ({regime.kind})"
        )
    psi = _as_vector(psi_in)
    psi = psi / np.linalg.norm(psi)
    t1, t2 = regime.dominant
    a1 = np.vdot(t1.left, psi) / np.vdot(t1.left, t1.right)
    a2 = np.vdot(t2.left, psi) / np.vdot(t2.left, t2.right)
    phi1, phi2 = float(np.angle(t1.xi)), float(np.angle(t2.xi))

    def state_at(n):
        v = a1 * (t1.xi ** n) * t1.right + a2 * (t2.xi ** n) * t2.right
        return v / np.linalg.norm(v)

    return OscillationDescriptor(
        complex(a1),
        complex(a2),
        tuple(regime.oscillation["energies"]),
        0.5 * (phi1 + phi2),
        0.5 * (phi1 - phi2),
        state_at,
    )


def energy_conservation_check(trajectory, tolerance):
    """True iff the mean energy never drifts from its initial value."""
    e = trajectory.energies()
    return bool(np.max(np.abs(e - e[0])) < tolerance)


def crossover_step(
    spectrum,
    psi_in=None,
    tie_tol=DEFAULT_TIE_TOL,
    dark_overlap_tol=DEFAULT_DARK_OVERLAP_TOL,
):
    """First n at which the subdominant amplitude ratio decays below 1/100.

    The ratio is (|xi_2| / |xi_1|)^n, coefficient-free: it measures decay
    relative to the starting amplitudes.  When the initial state carries
    dark weight (or none is given and dark states exist), the dominant
    modulus is 1 and xi_2 is the largest disk root; otherwise the top two
    disk moduli outside the dominant tie are compared.
    """
    disk = sorted(spectrum.by_kind("disk"), key=lambda t: -abs(t.xi))
    darks = spectrum.by_kind("circle")
    dark_dominated = bool(darks)
    if psi_in is not None:
        psi = _as_vector(psi_in)
        psi = psi / np.linalg.norm(psi)
        total = sum(abs(np.vdot(t.right, psi)) ** 2 for t in darks)
        dark_dominated = total > dark_overlap_tol
    if dark_dominated:
        if not disk:
            return 1
        m1, m2 = 1.0, abs(disk[0].xi)
    else:
        if len(disk) < 2:
            return 1
        m1 = abs(disk[0].xi)
        rest = [abs(t.xi) for t in disk if m1 - abs(t.xi) > tie_tol]
        if not rest:
            return 1
        m2 = max(rest)
    if m2 == 0.0:
        return 1
    return max(1, math.ceil(math.log(CROSSOVER_RATIO) / math.log(m2 / m1)))
