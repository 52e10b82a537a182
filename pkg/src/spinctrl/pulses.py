"""Piecewise-constant control pulses and their file formats."""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

import numpy as np

__all__ = [
    "Pulse",
    "default_initial_pulse",
    "random_restart_pulse",
    "pulse_to_json",
    "pulse_from_json",
    "pulse_to_csv",
]


@dataclass(frozen=True)
class Pulse:
    """A piecewise-constant field: ``amplitudes[m]`` held for ``dt`` each.

    ``bound`` records an amplitude box |B_m| <= bound when the pulse was
    produced under one; it is metadata here and enforced by the optimizer.
    """

    dt: float
    amplitudes: np.ndarray = field(repr=False)
    bound: float | None = None

    def __post_init__(self):
        amps = np.atleast_1d(np.asarray(self.amplitudes, dtype=np.float64))
        if amps.ndim != 1 or amps.size < 1:
            raise ValueError("amplitudes must be a non-empty 1-D sequence")
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.bound is not None:
            if not self.bound > 0:
                raise ValueError(f"bound must be positive, got {self.bound}")
            if np.max(np.abs(amps)) > self.bound * (1 + 1e-12):
                raise ValueError("amplitudes exceed the declared bound")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def steps(self) -> int:
        return len(self.amplitudes)

    @property
    def duration(self) -> float:
        return self.steps * self.dt

    def times(self) -> np.ndarray:
        """Step boundaries 0, dt, ..., duration (length steps + 1)."""
        return self.dt * np.arange(self.steps + 1)

    def with_amplitudes(self, amplitudes) -> "Pulse":
        return replace(self, amplitudes=np.asarray(amplitudes, dtype=np.float64))


def default_initial_pulse(steps: int, dt: float, coupling: float, rng) -> Pulse:
    """Seeded starting guess: 0.1 J constant plus uniform noise of 0.05 J."""
    rng = np.random.default_rng(rng)
    amps = 0.1 * coupling + rng.uniform(-0.05, 0.05, size=steps) * coupling
    return Pulse(dt=dt, amplitudes=amps)


def random_restart_pulse(steps: int, dt: float, coupling: float, rng) -> Pulse:
    """Wider random start for multi-start searches: uniform on [-0.5 J, 0.5 J]."""
    rng = np.random.default_rng(rng)
    return Pulse(dt=dt, amplitudes=rng.uniform(-0.5, 0.5, size=steps) * coupling)


def pulse_to_json(
    pulse: Pulse,
    *,
    n_spins: int,
    coupling: float,
    n_exc: int,
    provenance: dict | None = None,
) -> str:
    """Pulse file document (wire format): chain context, steps, amplitudes.

    Keys: N (chain length), J (coupling), n (excitation sector), p (step
    count), dt, amplitudes, optional bound, provenance.
    """
    doc = {
        "N": n_spins,
        "J": coupling,
        "n": n_exc,
        "p": pulse.steps,
        "dt": pulse.dt,
        "amplitudes": [float(a) for a in pulse.amplitudes],
    }
    if pulse.bound is not None:
        doc["bound"] = pulse.bound
    doc["provenance"] = provenance or {}
    return json.dumps(doc, indent=2, sort_keys=True)


def pulse_from_json(text: str) -> tuple[Pulse, dict]:
    """Parse a pulse file; returns the pulse and its chain context."""
    doc = json.loads(text)
    pulse = Pulse(
        dt=float(doc["dt"]),
        amplitudes=np.asarray(doc["amplitudes"], dtype=np.float64),
        bound=float(doc["bound"]) if "bound" in doc else None,
    )
    if pulse.steps != int(doc["p"]):
        raise ValueError("pulse file is inconsistent: p != len(amplitudes)")
    context = {
        "n_spins": int(doc["N"]),
        "coupling": float(doc["J"]),
        "n_exc": int(doc["n"]),
        "provenance": doc.get("provenance", {}),
    }
    return pulse, context


def pulse_to_csv(pulse: Pulse) -> str:
    """Amplitude-versus-time table (one row per step) for plotting."""
    lines = ["t,B"]
    for m, amp in enumerate(pulse.amplitudes):
        lines.append(f"{m * pulse.dt:.12g},{amp:.12g}")
    lines.append(f"{pulse.duration:.12g},{pulse.amplitudes[-1]:.12g}")
    return "\n".join(lines) + "\n"
