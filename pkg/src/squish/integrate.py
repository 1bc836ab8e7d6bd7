"""Explicit integrators over packed body state.

State is a flat vector of per-particle (position, velocity) pairs in
container order (inner block, then outer). The derivative re-evaluates
every force at each stage; the system is autonomous (no force depends
explicitly on time, and the drag anchor is held fixed within a step).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Optional, Sequence

import numpy as np

from .forces import DragState, accumulate_forces
from .mesh import LayeredBody

if TYPE_CHECKING:
    from .config import SimConfig


class IntegratorKind(enum.Enum):
    EULER = "euler"
    MIDPOINT = "midpoint"
    RK4 = "rk4"


@dataclass
class StageScratch:
    """Stage derivatives of one step; stages beyond the method's order
    stay None."""

    y0: np.ndarray
    k1: Optional[np.ndarray] = None
    k2: Optional[np.ndarray] = None
    k3: Optional[np.ndarray] = None
    k4: Optional[np.ndarray] = None


# Derivative-evaluation counter, used by instrumentation tests.
_eval_count = 0


def reset_eval_count() -> None:
    global _eval_count
    _eval_count = 0


def eval_count() -> int:
    return _eval_count


def pack_state(body: LayeredBody) -> np.ndarray:
    """Flatten to [p0.pos, p0.vel, p1.pos, p1.vel, ...]."""
    return np.concatenate([body.pos, body.vel], axis=1).ravel()


def unpack_state(body: LayeredBody, state: np.ndarray) -> None:
    d = body.space
    expected = body.n_particles * 2 * d
    if state.shape != (expected,):
        raise ValueError(f"state length {state.shape} != {expected}")
    s = state.reshape(body.n_particles, 2 * d)
    body.pos[:] = s[:, :d]
    body.vel[:] = s[:, d:]


def derivative(body: LayeredBody, cfg: "SimConfig",
               drag: Optional[DragState], state: np.ndarray) -> np.ndarray:
    """y' at the given state: d(position) = velocity, d(velocity) =
    force / mass after a full force accumulation."""
    global _eval_count
    _eval_count += 1
    unpack_state(body, state)
    accumulate_forces(body, cfg, drag)
    accel = body.force / body.mass[:, None]
    body.dpos[:] = body.vel
    body.dvel[:] = accel
    return np.concatenate([body.vel, accel], axis=1).ravel()


DerivativeFn = Callable[[np.ndarray], np.ndarray]


def _stages(kind: IntegratorKind, y0: np.ndarray, f: DerivativeFn, h: float
            ) -> tuple[np.ndarray, StageScratch]:
    scratch = StageScratch(y0=y0)
    k1 = f(y0)
    scratch.k1 = k1
    if kind == IntegratorKind.EULER:
        return y0 + h * k1, scratch
    if kind == IntegratorKind.MIDPOINT:
        k2 = f(y0 + h * k1)
        scratch.k2 = k2
        return y0 + h * (k1 + k2) / 2.0, scratch
    if kind == IntegratorKind.RK4:
        k2 = f(y0 + (h / 2.0) * k1)
        k3 = f(y0 + (h / 2.0) * k2)
        k4 = f(y0 + h * k3)
        scratch.k2, scratch.k3, scratch.k4 = k2, k3, k4
        return y0 + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), scratch
    raise ValueError(f"unknown integrator {kind}")


def _body_step(kind: IntegratorKind, body: LayeredBody, cfg: "SimConfig",
               drag: Optional[DragState], h: float) -> None:
    if h <= 0:
        raise ValueError("step size must be > 0")
    y0 = pack_state(body)
    f = lambda y: derivative(body, cfg, drag, y)
    with np.errstate(over="ignore", invalid="ignore"):
        y1, _ = _stages(kind, y0, f, h)
    unpack_state(body, y1)


def step_euler(body: LayeredBody, cfg: "SimConfig",
               drag: Optional[DragState], h: float) -> None:
    """y <- k0 + h*k1; exactly one derivative evaluation."""
    _body_step(IntegratorKind.EULER, body, cfg, drag, h)


def step_midpoint(body: LayeredBody, cfg: "SimConfig",
                  drag: Optional[DragState], h: float) -> None:
    """y <- k0 + h*(k1 + k2)/2 with k2 evaluated at y0 + h*k1; two
    derivative evaluations."""
    _body_step(IntegratorKind.MIDPOINT, body, cfg, drag, h)


def step_rk4(body: LayeredBody, cfg: "SimConfig",
             drag: Optional[DragState], h: float) -> None:
    """Classical fourth-order step; four derivative evaluations."""
    _body_step(IntegratorKind.RK4, body, cfg, drag, h)


def step_body(kind: IntegratorKind, body: LayeredBody, cfg: "SimConfig",
              drag: Optional[DragState], h: float) -> None:
    _body_step(kind, body, cfg, drag, h)


# -- accuracy studies ---------------------------------------------------------


@dataclass(frozen=True)
class Oscillator:
    """Damped free harmonic oscillator m x'' = -k x - c x', with a
    closed-form underdamped solution used as the convergence oracle."""

    mass: float = 1.0
    k: float = 40.0
    c: float = 0.5
    x0: float = 1.0
    v0: float = 0.0

    def __post_init__(self) -> None:
        gamma = self.c / (2.0 * self.mass)
        if gamma * gamma >= self.k / self.mass:
            raise ValueError("oscillator must be underdamped")

    def derivative(self, y: np.ndarray) -> np.ndarray:
        x, v = y
        return np.array([v, (-self.k * x - self.c * v) / self.mass])

    def exact(self, t: float) -> np.ndarray:
        gamma = self.c / (2.0 * self.mass)
        omega = math.sqrt(self.k / self.mass - gamma * gamma)
        a = self.x0
        b = (self.v0 + gamma * self.x0) / omega
        x = math.exp(-gamma * t) * (a * math.cos(omega * t) + b * math.sin(omega * t))
        v = math.exp(-gamma * t) * (
            (-gamma * a + b * omega) * math.cos(omega * t)
            + (-gamma * b - a * omega) * math.sin(omega * t)
        )
        return np.array([x, v])


@dataclass(frozen=True)
class FreeFall:
    """Constant acceleration x'' = -g; exact for second-order methods."""

    g: float = 9.8
    x0: float = 10.0
    v0: float = 0.0

    def derivative(self, y: np.ndarray) -> np.ndarray:
        return np.array([y[1], -self.g])

    def exact(self, t: float) -> np.ndarray:
        return np.array([
            self.x0 + self.v0 * t - 0.5 * self.g * t * t,
            self.v0 - self.g * t,
        ])


def integrate_system(system, kind: IntegratorKind, h: float, t_final: float) -> np.ndarray:
    """March the scalar test system to t_final with a whole number of steps."""
    n = int(round(t_final / h))
    if abs(n * h - t_final) > 1e-9 * max(1.0, t_final):
        raise ValueError("t_final must be a multiple of h")
    y = np.array([system.x0, system.v0], dtype=float)
    f = system.derivative
    for _ in range(n):
        y, _ = _stages(kind, y, f, h)
    return y


@dataclass
class AccuracyRow:
    h: float
    error: float


@dataclass
class AccuracyTable:
    kind: IntegratorKind
    rows: list[AccuracyRow]
    fitted_order: float


def order_of_accuracy(system, kind: IntegratorKind,
                      h_list: Sequence[float], t_final: float = 2.0) -> AccuracyTable:
    """Global error at fixed final time per h, with the convergence
    order fitted by least squares on log error vs log h."""
    rows = []
    exact = system.exact(t_final)
    for h in h_list:
        y = integrate_system(system, kind, h, t_final)
        rows.append(AccuracyRow(h=h, error=float(np.linalg.norm(y - exact))))
    hs = np.log([r.h for r in rows])
    errs = np.log([max(r.error, 1e-300) for r in rows])
    slope = float(np.polyfit(hs, errs, 1)[0])
    return AccuracyTable(kind=kind, rows=rows, fitted_order=slope)
