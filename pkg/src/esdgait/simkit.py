"""Synthetic electrostatic gait signals from a capacitive-coupling model.

The body couples to ground through per-foot capacitances C_f1/C_f2 and to
nearby objects through C_r terms; the sensed electrode current is
proportional to C_plant times the time derivative of the total reciprocal
body capacitance, scaled by eps*S over the radial distance to the
electrode. Footfalls modulate the foot capacitances, so each ground
contact produces a negative current spike and each detach a positive one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Union

import numpy as np

from .errors import (
    BoundaryError,
    ConfigurationError,
    DomainError,
    SingularityError,
    ValidationError,
)

SAMPLE_RATE = 10_000  # Hz, fixed for the whole feature pipeline

# order-of-magnitude defaults; absolute scale is arbitrary because records
# are standardized before feature extraction
DEFAULT_C_PLANT = 100e-12  # farads
EPSILON_AIR = 8.854e-12  # farads/meter

# a capacitance trajectory is a constant or a vectorized function of time
CapFn = Union[float, Callable[[np.ndarray], np.ndarray]]


def _eval_fn(fn: CapFn, t: np.ndarray) -> np.ndarray:
    if callable(fn):
        return np.asarray(fn(t), dtype=float)
    return np.full_like(np.asarray(t, dtype=float), float(fn))


@dataclass(frozen=True)
class CapacitanceModel:
    """Capacitive couplings of the body: feet to ground, room objects, plant electrode.

    c_f1/c_f2/c_room entries are farads, either constants or vectorized
    functions of time. domain, when set, bounds the times at which the
    model may be evaluated (used by the finite-difference stencil check).
    """

    c_f1: CapFn
    c_f2: CapFn
    c_room: tuple[CapFn, ...] = ()
    c_plant: float = DEFAULT_C_PLANT
    domain: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if self.c_plant <= 0:
            raise DomainError(f"c_plant must be positive, got {self.c_plant}")


@dataclass(frozen=True)
class ElectrodeModel:
    epsilon: float = EPSILON_AIR  # permittivity of air, F/m
    area_s: float = 1.0  # equivalent body-electrode area, m^2

    def __post_init__(self) -> None:
        if self.epsilon <= 0 or self.area_s <= 0:
            raise ValidationError("epsilon and area_s must be positive")


@dataclass(frozen=True)
class Trajectory:
    """Horizontal and vertical distance to the plant electrode, meters as functions of time."""

    x_of_t: CapFn
    y_of_t: CapFn

    def radial_distance(self, t: np.ndarray) -> np.ndarray:
        x = _eval_fn(self.x_of_t, t)
        y = _eval_fn(self.y_of_t, t)
        return np.hypot(x, y)


@dataclass(frozen=True)
class GaitProfile:
    """Walking-style parameters of one person.

    The charge-sign fields fix the contact-electricity polarity convention
    (negative spike on foot-ground contact, positive on detach); their
    common magnitude scales the modulation depth.
    """

    step_frequency: float  # Hz, steps of either foot
    walking_speed: float  # m/s
    vertical_amplitude: float = 1.0  # dimensionless body-motion modulation scale
    duty_cycle: float = 0.6  # fraction of a foot's cycle spent on the ground
    contact_charge_sign: float = -1.0
    detach_charge_sign: float = 1.0

    def __post_init__(self) -> None:
        if not 0 < self.step_frequency <= 10:
            raise ValidationError(
                f"step_frequency must be in (0, 10] Hz, got {self.step_frequency}"
            )
        if not 0 < self.duty_cycle < 1:
            raise ValidationError(f"duty_cycle must be in (0, 1), got {self.duty_cycle}")
        if self.walking_speed <= 0:
            raise ValidationError("walking_speed must be positive")
        if self.vertical_amplitude < 0:
            raise ValidationError("vertical_amplitude must be non-negative")
        if not (self.contact_charge_sign < 0 < self.detach_charge_sign):
            raise ValidationError(
                "contact_charge_sign must be negative and detach_charge_sign positive"
            )
        if not math.isclose(-self.contact_charge_sign, self.detach_charge_sign):
            raise ValidationError(
                "charge sign magnitudes must match; the foot returns to the same plateau"
            )


@dataclass(frozen=True)
class MoodProfile:
    label: str  # "happy" | "sad"
    speed_factor: float
    amplitude_factor: float
    step_frequency_factor: float = 1.0

    def __post_init__(self) -> None:
        if self.label not in ("happy", "sad"):
            raise ValidationError(f"mood label must be happy or sad, got {self.label!r}")
        if self.label == "sad" and not (self.speed_factor < 1 and self.amplitude_factor < 1):
            raise ValidationError("sad mood requires speed_factor < 1 and amplitude_factor < 1")
        if self.label == "happy" and not (self.speed_factor >= 1 and self.amplitude_factor >= 1):
            raise ValidationError("happy mood requires speed_factor >= 1 and amplitude_factor >= 1")
        if self.step_frequency_factor <= 0:
            raise ValidationError("step_frequency_factor must be positive")


@dataclass(frozen=True)
class FootstepShape:
    """Plateau capacitances of one foot and the edge rise time of a step.

    The magnitudes are not asserted anywhere; they only set the (arbitrary)
    output scale. c_contact == c_air gives a degenerate, modulation-free model.
    """

    c_contact: float = 200e-12  # foot on ground, farads
    c_air: float = 50e-12  # foot in swing, farads
    rise_time: float = 0.05  # raised-cosine edge width, seconds

    def __post_init__(self) -> None:
        if self.c_contact <= 0 or self.c_air <= 0:
            raise DomainError("plateau capacitances must be positive")
        if self.rise_time <= 0:
            raise ValidationError("rise_time must be positive")


@dataclass
class SignalRecord:
    samples: np.ndarray  # amperes, arbitrary linear scale
    sample_rate: int
    labels: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.samples = np.asarray(self.samples, dtype=float)
        if self.samples.size == 0:
            raise ValidationError("record has no samples")
        if not np.all(np.isfinite(self.samples)):
            raise ValidationError("record contains non-finite samples")
        if self.sample_rate <= 0:
            raise ValidationError("sample_rate must be positive")


def reciprocal_body_capacitance(model: CapacitanceModel, t) -> np.ndarray | float:
    """Total 1/C_B(t) = 1/C_f1 + 1/C_f2 + sum_i 1/C_r_i, in 1/farads."""
    t_in = np.asarray(t, dtype=float)
    t_arr = np.atleast_1d(t_in)
    total = np.zeros_like(t_arr)
    terms = [("c_f1", model.c_f1), ("c_f2", model.c_f2)]
    terms += [(f"c_room[{i}]", c) for i, c in enumerate(model.c_room)]
    for name, fn in terms:
        c = np.atleast_1d(_eval_fn(fn, t_arr))
        if np.any(c <= 0):
            t_bad = t_arr[c <= 0][0]
            raise DomainError(f"{name} is non-positive at t={t_bad}")
        total = total + 1.0 / c
    return total if t_in.ndim else float(total[0])


def foot_motion_current(
    model: CapacitanceModel, t, k_prop: float = 1.0, h: float = 1.0 / SAMPLE_RATE
) -> np.ndarray | float:
    """k_prop * C_plant * d/dt[1/C_B] by central finite difference with step h."""
    if h <= 0:
        raise ValidationError("finite-difference step h must be positive")
    t_arr = np.asarray(t, dtype=float)
    if model.domain is not None:
        lo, hi = model.domain
        if np.any(t_arr - h < lo) or np.any(t_arr + h > hi):
            raise BoundaryError(
                f"central difference at t={t} with h={h} leaves domain [{lo}, {hi}]"
            )
    fwd = reciprocal_body_capacitance(model, t_arr + h)
    bwd = reciprocal_body_capacitance(model, t_arr - h)
    out = k_prop * model.c_plant * (np.asarray(fwd) - np.asarray(bwd)) / (2.0 * h)
    return out if t_arr.ndim else float(out)


def induced_current(traj: Trajectory, electrode: ElectrodeModel, foot_current, t) -> np.ndarray | float:
    """eps*S / r(t) * I(t) with r the radial distance to the electrode."""
    t_arr = np.asarray(t, dtype=float)
    r = traj.radial_distance(t_arr)
    if np.any(r <= 0):
        raise SingularityError("radial distance to the electrode reached zero")
    cur = electrode.epsilon * electrode.area_s / r * np.asarray(foot_current(t_arr), dtype=float)
    return cur if t_arr.ndim else float(cur)


def _foot_pulse(t: np.ndarray, period: float, contact_len: float, rise: float, offset: float) -> np.ndarray:
    """Airborne fraction of one foot: 1 in swing, 0 in ground contact.

    Raised-cosine edges of width `rise` centered on the contact instant
    (phase 0) and the detach instant (phase contact_len).
    """
    phase = np.mod(t - offset, period)
    g = np.ones_like(phase)
    half = rise / 2.0
    plateau = (phase >= half) & (phase <= contact_len - half)
    g[plateau] = 0.0
    # contact edge straddles phase 0: 1 -> 0
    tail = phase >= period - half
    u = (phase[tail] - (period - half)) / rise
    g[tail] = 0.5 * (1.0 + np.cos(np.pi * u))
    head = phase < half
    u = 0.5 + phase[head] / rise
    g[head] = 0.5 * (1.0 + np.cos(np.pi * u))
    # detach edge: 0 -> 1
    up = (phase >= contact_len - half) & (phase < contact_len + half)
    u = (phase[up] - (contact_len - half)) / rise
    g[up] = 0.5 * (1.0 - np.cos(np.pi * u))
    return g


def _grid(duration: float) -> np.ndarray:
    n = int(round(duration * SAMPLE_RATE))
    if n < 3:
        raise ValidationError(f"duration {duration} s is too short at {SAMPLE_RATE} Hz")
    return np.arange(n) / SAMPLE_RATE


def _differentiate_and_project(
    inv_cb: np.ndarray,
    t: np.ndarray,
    capmodel: CapacitanceModel,
    electrode: ElectrodeModel,
    r: np.ndarray,
    k_prop: float,
) -> np.ndarray:
    """Central difference on the sample grid; boundary samples are dropped."""
    h = 1.0 / SAMPLE_RATE
    d_inv = (inv_cb[2:] - inv_cb[:-2]) / (2.0 * h)
    foot_cur = k_prop * capmodel.c_plant * d_inv
    if np.any(r <= 0):
        raise SingularityError("radial distance to the electrode reached zero")
    return electrode.epsilon * electrode.area_s / r[1:-1] * foot_cur


def synth_walk(
    gait: GaitProfile,
    mood: MoodProfile | None,
    traj: Trajectory,
    capmodel: CapacitanceModel,
    electrode: ElectrodeModel,
    duration: float,
    noise_std: float = 0.0,
    seed: int = 0,
    *,
    k_prop: float = 1.0,
    footstep: FootstepShape = FootstepShape(),
    schedule_phase: float = 0.0,
    labels: dict | None = None,
) -> SignalRecord:
    """Simulate the electrode current of one walk at 10 kHz.

    The feet alternate: each foot runs a cycle of 2/step_frequency shifted
    by half a cycle, its 1/C_f swinging between the contact and airborne
    plateaus of `footstep`, so ground contacts arrive at the mood-adjusted
    step frequency. c_f1/c_f2 of `capmodel` are replaced by this schedule;
    its c_room and c_plant are used as given. The record is two samples
    shorter than duration*rate because the boundary samples of the central
    difference are dropped. Deterministic given seed.
    """
    if duration <= 0:
        raise ValidationError("duration must be positive")
    if noise_std < 0:
        raise ValidationError("noise_std must be non-negative")
    f_step = gait.step_frequency * (mood.step_frequency_factor if mood else 1.0)
    depth = gait.vertical_amplitude * (mood.amplitude_factor if mood else 1.0)
    depth *= abs(gait.contact_charge_sign)
    period = 2.0 / f_step  # one full cycle of a single foot
    contact_len = gait.duty_cycle * period
    if footstep.rise_time >= contact_len or footstep.rise_time >= period - contact_len:
        raise ConfigurationError(
            "rise_time must be shorter than both the contact and airborne phases"
        )
    t = _grid(duration)
    inv_contact = 1.0 / footstep.c_contact
    inv_air = 1.0 / footstep.c_air
    swing = inv_air - inv_contact
    g1 = _foot_pulse(t, period, contact_len, footstep.rise_time, schedule_phase)
    g2 = _foot_pulse(t, period, contact_len, footstep.rise_time, schedule_phase + period / 2.0)
    inv1 = inv_contact + depth * swing * g1
    inv2 = inv_contact + depth * swing * g2
    if np.any(inv1 <= 0) or np.any(inv2 <= 0):
        raise DomainError("foot capacitance schedule left the positive range")
    inv_cb = inv1 + inv2
    for i, c in enumerate(capmodel.c_room):
        cv = _eval_fn(c, t)
        if np.any(cv <= 0):
            raise DomainError(f"c_room[{i}] is non-positive on the grid")
        inv_cb = inv_cb + 1.0 / cv
    samples = _differentiate_and_project(
        inv_cb, t, capmodel, electrode, traj.radial_distance(t), k_prop
    )
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        samples = samples + rng.normal(0.0, noise_std, samples.shape)
    rec_labels = {
        "person_id": "unknown",
        "mood": mood.label if mood else "neutral",
        "plant_type": "unknown",
        "location": "unknown",
        "activity": "walk",
    }
    if labels:
        rec_labels.update(labels)
    return SignalRecord(samples=samples, sample_rate=SAMPLE_RATE, labels=rec_labels)


def synth_legshake(
    shake_frequency: float,
    duration: float,
    onset: float,
    capmodel: CapacitanceModel,
    electrode: ElectrodeModel,
    noise_std: float = 0.0,
    seed: int = 0,
    *,
    k_prop: float = 1.0,
    footstep: FootstepShape = FootstepShape(),
    distance_m: float = 1.0,
    labels: dict | None = None,
) -> SignalRecord:
    """Simulate a seated subject shaking one leg from `onset` onward.

    The subject is stationary, so the distance term is the constant
    eps*S/distance_m; only 1/C_B is modulated. The shaking foot's 1/C_f
    swings sinusoidally between the plateaus of `footstep` at
    shake_frequency, starting smoothly (zero slope) at onset. A footstep
    shape with c_contact == c_air gives zero modulation: noise only.
    """
    if not 0 <= onset < duration:
        raise ValidationError(f"onset must satisfy 0 <= onset < duration, got {onset}")
    if not 3.0 <= shake_frequency <= 10.0:
        raise ValidationError(f"shake_frequency must be in [3, 10] Hz, got {shake_frequency}")
    if noise_std < 0:
        raise ValidationError("noise_std must be non-negative")
    if distance_m <= 0:
        raise SingularityError("distance_m must be positive")
    t = _grid(duration)
    inv_contact = 1.0 / footstep.c_contact
    inv_air = 1.0 / footstep.c_air
    swing = inv_air - inv_contact
    shaking = t >= onset
    mod = np.zeros_like(t)
    mod[shaking] = 0.5 * (1.0 - np.cos(2.0 * np.pi * shake_frequency * (t[shaking] - onset)))
    inv1 = inv_contact + swing * mod
    inv2 = np.full_like(t, inv_contact)
    if np.any(inv1 <= 0):
        raise DomainError("foot capacitance schedule left the positive range")
    inv_cb = inv1 + inv2
    for i, c in enumerate(capmodel.c_room):
        cv = _eval_fn(c, t)
        if np.any(cv <= 0):
            raise DomainError(f"c_room[{i}] is non-positive on the grid")
        inv_cb = inv_cb + 1.0 / cv
    r = np.full_like(t, distance_m)
    samples = _differentiate_and_project(inv_cb, t, capmodel, electrode, r, k_prop)
    if noise_std > 0:
        rng = np.random.default_rng(seed)
        samples = samples + rng.normal(0.0, noise_std, samples.shape)
    rec_labels = {
        "person_id": "unknown",
        "mood": "neutral",
        "plant_type": "unknown",
        "location": "unknown",
        "activity": "legshake",
    }
    if labels:
        rec_labels.update(labels)
    return SignalRecord(samples=samples, sample_rate=SAMPLE_RATE, labels=rec_labels)


def straight_walk(
    gait: GaitProfile,
    mood: MoodProfile | None,
    start_distance: float,
    end_distance: float,
    lateral: float = 0.5,
) -> tuple[Trajectory, float]:
    """Constant-speed straight-line walk between two electrode distances.

    Returns the trajectory and the walk duration path/(speed*speed_factor):
    a faster (happier) walker covers the same path in less time, yielding a
    shorter record.
    """
    if start_distance <= 0 or end_distance <= 0:
        raise ValidationError("distances must be positive")
    if start_distance == end_distance:
        raise ValidationError("start and end distance must differ")
    speed = gait.walking_speed * (mood.speed_factor if mood else 1.0)
    duration = abs(end_distance - start_distance) / speed
    direction = 1.0 if end_distance > start_distance else -1.0

    def x_of_t(t: np.ndarray) -> np.ndarray:
        return start_distance + direction * speed * np.asarray(t, dtype=float)

    return Trajectory(x_of_t=x_of_t, y_of_t=lateral), duration
