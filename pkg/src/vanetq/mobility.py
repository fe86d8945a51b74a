"""Vehicle trajectories on the tile, geometry queries, and sojourn-time state."""

import math
from dataclasses import dataclass, field


class VehicleDeparted(Exception):
    """Position queried after the vehicle reached its exit point."""


@dataclass(frozen=True)
class Tile:
    width: float = 300.0
    height: float = 100.0

    @property
    def rsu_position(self):
        return (self.width / 2.0, self.height / 2.0)


@dataclass(frozen=True)
class Kinematics:
    position: tuple
    velocity: tuple
    distance_to_rsu: float
    speed: float


@dataclass
class Trajectory:
    """Straight entry->exit segment with a trapezoidal speed profile.

    Accelerate from rest, cruise, decelerate to rest at the exit point. If the
    segment is too short for a full trapezoid the profile degenerates to a
    triangle with a reduced peak speed.
    """

    entry_point: tuple
    exit_point: tuple
    entry_time: float
    cruise_speed: float
    acceleration: float = 2.6
    deceleration: float = 4.5

    length: float = field(init=False)
    peak_speed: float = field(init=False)
    t_accel: float = field(init=False)
    t_cruise: float = field(init=False)
    t_decel: float = field(init=False)

    def __post_init__(self):
        if self.entry_point == self.exit_point:
            raise ValueError("entry and exit points must differ")
        if not 0.0 < self.cruise_speed <= 17.0:
            raise ValueError(f"cruise speed {self.cruise_speed} outside (0, 17]")
        dx = self.exit_point[0] - self.entry_point[0]
        dy = self.exit_point[1] - self.entry_point[1]
        self.length = math.hypot(dx, dy)
        a, d, v = self.acceleration, self.deceleration, self.cruise_speed
        d_ramp = v * v / (2 * a) + v * v / (2 * d)
        if d_ramp <= self.length:
            self.peak_speed = v
            self.t_cruise = (self.length - d_ramp) / v
        else:
            self.peak_speed = math.sqrt(2 * self.length * a * d / (a + d))
            self.t_cruise = 0.0
        self.t_accel = self.peak_speed / a
        self.t_decel = self.peak_speed / d

    @property
    def duration(self) -> float:
        return self.t_accel + self.t_cruise + self.t_decel

    @property
    def exit_time(self) -> float:
        return self.entry_time + self.duration

    def _direction(self):
        dx = self.exit_point[0] - self.entry_point[0]
        dy = self.exit_point[1] - self.entry_point[1]
        return (dx / self.length, dy / self.length)

    def profile_at(self, tau: float):
        """(distance travelled, scalar speed) at `tau` seconds after entry."""
        a, d = self.acceleration, self.deceleration
        vp = self.peak_speed
        if tau <= self.t_accel:
            return 0.5 * a * tau * tau, a * tau
        s = 0.5 * a * self.t_accel**2
        tau -= self.t_accel
        if tau <= self.t_cruise:
            return s + vp * tau, vp
        s += vp * self.t_cruise
        tau -= self.t_cruise
        tau = min(tau, self.t_decel)
        return s + vp * tau - 0.5 * d * tau * tau, vp - d * tau


def position_at(trajectory: Trajectory, t: float, tile: Tile) -> Kinematics:
    tau = t - trajectory.entry_time
    if tau < 0:
        raise ValueError(f"query at t={t} before entry_time={trajectory.entry_time}")
    if tau > trajectory.duration + 1e-9:
        raise VehicleDeparted(f"vehicle left the tile at t={trajectory.exit_time}")
    s, speed = trajectory.profile_at(tau)
    ux, uy = trajectory._direction()
    px = trajectory.entry_point[0] + ux * s
    py = trajectory.entry_point[1] + uy * s
    rx, ry = tile.rsu_position
    return Kinematics(
        position=(px, py),
        velocity=(ux * speed, uy * speed),
        distance_to_rsu=math.hypot(px - rx, py - ry),
        speed=speed,
    )


def sojourn_time(k: Kinematics, coverage_diameter: float = 200.0,
                 rsu_position=(150.0, 50.0), stationary_cap: float = 20.0) -> float:
    """Predicted remaining seconds inside the coverage circle.

    Moving away from the RSU yields 0. A stationary vehicle inside coverage
    stays indefinitely, so it gets the cap value; outside coverage it gets 0.
    The "toward" test is the sign of the radial velocity component.
    """
    radius = coverage_diameter / 2.0
    d = k.distance_to_rsu
    if k.speed == 0.0:
        return stationary_cap if d <= radius else 0.0
    to_rsu_x = rsu_position[0] - k.position[0]
    to_rsu_y = rsu_position[1] - k.position[1]
    radial = k.velocity[0] * to_rsu_x + k.velocity[1] * to_rsu_y
    if radial <= 0.0:
        return 0.0
    return max(0.0, (radius - d) / k.speed)


#: Upper edges of the first four discrete sojourn ranges, in seconds.
SOJOURN_EDGES = (2.9, 5.6, 8.4, 11.2)


def sojourn_bucket(sj: float) -> int:
    if sj < 0:
        raise ValueError(f"sojourn time must be non-negative, got {sj}")
    for bucket, edge in enumerate(SOJOURN_EDGES):
        if sj <= edge:
            return bucket
    return 4


_EDGES = ("south", "east", "north", "west")


def _point_on_edge(edge: int, u: float, tile: Tile):
    if edge == 0:
        return (u * tile.width, 0.0)
    if edge == 1:
        return (tile.width, u * tile.height)
    if edge == 2:
        return (u * tile.width, tile.height)
    return (0.0, u * tile.height)


def random_trajectory(rng, tile: Tile, entry_time: float,
                      speed_min: float = 8.0, speed_max: float = 17.0) -> Trajectory:
    """Entry and exit drawn uniformly on two distinct tile edges."""
    entry_edge = rng.randrange(4)
    exit_edge = (entry_edge + 1 + rng.randrange(3)) % 4
    entry = _point_on_edge(entry_edge, rng.random(), tile)
    exit_ = _point_on_edge(exit_edge, rng.random(), tile)
    if entry == exit_:  # corner coincidence, vanishingly rare
        exit_ = _point_on_edge(exit_edge, 0.5, tile)
    cruise = rng.uniform(speed_min, speed_max)
    return Trajectory(entry, exit_, entry_time, cruise)
