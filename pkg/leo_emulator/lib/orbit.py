#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.orbit.py

    Written by:               LEO Emulator contributors
    Date:                     03 Mar 2026, (8:40 AM)

    Copyright:
        Copyright (C) 2026 LEO Emulator contributors

        This program is free software: you can redistribute it and/or modify it under the terms of the GNU General
        Public License as published by the Free Software Foundation, version 3.

        This program is distributed in the hope that it will be useful, but WITHOUT ANY WARRANTY; without even the
        implied warranty of MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the GNU General Public License
        for more details.

        You should have received a copy of the GNU General Public License along with this program.
        If not, see <https://www.gnu.org/licenses/>.

"""
"""
Notes:
    - Circular two-body orbits over a spherical Earth. Positions are in km.
    - The ECEF frame coincides with the inertial frame at t=0 (Greenwich angle 0 at epoch zero).
    - Satellites are indexed by a flat id = plane_index * sats_per_plane + in_plane_index.
"""
import dataclasses
import math
from typing import NamedTuple, Optional

import numpy as np

from leo_emulator.lib.errors import ConfigurationError

MU_EARTH_KM3_S2 = 398600.4418
EARTH_RADIUS_KM = 6371.0
EARTH_ROTATION_RAD_S = 7.2921159e-5

walker_patterns = {
    "Star":  {
        "label":           "Walker Star (polar, counter-rotating seam)",
        "raan_spread_deg": 180.0,
    },
    "Delta": {
        "label":           "Walker Delta",
        "raan_spread_deg": 360.0,
    },
}

ground_kinds = ['gateway', 'user']


@dataclasses.dataclass(frozen=True)
class WalkerParams:
    altitude_km: float
    inclination_deg: float
    num_planes: int
    sats_per_plane: int
    phasing_factor: int = 1
    pattern: str = "Star"
    raan_spread_deg: Optional[float] = None

    def __post_init__(self):
        if not self.altitude_km > 0:
            raise ConfigurationError("altitude_km must be > 0, got {}".format(self.altitude_km), field='altitude_km')
        if not 0 < self.inclination_deg <= 180:
            raise ConfigurationError("inclination_deg must be in (0, 180], got {}".format(self.inclination_deg),
                                     field='inclination_deg')
        if int(self.num_planes) != self.num_planes or self.num_planes < 1:
            raise ConfigurationError("num_planes must be an integer >= 1, got {}".format(self.num_planes),
                                     field='num_planes')
        if int(self.sats_per_plane) != self.sats_per_plane or self.sats_per_plane < 1:
            raise ConfigurationError("sats_per_plane must be an integer >= 1, got {}".format(self.sats_per_plane),
                                     field='sats_per_plane')
        if int(self.phasing_factor) != self.phasing_factor or not 0 <= self.phasing_factor < self.num_planes:
            raise ConfigurationError(
                "phasing_factor must be an integer in [0, {}), got {}".format(self.num_planes, self.phasing_factor),
                field='phasing_factor')
        # Accept any capitalisation of the pattern name
        pattern = str(self.pattern).capitalize()
        if pattern not in walker_patterns:
            raise ConfigurationError("pattern must be one of {}, got '{}'".format(list(walker_patterns), self.pattern),
                                     field='pattern')
        object.__setattr__(self, 'pattern', pattern)
        if self.raan_spread_deg is None:
            object.__setattr__(self, 'raan_spread_deg', walker_patterns[pattern]['raan_spread_deg'])
        elif not 0 < self.raan_spread_deg <= 360:
            raise ConfigurationError("raan_spread_deg must be in (0, 360], got {}".format(self.raan_spread_deg),
                                     field='raan_spread_deg')

    @classmethod
    def from_config(cls, config):
        fields = {f.name for f in dataclasses.fields(cls)}
        for key in config:
            if key not in fields:
                raise ConfigurationError("Unknown constellation field '{}'".format(key), field=key)
        return cls(**config)

    @property
    def num_satellites(self):
        return self.num_planes * self.sats_per_plane

    @property
    def orbit_radius_km(self):
        return EARTH_RADIUS_KM + self.altitude_km

    @property
    def mean_motion_rad_s(self):
        return math.sqrt(MU_EARTH_KM3_S2 / self.orbit_radius_km ** 3)

    @property
    def period_s(self):
        return 2.0 * math.pi / self.mean_motion_rad_s


class SatelliteId(NamedTuple):
    plane_index: int
    in_plane_index: int

    def flat(self, sats_per_plane):
        return self.plane_index * sats_per_plane + self.in_plane_index

    @classmethod
    def from_flat(cls, flat, sats_per_plane):
        return cls(int(flat) // sats_per_plane, int(flat) % sats_per_plane)


def satellite_name(flat):
    return "sat{}".format(int(flat) + 1)


def satellite_flat(name):
    """
    Inverse of satellite_name(). Returns None for names that are not satellites.

    :param name:
    :return:
    """
    if not name.startswith('sat') or not name[3:].isdigit():
        return None
    return int(name[3:]) - 1


def satellite_sort_key(name):
    """
    Order satellites by flat id, other names after them alphabetically
    """
    flat = satellite_flat(name)
    return (0, flat, '') if flat is not None else (1, 0, name)


def ground_position(latitude_deg, longitude_deg):
    """
    ECEF position of a point on the spherical Earth surface (geocentric latitude)

    :param latitude_deg:
    :param longitude_deg:
    :return:
    """
    lat = math.radians(latitude_deg)
    lon = math.radians(longitude_deg)
    return np.array([
        EARTH_RADIUS_KM * math.cos(lat) * math.cos(lon),
        EARTH_RADIUS_KM * math.cos(lat) * math.sin(lon),
        EARTH_RADIUS_KM * math.sin(lat),
    ])


@dataclasses.dataclass(frozen=True)
class GroundNode:
    name: str
    kind: str
    latitude_deg: float
    longitude_deg: float
    max_antennas: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ground_kinds:
            raise ConfigurationError("Ground node '{}' kind must be one of {}".format(self.name, ground_kinds),
                                     field='kind')
        if not -90 <= self.latitude_deg <= 90:
            raise ConfigurationError("Ground node '{}' latitude out of range".format(self.name), field='latitude_deg')
        if not -180 <= self.longitude_deg <= 180:
            raise ConfigurationError("Ground node '{}' longitude out of range".format(self.name),
                                     field='longitude_deg')
        if self.max_antennas is None:
            object.__setattr__(self, 'max_antennas', 1 if self.kind == 'user' else 4)
        if self.kind == 'user' and self.max_antennas != 1:
            raise ConfigurationError("User '{}' must have exactly one antenna".format(self.name),
                                     field='max_antennas')
        if self.max_antennas < 1:
            raise ConfigurationError("Gateway '{}' needs at least one antenna".format(self.name),
                                     field='max_antennas')

    @classmethod
    def from_config(cls, config):
        return cls(
            name=config['name'],
            kind=config.get('kind', 'user'),
            latitude_deg=float(config['latitude_deg']),
            longitude_deg=float(config['longitude_deg']),
            max_antennas=config.get('max_antennas'),
        )

    @property
    def position(self):
        return ground_position(self.latitude_deg, self.longitude_deg)


@dataclasses.dataclass(frozen=True, eq=False)
class ConstellationState:
    params: WalkerParams
    raan_rad: np.ndarray
    mean_anomaly_rad: np.ndarray
    # A disabled propagation freezes every satellite at its t=0 ECEF position (test double)
    propagation_enabled: bool = True

    @property
    def num_satellites(self):
        return len(self.raan_rad)

    def satellite_ids(self):
        return [SatelliteId.from_flat(flat, self.params.sats_per_plane) for flat in range(self.num_satellites)]


def generate_walker(params):
    """
    Generate the satellites of a Walker constellation.

    Plane p has RAAN p * raan_spread / P. In-plane satellites are spaced 360/S degrees of mean anomaly
    and adjacent planes are offset by phasing_factor * 360 / (P * S) degrees.

    :param params:
    :return:
    """
    planes = params.num_planes
    per_plane = params.sats_per_plane
    plane_index = np.repeat(np.arange(planes), per_plane)
    in_plane_index = np.tile(np.arange(per_plane), planes)
    raan_deg = plane_index * params.raan_spread_deg / planes
    anomaly_deg = in_plane_index * 360.0 / per_plane + plane_index * params.phasing_factor * 360.0 / (planes * per_plane)
    return ConstellationState(
        params=params,
        raan_rad=np.radians(np.mod(raan_deg, 360.0)),
        mean_anomaly_rad=np.radians(np.mod(anomaly_deg, 360.0)),
    )


def _orbit_positions(raan, inclination, argument_of_latitude, radius):
    # Circular orbit: position from RAAN, inclination and argument of latitude
    cos_raan = np.cos(raan)
    sin_raan = np.sin(raan)
    cos_u = np.cos(argument_of_latitude)
    sin_u = np.sin(argument_of_latitude)
    cos_i = math.cos(inclination)
    sin_i = math.sin(inclination)
    x = radius * (cos_raan * cos_u - sin_raan * sin_u * cos_i)
    y = radius * (sin_raan * cos_u + cos_raan * sin_u * cos_i)
    z = radius * (sin_u * sin_i)
    return np.stack([x, y, z], axis=-1)


def _to_ecef(positions, times):
    theta = EARTH_ROTATION_RAD_S * np.asarray(times, dtype=float)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    x = cos_t * positions[..., 0] + sin_t * positions[..., 1]
    y = -sin_t * positions[..., 0] + cos_t * positions[..., 1]
    return np.stack([x, y, positions[..., 2]], axis=-1)


def propagate(state, t, frame='ecef'):
    """
    Satellite positions at time t (seconds since epoch zero).

    Returns an array of shape (num_satellites, 3) indexed by flat satellite id.
    The inertial frame is available through frame='eci'.

    :param state:
    :param t:
    :param frame:
    :return:
    """
    if t < 0:
        raise ValueError("Propagation time must be >= 0, got {}".format(t))
    if not state.propagation_enabled:
        t = 0.0
    params = state.params
    argument_of_latitude = state.mean_anomaly_rad + params.mean_motion_rad_s * t
    positions = _orbit_positions(state.raan_rad, math.radians(params.inclination_deg), argument_of_latitude,
                                 params.orbit_radius_km)
    if frame == 'eci':
        return positions
    return _to_ecef(positions, t)


def satellite_track(state, flat, times):
    """
    ECEF positions of one satellite at several times, shape (len(times), 3)

    :param state:
    :param flat:
    :param times:
    :return:
    """
    times = np.asarray(times, dtype=float)
    if not state.propagation_enabled:
        times = np.zeros_like(times)
    params = state.params
    argument_of_latitude = state.mean_anomaly_rad[flat] + params.mean_motion_rad_s * times
    positions = _orbit_positions(state.raan_rad[flat], math.radians(params.inclination_deg), argument_of_latitude,
                                 params.orbit_radius_km)
    return _to_ecef(positions, times)


def slant_range(sat, ground):
    """
    Line-of-sight distance in km. Vectorised over the leading axes of either argument.

    :param sat:
    :param ground:
    :return:
    """
    return np.linalg.norm(np.asarray(sat, dtype=float) - np.asarray(ground, dtype=float), axis=-1)


def elevation_angle(sat, ground):
    """
    Angle in degrees between the local horizon plane at ground and the line of sight to sat.
    Vectorised over the leading axes of sat.

    :param sat:
    :param ground:
    :return:
    """
    sat = np.asarray(sat, dtype=float)
    ground = np.asarray(ground, dtype=float)
    up = ground / np.linalg.norm(ground)
    line_of_sight = sat - ground
    distance = np.linalg.norm(line_of_sight, axis=-1)
    with np.errstate(invalid='ignore', divide='ignore'):
        sin_elevation = np.where(distance > 0, (line_of_sight @ up) / np.where(distance > 0, distance, 1.0), 1.0)
    elevation = np.degrees(np.arcsin(np.clip(sin_elevation, -1.0, 1.0)))
    if elevation.ndim == 0:
        return float(elevation)
    return elevation


def slant_range_at_elevation(altitude_km, elevation_deg):
    """
    Closed form slant range for a satellite at shell altitude seen at a given elevation

    :param altitude_km:
    :param elevation_deg:
    :return:
    """
    elevation = math.radians(elevation_deg)
    radius = EARTH_RADIUS_KM + altitude_km
    return math.sqrt(radius ** 2 - (EARTH_RADIUS_KM * math.cos(elevation)) ** 2) - EARTH_RADIUS_KM * math.sin(
        elevation)


def remaining_visibility(state, sat, ground, t, min_elev_deg, scan_step, horizon_s=None):
    """
    Remaining visibility time of a satellite from a ground node, quantized to scan_step.

    Scans forward from t at scan_step and returns the largest multiple of scan_step for which every
    sampled elevation is >= min_elev_deg. Returns 0 if the satellite is not visible at t. A satellite that
    never drops below the threshold within the scan horizon (one orbital period by default) gets the
    horizon, quantized to scan_step, so the result is always finite.

    :param state:
    :param sat:         SatelliteId or flat id
    :param ground:      GroundNode
    :param t:
    :param min_elev_deg:
    :param scan_step:
    :param horizon_s:
    :return:
    """
    if scan_step <= 0:
        raise ValueError("scan_step must be > 0")
    flat = sat.flat(state.params.sats_per_plane) if isinstance(sat, SatelliteId) else int(sat)
    ground_pos = ground.position
    if elevation_angle(satellite_track(state, flat, [t])[0], ground_pos) < min_elev_deg:
        return 0.0
    if horizon_s is None:
        horizon_s = state.params.period_s
    steps = max(1, int(math.floor(horizon_s / scan_step)))
    times = t + scan_step * np.arange(1, steps + 1)
    elevations = elevation_angle(satellite_track(state, flat, times), ground_pos)
    below = np.nonzero(elevations < min_elev_deg)[0]
    if below.size == 0:
        return float(steps) * scan_step
    return float(below[0]) * scan_step
