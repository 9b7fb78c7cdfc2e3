#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.linkmodel.py

    Written by:               LEO Emulator contributors
    Date:                     04 Mar 2026, (9:20 AM)

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
import dataclasses
import logging
import math

import numpy as np

from leo_emulator.lib import tools
from leo_emulator.lib.errors import ConfigurationError, DomainError, PhyPipelineError
from leo_emulator.lib.global_settings import GlobalSettings
from leo_emulator.lib.orbit import SatelliteId, elevation_angle, propagate, satellite_name, slant_range
from leo_emulator.lib.phy.antenna import AllVisibleAntenna, MaxAntennas
from leo_emulator.lib.phy.bitrate import FixedBitrate, SlantRangeBitrate, SlantRateParams, slant_range_bitrate
from leo_emulator.lib.phy.loss import FixedLoss

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

SPEED_OF_LIGHT_KM_S = 299792.458

__all__ = [
    'LinkAttributes',
    'PhyContext',
    'PhyModels',
    'SPEED_OF_LIGHT_KM_S',
    'SlantRateParams',
    'available_phy_models',
    'grid_plus_isls',
    'link_snapshot',
    'phy_pipeline',
    'propagation_delay',
    'slant_range_bitrate',
    'visible_links',
]


@dataclasses.dataclass(frozen=True)
class LinkAttributes:
    rate_mbps: float
    delay_ms: float
    loss_fraction: float = 0.0

    def __post_init__(self):
        for field in ('rate_mbps', 'delay_ms', 'loss_fraction'):
            if not math.isfinite(getattr(self, field)):
                raise DomainError("Link {} must be finite, got {}".format(field, getattr(self, field)))
        if self.rate_mbps <= 0:
            raise DomainError("Link rate must be > 0, got {}".format(self.rate_mbps))
        if self.delay_ms < 0:
            raise DomainError("Link delay must be >= 0, got {}".format(self.delay_ms))
        if not 0.0 <= self.loss_fraction <= 1.0:
            raise DomainError("Link loss must be in [0, 1], got {}".format(self.loss_fraction))

    def quantized(self, delay_quantum_ms, rate_quantum_mbps):
        """
        Copy with delay and rate rounded to their quanta. A rate never quantizes below one quantum.
        The result equals its own serialised form read back.

        :param delay_quantum_ms:
        :param rate_quantum_mbps:
        :return:
        """
        rate = tools.quantize(self.rate_mbps, rate_quantum_mbps)
        quantized = LinkAttributes(
            rate_mbps=rate if rate > 0 else rate_quantum_mbps,
            delay_ms=tools.quantize(self.delay_ms, delay_quantum_ms),
            loss_fraction=self.loss_fraction,
        )
        return LinkAttributes.from_record(quantized.to_value())

    def to_record(self, endpoint1, endpoint2):
        return {
            "endpoint1": endpoint1,
            "endpoint2": endpoint2,
            "rate":      tools.format_rate(self.rate_mbps),
            "loss":      tools.format_loss(self.loss_fraction),
            "delay":     tools.format_delay(self.delay_ms),
        }

    def to_value(self):
        # Store representation, without endpoints
        return {
            "rate":  tools.format_rate(self.rate_mbps),
            "loss":  tools.format_loss(self.loss_fraction),
            "delay": tools.format_delay(self.delay_ms),
        }

    @classmethod
    def from_record(cls, record):
        return cls(
            rate_mbps=tools.parse_rate(record.get('rate')),
            delay_ms=tools.parse_delay(record.get('delay')),
            loss_fraction=tools.parse_loss(record.get('loss')),
        )


def propagation_delay(distance_km):
    """
    One-way propagation delay in ms over a free-space distance in km

    :param distance_km:
    :return:
    """
    if distance_km < 0:
        raise DomainError("Distance must be >= 0, got {}".format(distance_km))
    return distance_km / SPEED_OF_LIGHT_KM_S * 1000.0


def grid_plus_isls(params):
    """
    Grid+ inter-satellite links: an intra-plane ring plus links to the same slot in adjacent planes.
    Star constellations have no links across the seam between the first and last plane.
    Delta constellations wrap the last plane back to the first.

    Each link is returned once as (lower SatelliteId, higher SatelliteId) by flat id.

    :param params:
    :return:
    """
    planes = params.num_planes
    per_plane = params.sats_per_plane
    links = set()

    def add(a, b):
        ordered = sorted([a, b], key=lambda sat: sat.flat(per_plane))
        links.add((ordered[0], ordered[1]))

    for p in range(planes):
        # Rings shorter than 3 degenerate into a chain
        ring_links = per_plane if per_plane >= 3 else max(per_plane - 1, 0)
        for i in range(ring_links):
            add(SatelliteId(p, i), SatelliteId(p, (i + 1) % per_plane))

    plane_pairs = [(p, p + 1) for p in range(planes - 1)]
    if params.pattern == 'Star':
        plane_pairs = [pair for pair in plane_pairs if pair != (0, planes - 1)]
    elif planes > 2:
        plane_pairs.append((planes - 1, 0))
    for p, q in plane_pairs:
        for i in range(per_plane):
            add(SatelliteId(p, i), SatelliteId(q, i))
    return links


@dataclasses.dataclass(frozen=True, eq=False)
class PhyContext:
    endpoints: tuple
    kinds: tuple
    positions: tuple
    slant_range_km: float
    t: float
    altitude_km: float

    @property
    def is_isl(self):
        return self.kinds[0] == 'satellite' and self.kinds[1] == 'satellite'

    @property
    def ground_kind(self):
        for kind in self.kinds:
            if kind != 'satellite':
                return kind
        return None

    @classmethod
    def between(cls, endpoints, kinds, position_a, position_b, t, altitude_km):
        return cls(
            endpoints=tuple(endpoints),
            kinds=tuple(kinds),
            positions=(position_a, position_b),
            slant_range_km=float(slant_range(position_a, position_b)),
            t=t,
            altitude_km=altitude_km,
        )


def available_phy_models():
    return_models = {}
    model_libs = [
        SlantRangeBitrate,
        FixedBitrate,
        FixedLoss,
        AllVisibleAntenna,
        MaxAntennas,
    ]
    for model_class in model_libs:
        model_lib = model_class({})
        for model, details in model_lib.provides().items():
            return_models[model] = (model_class, details)
    return return_models


def plugin_name(plugin):
    return next(iter(plugin.provides()))


class PhyModels:
    """
    The physical-layer plug-ins selected by a 'phy' config block.
    """

    def __init__(self, phy_config=None):
        config = tools.deep_merge(GlobalSettings.options()['phy'], phy_config or {})
        self.isl_bitrate = self.__load_model(config['isl']['bitrate'], 'rate')
        self.isl_loss = self.__load_model(config['isl']['loss'], 'loss')
        self.access_bitrate = self.__load_model(config['access']['bitrate'], 'rate')
        self.access_loss = self.__load_model(config['access']['loss'], 'loss')
        self.antenna = self.__load_model(config['antenna'], 'antenna')

    @staticmethod
    def __load_model(model_config, attribute):
        models = available_phy_models()
        name = model_config.get('model')
        choices = sorted(model for model, (_, details) in models.items() if details['attribute'] == attribute)
        if name not in choices:
            raise ConfigurationError(
                "Unknown {} model '{}'. Available models: {}".format(attribute, name, ', '.join(choices)),
                field='model')
        model_class, _ = models[name]
        settings = {key: value for key, value in model_config.items() if key != 'model'}
        return model_class(settings)

    def for_link(self, ctx):
        if ctx.is_isl:
            return self.isl_bitrate, self.isl_loss
        return self.access_bitrate, self.access_loss


def _evaluate_plugin(plugin, ctx):
    try:
        value = float(plugin.evaluate(ctx))
    except DomainError as e:
        raise PhyPipelineError("Plug-in '{}' failed on {}: {}".format(plugin_name(plugin), ctx.endpoints, e),
                               plugin=plugin_name(plugin))
    if not math.isfinite(value):
        raise PhyPipelineError(
            "Plug-in '{}' returned a non-finite value {} for {}".format(plugin_name(plugin), value, ctx.endpoints),
            plugin=plugin_name(plugin))
    return value


def phy_pipeline(ctx, plugins):
    """
    Link attributes for one link: rate from the bitrate plug-in, delay from the
    propagation distance and loss from the loss plug-in.

    :param ctx:
    :param plugins: PhyModels
    :return:
    """
    bitrate_plugin, loss_plugin = plugins.for_link(ctx)
    rate = _evaluate_plugin(bitrate_plugin, ctx)
    if rate <= 0:
        raise PhyPipelineError("Plug-in '{}' returned a non-positive rate {}".format(plugin_name(bitrate_plugin), rate),
                               plugin=plugin_name(bitrate_plugin))
    loss = _evaluate_plugin(loss_plugin, ctx)
    if not 0.0 <= loss <= 1.0:
        raise PhyPipelineError("Plug-in '{}' returned loss {} outside [0, 1]".format(plugin_name(loss_plugin), loss),
                               plugin=plugin_name(loss_plugin))
    return LinkAttributes(rate_mbps=rate, delay_ms=propagation_delay(ctx.slant_range_km), loss_fraction=loss)


def visible_links(ground_nodes, state, t, min_elev_deg, antenna=None, positions=None):
    """
    Ground-satellite pairs with elevation >= min_elev_deg, filtered by the antenna plug-in.

    :param ground_nodes:
    :param state:
    :param t:
    :param min_elev_deg:
    :param antenna:     antenna plug-in, keeps every visible satellite when omitted
    :param positions:   precomputed ECEF positions at t
    :return:            set of (GroundNode, SatelliteId)
    """
    if antenna is None:
        antenna = AllVisibleAntenna({})
    if positions is None:
        positions = propagate(state, t)
    per_plane = state.params.sats_per_plane
    links = set()
    for ground in ground_nodes:
        elevations = np.atleast_1d(elevation_angle(positions, ground.position))
        visible = np.nonzero(elevations >= min_elev_deg)[0]
        candidates = [(int(flat), float(elevations[flat])) for flat in visible]
        for flat in antenna.select(ground, candidates):
            links.add((ground, SatelliteId.from_flat(flat, per_plane)))
    return links


def link_snapshot(state, ground_nodes, t, phy_models, min_elev_deg, isls=None):
    """
    Complete link set at time t keyed by endpoint names.

    ISLs are oriented (lower flat id, higher flat id), ground links (satellite, ground node).

    :param state:
    :param ground_nodes:
    :param t:
    :param phy_models:
    :param min_elev_deg:
    :param isls:        precomputed grid_plus_isls() result
    :return:            dict of (endpoint1, endpoint2) -> LinkAttributes
    """
    params = state.params
    per_plane = params.sats_per_plane
    positions = propagate(state, t)
    if isls is None:
        isls = grid_plus_isls(params)
    snapshot = {}
    for a, b in isls:
        flat_a = a.flat(per_plane)
        flat_b = b.flat(per_plane)
        endpoints = (satellite_name(flat_a), satellite_name(flat_b))
        ctx = PhyContext.between(endpoints, ('satellite', 'satellite'), positions[flat_a], positions[flat_b], t,
                                 params.altitude_km)
        snapshot[endpoints] = phy_pipeline(ctx, phy_models)
    for ground, sat in visible_links(ground_nodes, state, t, min_elev_deg, antenna=phy_models.antenna,
                                     positions=positions):
        flat = sat.flat(per_plane)
        endpoints = (satellite_name(flat), ground.name)
        ctx = PhyContext.between(endpoints, ('satellite', ground.kind), positions[flat], ground.position, t,
                                 params.altitude_km)
        snapshot[endpoints] = phy_pipeline(ctx, phy_models)
    logger.debug("Snapshot at t=%ss holds %s links", t, len(snapshot))
    return snapshot
