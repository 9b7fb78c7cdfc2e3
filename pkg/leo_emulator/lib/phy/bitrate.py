#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.phy.bitrate.py

    Written by:               LEO Emulator contributors
    Date:                     04 Mar 2026, (8:10 AM)

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
import math

from leo_emulator.lib.errors import DomainError

# Relative tolerance on L >= H (ground positions sit on the sphere surface)
ALTITUDE_TOLERANCE = 1e-9


@dataclasses.dataclass(frozen=True)
class SlantRateParams:
    zenith_rate_mbps: float
    zenith_snr_db: float
    zenith_atmos_loss_db: float
    altitude_km: float

    def __post_init__(self):
        if not self.zenith_rate_mbps > 0:
            raise DomainError("zenith_rate_mbps must be > 0, got {}".format(self.zenith_rate_mbps))
        if not self.zenith_atmos_loss_db >= 0:
            raise DomainError("zenith_atmos_loss_db must be >= 0, got {}".format(self.zenith_atmos_loss_db))
        if not self.altitude_km > 0:
            raise DomainError("altitude_km must be > 0, got {}".format(self.altitude_km))


def attenuation_factor(slant_range_km, params):
    """
    Link attenuation relative to zenith: free-space spreading times the
    atmospheric path excess scaled from the zenith loss.

    :param slant_range_km:
    :param params:
    :return:
    """
    ratio = slant_range_km / params.altitude_km
    spreading = (1.0 / ratio) ** 2
    atmospheric = 10.0 ** (-(params.zenith_atmos_loss_db / 10.0) * (ratio - 1.0))
    return spreading * atmospheric


def slant_range_bitrate(slant_range_km, params):
    """
    Shannon-Hartley bitrate at slant range L, normalised to the zenith bitrate.

        R(L) = R_z * log2(1 + SNR_z * A_L) / log2(1 + SNR_z)

    :param slant_range_km:
    :param params:
    :return:
    """
    if slant_range_km < params.altitude_km * (1.0 - ALTITUDE_TOLERANCE):
        raise DomainError(
            "Slant range {} km is shorter than the shell altitude {} km".format(slant_range_km, params.altitude_km))
    slant_range_km = max(slant_range_km, params.altitude_km)
    snr = 10.0 ** (params.zenith_snr_db / 10.0)
    gain = math.log2(1.0 + snr * attenuation_factor(slant_range_km, params)) / math.log2(1.0 + snr)
    return params.zenith_rate_mbps * gain


class SlantRangeBitrate:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "slant-range": {
                "attribute": "rate",
                "label":     "Slant-range Shannon bitrate relative to zenith",
            },
        }

    def options(self):
        return {
            "zenith_atmos_loss_db": 0.5,
            "gateway":              {
                "zenith_rate_mbps": 200.0,
                "zenith_snr_db":    30.0,
            },
            "user":                 {
                "zenith_rate_mbps": 50.0,
                "zenith_snr_db":    12.0,
            },
        }

    def params_for(self, ground_kind, altitude_km):
        defaults = self.options()
        kind_settings = self.settings.get(ground_kind, defaults.get(ground_kind))
        if kind_settings is None:
            raise DomainError("No slant-range parameters configured for '{}' links".format(ground_kind))
        return SlantRateParams(
            zenith_rate_mbps=float(kind_settings['zenith_rate_mbps']),
            zenith_snr_db=float(kind_settings['zenith_snr_db']),
            zenith_atmos_loss_db=float(self.settings.get('zenith_atmos_loss_db', defaults['zenith_atmos_loss_db'])),
            altitude_km=float(altitude_km),
        )

    def evaluate(self, ctx):
        return slant_range_bitrate(ctx.slant_range_km, self.params_for(ctx.ground_kind, ctx.altitude_km))


class FixedBitrate:

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "fixed": {
                "attribute": "rate",
                "label":     "Constant bitrate",
            },
        }

    def options(self):
        return {
            "rate_mbps": 400.0,
        }

    def evaluate(self, ctx):
        return float(self.settings.get('rate_mbps', self.options()['rate_mbps']))
