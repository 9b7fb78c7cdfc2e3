#!/usr/bin/env python3
# -*- coding:utf-8 -*-

"""
    leo_emulator.lib.global_settings.py

    Written by:               LEO Emulator contributors
    Date:                     02 Mar 2026, (9:48 AM)

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

node_types = {
    "satellite": {
        "label": "Satellite",
        "image": "msvcbench/sat-container:latest",
    },
    "gateway":   {
        "label": "Gateway",
        "image": "msvcbench/grd-container:latest",
    },
    "user":      {
        "label": "User terminal",
        "image": "msvcbench/usr-container:latest",
    },
}

named_strategies = {
    "shortest-min-access-delay":    "e2e:1,2,4",
    "shortest-max-min-access-rate": "e2e:1,2,5",
    "shortest-max-min-visibility":  "e2e:1,2,3",
    "local-min-delay":              "local-min-delay",
}


def default_node_config_common():
    """
    Common node configuration applied by 'type' matching when a scenario does not provide its own

    :return:
    """
    rules = []
    super_cidrs = {
        "satellite": ("2001:db8:100::/48", "10.100.0.0/16"),
        "gateway":   ("2001:db8:200::/48", "10.200.0.0/16"),
        "user":      ("2001:db8:300::/48", "10.210.0.0/16"),
    }
    for node_type in node_types:
        super_cidr6, super_cidr4 = super_cidrs[node_type]
        rules.append(
            {
                "match-key":     "type",
                "match-value":   node_type,
                "config-common": {
                    "image":       node_types[node_type]["image"],
                    "cpu-request": "100m",
                    "mem-request": "100MiB",
                    "L3-config":   {
                        "enable-routing":         True,
                        "routing-module":         "extra.routing.localroutes6",
                        "auto-assign-ips":        True,
                        "auto-assign-super-cidr": [
                            {
                                "match-key":   "type",
                                "match-value": node_type,
                                "super-cidr6": super_cidr6,
                                "super-cidr4": super_cidr4,
                            },
                        ],
                    },
                },
            }
        )
    return rules


class GlobalSettings:

    def __init__(self, settings):
        self.settings = settings

    @staticmethod
    def options():
        # Defaults reproduce the OneWeb-like evaluation scenario
        return {
            "constellation":      {
                "altitude_km":     1200.0,
                "inclination_deg": 87.9,
                "num_planes":      12,
                "sats_per_plane":  49,
                "phasing_factor":  1,
                "pattern":         "Star",
                "raan_spread_deg": None,
            },
            "ground":             {
                "min_elevation_deg": 25.0,
                "nodes":             [],
            },
            "phy":                {
                "isl":     {
                    "bitrate": {
                        "model":     "fixed",
                        "rate_mbps": 400.0,
                    },
                    "loss":    {
                        "model":         "fixed-loss",
                        "loss_fraction": 0.0,
                    },
                },
                "access":  {
                    "bitrate": {
                        "model":                "slant-range",
                        "zenith_atmos_loss_db": 0.5,
                        "gateway":              {
                            "zenith_rate_mbps": 200.0,
                            "zenith_snr_db":    30.0,
                        },
                        "user":                 {
                            "zenith_rate_mbps": 50.0,
                            "zenith_snr_db":    12.0,
                        },
                    },
                    "loss":    {
                        "model":         "fixed-loss",
                        "loss_fraction": 0.0,
                    },
                },
                "antenna": {
                    "model": "all-visible",
                },
            },
            "epoch":              {
                "epoch_interval_s": 5.0,
                "delay_quantum_ms": 1.0,
                "rate_quantum_mbps": 1.0,
                "duration_s":       2400.0,
                "start_time":       "2023-10-01T00:00:00Z",
                "epoch_dir":        "epochs",
                "file_pattern":     "NetSatBench-epoch*.json",
            },
            "routing":            {
                "enabled":      True,
                "metric":       "hop-count",
                "pair_classes": [
                    ["satellite", "satellite"],
                    ["satellite", "gateway"],
                ],
                "drain_lead_s": 5.0,
            },
            "handover":           {
                "strategy":           "shortest-min-access-delay",
                "t_lt_s":             60.0,
                "t_el_s":             15.0,
                "control_interval_s": 5.0,
                "t_ho_s":             0.080,
                "heartbeat_misses":   2,
            },
            "experiment":         {
                "probe_period_ms": 10.0,
                "seed":            1,
                "loss_enabled":    True,
                "sessions":        [],
            },
            "node-config-common": default_node_config_common(),
            "workers":            [],
        }

    def get_strategy(self):
        """
        Returns the canonical strategy string ("local-min-delay" or "e2e:<ids>") for the configured strategy.
        Named strategies are translated to their filter sequence.

        :return:
        """
        strategy = str(self.settings.get_setting('handover.strategy')).strip()
        return named_strategies.get(strategy, strategy)

    def get_node_image(self, node_type):
        return node_types.get(node_type, {}).get('image')
