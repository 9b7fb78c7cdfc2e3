#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.route_plugins.local_routes.py

    Written by:               LEO Emulator contributors
    Date:                     10 Mar 2026, (11:52 AM)

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
from leo_emulator.lib.routing import RouteEntry, RouteMutation, RouteOrigin


class LocalRoutesPlugin:
    """
    Installs host routes to the loopback of directly connected neighbours only.
    """

    def __init__(self, settings):
        self.settings = settings

    def provides(self):
        return {
            "extra.routing.localroutes6": {
                "label": "Host routes to directly connected neighbours (IPv6 loopbacks)",
            },
            "extra.routing.localroutes4": {
                "label": "Host routes to directly connected neighbours (IPv4 loopbacks)",
            },
        }

    def options(self):
        return {}

    def on_link_add(self, node, peer, attributes):
        destination = node.loopback_of(peer)
        return [RouteMutation('replace', destination, RouteEntry(destination, peer, RouteOrigin.LOCAL))]

    def on_link_update(self, node, peer, attributes):
        # Link parameters never change a neighbour route
        return []

    def on_link_del(self, node, peer, attributes):
        destination = node.loopback_of(peer)
        entry = node.routes.get(destination)
        if entry is None or entry.origin != RouteOrigin.LOCAL or entry.next_hop != peer:
            return []
        return [RouteMutation('delete', destination)]
