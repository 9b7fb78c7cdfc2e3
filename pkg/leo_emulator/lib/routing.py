#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.routing.py

    Written by:               LEO Emulator contributors
    Date:                     09 Mar 2026, (2:30 PM)

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
import copy
import dataclasses
import enum
import logging
import math
from typing import NamedTuple

import networkx as nx

from leo_emulator.lib.errors import ConfigurationError, RoutingLoopError, UnreachableError
from leo_emulator.lib.scenario import link_key, replay_link_sets

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

metrics = {
    "hop-count":         {
        "label":  "Minimum ISL hop count (BFS)",
        "weight": None,
    },
    "propagation-delay": {
        "label":  "Minimum propagation delay (Dijkstra)",
        "weight": "delay_ms",
    },
}

# Node types that never forward transit traffic
ground_types = ['gateway', 'user']

ROUTE_TASK_FORMAT = "ip -{version} route replace {destination} via {next_hop}"


class RouteOrigin(str, enum.Enum):
    LOCAL = "Local"
    ORACLE = "Oracle"
    SRV6 = "Srv6"


@dataclasses.dataclass(frozen=True)
class RouteEntry:
    destination: str
    next_hop: str
    origin: RouteOrigin = RouteOrigin.LOCAL


class RouteMutation(NamedTuple):
    action: str
    destination: str
    entry: RouteEntry = None


@dataclasses.dataclass(frozen=True)
class OracleConfig:
    metric: str = "hop-count"
    pair_classes: frozenset = frozenset({('satellite', 'satellite'), ('satellite', 'gateway')})
    drain_lead_s: float = 5.0

    def __post_init__(self):
        if self.metric not in metrics:
            raise ConfigurationError(
                "Unknown routing metric '{}'. Available metrics: {}".format(self.metric, ', '.join(metrics)),
                field='metric')
        if self.drain_lead_s < 0:
            raise ConfigurationError("drain_lead_s must be >= 0, got {}".format(self.drain_lead_s),
                                     field='drain_lead_s')
        object.__setattr__(self, 'pair_classes', frozenset(tuple(pair) for pair in self.pair_classes))

    @classmethod
    def from_settings(cls, settings):
        config = cls(
            metric=settings.get_setting('routing.metric'),
            pair_classes=frozenset(tuple(pair) for pair in settings.get_setting('routing.pair_classes')),
            drain_lead_s=float(settings.get_setting('routing.drain_lead_s')),
        )
        config.check_interval(float(settings.get_setting('epoch.epoch_interval_s')))
        return config

    def check_interval(self, epoch_interval_s):
        steps = self.drain_lead_s / epoch_interval_s
        if not math.isclose(steps, round(steps), abs_tol=1e-9):
            raise ConfigurationError(
                "drain_lead_s {} is not a multiple of the epoch interval {}".format(self.drain_lead_s,
                                                                                   epoch_interval_s),
                field='drain_lead_s')


def route_task(destination, next_hop, version=6):
    return ROUTE_TASK_FORMAT.format(version=version, destination=destination, next_hop=next_hop)


def link_graph(link_set, metric="hop-count"):
    """
    Undirected graph of a link set. Edges carry a 'weight' for the chosen metric.

    :param link_set:    dict of link key -> LinkAttributes
    :param metric:
    :return:
    """
    graph = nx.Graph()
    for (a, b), attributes in link_set.items():
        weight = 1 if metrics[metric]['weight'] is None else attributes.delay_ms
        graph.add_edge(a, b, weight=weight, delay_ms=attributes.delay_ms)
    return graph


def _is_transit(node, node_classes):
    return node_classes.get(node, 'satellite') not in ground_types


def _distances_to(graph, destination, metric):
    if metric == 'hop-count':
        return nx.single_source_shortest_path_length(graph, destination)
    return nx.single_source_dijkstra_path_length(graph, destination, weight='weight')


def next_hops_to(graph, destination, sources, node_classes, metric, transit_graph=None):
    """
    Next hop of every source towards one destination.

    Ground nodes other than the destination never carry transit traffic. Among equal-cost
    neighbours, the lexicographically smallest name is chosen.

    :param graph:
    :param destination:
    :param sources:
    :param node_classes:    dict of node name -> node type
    :param metric:
    :param transit_graph:   precomputed transit-only subgraph, used when the destination is a transit node
    :return:                dict of source -> (next hop, cost)
    """
    if destination not in graph:
        return {}
    if transit_graph is None or destination not in transit_graph:
        transit_graph = graph.subgraph(
            [node for node in graph if _is_transit(node, node_classes) or node == destination])
    distances = _distances_to(transit_graph, destination, metric)
    result = {}
    for source in sources:
        if source == destination or source not in graph:
            continue
        best_cost = math.inf
        best_hops = []
        for neighbour, edge in graph[source].items():
            if neighbour not in distances:
                continue
            cost = edge['weight'] + distances[neighbour]
            if math.isclose(cost, best_cost, rel_tol=1e-9, abs_tol=1e-9):
                best_hops.append(neighbour)
            elif cost < best_cost:
                best_cost = cost
                best_hops = [neighbour]
        if best_hops:
            result[source] = (min(best_hops), best_cost)
    return result


@dataclasses.dataclass
class OracleResult:
    epoch_files: list
    # Destinations unreachable at some epoch: dicts of epoch index, source and destination
    reachability: list = dataclasses.field(default_factory=list)
    # Per epoch: dict of source -> {destination: next hop}, when kept
    tables: list = None
    task_count: int = 0


class _TransitRouteCache(object):
    """
    Next hops between transit nodes only depend on the transit part of the graph
    """

    def __init__(self):
        self.signature = None
        self.next_hops = {}
        self.unreachable = []

    @staticmethod
    def signature_of(drained, full, transit):
        def edges(graph):
            return frozenset((link_key(a, b), data['weight']) for a, b, data in graph.edges(data=True)
                             if a in transit and b in transit)

        return edges(drained), edges(full)


def _transit_subgraph(graph, node_classes):
    return graph.subgraph([node for node in graph if _is_transit(node, node_classes)]).copy()


def _compute_pairs(drained, full, pairs_by_destination, node_classes, metric):
    next_hops = {}
    unreachable = []
    drained_transit = _transit_subgraph(drained, node_classes)
    full_transit = None
    for destination, sources in pairs_by_destination.items():
        routes = next_hops_to(drained, destination, sources, node_classes, metric, transit_graph=drained_transit)
        missing = [source for source in sources if source not in routes]
        if missing:
            # Drained graph disconnected: keep the links about to break instead of losing reachability
            if full_transit is None:
                full_transit = _transit_subgraph(full, node_classes)
            routes.update(next_hops_to(full, destination, missing, node_classes, metric, transit_graph=full_transit))
        for source in sources:
            if source in routes:
                next_hops[(source, destination)] = routes[source][0]
            else:
                unreachable.append((source, destination))
    return next_hops, unreachable


def oracle_compute(epoch_files, node_classes, cfg, loopbacks=None, keep_tables=False, version=6):
    """
    Precompute time-dependent shortest-path routes and inject them as route-replace tasks.

    At each epoch the graph holds the links alive at that time minus the links deleted within
    the next drain_lead_s seconds. A task is appended to the source's 'run' list whenever its
    next hop towards an in-class destination changes.

    :param epoch_files:     list of EpochFile, epoch 0 first
    :param node_classes:    dict of node name -> node type
    :param cfg:             OracleConfig
    :param loopbacks:       dict of node name -> loopback address used as route destination
    :param keep_tables:     return per-epoch next hop tables
    :param version:         IP version of the emitted tasks
    :return:                OracleResult
    """
    loopbacks = loopbacks or {}
    augmented = [copy.deepcopy(epoch) for epoch in epoch_files]
    result = OracleResult(epoch_files=augmented, tables=[] if keep_tables else None)
    if not epoch_files:
        return result

    link_sets = replay_link_sets(epoch_files)
    start = epoch_files[0].time
    times = [(epoch.time - start).total_seconds() for epoch in epoch_files]
    deletions = [{link_key(a, b) for a, b in epoch.links_del} for epoch in epoch_files]

    nodes = sorted(node_classes)
    transit = {node for node in nodes if _is_transit(node, node_classes)}
    core_pairs = {}
    edge_pairs = {}
    for source in nodes:
        for destination in nodes:
            if source == destination or (node_classes[source], node_classes[destination]) not in cfg.pair_classes:
                continue
            target = core_pairs if source in transit and destination in transit else edge_pairs
            target.setdefault(destination, []).append(source)

    cache = _TransitRouteCache()
    previous = {}
    for index, epoch in enumerate(augmented):
        draining = set()
        for later in range(index + 1, len(epoch_files)):
            if times[later] - times[index] > cfg.drain_lead_s + 1e-9:
                break
            draining |= deletions[later]
        full = link_graph(link_sets[index], cfg.metric)
        drained = full.copy()
        drained.remove_edges_from(key for key in draining if drained.has_edge(*key))

        signature = _TransitRouteCache.signature_of(drained, full, transit)
        if signature != cache.signature:
            cache.next_hops, core_unreachable = _compute_pairs(drained, full, core_pairs, node_classes, cfg.metric)
            cache.signature = signature
            cache.unreachable = core_unreachable
        current, unreachable = _compute_pairs(drained, full, edge_pairs, node_classes, cfg.metric)
        current.update(cache.next_hops)
        unreachable = unreachable + cache.unreachable

        for source, destination in sorted(unreachable):
            result.reachability.append({"epoch": index, "source": source, "destination": destination})

        for (source, destination), next_hop in sorted(current.items()):
            if previous.get((source, destination)) != next_hop:
                epoch.add_tasks(source, [route_task(loopbacks.get(destination, destination), next_hop, version)])
                result.task_count += 1
        previous = current

        if keep_tables:
            table = {}
            for (source, destination), next_hop in current.items():
                table.setdefault(source, {})[destination] = next_hop
            result.tables.append(table)

    if result.reachability:
        logger.warning("Oracle routing found %s unreachable (source, destination) epoch entries",
                       len(result.reachability))
    logger.info("Oracle routing injected %s route tasks into %s epoch files", result.task_count, len(augmented))
    return result


def resolve_path(route_tables_at_t, src, dst):
    """
    Follow next hops from src until dst.

    :param route_tables_at_t:   mapping of node -> mapping of destination node -> next hop node
    :param src:
    :param dst:
    :return:                    ordered node list, src first
    """
    path = [src]
    visited = {src}
    node = src
    while node != dst:
        table = route_tables_at_t.get(node) or {}
        next_hop = table.get(dst)
        if next_hop is None:
            raise UnreachableError("No route from '{}' to '{}' at '{}'".format(src, dst, node), source=src,
                                   destination=dst)
        if next_hop in visited:
            cycle = path[path.index(next_hop):] + [next_hop]
            raise RoutingLoopError("Routing loop towards '{}': {}".format(dst, ' -> '.join(cycle)), cycle=cycle)
        path.append(next_hop)
        visited.add(next_hop)
        node = next_hop
    return path


class _SourceRoutes(object):

    def __init__(self, tables, source):
        self.tables = tables
        self.source = source

    def get(self, destination, default=None):
        next_hop = self.tables.next_hop(self.source, destination)
        return default if next_hop is None else next_hop


class ShortestPathTables(object):
    """
    Route tables of one link set, computed per destination on first use.
    Next hops follow the same rules as oracle_compute without draining.
    """

    def __init__(self, link_set, node_classes, metric="hop-count"):
        self.graph = link_graph(link_set, metric)
        self.node_classes = node_classes
        self.metric = metric
        self.__transit = None
        self.__next_hops = {}

    def next_hop(self, source, destination):
        if destination not in self.__next_hops:
            if self.__transit is None:
                self.__transit = _transit_subgraph(self.graph, self.node_classes)
            routes = next_hops_to(self.graph, destination, list(self.graph), self.node_classes, self.metric,
                                  transit_graph=self.__transit)
            self.__next_hops[destination] = {source: hop for source, (hop, _cost) in routes.items()}
        return self.__next_hops[destination].get(source)

    def get(self, node, default=None):
        if node not in self.graph:
            return default
        return _SourceRoutes(self, node)
