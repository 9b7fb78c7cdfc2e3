#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.placement.py

    Written by:               LEO Emulator contributors
    Date:                     11 Mar 2026, (10:20 AM)

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
    - Nodes are placed on workers by weighted graph partitioning. Edge weights count the
      epochs during which a link is active, so frequently linked nodes are co-located.
    - Feasibility uses resource requests only. CPU and memory are independent constraints,
      the balance objective uses CPU.
"""
import dataclasses
import logging
import math
import random

import networkx as nx

from leo_emulator.lib import tools
from leo_emulator.lib.errors import CapacityError, ConfigurationError
from leo_emulator.lib.scenario import link_key

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

# Kernighan-Lin restarts per bisection
KL_RESTARTS = 4
REFINE_PASSES = 10


@dataclasses.dataclass(frozen=True)
class WorkerSpec:
    name: str
    cpu_capacity: float
    mem_capacity: int
    underlay_ip: str = ""
    sat_vnet_cidr: str = None

    def __post_init__(self):
        if not self.cpu_capacity > 0:
            raise ConfigurationError("Worker '{}' cpu capacity must be > 0".format(self.name), field='cpu')
        if not self.mem_capacity > 0:
            raise ConfigurationError("Worker '{}' mem capacity must be > 0".format(self.name), field='mem')

    @classmethod
    def from_config(cls, config):
        return cls(
            name=config['name'],
            cpu_capacity=tools.parse_cpu(config.get('cpu')),
            mem_capacity=tools.parse_mem(config.get('mem')),
            underlay_ip=config.get('ip', ''),
            sat_vnet_cidr=config.get('sat-vnet-cidr'),
        )

    def to_dict(self):
        data = {
            "name": self.name,
            "ip":   self.underlay_ip,
            "cpu":  "{:g}".format(self.cpu_capacity),
            "mem":  tools.format_mem(self.mem_capacity),
        }
        if self.sat_vnet_cidr:
            data['sat-vnet-cidr'] = self.sat_vnet_cidr
        return data


def link_activity_weights(epoch_files):
    """
    Number of epochs during which each link exists.
    A link counts from the epoch that adds it up to, not including, the epoch that deletes it.

    :param epoch_files:
    :return: dict of link key -> weight
    """
    alive = {}
    weights = {}
    for index, epoch in enumerate(epoch_files):
        for a, b in epoch.links_del:
            key = link_key(a, b)
            if key in alive:
                weights[key] = weights.get(key, 0) + index - alive.pop(key)
        for record in epoch.links_add:
            alive.setdefault(record.key, index)
    for key, start in alive.items():
        weights[key] = weights.get(key, 0) + len(epoch_files) - start
    return {key: weight for key, weight in weights.items() if weight > 0}


def build_placement_graph(demands, weights):
    """
    Undirected placement graph.

    :param demands: dict of node name -> (cpu cores, mem bytes)
    :param weights: dict of link key -> weight >= 1
    :return:        networkx Graph with 'cpu'/'mem' node attributes and 'weight' edge attributes
    """
    graph = nx.Graph()
    for name in sorted(demands, key=tools.natural_sort_key):
        cpu, mem = demands[name]
        graph.add_node(name, cpu=float(cpu), mem=int(mem))
    for (a, b), weight in weights.items():
        if a in graph and b in graph and a != b:
            graph.add_edge(a, b, weight=int(weight))
    return graph


def node_demands(nodes):
    return {name: (node.cpu_request, node.mem_request) for name, node in nodes.items()}


def cut_weight(graph, assignment):
    return sum(data.get('weight', 1) for a, b, data in graph.edges(data=True) if assignment[a] != assignment[b])


def round_robin_assignment(graph, workers):
    ordered = sorted(graph.nodes, key=tools.natural_sort_key)
    return {name: workers[index % len(workers)].name for index, name in enumerate(ordered)}


def _loads(graph, assignment, worker_names):
    loads = {name: [0.0, 0] for name in worker_names}
    for node, worker in assignment.items():
        loads[worker][0] += graph.nodes[node]['cpu']
        loads[worker][1] += graph.nodes[node]['mem']
    return loads


def _shortfall(graph, assignment, workers):
    loads = _loads(graph, assignment, [worker.name for worker in workers])
    shortfall = {}
    for worker in workers:
        cpu, mem = loads[worker.name]
        missing_cpu = max(0.0, cpu - worker.cpu_capacity)
        missing_mem = max(0, mem - worker.mem_capacity)
        if missing_cpu > 1e-9 or missing_mem > 0:
            shortfall[worker.name] = {"cpu": missing_cpu, "mem": missing_mem}
    return shortfall


def _fits(graph, assignment, workers):
    return not _shortfall(graph, assignment, workers)


def _balance_weights(graph, nodes):
    # CPU drives balance; without CPU requests every node counts as one
    if sum(graph.nodes[node]['cpu'] for node in nodes) > 0:
        return {node: graph.nodes[node]['cpu'] for node in nodes}
    return {node: 1.0 for node in nodes}


def _greedy_region(graph, nodes, target, balance, start):
    """
    Grow a connected region from start, absorbing the most strongly connected node first,
    until its balance weight reaches target
    """
    region = set()
    frontier = {start: 0}
    remaining = set(nodes)
    total = 0.0
    while remaining and total < target:
        if not frontier:
            # Jump to the next disconnected component
            frontier = {min(remaining, key=tools.natural_sort_key): 0}
        node = sorted(frontier, key=lambda n: (-frontier[n], tools.natural_sort_key(n)))[0]
        del frontier[node]
        region.add(node)
        remaining.discard(node)
        total += balance[node]
        for neighbour, data in graph[node].items():
            if neighbour in remaining:
                frontier[neighbour] = frontier.get(neighbour, 0) + data.get('weight', 1)
    return region


def _bisect(graph, nodes, fraction, rng):
    """
    Split nodes into two sets, the first holding about 'fraction' of the balance weight

    :return: (first set, second set)
    """
    nodes = sorted(nodes, key=tools.natural_sort_key)
    if len(nodes) < 2:
        return set(nodes), set()
    balance = _balance_weights(graph, nodes)
    target = fraction * sum(balance.values())
    subgraph = graph.subgraph(nodes)
    best = None
    for attempt in range(KL_RESTARTS):
        start = nodes[0] if attempt == 0 else rng.choice(nodes)
        first = _greedy_region(subgraph, nodes, target, balance, start)
        second = set(nodes) - first
        if first and second:
            first, second = nx.algorithms.community.kernighan_lin_bisection(
                subgraph, partition=(first, second), weight='weight', seed=rng.randrange(2 ** 31))
        first, second = set(first), set(second)
        imbalance = abs(sum(balance[node] for node in first) - target)
        cut = sum(data.get('weight', 1) for a, b, data in subgraph.edges(data=True) if (a in first) != (b in first))
        score = (imbalance, cut)
        if best is None or score < best[0]:
            best = (score, first, second)
    return best[1], best[2]


def _recursive_bisection(graph, nodes, workers, rng, assignment):
    if len(workers) == 1:
        for node in nodes:
            assignment[node] = workers[0].name
        return
    half = int(math.ceil(len(workers) / 2.0))
    left, right = workers[:half], workers[half:]
    fraction = sum(worker.cpu_capacity for worker in left) / sum(worker.cpu_capacity for worker in workers)
    first, second = _bisect(graph, nodes, fraction, rng)
    _recursive_bisection(graph, first, left, rng, assignment)
    _recursive_bisection(graph, second, right, rng, assignment)


def _map_parts_to_workers(graph, assignment, workers):
    # Largest part (cpu, then mem) to the largest worker
    loads = _loads(graph, assignment, [worker.name for worker in workers])
    parts = sorted(loads, key=lambda name: (-loads[name][0], -loads[name][1], name))
    by_capacity = sorted(workers, key=lambda worker: (-worker.cpu_capacity, -worker.mem_capacity, worker.name))
    mapping = {part: worker.name for part, worker in zip(parts, by_capacity)}
    return {node: mapping[worker] for node, worker in assignment.items()}


def _connection(graph, node, assignment):
    weights = {}
    for neighbour, data in graph[node].items():
        worker = assignment[neighbour]
        weights[worker] = weights.get(worker, 0) + data.get('weight', 1)
    return weights


def _can_host(graph, node, worker, loads):
    cpu, mem = loads[worker.name]
    return (cpu + graph.nodes[node]['cpu'] <= worker.cpu_capacity + 1e-9
            and mem + graph.nodes[node]['mem'] <= worker.mem_capacity)


def _move(graph, node, source, target, loads, assignment):
    loads[source][0] -= graph.nodes[node]['cpu']
    loads[source][1] -= graph.nodes[node]['mem']
    loads[target][0] += graph.nodes[node]['cpu']
    loads[target][1] += graph.nodes[node]['mem']
    assignment[node] = target


def _repair(graph, assignment, workers):
    """
    Move nodes out of overloaded workers, cheapest cut increase first.

    :return: True when every worker fits
    """
    by_name = {worker.name: worker for worker in workers}
    loads = _loads(graph, assignment, list(by_name))
    for _ in range(graph.number_of_nodes() * len(workers) + 1):
        overloaded = [name for name in sorted(by_name) if loads[name][0] > by_name[name].cpu_capacity + 1e-9
                      or loads[name][1] > by_name[name].mem_capacity]
        if not overloaded:
            return True
        source = overloaded[0]
        best = None
        for node in sorted((n for n, w in assignment.items() if w == source), key=tools.natural_sort_key):
            connection = _connection(graph, node, assignment)
            for target in sorted(by_name):
                if target == source or not _can_host(graph, node, by_name[target], loads):
                    continue
                increase = connection.get(source, 0) - connection.get(target, 0)
                candidate = (increase, -graph.nodes[node]['cpu'], tools.natural_sort_key(node), target)
                if best is None or candidate < best[0]:
                    best = (candidate, node, target)
        if best is None:
            return False
        _move(graph, best[1], source, best[2], loads, assignment)
    return False


def _refine(graph, assignment, workers):
    """
    Greedy single-node moves that lower the cut while keeping every worker feasible
    """
    by_name = {worker.name: worker for worker in workers}
    loads = _loads(graph, assignment, list(by_name))
    for _ in range(REFINE_PASSES):
        improved = False
        for node in sorted(graph.nodes, key=tools.natural_sort_key):
            source = assignment[node]
            connection = _connection(graph, node, assignment)
            best_gain, best_target = 0, None
            for target in sorted(by_name):
                if target == source or not _can_host(graph, node, by_name[target], loads):
                    continue
                gain = connection.get(target, 0) - connection.get(source, 0)
                if gain > best_gain:
                    best_gain, best_target = gain, target
            if best_target is not None:
                _move(graph, node, source, best_target, loads, assignment)
                improved = True
        if not improved:
            break
    return assignment


def _total_shortfall(graph, workers):
    cpu = sum(data['cpu'] for _, data in graph.nodes(data=True))
    mem = sum(data['mem'] for _, data in graph.nodes(data=True))
    return cpu - sum(worker.cpu_capacity for worker in workers), mem - sum(worker.mem_capacity for worker in workers)


def partition(graph, workers, seed=1):
    """
    Assign every node to a worker.

    The number of parts grows from one until each part fits the worker it is mapped to.
    Parts come from recursive bisection with Kernighan-Lin refinement and are mapped to
    workers by decreasing demand against decreasing capacity.

    :param graph:   placement graph from build_placement_graph()
    :param workers: list of WorkerSpec
    :param seed:
    :return:        dict of node name -> worker name
    """
    if not workers:
        raise ConfigurationError("At least one worker is required for placement", field='workers')
    ordered = sorted(workers, key=lambda worker: (-worker.cpu_capacity, -worker.mem_capacity, worker.name))
    nodes = list(graph.nodes)
    if not nodes:
        return {}

    last_attempt = None
    for k in range(1, len(ordered) + 1):
        candidates = ordered[:k]
        rng = random.Random(seed)
        assignment = {}
        _recursive_bisection(graph, nodes, candidates, rng, assignment)
        assignment = _map_parts_to_workers(graph, assignment, candidates)
        last_attempt = dict(assignment)
        if not _repair(graph, assignment, candidates):
            logger.debug("Placement with %s parts does not fit", k)
            continue
        assignment = _refine(graph, assignment, candidates)
        # Never worse than spreading nodes round-robin over the same workers
        for baseline_workers in (candidates, ordered):
            baseline = round_robin_assignment(graph, baseline_workers)
            if _fits(graph, baseline, ordered) and cut_weight(graph, baseline) < cut_weight(graph, assignment):
                assignment = _refine(graph, baseline, ordered)
        logger.info("Placed %s nodes on %s workers, cut weight %s", len(nodes), k, cut_weight(graph, assignment))
        return assignment

    shortfall = _shortfall(graph, last_attempt, ordered)
    missing_cpu, missing_mem = _total_shortfall(graph, ordered)
    raise CapacityError(
        "Nodes do not fit on {} workers (total cpu short by {:g} cores, mem short by {} bytes)".format(
            len(ordered), max(missing_cpu, 0.0), max(missing_mem, 0)),
        shortfall=shortfall)


def apply_placement(nodes, assignment):
    for name, worker in assignment.items():
        if name in nodes:
            nodes[name].worker = worker
    return nodes
