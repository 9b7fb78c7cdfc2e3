#!/usr/bin/env python3
# -*- coding: utf-8 -*-
import datetime
import itertools
import random

import pytest

from leo_emulator.lib.errors import CapacityError, ConfigurationError
from leo_emulator.lib.linkmodel import LinkAttributes
from leo_emulator.lib.placement import WorkerSpec, apply_placement, build_placement_graph, cut_weight, \
    link_activity_weights, node_demands, partition, round_robin_assignment
from leo_emulator.lib.scenario import EpochFile, LinkRecord, NodeConfig

EPOCH_ZERO = datetime.datetime(2023, 10, 1, tzinfo=datetime.timezone.utc)
GIB = 1024 ** 3


def workers(count, cpu=4.0, mem=4 * GIB):
    return [WorkerSpec("host-{}".format(index + 1), cpu, mem) for index in range(count)]


def uniform_graph(edges, names=None, cpu=1.0, mem=GIB // 8):
    names = names or sorted({node for edge in edges for node in edge[:2]})
    demands = {name: (cpu, mem) for name in names}
    return build_placement_graph(demands, {(a, b): weight for a, b, weight in edges})


def two_cliques():
    edges = []
    for group in ('a', 'b'):
        members = ["{}{}".format(group, index) for index in range(1, 5)]
        edges += [(x, y, 10) for x, y in itertools.combinations(members, 2)]
    edges.append(('a1', 'b1', 1))
    return uniform_graph(edges)


def assert_feasible(graph, assignment, worker_specs):
    by_name = {worker.name: worker for worker in worker_specs}
    assert set(assignment) == set(graph.nodes)
    for name, worker in by_name.items():
        hosted = [node for node, host in assignment.items() if host == name]
        assert sum(graph.nodes[node]['cpu'] for node in hosted) <= worker.cpu_capacity + 1e-9
        assert sum(graph.nodes[node]['mem'] for node in hosted) <= worker.mem_capacity


def brute_force_cut(graph, worker_specs):
    nodes = list(graph.nodes)
    best = None
    for hosts in itertools.product([worker.name for worker in worker_specs], repeat=len(nodes)):
        assignment = dict(zip(nodes, hosts))
        loads = {worker.name: 0.0 for worker in worker_specs}
        for node, host in assignment.items():
            loads[host] += graph.nodes[node]['cpu']
        if any(loads[worker.name] > worker.cpu_capacity + 1e-9 for worker in worker_specs):
            continue
        cut = cut_weight(graph, assignment)
        best = cut if best is None else min(best, cut)
    return best


def random_instance(rng, size, worker_count, connected=False):
    """
    Random placement graph with workers that always leave room for a round-robin spread plus one node
    """
    names = ["n{}".format(index) for index in range(size)]
    demands = {name: (rng.choice([0.25, 0.5, 0.75, 1.0]), GIB // 16) for name in names}
    weights = {}
    for a, b in itertools.combinations(range(size), 2):
        if rng.random() < 0.3:
            weights[(names[a], names[b])] = rng.randint(1, 10)
    if connected:
        for a in range(size - 1):
            weights.setdefault((names[a], names[a + 1]), rng.randint(1, 10))
    graph = build_placement_graph(demands, weights)
    max_cpu = max(cpu for cpu, _mem in demands.values())
    slots = -(-size // worker_count) + 1
    specs = [WorkerSpec("host-{}".format(index + 1), slots * max_cpu * rng.uniform(1.0, 1.5), 64 * GIB)
             for index in range(worker_count)]
    return graph, specs


class TestWorkerSpec(object):

    def test_from_config(self):
        worker = WorkerSpec.from_config({"name": "host-1", "ip": "192.168.1.11", "cpu": "4", "mem": "4GiB",
                                         "sat-vnet-cidr": "172.100.0.0/16"})
        assert worker.cpu_capacity == 4.0
        assert worker.mem_capacity == 4 * GIB
        assert worker.to_dict() == {"name": "host-1", "ip": "192.168.1.11", "cpu": "4", "mem": "4GiB",
                                    "sat-vnet-cidr": "172.100.0.0/16"}

    def test_capacity_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            WorkerSpec("host-1", 0.0, GIB)


class TestActivityWeights(object):

    def test_weight_counts_active_epochs(self):
        attributes = LinkAttributes(100.0, 5.0)
        epochs = [
            EpochFile(time=EPOCH_ZERO, links_add=[LinkRecord('sat1', 'sat2', attributes),
                                                  LinkRecord('sat1', 'grd1', attributes)]),
            EpochFile(time=EPOCH_ZERO, links_del=[('sat2', 'sat1')]),
            EpochFile(time=EPOCH_ZERO, links_add=[LinkRecord('sat2', 'sat1', attributes)]),
        ]
        weights = link_activity_weights(epochs)
        assert weights[('sat1', 'sat2')] == 2
        assert weights[('sat1', 'grd1')] == 3

    def test_demands_from_node_configs(self):
        nodes = {'sat1': NodeConfig('sat1', 'satellite', 'img', cpu_request=0.1, mem_request=100)}
        graph = build_placement_graph(node_demands(nodes), {})
        assert graph.nodes['sat1'] == {"cpu": 0.1, "mem": 100}


class TestPartition(object):

    def test_single_worker(self):
        graph = two_cliques()
        assignment = partition(graph, workers(1, cpu=8.0))
        assert set(assignment.values()) == {'host-1'}

    def test_unused_workers_stay_empty(self):
        assignment = partition(two_cliques(), workers(3, cpu=16.0))
        assert len(set(assignment.values())) == 1

    def test_cliques_are_kept_together(self):
        graph = two_cliques()
        specs = workers(2)
        assignment = partition(graph, specs)
        assert_feasible(graph, assignment, specs)
        assert cut_weight(graph, assignment) == 1
        assert cut_weight(graph, assignment) == brute_force_cut(graph, specs)
        assert assignment['a1'] == assignment['a4'] != assignment['b2']

    def test_never_worse_than_round_robin(self):
        rng = random.Random(2024)
        for instance in range(200):
            graph, specs = random_instance(rng, rng.randint(6, 40), rng.randint(2, 5))
            assignment = partition(graph, specs, seed=instance)
            assert_feasible(graph, assignment, specs)
            baseline = round_robin_assignment(graph, specs)
            assert cut_weight(graph, assignment) <= cut_weight(graph, baseline), instance

    def test_within_twice_the_optimum(self):
        rng = random.Random(7)
        for instance in range(30):
            graph, specs = random_instance(rng, rng.randint(4, 8), rng.randint(2, 3), connected=True)
            assignment = partition(graph, specs, seed=instance)
            assert_feasible(graph, assignment, specs)
            assert cut_weight(graph, assignment) <= 2 * brute_force_cut(graph, specs), instance

    def test_deterministic(self):
        graph = two_cliques()
        assert partition(graph, workers(2), seed=3) == partition(graph, workers(2), seed=3)

    def test_not_enough_capacity(self):
        with pytest.raises(CapacityError) as error:
            partition(two_cliques(), workers(2, cpu=3.0))
        assert error.value.shortfall

    def test_memory_is_a_separate_constraint(self):
        graph = uniform_graph([('a', 'b', 1)], mem=3 * GIB)
        assignment = partition(graph, workers(2))
        assert assignment['a'] != assignment['b']

    def test_no_workers(self):
        with pytest.raises(ConfigurationError):
            partition(two_cliques(), [])

    def test_apply_placement(self):
        nodes = {'sat1': NodeConfig('sat1', 'satellite', 'img')}
        apply_placement(nodes, {'sat1': 'host-2', 'sat9': 'host-1'})
        assert nodes['sat1'].worker == 'host-2'
