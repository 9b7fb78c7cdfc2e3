#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.scenario.py

    Written by:               LEO Emulator contributors
    Date:                     05 Mar 2026, (10:12 AM)

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
    - Node configuration follows the sat-config.json layout: 'node-config-common' match rules,
      'nodes' with node specific properties and 'epoch-config'.
    - Link sets are dicts keyed by link_key() pairs. Ground links are oriented (satellite, ground node),
      other links by natural name order.
"""
import dataclasses
import datetime
import glob
import ipaddress
import json
import logging
import os
import re

from leo_emulator.lib import tools
from leo_emulator.lib.errors import CapacityError, ConfigurationError, EpochFormatError, ScenarioInconsistencyError
from leo_emulator.lib.global_settings import node_types
from leo_emulator.lib.linkmodel import LinkAttributes, PhyModels, grid_plus_isls, link_snapshot
from leo_emulator.lib.orbit import GroundNode, WalkerParams, generate_walker, satellite_flat, satellite_name
from leo_emulator.lib.settings import Settings

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

EPOCH_FILE_PREFIX = "NetSatBench-epoch"
SAT_CONFIG_FILE = "sat-config.json"

mandatory_node_fields = ['type', 'image']

default_slice_prefix = {
    4: 30,
    6: 126,
}

_epoch_index_regex = re.compile(r'(\d+)\.json$')


def link_key(a, b):
    """
    Canonical orientation of a link between two nodes

    :param a:
    :param b:
    :return:
    """
    a_is_sat = satellite_flat(a) is not None
    b_is_sat = satellite_flat(b) is not None
    if a_is_sat != b_is_sat:
        return (a, b) if a_is_sat else (b, a)
    if tools.natural_sort_key(b) < tools.natural_sort_key(a):
        return b, a
    return a, b


def sorted_link_keys(link_set):
    return sorted(link_set, key=lambda key: (tools.natural_sort_key(key[0]), tools.natural_sort_key(key[1])))


@dataclasses.dataclass(frozen=True)
class MatchRule:
    match_key: str
    match_value: str
    payload: dict

    def applies_to(self, node_config):
        return tools.config_matches(node_config, self.match_key, self.match_value)

    @classmethod
    def from_config(cls, rule, payload_key='config-common'):
        if 'match-key' not in rule or 'match-value' not in rule:
            raise ConfigurationError("Match rule is missing 'match-key' or 'match-value': {}".format(rule),
                                     field='match-key')
        if payload_key is None:
            payload = {key: value for key, value in rule.items() if key not in ('match-key', 'match-value')}
        else:
            payload = rule.get(payload_key, {})
        return cls(match_key=rule['match-key'], match_value=rule['match-value'], payload=payload)


@dataclasses.dataclass
class L3Config:
    enable_routing: bool = False
    routing_module: str = None
    auto_assign_ips: bool = False
    cidr_v4: str = None
    cidr_v6: str = None
    super_cidr_rules: list = dataclasses.field(default_factory=list)

    @classmethod
    def from_dict(cls, data):
        return cls(
            enable_routing=bool(data.get('enable-routing', False)),
            routing_module=data.get('routing-module'),
            auto_assign_ips=bool(data.get('auto-assign-ips', False)),
            cidr_v4=data.get('cidr-v4'),
            cidr_v6=data.get('cidr-v6'),
            super_cidr_rules=[MatchRule.from_config(rule, payload_key=None)
                              for rule in data.get('auto-assign-super-cidr', [])],
        )

    def to_dict(self):
        data = {
            "enable-routing": self.enable_routing,
            "routing-module": self.routing_module,
        }
        if self.cidr_v4:
            data['cidr-v4'] = self.cidr_v4
        if self.cidr_v6:
            data['cidr-v6'] = self.cidr_v6
        return data


@dataclasses.dataclass
class NodeConfig:
    name: str
    type: str
    image: str
    cpu_request: float = 0.0
    mem_request: int = 0
    # None means unlimited
    cpu_limit: float = None
    mem_limit: int = None
    worker: str = None
    l3: L3Config = dataclasses.field(default_factory=L3Config)
    extra: dict = dataclasses.field(default_factory=dict)

    known_keys = ('name', 'type', 'image', 'cpu-request', 'mem-request', 'cpu-limit', 'mem-limit', 'worker',
                  'L3-config')

    @classmethod
    def from_dict(cls, name, data):
        if data.get('type') not in node_types:
            raise ConfigurationError(
                "Node '{}' type must be one of {}, got '{}'".format(name, list(node_types), data.get('type')),
                field='type')
        cpu_limit = data.get('cpu-limit')
        mem_limit = data.get('mem-limit')
        return cls(
            name=name,
            type=data['type'],
            image=data['image'],
            cpu_request=tools.parse_cpu(data.get('cpu-request')),
            mem_request=tools.parse_mem(data.get('mem-request')),
            cpu_limit=tools.parse_cpu(cpu_limit) if cpu_limit not in (None, '') else None,
            mem_limit=tools.parse_mem(mem_limit) if mem_limit not in (None, '') else None,
            worker=data.get('worker'),
            l3=L3Config.from_dict(data.get('L3-config', {})),
            extra={key: value for key, value in data.items() if key not in cls.known_keys},
        )

    def to_dict(self):
        data = {
            "type":        self.type,
            "image":       self.image,
            "cpu-request": self.cpu_request,
            "mem-request": tools.format_mem(self.mem_request),
        }
        if self.cpu_limit is not None:
            data['cpu-limit'] = self.cpu_limit
        if self.mem_limit is not None:
            data['mem-limit'] = tools.format_mem(self.mem_limit)
        if self.worker:
            data['worker'] = self.worker
        data['L3-config'] = self.l3.to_dict()
        data.update(self.extra)
        return data


def merge_common_config(node_specific, common_rules):
    """
    Resolve a node configuration from its specific properties and the common rules.

    Every matching rule is applied in list order, then the node specific
    properties are applied on top.

    :param node_specific:   dict with at least 'name' and 'type'
    :param common_rules:    list of MatchRule or raw 'node-config-common' entries
    :return:
    """
    name = node_specific.get('name')
    if not name or not node_specific.get('type'):
        raise ConfigurationError("Node configuration needs a name and a type: {}".format(node_specific), field='name')
    merged = {}
    for rule in common_rules:
        if not isinstance(rule, MatchRule):
            rule = MatchRule.from_config(rule)
        if rule.applies_to(node_specific):
            merged = tools.deep_merge(merged, rule.payload)
    merged = tools.deep_merge(merged, {key: value for key, value in node_specific.items() if key != 'name'})
    for field in mandatory_node_fields:
        if not merged.get(field):
            raise ConfigurationError("Node '{}' has no '{}' after merging common config".format(name, field),
                                     field=field)
    return NodeConfig.from_dict(name, merged)


@dataclasses.dataclass(frozen=True)
class AddressAssignment:
    cidr_v4: str = None
    loopback_v4: str = None
    cidr_v6: str = None
    loopback_v6: str = None

    def loopback(self):
        return self.loopback_v6 or self.loopback_v4

    def for_family(self, version):
        if version == 6:
            return self.cidr_v6, self.loopback_v6
        return self.cidr_v4, self.loopback_v4


def _matching_pool(node, rules, version):
    key = 'super-cidr{}'.format(version)
    pools = []
    for rule in rules:
        if key in rule.payload and rule.applies_to(node.to_dict()):
            prefix = int(rule.payload.get('slice-prefix{}'.format(version), default_slice_prefix[version]))
            pool = (ipaddress.ip_network(rule.payload[key]), prefix)
            if pool not in pools:
                pools.append(pool)
    if len(pools) > 1:
        raise ConfigurationError(
            "Node '{}' matches {} IPv{} super-CIDR rules, expected one".format(node.name, len(pools), version),
            field=key)
    return pools[0] if pools else None


def assign_addresses(nodes, super_cidr_rules=None):
    """
    Carve consecutive equal-size subnets from the matching super-CIDRs.
    The last address of each subnet is the node loopback.

    Nodes that already carry a CIDR keep it. Without explicit rules, each node uses the
    'auto-assign-super-cidr' rules of its own L3 config when 'auto-assign-ips' is set.

    :param nodes:               list of NodeConfig
    :param super_cidr_rules:    list of MatchRule or raw rule dicts
    :return:                    dict of node name -> AddressAssignment
    """
    if super_cidr_rules is not None:
        super_cidr_rules = [rule if isinstance(rule, MatchRule) else MatchRule.from_config(rule, payload_key=None)
                            for rule in super_cidr_rules]
    ordered = sorted(nodes, key=lambda node: tools.natural_sort_key(node.name))

    # Group nodes by (super-CIDR, slice prefix) per address family
    requests = {4: {}, 6: {}}
    fixed = {4: {}, 6: {}}
    for node in ordered:
        for version in (4, 6):
            manual = node.l3.cidr_v6 if version == 6 else node.l3.cidr_v4
            if manual:
                fixed[version][node.name] = ipaddress.ip_network(manual)
                continue
            if super_cidr_rules is not None:
                rules = super_cidr_rules
            elif node.l3.auto_assign_ips:
                rules = node.l3.super_cidr_rules
            else:
                continue
            pool = _matching_pool(node, rules, version)
            if pool is not None:
                requests[version].setdefault(pool, []).append(node.name)

    subnets = {4: dict(fixed[4]), 6: dict(fixed[6])}
    for version in (4, 6):
        for (super_cidr, prefix), names in requests[version].items():
            if prefix < super_cidr.prefixlen or prefix > super_cidr.max_prefixlen:
                raise ConfigurationError(
                    "Slice prefix /{} does not fit inside {}".format(prefix, super_cidr), field='slice-prefix')
            capacity = 2 ** (prefix - super_cidr.prefixlen)
            if len(names) > capacity:
                raise CapacityError(
                    "Super-CIDR {} fits {} nodes with /{} slices, {} requested".format(super_cidr, capacity, prefix,
                                                                                     len(names)))
            slice_size = 2 ** (super_cidr.max_prefixlen - prefix)
            base = int(super_cidr.network_address)
            for index, name in enumerate(names):
                subnets[version][name] = ipaddress.ip_network((base + index * slice_size, prefix))

    # Manual CIDRs must not collide with anything else
    for version in (4, 6):
        networks = sorted(subnets[version].items(), key=lambda item: (int(item[1].network_address), item[0]))
        for (name_a, net_a), (name_b, net_b) in zip(networks, networks[1:]):
            if net_a.overlaps(net_b):
                raise ConfigurationError(
                    "Subnets of '{}' ({}) and '{}' ({}) overlap".format(name_a, net_a, name_b, net_b), field='cidr')

    assignments = {}
    for node in ordered:
        values = {}
        for version in (4, 6):
            network = subnets[version].get(node.name)
            if network is None:
                continue
            values['cidr_v{}'.format(version)] = str(network)
            values['loopback_v{}'.format(version)] = str(network.broadcast_address)
        assignments[node.name] = AddressAssignment(**values)
    return assignments


def etchosts(assignments, version=6):
    """
    Node name to loopback address mapping for one address family

    :param assignments:
    :param version:
    :return:
    """
    hosts = {}
    for name, assignment in assignments.items():
        _, loopback = assignment.for_family(version)
        if loopback:
            hosts[name] = loopback
    return hosts


def build_node_configs(sat_config):
    """
    Resolve every node of a sat-config document, including automatic addresses.

    :param sat_config:
    :return: (dict of name -> NodeConfig, dict of name -> AddressAssignment)
    """
    rules = [MatchRule.from_config(rule) for rule in sat_config.get('node-config-common', [])]
    nodes = {}
    for name, specific in sat_config.get('nodes', {}).items():
        nodes[name] = merge_common_config(dict(specific, name=name), rules)
    assignments = assign_addresses(list(nodes.values()))
    for name, assignment in assignments.items():
        if assignment.cidr_v4:
            nodes[name].l3.cidr_v4 = assignment.cidr_v4
        if assignment.cidr_v6:
            nodes[name].l3.cidr_v6 = assignment.cidr_v6
    return nodes, assignments


@dataclasses.dataclass(frozen=True)
class LinkRecord:
    endpoint1: str
    endpoint2: str
    attributes: LinkAttributes

    @property
    def key(self):
        return link_key(self.endpoint1, self.endpoint2)

    def to_dict(self):
        return self.attributes.to_record(self.endpoint1, self.endpoint2)

    @classmethod
    def from_dict(cls, data):
        return cls(data['endpoint1'], data['endpoint2'], LinkAttributes.from_record(data))


@dataclasses.dataclass
class EpochFile:
    time: datetime.datetime
    links_del: list = dataclasses.field(default_factory=list)
    links_update: list = dataclasses.field(default_factory=list)
    links_add: list = dataclasses.field(default_factory=list)
    run: dict = dataclasses.field(default_factory=dict)
    index: int = None

    @property
    def file_name(self):
        if self.index is None:
            return None
        return epoch_file_name(self.index)

    def is_empty(self):
        return not (self.links_del or self.links_update or self.links_add or self.run)

    def validate(self):
        seen = {}
        for list_name, keys in (('links-del', [link_key(a, b) for a, b in self.links_del]),
                                ('links-update', [record.key for record in self.links_update]),
                                ('links-add', [record.key for record in self.links_add])):
            for key in keys:
                if key in seen:
                    raise ScenarioInconsistencyError(
                        "Link {}-{} appears in both '{}' and '{}'".format(key[0], key[1], seen[key], list_name),
                        epoch_index=self.index)
                seen[key] = list_name

    def add_tasks(self, node, commands):
        self.run.setdefault(node, []).extend(commands)

    def to_dict(self):
        return {
            "time":         tools.format_timestamp(self.time),
            "links-del":    [{"endpoint1": a, "endpoint2": b} for a, b in self.links_del],
            "links-update": [record.to_dict() for record in self.links_update],
            "links-add":    [record.to_dict() for record in self.links_add],
            "run":          {node: list(commands) for node, commands in self.run.items()},
        }

    @classmethod
    def from_dict(cls, data, index=None):
        if 'time' not in data:
            raise EpochFormatError("Epoch file has no 'time' key", file_name=epoch_file_name(index))
        return cls(
            time=tools.parse_timestamp(data['time']),
            links_del=[(entry['endpoint1'], entry['endpoint2']) for entry in data.get('links-del', [])],
            links_update=[LinkRecord.from_dict(entry) for entry in data.get('links-update', [])],
            links_add=[LinkRecord.from_dict(entry) for entry in data.get('links-add', [])],
            run={node: list(commands) for node, commands in data.get('run', {}).items()},
            index=index,
        )


def epoch_file_name(index):
    if index is None:
        return None
    return "{}{}.json".format(EPOCH_FILE_PREFIX, index)


def epoch_index(file_name):
    match = _epoch_index_regex.search(os.path.basename(file_name))
    if not match:
        return None
    return int(match.group(1))


@dataclasses.dataclass(frozen=True)
class QuantizationPolicy:
    delay_quantum_ms: float = 1.0
    rate_quantum_mbps: float = 1.0
    epoch_interval_s: float = 5.0

    def __post_init__(self):
        for field in ('delay_quantum_ms', 'rate_quantum_mbps', 'epoch_interval_s'):
            if not getattr(self, field) > 0:
                raise ConfigurationError("{} must be > 0, got {}".format(field, getattr(self, field)), field=field)

    @classmethod
    def from_settings(cls, settings):
        return cls(
            delay_quantum_ms=float(settings.get_setting('epoch.delay_quantum_ms')),
            rate_quantum_mbps=float(settings.get_setting('epoch.rate_quantum_mbps')),
            epoch_interval_s=float(settings.get_setting('epoch.epoch_interval_s')),
        )

    def apply(self, attributes):
        return attributes.quantized(self.delay_quantum_ms, self.rate_quantum_mbps)

    def apply_all(self, link_set):
        return {key: self.apply(attributes) for key, attributes in link_set.items()}


def diff_snapshots(previous, current, q, time):
    """
    Epoch file turning link set 'previous' into link set 'current'.

    Attributes are compared and serialised in quantized form so sub-quantum changes produce no update.

    :param previous: dict of link key -> LinkAttributes
    :param current:  dict of link key -> LinkAttributes
    :param q:       QuantizationPolicy
    :param time:    epoch start as an aware datetime
    :return:
    """
    prev_q = {link_key(*key): q.apply(value) for key, value in previous.items()}
    next_q = {link_key(*key): q.apply(value) for key, value in current.items()}
    epoch = EpochFile(time=time)
    for key in sorted_link_keys(prev_q):
        if key not in next_q:
            epoch.links_del.append(key)
    for key in sorted_link_keys(next_q):
        attributes = next_q[key]
        if key not in prev_q:
            epoch.links_add.append(LinkRecord(key[0], key[1], attributes))
        elif attributes != prev_q[key]:
            epoch.links_update.append(LinkRecord(key[0], key[1], attributes))
    return epoch


def apply_to_link_set(link_set, epoch):
    """
    Apply the link lists of an epoch file to a link set in place

    :param link_set:
    :param epoch:
    :return:
    """
    for a, b in epoch.links_del:
        link_set.pop(link_key(a, b), None)
    for record in epoch.links_update:
        link_set[record.key] = record.attributes
    for record in epoch.links_add:
        link_set[record.key] = record.attributes
    return link_set


def replay_link_sets(epoch_files):
    """
    Link set after each epoch of a sequence

    :param epoch_files:
    :return: list of dicts, one per epoch
    """
    link_set = {}
    link_sets = []
    for epoch in epoch_files:
        apply_to_link_set(link_set, epoch)
        link_sets.append(dict(link_set))
    return link_sets


def ground_nodes_from_settings(settings):
    ground_nodes = [GroundNode.from_config(node) for node in settings.get_setting('ground.nodes')]
    names = set()
    for ground in ground_nodes:
        if ground.name in names:
            raise ConfigurationError("Duplicate ground node '{}'".format(ground.name), field='name')
        if satellite_flat(ground.name) is not None:
            raise ConfigurationError("Ground node '{}' uses a satellite name".format(ground.name), field='name')
        names.add(ground.name)
    return ground_nodes


def epoch_times(settings):
    """
    Simulated times of the epochs, from 0 to the configured duration

    :param settings:
    :return:
    """
    interval = float(settings.get_setting('epoch.epoch_interval_s'))
    duration = float(settings.get_setting('epoch.duration_s'))
    if duration < 0:
        raise ConfigurationError("epoch.duration_s must be >= 0, got {}".format(duration), field='duration_s')
    count = int(duration // interval + 1e-9) + 1
    return [k * interval for k in range(count)]


def build_sat_config(settings, params, ground_nodes):
    nodes = {}
    for flat in range(params.num_satellites):
        nodes[satellite_name(flat)] = {"type": "satellite"}
    for ground in ground_nodes:
        nodes[ground.name] = {
            "type":          ground.kind,
            "latitude_deg":  ground.latitude_deg,
            "longitude_deg": ground.longitude_deg,
            "max_antennas":  ground.max_antennas,
        }
    return {
        "node-config-common": settings.get_setting('node-config-common'),
        "nodes":              nodes,
        "epoch-config":       {
            "epoch-dir":    settings.get_setting('epoch.epoch_dir'),
            "file-pattern": settings.get_setting('epoch.file_pattern'),
        },
    }


def generate_scenario(config):
    """
    Generate the sat-config document and the epoch file sequence of a scenario.

    Epoch 0 carries the full initial link set as additions, later epochs are diffs
    at the epoch interval cadence.

    :param config:  Settings or a generator config dict
    :return:        (sat_config dict, list of EpochFile)
    """
    settings = config if isinstance(config, Settings) else Settings(config=config)
    params = WalkerParams.from_config(settings.get_setting('constellation'))
    state = generate_walker(params)
    ground_nodes = ground_nodes_from_settings(settings)
    phy_models = PhyModels(settings.get_setting('phy'))
    policy = QuantizationPolicy.from_settings(settings)
    min_elevation = float(settings.get_setting('ground.min_elevation_deg'))
    start_time = tools.parse_timestamp(settings.get_setting('epoch.start_time'))
    isls = grid_plus_isls(params)

    logger.info("Generating scenario: %s satellites, %s ISLs, %s ground nodes", params.num_satellites, len(isls),
                len(ground_nodes))

    epoch_files = []
    previous = {}
    for index, t in enumerate(epoch_times(settings)):
        snapshot = policy.apply_all(link_snapshot(state, ground_nodes, t, phy_models, min_elevation, isls=isls))
        epoch = diff_snapshots(previous, snapshot, policy, start_time + datetime.timedelta(seconds=t))
        epoch.index = index
        epoch_files.append(epoch)
        previous = snapshot
        logger.debug("Epoch %s: %s del, %s update, %s add", index, len(epoch.links_del), len(epoch.links_update),
                     len(epoch.links_add))

    sat_config = build_sat_config(settings, params, ground_nodes)
    logger.info("Generated %s epoch files", len(epoch_files))
    return sat_config, epoch_files


def write_epoch_file(epoch, directory):
    path = os.path.join(directory, epoch.file_name)
    with open(path, 'w') as f:
        json.dump(epoch.to_dict(), f, indent=2)
    return path


def write_scenario(sat_config, epoch_files, directory):
    """
    Write sat-config.json and the epoch files below a scenario directory

    :param sat_config:
    :param epoch_files:
    :param directory:
    :return: path of the sat-config file
    """
    epoch_dir = os.path.join(directory, sat_config['epoch-config']['epoch-dir'])
    os.makedirs(epoch_dir, exist_ok=True)
    for epoch in epoch_files:
        write_epoch_file(epoch, epoch_dir)
    path = os.path.join(directory, SAT_CONFIG_FILE)
    with open(path, 'w') as f:
        json.dump(sat_config, f, indent=2)
    logger.info("Wrote %s epoch files to '%s'", len(epoch_files), epoch_dir)
    return path


def read_epoch_file(path):
    """
    Parse one epoch file. Malformed JSON raises EpochFormatError with the parse position.

    :param path:
    :return:
    """
    file_name = os.path.basename(path)
    try:
        with open(path, 'r') as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise EpochFormatError("Malformed epoch file '{}' at line {}, column {}: {}".format(file_name, e.lineno,
                                                                                          e.colno, e.msg),
                               file_name=file_name, line=e.lineno, column=e.colno)
    if not isinstance(data, dict):
        raise EpochFormatError("Epoch file '{}' is not a JSON object".format(file_name), file_name=file_name)
    try:
        return EpochFile.from_dict(data, index=epoch_index(file_name))
    except (KeyError, TypeError, AttributeError, ValueError, ConfigurationError) as e:
        raise EpochFormatError("Invalid entry in epoch file '{}': {}".format(file_name, e), file_name=file_name)


def list_epoch_files(epoch_dir, file_pattern):
    """
    Epoch file paths sorted by their numeric index

    :param epoch_dir:
    :param file_pattern:
    :return:
    """
    paths = glob.glob(os.path.join(epoch_dir, file_pattern))
    return sorted(paths, key=lambda path: (epoch_index(path) is None, epoch_index(path) or 0,
                                           tools.natural_sort_key(path)))


def load_epochs(epoch_dir, file_pattern):
    return [read_epoch_file(path) for path in list_epoch_files(epoch_dir, file_pattern)]


def load_sat_config(path):
    try:
        with open(path, 'r') as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            "sat-config '{}' is not valid JSON (line {}, column {})".format(path, e.lineno, e.colno))
    except OSError as e:
        raise ConfigurationError("Unable to read sat-config '{}': {}".format(path, e))
