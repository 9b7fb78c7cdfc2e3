#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.harness.py

    Written by:               LEO Emulator contributors
    Date:                     13 Mar 2026, (4:05 PM)

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
    - Experiments replay the epoch files of a scenario through the state store and the node
      agents, run the session control plane every control interval and send ping probes from
      each user to its gateway over the SRv6 tunnels.
    - Probe flight times are computed from the path delays at send time. Probes sent while
      traffic is held wait in the hold queue until the pause ends.
    - Each user draws its probe losses from its own random stream, seeded from the experiment
      seed and the user's position in the session list.
"""
import csv
import dataclasses
import json
import logging
import math
import os
from typing import Optional

import numpy as np

from leo_emulator.lib import tools
from leo_emulator.lib.agent import deploy_agents
from leo_emulator.lib.errors import ConfigurationError, RoutingLoopError, ScenarioInconsistencyError, \
    UnreachableError
from leo_emulator.lib.orbit import EARTH_RADIUS_KM, WalkerParams, generate_walker
from leo_emulator.lib.placement import WorkerSpec, apply_placement, build_placement_graph, link_activity_weights, \
    node_demands, partition
from leo_emulator.lib.routing import OracleConfig, oracle_compute
from leo_emulator.lib.scenario import SAT_CONFIG_FILE, build_node_configs, generate_scenario, \
    ground_nodes_from_settings, list_epoch_files, load_epochs, load_sat_config, write_scenario
from leo_emulator.lib.settings import Settings
from leo_emulator.lib.srv6 import FORWARD, REVERSE, ControlPlane, HandoverConfig, NetworkView, SessionState, sid_path
from leo_emulator.lib.statestore import EpochRunner, KeyValueStore, load_static_config

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

SCENARIO_SETTINGS_FILE = "scenario.json"
TRACES_FILE = "traces.csv"
HANDOVERS_FILE = "handovers.jsonl"
SUMMARY_FILE = "summary.json"

TRACE_FIELDS = ['t_s', 'user', 'gateway', 'rtt_ms', 'lost', 'hops', 'uss', 'gss']

RTT_QUANTILES = {
    "p50": 50,
    "p90": 90,
    "p99": 99,
}


def load_settings(scenario):
    """
    Settings of a scenario given either as a generator config file or as a generated scenario directory

    :param scenario:
    :return:
    """
    if os.path.isdir(scenario):
        return Settings(path=os.path.join(scenario, SCENARIO_SETTINGS_FILE))
    return Settings(path=scenario)


@dataclasses.dataclass
class ExperimentConfig:
    scenario: str
    handover: HandoverConfig = dataclasses.field(default_factory=HandoverConfig)
    duration_s: Optional[float] = None
    probe_period_ms: float = 10.0
    seed: int = 1
    loss_enabled: bool = True
    # Pinned (user, gateway) pairs. Users not listed use their closest gateway
    sessions: tuple = ()

    def __post_init__(self):
        if not self.probe_period_ms > 0:
            raise ConfigurationError("probe_period_ms must be > 0", field='probe_period_ms')
        if self.duration_s is not None and self.duration_s < 0:
            raise ConfigurationError("duration_s must be >= 0", field='duration_s')

    @classmethod
    def from_settings(cls, settings, scenario, strategy=None, duration_s=None, seed=None):
        experiment = settings.get_setting('experiment')
        return cls(
            scenario=scenario,
            handover=HandoverConfig.from_settings(settings, strategy=strategy),
            duration_s=duration_s,
            probe_period_ms=float(experiment.get('probe_period_ms', 10.0)),
            seed=int(seed if seed is not None else experiment.get('seed', 1)),
            loss_enabled=bool(experiment.get('loss_enabled', True)),
            sessions=tuple(tuple(pair) for pair in experiment.get('sessions', [])),
        )


@dataclasses.dataclass
class ProbeTrace:
    user: str
    gateway: str
    send_t: np.ndarray
    # NaN for lost probes
    rtt_ms: np.ndarray
    lost: np.ndarray
    # ISL hops on the user to gateway path, -1 without a tunnel
    hops: np.ndarray
    uss: np.ndarray
    gss: np.ndarray

    @classmethod
    def from_chunks(cls, user, gateway, chunks):
        def column(index, dtype):
            if not chunks:
                return np.array([], dtype=dtype)
            return np.concatenate([chunk[index] for chunk in chunks]).astype(dtype)

        return cls(user=user, gateway=gateway, send_t=column(0, float), rtt_ms=column(1, float),
                   lost=column(2, bool), hops=column(3, int), uss=column(4, object), gss=column(5, object))

    def __len__(self):
        return len(self.send_t)

    def received(self):
        return self.rtt_ms[~self.lost]

    def rows(self):
        for index in range(len(self.send_t)):
            lost = bool(self.lost[index])
            hops = int(self.hops[index])
            yield [
                "{:.3f}".format(self.send_t[index]),
                self.user,
                self.gateway,
                "" if lost else "{:.3f}".format(self.rtt_ms[index]),
                "1" if lost else "0",
                "" if hops < 0 else str(hops),
                self.uss[index] or "",
                self.gss[index] or "",
            ]


@dataclasses.dataclass
class ExperimentResult:
    traces: dict
    events: list
    summary: dict
    store: KeyValueStore = None


def great_circle_km(a, b):
    lat_a, lon_a = math.radians(a.latitude_deg), math.radians(a.longitude_deg)
    lat_b, lon_b = math.radians(b.latitude_deg), math.radians(b.longitude_deg)
    cos_angle = (math.sin(lat_a) * math.sin(lat_b) +
                 math.cos(lat_a) * math.cos(lat_b) * math.cos(lon_a - lon_b))
    return EARTH_RADIUS_KM * math.acos(max(-1.0, min(1.0, cos_angle)))


def closest_gateway_sessions(ground_nodes, pinned=()):
    """
    One (user, gateway) session per user, the gateway being the closest by great-circle distance
    unless the user is pinned to one.

    :param ground_nodes:
    :param pinned:  iterable of (user, gateway)
    :return:        list of (user, gateway) in natural user order
    """
    pinned = dict(pinned)
    gateways = [node for node in ground_nodes if node.kind == 'gateway']
    by_name = {node.name: node for node in ground_nodes}
    sessions = []
    for user in sorted((node for node in ground_nodes if node.kind == 'user'),
                       key=lambda node: tools.natural_sort_key(node.name)):
        if user.name in pinned:
            gateway = pinned[user.name]
            if by_name.get(gateway) is None or by_name[gateway].kind != 'gateway':
                raise ConfigurationError("User '{}' is pinned to unknown gateway '{}'".format(user.name, gateway),
                                         field='sessions')
            sessions.append((user.name, gateway))
            continue
        if not gateways:
            raise ConfigurationError("Scenario has users but no gateway", field='ground')
        closest = min(gateways, key=lambda gateway: (great_circle_km(user, gateway),
                                                     tools.natural_sort_key(gateway.name)))
        sessions.append((user.name, closest.name))
    return sessions


def node_classes_of(sat_config):
    return {name: node.get('type', 'satellite') for name, node in sat_config.get('nodes', {}).items()}


def inject_oracle_routes(settings, sat_config, epoch_files, assignments=None):
    """
    Add oracle route tasks to the epoch files when routing is enabled

    :return: list of EpochFile
    """
    if not settings.get_setting('routing.enabled'):
        return epoch_files
    if assignments is None:
        _nodes, assignments = build_node_configs(sat_config)
    loopbacks = {name: assignment.loopback() for name, assignment in assignments.items() if assignment.loopback()}
    result = oracle_compute(epoch_files, node_classes_of(sat_config), OracleConfig.from_settings(settings),
                            loopbacks=loopbacks)
    return result.epoch_files


def generate(settings, directory):
    """
    Generate a scenario with its oracle routes and write it to a directory

    :param settings:
    :param directory:
    :return: (sat_config, epoch files)
    """
    sat_config, epoch_files = generate_scenario(settings)
    epoch_files = inject_oracle_routes(settings, sat_config, epoch_files)
    write_scenario(sat_config, epoch_files, directory)
    with open(os.path.join(directory, SCENARIO_SETTINGS_FILE), 'w') as f:
        json.dump(settings.dump(), f, indent=2)
    return sat_config, epoch_files


def prepare_scenario(settings, scenario, duration_s=None):
    """
    sat-config and epoch files of a scenario.

    A generated scenario directory is read back, a generator config is generated in memory up to
    the requested duration.

    :param settings:
    :param scenario:
    :param duration_s:
    :return: (sat_config, list of EpochFile)
    """
    if os.path.isdir(scenario):
        epoch_dir = os.path.join(scenario, settings.get_setting('epoch.epoch_dir'))
        if not list_epoch_files(epoch_dir, settings.get_setting('epoch.file_pattern')):
            raise ConfigurationError("Scenario directory '{}' holds no epoch files".format(scenario),
                                     field='epoch_dir')
        sat_config = load_sat_config(os.path.join(scenario, SAT_CONFIG_FILE))
        epoch_files = load_epochs(epoch_dir, settings.get_setting('epoch.file_pattern'))
        return sat_config, epoch_files
    if duration_s is not None:
        settings.set_setting('epoch.duration_s', float(duration_s))
    sat_config, epoch_files = generate_scenario(settings)
    return sat_config, inject_oracle_routes(settings, sat_config, epoch_files)


def place_nodes(settings, nodes, epoch_files, seed=1):
    """
    Assign nodes to the configured workers. Without workers every node stays unplaced.

    :return: dict of node name -> worker name
    """
    workers = [WorkerSpec.from_config(worker) for worker in settings.get_setting('workers')]
    if not workers:
        logger.info("No workers configured, skipping placement")
        return {}
    graph = build_placement_graph(node_demands(nodes), link_activity_weights(epoch_files))
    assignment = partition(graph, workers, seed=seed)
    apply_placement(nodes, assignment)
    return assignment


def init_store(settings, sat_config, epoch_files=(), store=None, seed=1):
    """
    Load a scenario's static configuration into a state store: workers, placed node
    configurations, host mappings and the epoch configuration.

    :return: (store, nodes, assignments)
    """
    store = store if store is not None else KeyValueStore()
    nodes, assignments = build_node_configs(sat_config)
    place_nodes(settings, nodes, list(epoch_files), seed=seed)
    workers = [WorkerSpec.from_config(worker).to_dict() for worker in settings.get_setting('workers')]
    load_static_config(store, nodes, assignments, workers=workers, epoch_config=sat_config.get('epoch-config'))
    return store, nodes, assignments


def hold(times, windows):
    """
    Release times of packets through a hold queue: a packet arriving inside a window leaves at its end

    :param times:   numpy array of arrival times
    :param windows: iterable of (start, end)
    :return:
    """
    released = np.array(times, dtype=float, copy=True)
    for start, end in sorted(windows):
        inside = (released >= start) & (released < end)
        released[inside] = end
    return released


class _TunnelState(object):
    """
    Delays, loss and hop count of both tunnels of a session at the current epoch
    """

    def __init__(self, session, view):
        self.up_delay = math.nan
        self.down_delay = math.nan
        self.up_loss = 1.0
        self.down_loss = 1.0
        self.hops = -1
        self.up_path = None
        self.down_path = None
        if session is None or session.state != SessionState.ACTIVE:
            return
        try:
            self.up_path = sid_path(session, REVERSE, view)
            self.down_path = sid_path(session, FORWARD, view)
        except (UnreachableError, RoutingLoopError):
            return
        self.up_delay = view.path_delay_ms(self.up_path)
        self.down_delay = view.path_delay_ms(self.down_path)
        self.up_loss = view.path_loss(self.up_path)
        self.down_loss = view.path_loss(self.down_path)
        self.hops = view.isl_hops(self.up_path)


def simulate_probe(session, t, view, uplink_pauses=(), downlink_pauses=(), rng=None, previous=None, switch_t=None,
                   complete_t=None):
    """
    Round trip of one ping probe from the user to the gateway and back.

    :param session:         current Session
    :param t:               send time
    :param view:            NetworkView
    :param uplink_pauses:   user side hold windows
    :param downlink_pauses: gateway side hold windows
    :param rng:             numpy Generator, None disables random loss
    :param previous:        Session before an ongoing handover
    :param switch_t:        time the user moved to the current tunnel
    :param complete_t:      time the gateway moved to the current tunnel
    :return:                rtt in ms or None when lost
    """
    rtt, lost, _hops = _probe_batch(np.array([float(t)]), _TunnelState(session, view),
                                    _TunnelState(previous, view) if previous is not None else None,
                                    switch_t, complete_t, uplink_pauses, downlink_pauses, rng)
    return None if lost[0] else float(rtt[0])


def _probe_batch(send_t, current, previous, switch_t, complete_t, uplink_pauses, downlink_pauses, rng):
    old = previous if previous is not None else current
    up_release = hold(send_t, uplink_pauses)
    on_new_up = up_release >= switch_t if switch_t is not None else np.ones(len(send_t), dtype=bool)
    up_delay = np.where(on_new_up, current.up_delay, old.up_delay)
    up_loss = np.where(on_new_up, current.up_loss, old.up_loss)
    hops = np.where(on_new_up, current.hops, old.hops)

    at_gateway = up_release + up_delay / 1000.0
    down_release = hold(at_gateway, downlink_pauses)
    on_new_down = down_release >= complete_t if complete_t is not None else np.ones(len(send_t), dtype=bool)
    down_delay = np.where(on_new_down, current.down_delay, old.down_delay)
    down_loss = np.where(on_new_down, current.down_loss, old.down_loss)

    rtt = (down_release + down_delay / 1000.0 - send_t) * 1000.0
    lost = np.isnan(rtt)
    if rng is not None:
        delivered = (1.0 - up_loss) * (1.0 - down_loss)
        lost |= rng.random(len(send_t)) >= delivered
    rtt = np.where(lost, np.nan, rtt)
    return rtt, lost, hops


class Experiment(object):
    """
    One experiment run over a prepared scenario
    """

    def __init__(self, cfg, settings=None):
        self.cfg = cfg
        self.settings = settings if settings is not None else load_settings(cfg.scenario)
        self.epoch_interval_s = float(self.settings.get_setting('epoch.epoch_interval_s'))
        self.ground_nodes = ground_nodes_from_settings(self.settings)
        self.state = generate_walker(WalkerParams.from_config(self.settings.get_setting('constellation')))
        self.store = None
        self.agents = None
        self.view = None
        self.control = None
        self.chunks = {}
        self.rngs = {}

    def __check_duration(self, duration):
        steps = duration / self.epoch_interval_s
        if not math.isclose(steps, round(steps), abs_tol=1e-9):
            raise ConfigurationError("Duration {} s is not a multiple of the epoch interval {} s".format(
                duration, self.epoch_interval_s), field='duration_s')

    def __setup(self, sat_config, epoch_files):
        self.store, _nodes, _assignments = init_store(self.settings, sat_config, epoch_files, seed=self.cfg.seed)
        self.agents = deploy_agents(self.store)
        routed = bool(self.settings.get_setting('routing.enabled'))
        self.view = NetworkView(
            self.ground_nodes,
            state=self.state,
            route_tables=self.agents if routed else None,
            min_elev_deg=float(self.settings.get_setting('ground.min_elevation_deg')),
            scan_step_s=self.epoch_interval_s,
            metric=self.settings.get_setting('routing.metric'),
        )
        sessions = closest_gateway_sessions(self.ground_nodes, self.cfg.sessions)
        self.control = ControlPlane(self.view, self.cfg.handover, sessions,
                                    rng=np.random.default_rng([self.cfg.seed, len(sessions)]))
        for index, (user, gateway) in enumerate(sessions):
            name = "{}-{}".format(user, gateway)
            self.chunks[name] = []
            self.rngs[name] = np.random.default_rng([self.cfg.seed, index])

    def __timeline(self, epoch_files, duration):
        start = epoch_files[0].time
        events = []
        for epoch in epoch_files:
            offset = (epoch.time - start).total_seconds()
            if offset > duration + 1e-9:
                break
            events.append((offset, 0, epoch))
        interval = self.cfg.handover.control_interval_s
        count = int(math.floor(duration / interval + 1e-9))
        for k in range(count + 1):
            if k * interval < duration - 1e-9 or duration == 0:
                events.append((k * interval, 1, None))
        return sorted(events, key=lambda event: (event[0], event[1]))

    def __probe_segment(self, start, end):
        period_s = self.cfg.probe_period_ms / 1000.0
        first = int(math.ceil(start / period_s - 1e-9))
        last = int(math.ceil(end / period_s - 1e-9))
        if last <= first:
            return
        send_t = np.arange(first, last) * period_s
        for name in sorted(self.control.sessions):
            session = self.control.sessions[name]
            current = _TunnelState(session, self.view)
            previous, switch_t, complete_t = None, None, None
            transitions = self.control.transitions[name]
            if transitions and transitions[-1].downlink_pause[1] > start:
                transition = transitions[-1]
                if transition.complete_t is not None:
                    previous = _TunnelState(transition.previous, self.view)
                    switch_t, complete_t = transition.switch_t, transition.complete_t
            rng = self.rngs[name] if self.cfg.loss_enabled else None
            uplink = [window for window in self.control.pause_windows(name, 'uplink') if window[1] > start]
            downlink = [window for window in self.control.pause_windows(name, 'downlink') if window[1] > start]
            rtt, lost, hops = _probe_batch(send_t, current, previous, switch_t, complete_t, uplink, downlink, rng)
            uss = np.full(len(send_t), session.uss or "", dtype=object)
            gss = np.full(len(send_t), session.gss or "", dtype=object)
            if switch_t is not None:
                switched = send_t >= switch_t
                uss = np.where(switched, uss, transition.previous.uss)
                gss = np.where(switched, gss, transition.previous.gss)
            self.chunks[name].append((send_t, rtt, lost, hops, uss, gss))

    def run(self, sat_config, epoch_files):
        if not epoch_files:
            raise ConfigurationError("Scenario has no epoch files", field='epoch_dir')
        span = (epoch_files[-1].time - epoch_files[0].time).total_seconds()
        duration = self.cfg.duration_s if self.cfg.duration_s is not None else span
        self.__check_duration(duration)
        if duration > span + 1e-9:
            raise ConfigurationError("Duration {} s exceeds the scenario span {} s".format(duration, span),
                                     field='duration_s')
        self.__setup(sat_config, epoch_files)
        runner = EpochRunner(self.store, time_scale=0)
        timeline = self.__timeline(epoch_files, duration)
        logger.info("Running experiment: strategy %s, %.0f s, %s sessions", self.cfg.handover.strategy, duration,
                    len(self.control.sessions))
        for position, (t, kind, epoch) in enumerate(timeline):
            if kind == 0:
                summary = runner.apply(epoch)
                if summary.rejected:
                    raise ScenarioInconsistencyError(
                        "Epoch {} rejected {} entries".format(epoch.index, len(summary.rejected)),
                        epoch_index=epoch.index)
                self.view.update(self.store.link_set())
                self.view.forget_before(t)
            else:
                self.control.step(t)
            following = timeline[position + 1][0] if position + 1 < len(timeline) else duration
            if following > t:
                self.__probe_segment(t, following)
        self.agents.stop()
        return self.result(duration)

    def result(self, duration):
        traces = {}
        for name in sorted(self.chunks, key=tools.natural_sort_key):
            session = self.control.sessions[name]
            traces[session.user] = ProbeTrace.from_chunks(session.user, session.gateway, self.chunks[name])
        return ExperimentResult(traces=traces, events=list(self.control.events),
                                summary=summarise(traces, self.control, self.cfg, duration), store=self.store)


def _rtt_statistics(rtt):
    if len(rtt) == 0:
        return {"min": None, "max": None, **{label: None for label in RTT_QUANTILES}}
    stats = {"min": round(float(np.min(rtt)), 3), "max": round(float(np.max(rtt)), 3)}
    for label, quantile in RTT_QUANTILES.items():
        stats[label] = round(float(np.percentile(rtt, quantile)), 3)
    return stats


def summarise(traces, control, cfg, duration):
    users = {}
    max_hops = 0
    for user, trace in traces.items():
        name = "{}-{}".format(user, trace.gateway)
        user_max_hops = int(trace.hops.max()) if len(trace) else -1
        max_hops = max(max_hops, user_max_hops)
        users[user] = {
            "gateway":      trace.gateway,
            "probes":       len(trace),
            "lost":         int(trace.lost.sum()),
            "handovers":    control.handover_count(name),
            "max_isl_hops": user_max_hops,
            "rtt_ms":       _rtt_statistics(trace.received()),
        }
    return {
        "strategy":        cfg.handover.strategy,
        "seed":            cfg.seed,
        "duration_s":      duration,
        "probe_period_ms": cfg.probe_period_ms,
        "handover_count":  control.handover_count(),
        "max_isl_hops":    max_hops,
        "users":           users,
    }


def run_experiment(cfg, settings=None):
    """
    Replay a scenario and probe every session.

    :param cfg:         ExperimentConfig
    :param settings:    Settings of the scenario, loaded from cfg.scenario when missing
    :return:            ExperimentResult
    """
    experiment = Experiment(cfg, settings=settings)
    sat_config, epoch_files = prepare_scenario(experiment.settings, cfg.scenario, duration_s=cfg.duration_s)
    return experiment.run(sat_config, epoch_files)


def write_traces(traces, path):
    with open(path, 'w', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(TRACE_FIELDS)
        for user in sorted(traces, key=tools.natural_sort_key):
            writer.writerows(traces[user].rows())


def write_events(events, path):
    with open(path, 'w') as f:
        for event in events:
            f.write(json.dumps(event, sort_keys=True) + '\n')


def write_summary(summary, path):
    with open(path, 'w') as f:
        json.dump(summary, f, indent=2, sort_keys=True)
        f.write('\n')


def write_results(result, directory):
    """
    Write traces, the handover log and the summary of a run

    :param result:
    :param directory:
    :return: dict of output name -> path
    """
    os.makedirs(directory, exist_ok=True)
    paths = {
        "traces":    os.path.join(directory, TRACES_FILE),
        "handovers": os.path.join(directory, HANDOVERS_FILE),
        "summary":   os.path.join(directory, SUMMARY_FILE),
    }
    write_traces(result.traces, paths['traces'])
    write_events(result.events, paths['handovers'])
    write_summary(result.summary, paths['summary'])
    logger.info("Wrote results to '%s'", directory)
    return paths


def read_trace_rows(path):
    if not os.path.exists(path):
        return []
    with open(path, 'r', newline='') as f:
        return list(csv.DictReader(f))


def report(run_dir, out_path, fmt='csv'):
    """
    Export the traces of a run as CSV or JSON-lines. A run without traces exports a header only.

    :param run_dir:
    :param out_path:
    :param fmt:         'csv' or 'jsonl'
    :return:            number of rows written
    """
    rows = read_trace_rows(os.path.join(run_dir, TRACES_FILE))
    if fmt == 'csv':
        with open(out_path, 'w', newline='') as f:
            writer = csv.DictWriter(f, fieldnames=TRACE_FIELDS, lineterminator='\n')
            writer.writeheader()
            writer.writerows(rows)
    elif fmt == 'jsonl':
        with open(out_path, 'w') as f:
            for row in rows:
                f.write(json.dumps(row, sort_keys=True) + '\n')
    else:
        raise ConfigurationError("Unknown report format '{}'".format(fmt), field='format')
    return len(rows)


def load_summary(run_dir):
    path = os.path.join(run_dir, SUMMARY_FILE)
    if not os.path.exists(path):
        return {}
    with open(path, 'r') as f:
        return json.load(f)
