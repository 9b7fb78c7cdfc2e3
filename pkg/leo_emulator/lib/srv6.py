#!/usr/bin/env python3
# -*- coding: utf-8 -*-

"""
    leo_emulator.lib.srv6.py

    Written by:               LEO Emulator contributors
    Date:                     12 Mar 2026, (2:40 PM)

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
    - Satellite PDU sessions between a user and a gateway, carried by two SRv6 tunnels.
      The forward SID list (gateway to user) is [GSS, USS, U] and the reverse list
      (user to gateway) is [USS, GSS, G]. Both shrink to two segments when GSS = USS.
    - Satellites are referenced by node name ('sat<n>'), which maps one to one on SatelliteId.
    - All timing comes from the simulated clock. Control messages travel along the SID path
      of the tunnel that carries them and take the sum of its link delays.
"""
import copy
import dataclasses
import enum
import logging
import math
from typing import Optional

import networkx as nx

from leo_emulator.lib.errors import ConfigurationError, DomainError, RegistrationError, RoutingLoopError, \
    UnreachableError
from leo_emulator.lib.global_settings import GlobalSettings, named_strategies
from leo_emulator.lib.handover.filters import available_filters, filter_candidates
from leo_emulator.lib.handover.strategies import EndToEnd, LocalMinAccessDelay, min_access_delay_satellite
from leo_emulator.lib.orbit import remaining_visibility, satellite_flat, satellite_sort_key
from leo_emulator.lib.routing import ShortestPathTables, resolve_path

# Configure package logger
logger = logging.getLogger("LeoEmulator.leo_emulator")

__all__ = [
    'CandidatePair',
    'ControlPlane',
    'HandoverConfig',
    'HandoverOutcome',
    'HandoverPlan',
    'NetworkView',
    'Session',
    'SessionState',
    'SidList',
    'evaluate_handover',
    'execute_handover',
    'filter_candidates',
    'heartbeat_check',
    'orbit_hops',
    'register',
    'sid_path',
]

FORWARD = 'forward'
REVERSE = 'reverse'

MAX_SID_SEGMENTS = 3


class SessionState(str, enum.Enum):
    REGISTERING = 'registering'
    ACTIVE = 'active'
    HANDOVER_PENDING = 'handover-pending'
    PAUSED = 'paused'
    LOST = 'lost'


class HeartbeatStatus(str, enum.Enum):
    OK = 'ok'
    MISS = 'miss'
    REREGISTER = 'reregister'


@dataclasses.dataclass(frozen=True)
class SidList:
    segments: tuple

    def __post_init__(self):
        object.__setattr__(self, 'segments', tuple(self.segments))
        if not 2 <= len(self.segments) <= MAX_SID_SEGMENTS:
            raise DomainError("A SID list holds 2 or 3 segments, got {}".format(list(self.segments)))

    def __len__(self):
        return len(self.segments)

    def __iter__(self):
        return iter(self.segments)

    @property
    def terminal(self):
        return self.segments[-1]

    @property
    def landmarks(self):
        return self.segments[:-1]

    def to_addresses(self, hosts):
        """
        SID list as loopback addresses

        :param hosts:   dict of node name -> address
        :return:
        """
        return [hosts.get(segment, segment) for segment in self.segments]


def forward_sid_list(gss, uss, user):
    if gss == uss:
        return SidList((uss, user))
    return SidList((gss, uss, user))


def reverse_sid_list(uss, gss, gateway):
    if gss == uss:
        return SidList((gss, gateway))
    return SidList((uss, gss, gateway))


@dataclasses.dataclass
class Session:
    user: str
    gateway: str
    uss: Optional[str] = None
    gss: Optional[str] = None
    forward_sids: Optional[SidList] = None
    reverse_sids: Optional[SidList] = None
    last_handover_t: float = 0.0
    state: SessionState = SessionState.REGISTERING
    heartbeat_misses: int = 0
    registration_latency_ms: Optional[float] = None

    @property
    def name(self):
        return "{}-{}".format(self.user, self.gateway)

    @property
    def pair(self):
        return self.gss, self.uss

    def snapshot(self):
        return copy.deepcopy(self)


def parse_strategy(strategy):
    """
    Split a strategy string into its name and filter sequence.
    Accepts 'local-min-delay', 'e2e:<ids>' and the named end-to-end strategies.

    :param strategy:
    :return: (name, tuple of filter ids)
    """
    strategy = named_strategies.get(str(strategy).strip(), str(strategy).strip())
    if strategy == 'local-min-delay':
        return strategy, ()
    name, _, ids = strategy.partition(':')
    if name != 'e2e':
        raise ConfigurationError("Unknown handover strategy '{}'".format(strategy), field='strategy')
    try:
        sequence = tuple(int(filter_id) for filter_id in ids.split(',') if filter_id.strip())
    except ValueError:
        raise ConfigurationError("Invalid filter sequence '{}'".format(ids), field='strategy')
    if not sequence:
        raise ConfigurationError("End-to-end strategy needs at least one filter", field='strategy')
    unknown = [filter_id for filter_id in sequence if filter_id not in available_filters()]
    if unknown:
        raise ConfigurationError("Unknown handover filters {} (valid: {})".format(unknown, sorted(available_filters())),
                                 field='strategy')
    return name, sequence


@dataclasses.dataclass(frozen=True)
class HandoverConfig:
    t_lt_s: float = 60.0
    t_el_s: float = 15.0
    control_interval_s: float = 5.0
    t_ho_s: float = 0.080
    strategy: str = "e2e:1,2,4"
    heartbeat_misses: int = 2

    def __post_init__(self):
        for field in ('t_lt_s', 't_el_s', 'control_interval_s', 't_ho_s'):
            if not getattr(self, field) > 0:
                raise ConfigurationError("{} must be > 0, got {}".format(field, getattr(self, field)), field=field)
        if int(self.heartbeat_misses) < 1:
            raise ConfigurationError("heartbeat_misses must be >= 1", field='heartbeat_misses')
        name, sequence = parse_strategy(self.strategy)
        object.__setattr__(self, 'strategy', name if not sequence else "e2e:{}".format(
            ','.join(str(filter_id) for filter_id in sequence)))

    @property
    def strategy_name(self):
        return parse_strategy(self.strategy)[0]

    @property
    def filter_sequence(self):
        return parse_strategy(self.strategy)[1]

    @classmethod
    def from_settings(cls, settings, strategy=None):
        return cls(
            t_lt_s=float(settings.get_setting('handover.t_lt_s')),
            t_el_s=float(settings.get_setting('handover.t_el_s')),
            control_interval_s=float(settings.get_setting('handover.control_interval_s')),
            t_ho_s=float(settings.get_setting('handover.t_ho_s')),
            strategy=strategy or GlobalSettings(settings).get_strategy(),
            heartbeat_misses=int(settings.get_setting('handover.heartbeat_misses')),
        )


def available_strategies():
    return_strategies = {}
    strategy_libs = [
        LocalMinAccessDelay,
        EndToEnd,
    ]
    for strategy_class in strategy_libs:
        for strategy in strategy_class({}).provides():
            return_strategies[strategy] = strategy_class
    return return_strategies


def load_strategy(cfg):
    strategy_class = available_strategies()[cfg.strategy_name]
    return strategy_class({"sequence": list(cfg.filter_sequence)})


@dataclasses.dataclass(frozen=True)
class CandidatePair:
    gss: str
    uss: str
    gss_visibility_s: float
    uss_visibility_s: float
    gss_access_delay_ms: float
    uss_access_delay_ms: float
    gss_rate_mbps: float
    uss_rate_mbps: float
    orbit_hops: float

    @property
    def pair(self):
        return self.gss, self.uss

    @property
    def min_visibility_s(self):
        return min(self.gss_visibility_s, self.uss_visibility_s)

    @property
    def access_delay_sum_ms(self):
        return self.gss_access_delay_ms + self.uss_access_delay_ms

    @property
    def min_rate_mbps(self):
        return min(self.gss_rate_mbps, self.uss_rate_mbps)


@dataclasses.dataclass(frozen=True)
class HandoverPlan:
    gss: str
    uss: str
    t: float
    reason: str

    @property
    def pair(self):
        return self.gss, self.uss


@dataclasses.dataclass
class HandoverOutcome:
    session: Session
    succeeded: bool
    events: list
    # (start, end) in simulated seconds, gateway side
    downlink_pause: tuple
    # (start, end) in simulated seconds, user side. None when the command never arrived
    uplink_pause: Optional[tuple] = None
    # User switch time, None when the command was lost
    switch_t: Optional[float] = None
    previous: Optional[Session] = None


def orbit_hops(a, b, isl_graph):
    """
    ISL hop count between two satellites on the current ISL graph

    :param a:
    :param b:
    :param isl_graph:
    :return:    integer hop count, math.inf when disconnected
    """
    if a == b:
        return 0
    try:
        return nx.shortest_path_length(isl_graph, a, b)
    except (nx.NetworkXNoPath, nx.NodeNotFound):
        return math.inf


class NetworkView(object):
    """
    What the control plane sees of the network at the current epoch: the link set,
    the ISL graph, the route tables and the orbital geometry for visibility forecasts.
    """

    def __init__(self, ground_nodes, state=None, route_tables=None, min_elev_deg=25.0, scan_step_s=5.0,
                 metric="hop-count"):
        self.ground = {node.name: node for node in ground_nodes}
        self.state = state
        self.route_source = route_tables
        self.min_elev_deg = min_elev_deg
        self.scan_step_s = scan_step_s
        self.metric = metric
        self.links = {}
        self.neighbours = {}
        self.isl_graph = nx.Graph()
        self.route_tables = {}
        self.__hops = {}
        self.__visibility = {}

    def node_class(self, name):
        if name in self.ground:
            return self.ground[name].kind
        return 'satellite'

    def is_ground(self, name):
        return name in self.ground

    def update(self, link_set):
        """
        Switch the view to a new link set

        :param link_set:    dict of link key -> LinkAttributes
        :return:
        """
        self.links = dict(link_set)
        self.neighbours = {}
        self.isl_graph = nx.Graph()
        for (a, b), attributes in self.links.items():
            self.neighbours.setdefault(a, {})[b] = attributes
            self.neighbours.setdefault(b, {})[a] = attributes
            if not self.is_ground(a) and not self.is_ground(b):
                self.isl_graph.add_edge(a, b)
        self.__hops = {}
        if self.route_source is not None:
            self.route_tables = self.route_source
        else:
            node_classes = {name: self.node_class(name) for name in self.neighbours}
            self.route_tables = ShortestPathTables(self.links, node_classes, self.metric)

    def link(self, a, b):
        return self.neighbours.get(a, {}).get(b)

    def has_link(self, a, b):
        return self.link(a, b) is not None

    def visible(self, ground):
        """
        Satellites linked to a ground node

        :param ground:
        :return: dict of satellite name -> LinkAttributes
        """
        return {peer: attributes for peer, attributes in self.neighbours.get(ground, {}).items()
                if not self.is_ground(peer)}

    def remaining_visibility(self, satellite, ground, t):
        if self.state is None:
            return math.inf
        key = (satellite, ground, t)
        if key not in self.__visibility:
            self.__visibility[key] = remaining_visibility(self.state, satellite_flat(satellite), self.ground[ground], t,
                                                          self.min_elev_deg, self.scan_step_s)
        return self.__visibility[key]

    def forget_before(self, t):
        self.__visibility = {key: value for key, value in self.__visibility.items() if key[2] >= t}

    def orbit_hops(self, a, b):
        key = (a, b) if a <= b else (b, a)
        if key not in self.__hops:
            self.__hops[key] = orbit_hops(a, b, self.isl_graph)
        return self.__hops[key]

    def measurement_report(self, ground, t):
        """
        Per visible satellite metrics reported by a ground node

        :param ground:
        :param t:
        :return: list of dicts sorted by satellite
        """
        report = []
        for satellite, attributes in self.visible(ground).items():
            report.append({
                "satellite":    satellite,
                "delay_ms":     attributes.delay_ms,
                "rate_mbps":    attributes.rate_mbps,
                "visibility_s": self.remaining_visibility(satellite, ground, t),
            })
        return sorted(report, key=lambda entry: satellite_sort_key(entry['satellite']))

    def candidate_pairs(self, user, gateway, t, uss_only=None):
        """
        Every (gateway-visible, user-visible) satellite pair, the user side taken from its m-report

        :param user:
        :param gateway:
        :param t:
        :param uss_only:    restrict the user side to one satellite
        :return:            list of CandidatePair
        """
        user_report = self.measurement_report(user, t)
        if uss_only is not None:
            user_report = [entry for entry in user_report if entry['satellite'] == uss_only]
        pairs = []
        for gateway_entry in self.measurement_report(gateway, t):
            for user_entry in user_report:
                pairs.append(CandidatePair(
                    gss=gateway_entry['satellite'],
                    uss=user_entry['satellite'],
                    gss_visibility_s=gateway_entry['visibility_s'],
                    uss_visibility_s=user_entry['visibility_s'],
                    gss_access_delay_ms=gateway_entry['delay_ms'],
                    uss_access_delay_ms=user_entry['delay_ms'],
                    gss_rate_mbps=gateway_entry['rate_mbps'],
                    uss_rate_mbps=user_entry['rate_mbps'],
                    orbit_hops=self.orbit_hops(gateway_entry['satellite'], user_entry['satellite']),
                ))
        return pairs

    def path_delay_ms(self, path):
        return sum(self.link(a, b).delay_ms for a, b in zip(path, path[1:]))

    def path_loss(self, path):
        delivered = 1.0
        for a, b in zip(path, path[1:]):
            delivered *= 1.0 - self.link(a, b).loss_fraction
        return 1.0 - delivered

    def isl_hops(self, path):
        return sum(1 for a, b in zip(path, path[1:]) if not self.is_ground(a) and not self.is_ground(b))


def sid_path(session, direction, view, route_tables=None):
    """
    Node sequence a tunnel follows.

    Consecutive satellite segments are expanded over the infrastructure routes, access hops
    between a ground node and its serving satellite must be direct links.

    :param session:
    :param direction:       'forward' (gateway to user) or 'reverse' (user to gateway)
    :param view:            NetworkView
    :param route_tables:    route tables to expand segments with, the view's by default
    :return:                ordered node list
    """
    if direction == FORWARD:
        origin, sids = session.gateway, session.forward_sids
    elif direction == REVERSE:
        origin, sids = session.user, session.reverse_sids
    else:
        raise ValueError("Unknown tunnel direction '{}'".format(direction))
    if sids is None:
        raise UnreachableError("Session '{}' has no {} tunnel".format(session.name, direction), source=origin)
    tables = view.route_tables if route_tables is None else route_tables
    path = [origin]
    for segment in sids:
        current = path[-1]
        if view.is_ground(current) or view.is_ground(segment):
            if not view.has_link(current, segment):
                raise UnreachableError("Access hop {}-{} is down".format(current, segment), source=current,
                                       destination=segment)
            path.append(segment)
        else:
            path.extend(resolve_path(tables, current, segment)[1:])
    return path


def _tunnel_paths(session, view):
    return sid_path(session, REVERSE, view), sid_path(session, FORWARD, view)


def _event(t, session, event, old_pair=None, new_pair=None):
    return {
        "t":        round(t, 6),
        "session":  session.name,
        "event":    event,
        "old_pair": list(old_pair) if old_pair is not None else None,
        "new_pair": list(new_pair) if new_pair is not None else None,
    }


def register(user, gateway, t, view, cfg, strategy=None):
    """
    Establish a session. The user picks the USS with the lowest access delay and
    the gateway picks the GSS according to the handover strategy.

    :param user:
    :param gateway:
    :param t:
    :param view:
    :param cfg:
    :param strategy:
    :return:    active Session
    """
    user_visible = view.visible(user)
    gateway_visible = view.visible(gateway)
    if not user_visible or not gateway_visible:
        side = user if not user_visible else gateway
        raise RegistrationError("No satellite visible to '{}' at t={}".format(side, t))
    strategy = strategy or load_strategy(cfg)
    uss = min_access_delay_satellite(user_visible)
    gss = strategy.registration_gss(user, uss, gateway, view, t, cfg)
    session = Session(
        user=user,
        gateway=gateway,
        uss=uss,
        gss=gss,
        forward_sids=forward_sid_list(gss, uss, user),
        reverse_sids=reverse_sid_list(uss, gss, gateway),
        last_handover_t=t,
        state=SessionState.ACTIVE,
    )
    try:
        request, accept = _tunnel_paths(session, view)
    except (UnreachableError, RoutingLoopError) as e:
        raise RegistrationError("Registration of '{}' failed: {}".format(session.name, e))
    session.registration_latency_ms = view.path_delay_ms(request) + view.path_delay_ms(accept)
    logger.info("Registered '%s' on GSS %s, USS %s", session.name, gss, uss)
    return session


def handover_triggered(session, t, cfg, view):
    """
    Lifetime or elapsed-time trigger of the end-to-end strategies

    :return: the trigger reason or None
    """
    lifetime = min(view.remaining_visibility(session.uss, session.user, t),
                   view.remaining_visibility(session.gss, session.gateway, t))
    if not view.has_link(session.user, session.uss) or not view.has_link(session.gateway, session.gss):
        lifetime = 0.0
    if lifetime < cfg.t_lt_s:
        return 'lifetime'
    if t - session.last_handover_t > cfg.t_el_s:
        return 'elapsed'
    return None


def evaluate_handover(session, t, cfg, view, strategy=None):
    """
    Decide whether an active session should move to another GSS-USS pair

    :param session:
    :param t:
    :param cfg:
    :param view:
    :param strategy:
    :return:    HandoverPlan or None
    """
    if session.state != SessionState.ACTIVE:
        return None
    strategy = strategy or load_strategy(cfg)
    reason = 'periodic'
    if strategy.uses_triggers:
        reason = handover_triggered(session, t, cfg, view)
        if reason is None:
            return None
    selected = strategy.select(session, view, t, cfg)
    if selected is None or tuple(selected) == session.pair:
        return None
    return HandoverPlan(gss=selected[0], uss=selected[1], t=t, reason=reason)


def _delivery(path_of, view, rng):
    """
    One-way delay of a control message in ms, None when it is lost

    :param path_of: callable returning the node path, may raise on a broken tunnel
    :param view:
    :param rng:     numpy Generator for random link loss, or None
    :return:
    """
    try:
        path = path_of()
    except (UnreachableError, RoutingLoopError):
        return None, None
    delay = view.path_delay_ms(path)
    if rng is not None and rng.random() < view.path_loss(path):
        return None, delay
    return delay, delay


def execute_handover(session, plan, t, cfg, view, rng=None):
    """
    Run the Handover Command / Handover Complete exchange.

    The gateway holds downlink traffic from the command until the completion arrives. The
    user switches when the command arrives, holds uplink traffic for t_ho_s and then sends the
    completion over the new tunnel. A completion missing at the deadline cancels the handover and
    restores the previous session.

    :param session:
    :param plan:
    :param t:
    :param cfg:
    :param view:
    :param rng:     numpy Generator for control message loss
    :return:        HandoverOutcome
    """
    previous = session.snapshot()
    if plan.pair == session.pair:
        return HandoverOutcome(session=session, succeeded=False, events=[], downlink_pause=(t, t),
                               previous=previous)
    updated = dataclasses.replace(
        previous,
        gss=plan.gss,
        uss=plan.uss,
        forward_sids=forward_sid_list(plan.gss, plan.uss, session.user),
        reverse_sids=reverse_sid_list(plan.uss, plan.gss, session.gateway),
    )
    events = [_event(t, session, 'ho-command', session.pair, plan.pair)]

    command_delay, command_expected = _delivery(lambda: sid_path(previous, FORWARD, view), view, rng)
    complete_delay, complete_expected = _delivery(lambda: sid_path(updated, REVERSE, view), view, rng)
    deadline = t + cfg.t_ho_s + ((command_expected or 0.0) + (complete_expected or 0.0)) / 1000.0

    switch_t = None
    uplink_pause = None
    if command_delay is not None:
        switch_t = t + command_delay / 1000.0
        uplink_pause = (switch_t, switch_t + cfg.t_ho_s)

    if command_delay is not None and complete_delay is not None:
        updated.state = SessionState.ACTIVE
        updated.last_handover_t = deadline
        updated.heartbeat_misses = 0
        events.append(_event(deadline, session, 'ho-complete', session.pair, plan.pair))
        logger.info("Handover of '%s' from %s to %s completed at t=%.3f", session.name, session.pair, plan.pair,
                    deadline)
        return HandoverOutcome(session=updated, succeeded=True, events=events, downlink_pause=(t, deadline),
                               uplink_pause=uplink_pause, switch_t=switch_t, previous=previous)

    events.append(_event(deadline, session, 'ho-cancel', session.pair, plan.pair))
    logger.warning("Handover of '%s' to %s cancelled at t=%.3f: %s lost", session.name, plan.pair, deadline,
                   'command' if command_delay is None else 'completion')
    return HandoverOutcome(session=previous, succeeded=False, events=events, downlink_pause=(t, deadline),
                           uplink_pause=uplink_pause, switch_t=switch_t, previous=previous)


def heartbeat_check(session, t, cfg, view):
    """
    Exchange heartbeats over both tunnels. The session is lost after cfg.heartbeat_misses
    consecutive failures.

    :param session:
    :param t:
    :param cfg:
    :param view:
    :return: HeartbeatStatus
    """
    try:
        _tunnel_paths(session, view)
    except (UnreachableError, RoutingLoopError) as e:
        session.heartbeat_misses += 1
        logger.debug("Heartbeat %s/%s missed for '%s' at t=%s: %s", session.heartbeat_misses, cfg.heartbeat_misses,
                     session.name, t, e)
        if session.heartbeat_misses >= cfg.heartbeat_misses:
            session.state = SessionState.LOST
            return HeartbeatStatus.REREGISTER
        return HeartbeatStatus.MISS
    session.heartbeat_misses = 0
    return HeartbeatStatus.OK


@dataclasses.dataclass
class Transition:
    """
    Tunnel change of one session during a handover, as seen by the data plane
    """
    start: float
    previous: Session
    switch_t: Optional[float]
    complete_t: Optional[float]
    downlink_pause: tuple
    uplink_pause: Optional[tuple]


class ControlPlane(object):
    """
    Runs the session state machines of all sessions at every control interval
    """

    def __init__(self, view, cfg, sessions, rng=None):
        """
        :param view:        NetworkView
        :param cfg:         HandoverConfig
        :param sessions:    iterable of (user, gateway)
        :param rng:         numpy Generator for control message loss
        """
        self.view = view
        self.cfg = cfg
        self.rng = rng
        self.strategy = load_strategy(cfg)
        self.sessions = {}
        for user, gateway in sessions:
            session = Session(user=user, gateway=gateway)
            self.sessions[session.name] = session
        self.events = []
        self.transitions = {name: [] for name in self.sessions}
        self.pauses = {name: [] for name in self.sessions}

    def __log(self, event):
        self.events.append(event)

    def __try_register(self, session, t):
        try:
            registered = register(session.user, session.gateway, t, self.view, self.cfg, strategy=self.strategy)
        except RegistrationError as e:
            logger.debug("Registration of '%s' retried next interval: %s", session.name, e)
            session.state = SessionState.REGISTERING
            return session
        self.__log(_event(t, registered, 'register', None, registered.pair))
        return registered

    def step(self, t):
        """
        One control interval for every session, in name order

        :param t:
        :return:
        """
        for name in sorted(self.sessions):
            self.sessions[name] = self.__step_session(self.sessions[name], t)

    def __step_session(self, session, t):
        if session.state in (SessionState.REGISTERING, SessionState.LOST):
            return self.__try_register(session, t)
        status = heartbeat_check(session, t, self.cfg, self.view)
        if status == HeartbeatStatus.REREGISTER:
            self.__log(_event(t, session, 'reregister', session.pair, None))
            return self.__try_register(session, t)
        if status == HeartbeatStatus.MISS:
            return session
        plan = evaluate_handover(session, t, self.cfg, self.view, strategy=self.strategy)
        if plan is None:
            return session
        session.state = SessionState.HANDOVER_PENDING
        outcome = execute_handover(session, plan, t, self.cfg, self.view, rng=self.rng)
        for event in outcome.events:
            self.__log(event)
        outcome.previous.state = SessionState.ACTIVE
        self.pauses[session.name].append(('downlink',) + tuple(outcome.downlink_pause))
        if outcome.uplink_pause is not None:
            self.pauses[session.name].append(('uplink',) + tuple(outcome.uplink_pause))
        self.transitions[session.name].append(Transition(
            start=t,
            previous=outcome.previous,
            switch_t=outcome.switch_t if outcome.succeeded else None,
            complete_t=outcome.downlink_pause[1] if outcome.succeeded else None,
            downlink_pause=outcome.downlink_pause,
            uplink_pause=outcome.uplink_pause,
        ))
        outcome.session.state = SessionState.ACTIVE
        return outcome.session

    def pause_windows(self, name, direction):
        return [(start, end) for kind, start, end in self.pauses[name] if kind == direction]

    def state_at(self, name, t):
        """
        Session state at a simulated time, PAUSED while a traffic hold is in force
        """
        session = self.sessions[name]
        for _kind, start, end in self.pauses[name]:
            if start <= t < end:
                return SessionState.PAUSED
        return session.state

    def handover_count(self, name=None):
        return sum(1 for event in self.events
                   if event['event'] == 'ho-complete' and (name is None or event['session'] == name))
