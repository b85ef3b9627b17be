# -*- coding: utf-8 -*-
#
# repair.py
#
"""Planning and execution of node and group repairs.

Node repairs stay inside one group, except for the distributed parity,
which is rebuilt from the MSR parity blocks of both neighbours.

A failed group g is recovered cooperatively. On the left side group g - 2
sends its MSR parity to g - 1, which adds it to its own distributed
parity. The sum is the parity of g, from which g decodes its message
(this needs u - 1 >= r and Δ >= r). The right side mirrors this with
g + 1 and g + 2. Afterwards g rebuilds its distributed parity from the
MSR parity of both neighbours.

Plans are lists of ``Transfer`` and ``Compute`` steps. ``execute_plan``
interprets them against a ``ClusterState``: a group can only use what it
holds locally or has been sent, so the ledger accounts for every symbol
that crosses a group boundary.

"""

import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .codec import NodeId, NodeKind, adjacent_groups, get_code
from .errors import (CapabilityMissing, DecodeError, HelperGroupDown, InsufficientHelpers,
                     NeighborUnavailable, ParameterError, PlanInvalid, UnrepairableFailure)


__all__ = (
    'Action',
    'Compute',
    'FailurePattern',
    'Payload',
    'PayloadKind',
    'RepairPlan',
    'Side',
    'Transfer',
    'TransferLedger',
    'Unrepairable',
    'classify_group_failures',
    'execute_plan',
    'max_repairable_failed_groups_bound',
    'plan_adjacent_pair_repair',
    'plan_group_repair',
    'plan_single_group_repair',
    'repair_group_in_place',
    'repair_node_distributed_parity',
    'repair_node_msr_part',
    'repair_pattern',
)

log = logging.getLogger(__name__)


class Side(Enum):
    LEFT = 'left'
    RIGHT = 'right'

    @property
    def step(self):
        return -1 if self is Side.LEFT else 1

    @property
    def other(self):
        return Side.RIGHT if self is Side.LEFT else Side.LEFT


class PayloadKind(Enum):
    SYSTEMATIC = 'systematic'
    MSR_PARITY = 'msr_parity'
    DISTRIBUTED_PARITY = 'distributed_parity'
    RECOVERED_PARITY = 'recovered_parity'
    HELPER_SYMBOLS = 'helper_symbols'


class Action(Enum):
    XOR_PARITIES = 'xor_parities'
    DECODE_FROM_PARITY = 'decode_from_parity'
    RE_ENCODE = 're_encode'
    REBUILD_DISTRIBUTED_PARITY = 'rebuild_distributed_parity'
    REGENERATE_NODE = 'regenerate_node'


@dataclass(frozen=True)
class Payload:
    """Data belonging to ``group``: its own blocks or the parity recovered for it."""

    kind: PayloadKind
    group: int

    def __str__(self):
        return "%s(%i)" % (self.kind.value, self.group)


@dataclass(frozen=True)
class Transfer:
    from_group: int
    to_group: int
    payload: Payload
    symbol_count: int

    def to_record(self):
        return {"event": "transfer", "from_group": self.from_group, "to_group": self.to_group,
                "payload": str(self.payload), "symbols": self.symbol_count}


@dataclass(frozen=True)
class Compute:
    at_group: int
    action: Action
    target: int
    node: int = None

    def to_record(self):
        record = {"event": "compute", "at_group": self.at_group, "action": self.action.value,
                  "target": self.target}
        if self.node is not None:
            record["node"] = self.node
        return record


@dataclass(frozen=True)
class RepairPlan:
    """An ordered list of steps recovering ``repaired_groups``.

    ``helper_groups`` are the groups outside ``repaired_groups`` that take
    part in the plan.

    """

    steps: tuple
    helper_groups: frozenset
    repaired_groups: tuple

    @property
    def transfers(self):
        return [step for step in self.steps if isinstance(step, Transfer)]

    @property
    def symbols(self):
        """Declared symbols moved per stripe."""
        return sum(step.symbol_count for step in self.transfers)

    def to_records(self):
        return [step.to_record() for step in self.steps]


@dataclass(frozen=True)
class Unrepairable:
    """Planner verdict for failure sets that peeling cannot resolve."""

    failed_groups: tuple
    unrecovered: tuple


@dataclass
class TransferLedger:
    """Accounting of one repair.

    ``symbols_moved`` counts symbols per stripe. ``nodes`` holds the
    ``(group, index)`` pairs read outside repaired groups.

    """

    stripes: int = 1
    symbols_moved: int = 0
    nodes: set = field(default_factory=set)
    helper_groups: set = field(default_factory=set)
    events: list = field(default_factory=list)

    @property
    def nodes_contacted(self):
        return len(self.nodes)

    @property
    def groups_contacted(self):
        return len(self.helper_groups)

    @property
    def total_symbols(self):
        """Symbols moved over all stripes."""
        return self.symbols_moved * self.stripes

    def touch(self, group, indices):
        self.nodes.update((group, int(i)) for i in indices)

    def record(self, step):
        if isinstance(step, Transfer):
            self.symbols_moved += step.symbol_count
        self.events.append(step)

    def merge(self, other):
        self.symbols_moved += other.symbols_moved
        self.nodes |= other.nodes
        self.helper_groups |= other.helper_groups
        self.events.extend(other.events)
        return self

    def records(self):
        return [step.to_record() for step in self.events]

    def to_dict(self):
        return {
            "symbols_moved": self.symbols_moved,
            "total_symbols": self.total_symbols,
            "stripes": self.stripes,
            "nodes_contacted": self.nodes_contacted,
            "groups_contacted": self.groups_contacted,
            "helper_groups": sorted(self.helper_groups),
        }


@dataclass(frozen=True)
class FailurePattern:
    failed_nodes: frozenset
    failed_groups: frozenset

    @property
    def node_failures(self):
        """Failed nodes outside the failed groups, in ascending order."""
        return sorted(n for n in self.failed_nodes if n.group not in self.failed_groups)


def classify_group_failures(state, failed_nodes=None):
    """Split failures into whole failed groups and node-level failures.

    A group is failed when its MSR part lost more than u - 1 nodes, so
    that fewer than r survivors remain to decode it.

    """
    p = state.params
    if failed_nodes is None:
        failed_nodes = state.failed_nodes()
    failed_nodes = frozenset(failed_nodes)

    counts = {}
    for node in failed_nodes:
        if node.kind is not NodeKind.DISTRIBUTED_PARITY:
            counts[node.group] = counts.get(node.group, 0) + 1

    failed_groups = frozenset(g for g, count in counts.items() if count > p.u - 1)
    if failed_groups:
        log.debug("Groups %s failed as a whole.", sorted(failed_groups))
    return FailurePattern(failed_nodes, failed_groups)


def repair_node_msr_part(state, node):
    """Regenerate a systematic or MSR parity node from helpers in its own group.

    Returns the block and a ledger with d helpers and dβ symbols.

    """
    p = state.params
    if node.kind is NodeKind.DISTRIBUTED_PARITY:
        raise ParameterError("Node %s is a distributed parity node." % node)

    g = node.group
    code = get_code(p).local(g)
    alive = np.flatnonzero(state.alive[g, :p.n_L])
    helpers = code.choose_helpers(node.index, alive)
    payloads = {h: code.helper_payload(h, state.blocks[g, h], node.index) for h in helpers}
    block = code.repair_node(node.index, payloads)

    ledger = TransferLedger(stripes=state.stripes)
    ledger.touch(g, helpers)
    ledger.helper_groups.add(g)
    ledger.record(Transfer(g, g, Payload(PayloadKind.HELPER_SYMBOLS, g),
                           p.local.d_helpers * p.local.beta))
    ledger.record(Compute(g, Action.REGENERATE_NODE, g, node.index))
    log.debug("Regenerated node %s from helpers %s.", node, helpers)
    return block, ledger


def repair_group_in_place(state, group):
    """Rebuild the failed MSR part nodes of ``group`` from r of its survivors.

    Used when fewer than d nodes survive for regeneration but at least r
    remain: the r lowest-index survivors send their Γ symbols, the group
    decodes and re-encodes. Returns a mapping of node index to block and
    the ledger.

    """
    p = state.params
    code = get_code(p).local(group)
    alive = np.flatnonzero(state.alive[group, :p.n_L])
    failed = np.flatnonzero(~state.alive[group, :p.n_L])
    if len(alive) < p.r:
        raise InsufficientHelpers("Group %i needs %i survivors to decode, only %i alive." %
                                  (group, p.r, len(alive)))

    helpers = [int(i) for i in alive[:p.r]]
    msg = code.decode({h: state.blocks[group, h] for h in helpers})
    codeword = code.encode(msg)

    ledger = TransferLedger(stripes=state.stripes)
    ledger.touch(group, helpers)
    ledger.helper_groups.add(group)
    ledger.record(Transfer(group, group, Payload(PayloadKind.HELPER_SYMBOLS, group),
                           p.r * p.gamma))
    ledger.record(Compute(group, Action.RE_ENCODE, group))
    log.debug("Re-encoded group %i from survivors %s.", group, helpers)
    return {int(i): codeword[:, i] for i in failed}, ledger


def repair_node_distributed_parity(state, group):
    """Rebuild all Δ distributed parity blocks of ``group``.

    Both neighbours send their MSR parity, 2(u - 1)Γ symbols in total,
    however many of the blocks failed. Returns a ``(delta, stripes,
    gamma)`` array and the ledger.

    """
    p = state.params
    msr_symbols = (p.u - 1) * p.gamma
    ledger = TransferLedger(stripes=state.stripes)
    parity = []

    for h in adjacent_groups(p, group):
        if not state.alive[h, p.r:p.n_L].all():
            raise NeighborUnavailable("MSR parity of group %i is not available to rebuild the "
                                      "distributed parity of group %i." % (h, group))
        ledger.touch(h, range(p.r, p.n_L))
        ledger.helper_groups.add(h)
        ledger.record(Transfer(h, group, Payload(PayloadKind.MSR_PARITY, h), msr_symbols))
        parity.append(state.blocks[h, p.r:p.r + p.delta])

    ledger.record(Compute(group, Action.REBUILD_DISTRIBUTED_PARITY, group))
    return parity[0] ^ parity[1], ledger


def max_repairable_failed_groups_bound(params):
    """Upper bound u + 2Δ - 1 on the number of failed groups that can be repaired."""
    return params.u + 2 * params.delta - 1


# ---- planning ----

def _require_group_repair(params):
    if not params.group_repair_capable:
        raise CapabilityMissing("Group repair needs u - 1 >= r (u=%i, r=%i)." %
                                (params.u, params.r))
    if params.delta < params.r:
        raise CapabilityMissing("Group repair needs delta >= r (delta=%i, r=%i)." %
                                (params.delta, params.r))


def _chain_groups(params, g, side):
    """Return the ``(relay, source)`` groups of the recovery chain of ``g``."""
    return (g + side.step) % params.m, (g + 2 * side.step) % params.m


def _chain_steps(params, g, side):
    relay, source = _chain_groups(params, g, side)
    return [
        Transfer(source, relay, Payload(PayloadKind.MSR_PARITY, source),
                 (params.u - 1) * params.gamma),
        Compute(relay, Action.XOR_PARITIES, g),
        Transfer(relay, g, Payload(PayloadKind.RECOVERED_PARITY, g),
                 params.delta * params.gamma),
        Compute(g, Action.DECODE_FROM_PARITY, g),
        Compute(g, Action.RE_ENCODE, g),
    ]


def _rebuild_steps(params, g):
    steps = [Transfer(h, g, Payload(PayloadKind.MSR_PARITY, h), (params.u - 1) * params.gamma)
             for h in adjacent_groups(params, g)]
    steps.append(Compute(g, Action.REBUILD_DISTRIBUTED_PARITY, g))
    return steps


def _make_plan(steps, repaired):
    repaired = tuple(sorted(repaired))
    helpers = set()
    for step in steps:
        group = step.from_group if isinstance(step, Transfer) else step.at_group
        if group not in repaired:
            helpers.add(group)
    return RepairPlan(tuple(steps), frozenset(helpers), repaired)


class _Availability:
    """What the planner may rely on: intact groups plus groups recovered so far."""

    def __init__(self, state, failed):
        self.state = state
        self.failed = frozenset(failed)
        self.recovered = set()

    def msr(self, g):
        if g in self.failed:
            return g in self.recovered
        return self.state.msr_intact(g)

    def distributed_parity(self, g):
        return g not in self.failed and self.state.distributed_parity_intact(g)

    def chain(self, g, side):
        relay, source = _chain_groups(self.state.params, g, side)
        return self.distributed_parity(relay) and self.msr(source)

    def check_rebuild(self, g):
        for h in adjacent_groups(self.state.params, g):
            if not self.msr(h):
                raise HelperGroupDown("Group %i cannot supply its MSR parity to rebuild "
                                      "group %i." % (h, g))


def plan_single_group_repair(state, g, variant=Side.LEFT):
    """Plan the recovery of the single failed group ``g``.

    The left variant uses groups g - 2, g - 1 and g + 1, the right variant
    g - 1, g + 1 and g + 2. For m = 3 these are only two distinct groups.

    """
    p = state.params
    _require_group_repair(p)
    variant = Side(variant)

    available = _Availability(state, {g})
    if not available.chain(g, variant):
        raise HelperGroupDown("Groups %s cannot serve the %s recovery chain of group %i." %
                              (list(_chain_groups(p, g, variant)), variant.value, g))
    available.recovered.add(g)
    available.check_rebuild(g)

    return _make_plan(_chain_steps(p, g, variant) + _rebuild_steps(p, g), {g})


def plan_adjacent_pair_repair(state, g, h):
    """Plan the recovery of two adjacent failed groups ``g`` and ``h = g + 1``.

    ``g`` is recovered through g - 1 and g - 2, ``h`` through h + 1 and
    h + 2; both distributed parities are rebuilt afterwards.

    """
    p = state.params
    if h != (g + 1) % p.m:
        if g == (h + 1) % p.m:
            g, h = h, g
        else:
            raise ParameterError("Groups %i and %i are not adjacent." % (g, h))

    _require_group_repair(p)
    available = _Availability(state, {g, h})
    for group, side in ((g, Side.LEFT), (h, Side.RIGHT)):
        if not available.chain(group, side):
            raise HelperGroupDown("Groups %s cannot serve the %s recovery chain of group %i." %
                                  (list(_chain_groups(p, group, side)), side.value, group))

    available.recovered.update((g, h))
    available.check_rebuild(g)
    available.check_rebuild(h)
    steps = (_chain_steps(p, g, Side.LEFT) + _chain_steps(p, h, Side.RIGHT) +
             _rebuild_steps(p, g) + _rebuild_steps(p, h))
    return _make_plan(steps, {g, h})


def plan_group_repair(state, failed_groups, prefer=Side.LEFT, order=None):
    """Plan the recovery of an arbitrary set of failed groups by peeling.

    Failed groups are visited in ascending order (or in ``order``) and
    scheduled as soon as one of their recovery chains is available, where
    groups recovered earlier count as available. This repeats until no
    more groups can be scheduled. Distributed parities are rebuilt last.

    Returns a ``RepairPlan``, or ``Unrepairable`` listing the groups left
    over.

    """
    p = state.params
    _require_group_repair(p)
    prefer = Side(prefer)
    failed = frozenset(failed_groups)

    if order is None:
        pending = sorted(failed)
    else:
        pending = list(order)
        if sorted(pending) != sorted(failed):
            raise ParameterError("Order %s is not a permutation of %s." %
                                 (pending, sorted(failed)))

    available = _Availability(state, failed)
    steps = []
    progress = True

    while pending and progress:
        progress = False
        for g in list(pending):
            for side in (prefer, prefer.other):
                if available.chain(g, side):
                    log.debug("Group %i recoverable from the %s.", g, side.value)
                    steps.extend(_chain_steps(p, g, side))
                    available.recovered.add(g)
                    pending.remove(g)
                    progress = True
                    break

    if pending:
        log.info("Failed groups %s cannot be recovered.", sorted(pending))
        return Unrepairable(tuple(sorted(failed)), tuple(sorted(pending)))

    for g in sorted(failed):
        available.check_rebuild(g)
        steps.extend(_rebuild_steps(p, g))

    return _make_plan(steps, failed)


# ---- execution ----

class _Executor:
    def __init__(self, state, plan):
        self.state = state
        self.params = state.params
        self.code = get_code(state.params)
        self.repaired = frozenset(plan.repaired_groups)
        self.ledger = TransferLedger(stripes=state.stripes)
        self.holdings = {g: {} for g in range(self.params.m)}

        p = self.params
        for g in range(p.m):
            if g in self.repaired:
                continue
            held = self.holdings[g]
            if state.msr_intact(g):
                held[Payload(PayloadKind.SYSTEMATIC, g)] = state.blocks[g, :p.r].copy()
                held[Payload(PayloadKind.MSR_PARITY, g)] = state.blocks[g, p.r:p.n_L].copy()
            if state.distributed_parity_intact(g):
                held[Payload(PayloadKind.DISTRIBUTED_PARITY, g)] = \
                    state.blocks[g, p.n_L:].copy()

    def fetch(self, group, payload):
        try:
            return self.holdings[group][payload]
        except KeyError:
            raise PlanInvalid("Group %i does not hold %s." % (group, payload))

    def reads(self, group, payload):
        p = self.params
        if group in self.repaired or payload.group != group:
            return
        if payload.kind is PayloadKind.SYSTEMATIC:
            self.ledger.touch(group, range(p.r))
        elif payload.kind is PayloadKind.MSR_PARITY:
            self.ledger.touch(group, range(p.r, p.n_L))
        elif payload.kind is PayloadKind.DISTRIBUTED_PARITY:
            self.ledger.touch(group, range(p.n_L, p.group_width))

    def transfer(self, step):
        data = self.fetch(step.from_group, step.payload)
        if data.shape[0] * self.params.gamma != step.symbol_count:
            raise PlanInvalid("%s carries %i symbols, the plan declares %i." %
                              (step.payload, data.shape[0] * self.params.gamma,
                               step.symbol_count))

        self.reads(step.from_group, step.payload)
        if step.from_group not in self.repaired:
            self.ledger.helper_groups.add(step.from_group)
        self.holdings[step.to_group][step.payload] = data

    def compute(self, step):
        p = self.params
        g, target = step.at_group, step.target
        held = self.holdings[g]

        if step.action is Action.XOR_PARITIES:
            left, right = adjacent_groups(p, g)
            if target not in (left, right):
                raise PlanInvalid("Group %i is not adjacent to group %i." % (target, g))
            other = right if left == target else left
            dp_payload = Payload(PayloadKind.DISTRIBUTED_PARITY, g)
            dp = self.fetch(g, dp_payload)
            parity = self.fetch(g, Payload(PayloadKind.MSR_PARITY, other))
            self.reads(g, dp_payload)
            if g not in self.repaired:
                self.ledger.helper_groups.add(g)
            held[Payload(PayloadKind.RECOVERED_PARITY, target)] = dp ^ parity[:p.delta]

        elif step.action is Action.DECODE_FROM_PARITY:
            recovered = self.fetch(g, Payload(PayloadKind.RECOVERED_PARITY, target))
            try:
                msg = self.code.local(target).decode(
                    {p.r + t: block for t, block in enumerate(recovered)})
            except DecodeError as exc:
                raise PlanInvalid("Group %i cannot decode from its recovered parity: %s" %
                                  (target, exc))
            held[Payload(PayloadKind.SYSTEMATIC, target)] = msg.transpose(1, 0, 2)

        elif step.action is Action.RE_ENCODE:
            msg = self.fetch(g, Payload(PayloadKind.SYSTEMATIC, target))
            local = self.code.local(target).encode(msg.transpose(1, 0, 2))
            for index in range(p.n_L):
                self.state.restore(target, index, local[:, index])
            held[Payload(PayloadKind.MSR_PARITY, target)] = local[:, p.r:].transpose(1, 0, 2)

        elif step.action is Action.REBUILD_DISTRIBUTED_PARITY:
            left, right = adjacent_groups(p, target)
            dp = (self.fetch(g, Payload(PayloadKind.MSR_PARITY, left))[:p.delta] ^
                  self.fetch(g, Payload(PayloadKind.MSR_PARITY, right))[:p.delta])
            for t in range(p.delta):
                self.state.restore(target, p.n_L + t, dp[t])
            held[Payload(PayloadKind.DISTRIBUTED_PARITY, target)] = dp

        else:
            raise PlanInvalid("Unsupported plan action %r." % step.action)

    def run(self, steps):
        for step in steps:
            log.debug("Executing %s.", step)
            if isinstance(step, Transfer):
                self.transfer(step)
            else:
                self.compute(step)
            self.ledger.record(step)
        return self.state, self.ledger


def execute_plan(state, plan):
    """Run ``plan`` on a copy of ``state``.

    Returns the repaired state and the ledger. Raises ``PlanInvalid`` when
    a step needs data its group does not hold, e.g. because a helper failed
    after planning.

    """
    return _Executor(state.copy(), plan).run(plan.steps)


def repair_pattern(state, prefer=Side.LEFT):
    """Repair every failed node of ``state``.

    MSR part node failures of surviving groups are regenerated first (a
    group left with fewer than d survivors is decoded and re-encoded), then
    failed groups are recovered cooperatively and finally the distributed
    parities of surviving groups are rebuilt. Returns the repaired state
    and the combined ledger; raises ``UnrepairableFailure`` if the planner
    cannot recover the failed groups.

    """
    work = state.copy()
    p = work.params
    pattern = classify_group_failures(work)
    ledger = TransferLedger(stripes=work.stripes)

    by_group = {}
    for node in pattern.node_failures:
        if node.kind is not NodeKind.DISTRIBUTED_PARITY:
            by_group.setdefault(node.group, []).append(node)

    for g, nodes in sorted(by_group.items()):
        if p.n_L - len(nodes) >= p.local.d_helpers:
            for node in nodes:
                block, node_ledger = repair_node_msr_part(work, node)
                work.restore(node.group, node.index, block)
                ledger.merge(node_ledger)
        else:
            blocks, node_ledger = repair_group_in_place(work, g)
            for index, block in blocks.items():
                work.restore(g, index, block)
            ledger.merge(node_ledger)

    if pattern.failed_groups:
        for g in pattern.failed_groups:
            work.erase_group(g)
        plan = plan_group_repair(work, pattern.failed_groups, prefer)
        if isinstance(plan, Unrepairable):
            raise UnrepairableFailure("Failed groups %s cannot be repaired (stuck at %s)." %
                                      (list(plan.failed_groups), list(plan.unrecovered)),
                                      plan.unrecovered)
        work, plan_ledger = execute_plan(work, plan)
        ledger.merge(plan_ledger)

    for g in sorted({n.group for n in pattern.node_failures
                     if n.kind is NodeKind.DISTRIBUTED_PARITY}):
        blocks, node_ledger = repair_node_distributed_parity(work, g)
        for t in range(p.delta):
            work.restore(g, p.n_L + t, blocks[t])
        ledger.merge(node_ledger)

    log.info("Repaired %i failed nodes moving %i symbols per stripe.",
             len(pattern.failed_nodes), ledger.symbols_moved)
    return work, ledger
