# -*- coding: utf-8 -*-
#
# simulator.py
#
"""Deterministic failure injection and repair accounting.

A run draws a random message with ``numpy.random.Generator(PCG64(seed))``
(``integers(0, 2^w, size=(stripes, m, r, gamma), dtype=uint8)``), encodes
it, erases the scenario's nodes, repairs and compares the result with the
original codeword. Targets left open by the scenario are drawn from the
same generator after the message: a group with ``integers(0, m)``, a node
additionally with ``integers(0, group_width)``, random node sets with
``permutation(n)[:count]``.

"""

import json
import logging
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .codec import NodeKind, erasure_decodable, get_code, lccr_encode
from .errors import CapabilityMissing, HelperGroupDown, ScenarioInvalid, UnrepairableFailure
from .metrics import lccr_group_repair_model_symbols, lccr_group_repair_traced_symbols
from .repair import (Side, execute_plan, plan_adjacent_pair_repair, plan_single_group_repair,
                     repair_pattern)


__all__ = (
    'Scenario',
    'ScenarioKind',
    'SimulationResult',
    'simulate',
    'write_trace',
)

log = logging.getLogger(__name__)


class ScenarioKind(Enum):
    SINGLE_NODE = 'single-node'
    SINGLE_GROUP = 'single-group'
    ADJACENT_PAIR = 'adjacent-pair'
    GROUP_SET = 'group-set'
    RANDOM_NODES = 'random-nodes'


@dataclass(frozen=True)
class Scenario:
    """A failure scenario.

    ``targets`` holds ``(group, index)`` pairs for ``SINGLE_NODE`` and
    group indices otherwise (the first group of an ``ADJACENT_PAIR``).
    ``count`` is the number of nodes of ``RANDOM_NODES``.

    """

    kind: ScenarioKind
    seed: int = 0
    targets: tuple = ()
    count: int = 1
    stripes: int = 1
    prefer: str = Side.LEFT.value

    def __post_init__(self):
        object.__setattr__(self, 'kind', ScenarioKind(self.kind))
        object.__setattr__(self, 'targets', tuple(self.targets))


@dataclass
class SimulationResult:
    scenario: Scenario
    verdict: str
    oracle_verdict: str
    failed_nodes: list
    ledger: object = None
    exact: bool = False
    model: dict = field(default_factory=dict)

    @property
    def trace(self):
        return self.ledger.records() if self.ledger is not None else []

    def to_dict(self):
        return {
            "scenario": self.scenario.kind.value,
            "seed": self.scenario.seed,
            "failed_nodes": [str(node) for node in self.failed_nodes],
            "verdict": self.verdict,
            "oracle_verdict": self.oracle_verdict,
            "exact": self.exact,
            "ledger": self.ledger.to_dict() if self.ledger is not None else None,
            "model": self.model,
        }


def _choose_failures(params, scenario, rng):
    """Return the nodes to erase as a list of ``(group, index)``."""
    m, width = params.m, params.group_width
    kind = scenario.kind

    if kind is ScenarioKind.SINGLE_NODE:
        if scenario.targets:
            group, index = scenario.targets[0]
        else:
            group = int(rng.integers(0, m))
            index = int(rng.integers(0, width))
        if not (0 <= group < m and 0 <= index < width):
            raise ScenarioInvalid("Node %i:%i does not exist." % (group, index))
        return [(group, index)]

    if kind is ScenarioKind.RANDOM_NODES:
        if not 0 <= scenario.count <= params.n:
            raise ScenarioInvalid("Cannot fail %i of %i nodes." % (scenario.count, params.n))
        chosen = sorted(int(v) for v in rng.permutation(params.n)[:scenario.count])
        return [divmod(v, width) for v in chosen]

    if scenario.targets:
        groups = list(scenario.targets)
    else:
        groups = [int(rng.integers(0, m))]

    if kind is ScenarioKind.ADJACENT_PAIR:
        groups = [groups[0], (groups[0] + 1) % m]
    elif kind is ScenarioKind.SINGLE_GROUP:
        groups = groups[:1]

    if any(not 0 <= g < m for g in groups):
        raise ScenarioInvalid("Groups %s out of range 0..%i." % (groups, m - 1))
    return [(g, i) for g in sorted(set(groups)) for i in range(width)]


def _model_values(params, scenario, failed):
    p = params
    if scenario.kind is ScenarioKind.SINGLE_NODE:
        node = failed[0]
        if node.kind is NodeKind.DISTRIBUTED_PARITY:
            return {"expected_symbols": 2 * (p.u - 1) * p.gamma, "expected_groups": 2}
        return {"expected_symbols": p.local.d_helpers * p.local.beta,
                "model_locality": p.n_L - 1}
    if scenario.kind is ScenarioKind.SINGLE_GROUP:
        return {"model_symbols": lccr_group_repair_model_symbols(p.r, p.u),
                "traced_symbols": lccr_group_repair_traced_symbols(p.u, p.delta, p.gamma),
                "model_groups": 3}
    if scenario.kind is ScenarioKind.ADJACENT_PAIR:
        return {"traced_symbols": 2 * lccr_group_repair_traced_symbols(p.u, p.delta, p.gamma),
                "model_groups": 4}
    return {}


def _repair(state, scenario, failed_groups):
    kind = scenario.kind
    try:
        if kind is ScenarioKind.SINGLE_GROUP:
            plan = plan_single_group_repair(state, failed_groups[0], scenario.prefer)
            return execute_plan(state, plan)
        if kind is ScenarioKind.ADJACENT_PAIR:
            plan = plan_adjacent_pair_repair(state, *failed_groups)
            return execute_plan(state, plan)
    except (CapabilityMissing, HelperGroupDown) as exc:
        raise ScenarioInvalid("Scenario %s is not applicable: %s" % (kind.value, exc))

    try:
        return repair_pattern(state, scenario.prefer)
    except CapabilityMissing as exc:
        raise ScenarioInvalid("Scenario %s is not applicable: %s" % (kind.value, exc))


def simulate(params, scenario):
    """Run ``scenario`` against a random codeword of ``params``.

    Returns a ``SimulationResult`` with the repair ledger and verdicts of
    the planner (``repaired`` / ``unrepairable``) and of the full decoder
    (``decodable`` / ``undecodable``).

    """
    if scenario.stripes < 1:
        raise ScenarioInvalid("A scenario needs at least one stripe.")

    rng = np.random.Generator(np.random.PCG64(scenario.seed))
    code = get_code(params)
    message = rng.integers(0, code.field.order,
                           size=(scenario.stripes, params.m, params.r, params.gamma),
                           dtype=np.uint8)
    original = lccr_encode(params, message)

    state = original.copy()
    for group, index in _choose_failures(params, scenario, rng):
        state.erase(group, index)
    failed = state.failed_nodes()
    failed_groups = sorted({node.group for node in failed})
    log.debug("Scenario %s fails nodes %s.", scenario.kind.value, [str(n) for n in failed])

    oracle = "decodable" if erasure_decodable(params, state.alive) else "undecodable"
    result = SimulationResult(scenario, "repaired", oracle, failed,
                              model=_model_values(params, scenario, failed))

    try:
        repaired, ledger = _repair(state, scenario, failed_groups)
    except UnrepairableFailure as exc:
        result.verdict = "unrepairable"
        if oracle == "decodable":
            log.warning("Peeling left groups %s unrecovered although the full decoder "
                        "succeeds.", list(exc.unrecovered))
        return result

    result.ledger = ledger
    result.exact = repaired == original and code.verify(repaired)
    if oracle == "undecodable":
        log.warning("Repair succeeded although the full decoder fails; check the planner.")
    log.info("Scenario %s: moved %i symbols per stripe, contacted %i groups.",
             scenario.kind.value, ledger.symbols_moved, ledger.groups_contacted)
    return result


def write_trace(records, fileobj):
    """Write trace records as JSON lines."""
    for record in records:
        fileobj.write(json.dumps(record) + "\n")
