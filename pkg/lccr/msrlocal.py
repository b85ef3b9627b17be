# -*- coding: utf-8 -*-
#
# msrlocal.py
#
"""MSR-local codes, the baseline LCCR is compared against.

A parent MDS code of length n_L + Δ and dimension r with generator
``[I | P1 | P2]`` is punctured to its first n_L coordinates to form each of
the m local codes. The Δ global parities are ``(Σ m_i) × P2``.

The parent is a scalar code: P1 and P2 are the columns of a Cauchy matrix
normalized to an all-ones first row (or the all-ones row for r = 1).

The global parity part counts as one extra group in repair ledgers; it is
addressed as group index ``m``.

"""

import logging
from dataclasses import dataclass, field as dc_field
from functools import lru_cache

import numpy as np

from .codec import decode_columns
from .errors import (CapabilityMissing, DimensionMismatch, InsufficientHelpers,
                     MultipleGroupFailures, ParameterError)
from .galois import FieldSpec, get_field
from .localcode import LocalCodeParams, ScalarMDSCode, scalar_parity_matrix
from .repair import Action, Compute, Payload, PayloadKind, Transfer, TransferLedger


__all__ = (
    'MsrLocalCode',
    'MsrLocalParams',
    'MsrLocalState',
    'msr_local_encode',
    'msr_local_erasure_decode',
    'msr_local_generator',
    'msr_local_repair_group',
    'msr_local_repair_node',
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class MsrLocalParams:
    m: int
    r: int
    u: int
    delta: int
    field: FieldSpec = dc_field(default_factory=FieldSpec)

    def __post_init__(self):
        if self.m < 1:
            raise ParameterError("m must be >= 1, got %r." % self.m)
        if self.delta < 0:
            raise ParameterError("delta must be >= 0, got %r." % self.delta)
        LocalCodeParams(self.r, self.u)

    @property
    def n_L(self):
        return self.r + self.u - 1

    @property
    def parent_width(self):
        return self.n_L + self.delta

    @property
    def n(self):
        return self.m * self.n_L + self.delta

    @property
    def gamma(self):
        return 1

    @property
    def K_symbols(self):
        return self.m * self.r

    @property
    def global_unit(self):
        """Group index under which the global parities appear in ledgers."""
        return self.m

    @property
    def d_min(self):
        return self.u + self.delta


class MsrLocalState:
    """Local parts ``(m, n_L, stripes, 1)`` and global parities ``(delta, stripes, 1)``."""

    def __init__(self, params, local_parts, global_parities, alive=None, global_alive=None):
        self.params = params
        self.local_parts = np.asarray(local_parts, dtype=np.uint8)
        self.global_parities = np.asarray(global_parities, dtype=np.uint8)
        self.alive = (np.ones((params.m, params.n_L), dtype=bool) if alive is None
                      else np.asarray(alive, dtype=bool))
        self.global_alive = (np.ones(params.delta, dtype=bool) if global_alive is None
                             else np.asarray(global_alive, dtype=bool))

    @property
    def stripes(self):
        return self.local_parts.shape[2]

    def copy(self):
        return MsrLocalState(self.params, self.local_parts.copy(), self.global_parities.copy(),
                             self.alive.copy(), self.global_alive.copy())

    def erase(self, group, index):
        if group is None:
            self.global_parities[index] = 0
            self.global_alive[index] = False
        else:
            self.local_parts[group, index] = 0
            self.alive[group, index] = False

    def erase_group(self, group):
        for index in range(self.params.n_L):
            self.erase(group, index)

    def restore(self, group, index, block):
        block = np.asarray(block, dtype=np.uint8).reshape(self.stripes, 1)
        if group is None:
            self.global_parities[index] = block
            self.global_alive[index] = True
        else:
            self.local_parts[group, index] = block
            self.alive[group, index] = True

    def failed_groups(self):
        """Groups that lost more than u - 1 nodes."""
        lost = (~self.alive).sum(axis=1)
        return [int(g) for g in np.flatnonzero(lost > self.params.u - 1)]

    def all_alive(self):
        return bool(self.alive.all() and self.global_alive.all())

    def flat(self):
        local = self.local_parts.transpose(2, 0, 1, 3).reshape(self.stripes, -1)
        glob = self.global_parities.transpose(1, 0, 2).reshape(self.stripes, -1)
        return np.hstack([local, glob])

    def alive_mask(self):
        return np.concatenate([self.alive.reshape(-1), self.global_alive])


class MsrLocalCode:
    def __init__(self, params):
        self.params = params
        self.field = get_field(params.field)
        p = params
        self.parent = scalar_parity_matrix(self.field, p.r, p.u - 1 + p.delta, normalize=True)
        self.local_parity = self.parent[:, :p.u - 1]
        self.global_parity = self.parent[:, p.u - 1:]
        self.local = ScalarMDSCode(LocalCodeParams(p.r, p.u), self.field, self.local_parity)
        self._generator = None

    @property
    def generator(self):
        if self._generator is None:
            p = self.params
            gen = np.zeros((p.K_symbols, p.n), dtype=np.uint8)
            for g in range(p.m):
                rows = slice(g * p.r, (g + 1) * p.r)
                gen[rows, g * p.n_L:(g + 1) * p.n_L] = self.local.generator
                gen[rows, p.m * p.n_L:] = self.global_parity
            gen.setflags(write=False)
            self._generator = gen
        return self._generator

    def encode(self, message):
        p = self.params
        msg = self.field.check(message)
        if msg.ndim == 3:
            msg = msg[None]
        if msg.ndim != 4 or msg.shape[1:] != (p.m, p.r, 1):
            raise DimensionMismatch("Message must have shape (stripes, %i, %i, 1), got %r." %
                                    (p.m, p.r, msg.shape))

        stripes = msg.shape[0]
        local = np.stack([self.local.encode(msg[:, g]) for g in range(p.m)])
        total = np.bitwise_xor.reduce(msg[..., 0], axis=1)
        glob = self.field.matmul(total, self.global_parity)
        return MsrLocalState(p, local.transpose(0, 2, 1, 3),
                             glob.T.reshape(p.delta, stripes, 1))

    def group_message(self, state, g):
        """Return the ``(stripes, r)`` message of group ``g`` from its surviving nodes."""
        alive = np.flatnonzero(state.alive[g])
        if alive.size < self.params.r:
            raise InsufficientHelpers("Group %i has only %i surviving nodes." % (g, alive.size))
        msg = self.local.decode({int(i): state.local_parts[g, i] for i in alive[:self.params.r]})
        return msg[..., 0]


@lru_cache(maxsize=32)
def _get_code(params):
    return MsrLocalCode(params)


def msr_local_encode(params, message):
    """Encode a ``(stripes, m, r, 1)`` message into an ``MsrLocalState``."""
    return _get_code(params).encode(message)


def msr_local_generator(params):
    """The K × n generator matrix with global parity columns last."""
    return _get_code(params).generator


def msr_local_erasure_decode(state):
    """Decode the message from every surviving node, global parities included."""
    p = state.params
    code = _get_code(p)
    cols = np.flatnonzero(state.alive_mask())
    msg = decode_columns(code.field, code.generator, cols, state.flat())
    return msg.reshape(state.stripes, p.m, p.r, 1)


def msr_local_repair_node(state, group, index):
    """Repair one node; ``group=None`` addresses global parity ``index``.

    A local node is repaired from r surviving nodes of its group. The
    global parities are repaired as a whole from the messages of all m
    groups; the ledger then counts m·r nodes.

    """
    p = state.params
    code = _get_code(p)
    ledger = TransferLedger(stripes=state.stripes)

    if group is None:
        total = np.zeros((state.stripes, p.r), dtype=np.uint8)
        for g in range(p.m):
            total ^= code.group_message(state, g)
            ledger.touch(g, np.flatnonzero(state.alive[g])[:p.r])
            ledger.helper_groups.add(g)
            ledger.record(Transfer(g, p.global_unit, Payload(PayloadKind.SYSTEMATIC, g), p.r))
        ledger.record(Compute(p.global_unit, Action.RE_ENCODE, p.global_unit, index))
        glob = code.field.matmul(total, code.global_parity)
        return glob[:, index:index + 1], ledger

    alive = np.flatnonzero(state.alive[group])
    helpers = code.local.choose_helpers(index, alive)
    payloads = {h: code.local.helper_payload(h, state.local_parts[group, h], index)
                for h in helpers}
    block = code.local.repair_node(index, payloads)

    ledger.touch(group, helpers)
    ledger.helper_groups.add(group)
    ledger.record(Transfer(group, group, Payload(PayloadKind.HELPER_SYMBOLS, group), p.r))
    ledger.record(Compute(group, Action.REGENERATE_NODE, group, index))
    return block, ledger


def msr_local_repair_group(state, g):
    """Recover failed group ``g`` from all other groups and the global parities.

    Every other group sends its message, the global parity unit sends its
    surviving parities; ``g`` subtracts the other messages and decodes its
    own. Returns the repaired state and the ledger, which counts m groups.

    Raises ``CapabilityMissing`` if Δ < r and ``MultipleGroupFailures`` if
    another group has failed as well.

    """
    p = state.params
    if p.delta < p.r:
        raise CapabilityMissing("MSR-local group repair needs delta >= r (delta=%i, r=%i)." %
                                (p.delta, p.r))

    others = [h for h in state.failed_groups() if h != g]
    if others:
        raise MultipleGroupFailures("Groups %s failed besides group %i; MSR-local codes repair "
                                    "only one failed group." % (others, g))

    globals_alive = np.flatnonzero(state.global_alive)
    if globals_alive.size < p.r:
        raise InsufficientHelpers("Only %i global parities survive, %i needed." %
                                  (globals_alive.size, p.r))

    code = _get_code(p)
    ledger = TransferLedger(stripes=state.stripes)
    total = np.zeros((state.stripes, p.r), dtype=np.uint8)

    for h in range(p.m):
        if h == g:
            continue
        total ^= code.group_message(state, h)
        ledger.touch(h, np.flatnonzero(state.alive[h])[:p.r])
        ledger.helper_groups.add(h)
        ledger.record(Transfer(h, g, Payload(PayloadKind.SYSTEMATIC, h), p.r))

    ledger.touch(p.global_unit, globals_alive)
    ledger.helper_groups.add(p.global_unit)
    ledger.record(Transfer(p.global_unit, g, Payload(PayloadKind.RECOVERED_PARITY, g),
                           int(globals_alive.size)))

    # (Σ m_i) P2 - (Σ_{i != g} m_i) P2 = m_g P2
    glob = state.global_parities[:, :, 0].T
    residual = glob ^ code.field.matmul(total, code.global_parity)
    msg = decode_columns(code.field, code.global_parity, globals_alive, residual)
    ledger.record(Compute(g, Action.DECODE_FROM_PARITY, g))

    repaired = state.copy()
    local = code.local.encode(msg[..., None])
    for index in range(p.n_L):
        repaired.restore(g, index, local[:, index])
    ledger.record(Compute(g, Action.RE_ENCODE, g))

    log.info("Recovered MSR-local group %i contacting %i groups.", g, ledger.groups_contacted)
    return repaired, ledger
