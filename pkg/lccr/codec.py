# -*- coding: utf-8 -*-
#
# codec.py
#
"""Local codes with cooperative repair: encoding, verification and decoding.

A codeword consists of m groups. Group g holds

* r systematic blocks (its part of the message),
* u - 1 MSR parity blocks of its local code and
* Δ distributed parity blocks; block t is the sum of MSR parity block t of
  the two adjacent groups g - 1 and g + 1 (indices modulo m).

Groups and nodes are numbered from zero. A ``ClusterState`` holds the
blocks of all nodes of one or more stripes as a ``(m, group_width,
stripes, gamma)`` array together with an ``alive`` mask. Erasing a node
zeroes its blocks so that nothing can be read from it by accident.

"""

import logging
from dataclasses import dataclass, field as dc_field
from enum import IntEnum
from functools import lru_cache

import numpy as np

from .constants import (BACKEND_SCALAR, BRUTEFORCE_BATCH, BRUTEFORCE_LIMIT, KIND_DISTRIBUTED_PARITY,
                        KIND_MSR_PARITY, KIND_SYSTEMATIC)
from .errors import DimensionMismatch, ParameterError, Singular, TooLarge, Unrecoverable
from .galois import FieldSpec, get_field
from .localcode import LocalCodeParams, make_local_code, scalar_parity_matrix


__all__ = (
    'ClusterState',
    'CodeParams',
    'LCCRCode',
    'NodeId',
    'NodeKind',
    'adjacent_groups',
    'decode_columns',
    'erasure_decodable',
    'erasure_decode_full',
    'get_code',
    'global_generator',
    'lccr_encode',
    'min_distance_bruteforce',
    'verify_codeword',
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class CodeParams:
    """Parameters of an LCCR code.

    ``m`` groups of ``r + u - 1 + delta`` nodes each. The distributed
    parity of a group is built from the first ``delta`` MSR parity blocks
    of its neighbours, so ``0 <= delta <= u - 1``.

    """

    m: int
    r: int
    u: int
    delta: int
    backend: str = BACKEND_SCALAR
    field: FieldSpec = dc_field(default_factory=FieldSpec)

    def __post_init__(self):
        if self.m < 3:
            raise ParameterError("An LCCR code needs at least 3 groups, got m=%r." % self.m)
        if not 0 <= self.delta <= self.u - 1:
            raise ParameterError("delta must satisfy 0 <= delta <= u - 1, got delta=%r, u=%r." %
                                 (self.delta, self.u))
        # validates r, u and the backend
        LocalCodeParams(self.r, self.u, self.backend)

    @property
    def local(self):
        return LocalCodeParams(self.r, self.u, self.backend)

    @property
    def n_L(self):
        return self.r + self.u - 1

    @property
    def group_width(self):
        return self.n_L + self.delta

    @property
    def n(self):
        return self.m * self.group_width

    @property
    def gamma(self):
        return self.local.gamma

    @property
    def K_blocks(self):
        return self.m * self.r

    @property
    def K_symbols(self):
        return self.m * self.r * self.gamma

    @property
    def full_parity_mode(self):
        """True if delta = u - 1, the regime of the minimum distance formula."""
        return self.delta == self.u - 1

    @property
    def group_repair_capable(self):
        """True if a group can be decoded from its parity blocks alone (u - 1 >= r)."""
        return self.u - 1 >= self.r

    @property
    def d_min(self):
        """The closed-form minimum distance u + 2Δ."""
        return self.u + 2 * self.delta

    def describe(self):
        return dict(m=self.m, r=self.r, u=self.u, delta=self.delta, gamma=self.gamma,
                    backend=self.backend)


class NodeKind(IntEnum):
    SYSTEMATIC = KIND_SYSTEMATIC
    MSR_PARITY = KIND_MSR_PARITY
    DISTRIBUTED_PARITY = KIND_DISTRIBUTED_PARITY


@dataclass(frozen=True, order=True)
class NodeId:
    group: int
    index: int
    kind: NodeKind

    @classmethod
    def of(cls, params, group, index):
        """Return the NodeId for ``(group, index)``, deriving its kind from ``params``."""
        if not 0 <= group < params.m:
            raise DimensionMismatch("Group %r out of range 0..%i." % (group, params.m - 1))
        if not 0 <= index < params.group_width:
            raise DimensionMismatch("Node index %r out of range 0..%i." %
                                    (index, params.group_width - 1))

        if index < params.r:
            kind = NodeKind.SYSTEMATIC
        elif index < params.n_L:
            kind = NodeKind.MSR_PARITY
        else:
            kind = NodeKind.DISTRIBUTED_PARITY
        return cls(group, index, kind)

    def __str__(self):
        return "%i:%i" % (self.group, self.index)


def adjacent_groups(params, g):
    """Return the ``(left, right)`` neighbours of group ``g``."""
    if not 0 <= g < params.m:
        raise DimensionMismatch("Group %r out of range 0..%i." % (g, params.m - 1))
    return (g - 1) % params.m, (g + 1) % params.m


class ClusterState:
    """Blocks and liveness of every node of one or more stripes."""

    def __init__(self, params, blocks, alive=None):
        blocks = np.asarray(blocks, dtype=np.uint8)
        expected = (params.m, params.group_width)
        if blocks.ndim != 4 or blocks.shape[:2] != expected or blocks.shape[3] != params.gamma:
            raise DimensionMismatch("Cluster blocks must have shape (%i, %i, stripes, %i), "
                                    "got %r." % (expected + (params.gamma, blocks.shape)))

        self.params = params
        self.blocks = blocks
        if alive is None:
            alive = np.ones(expected, dtype=bool)
        self.alive = np.asarray(alive, dtype=bool)

    @property
    def stripes(self):
        return self.blocks.shape[2]

    def copy(self):
        return ClusterState(self.params, self.blocks.copy(), self.alive.copy())

    def node(self, group, index):
        return NodeId.of(self.params, group, index)

    def erase(self, group, index):
        """Mark a node failed and discard its blocks."""
        NodeId.of(self.params, group, index)
        self.blocks[group, index] = 0
        self.alive[group, index] = False

    def erase_group(self, group):
        for index in range(self.params.group_width):
            self.erase(group, index)

    def restore(self, group, index, block):
        """Write a repaired block and mark the node alive."""
        self.blocks[group, index] = np.asarray(block, dtype=np.uint8).reshape(
            self.stripes, self.params.gamma)
        self.alive[group, index] = True

    def failed_nodes(self):
        return [self.node(int(g), int(i)) for g, i in zip(*np.nonzero(~self.alive))]

    def all_alive(self):
        return bool(self.alive.all())

    def msr_intact(self, group):
        return bool(self.alive[group, :self.params.n_L].all())

    def distributed_parity_intact(self, group):
        return bool(self.alive[group, self.params.n_L:].all())

    def message(self):
        """Return the systematic blocks as a ``(stripes, m, r, gamma)`` message."""
        return self.blocks[:, :self.params.r].transpose(2, 0, 1, 3).copy()

    def msr_parity(self, group):
        """Return the MSR parity blocks of ``group`` as ``(stripes, u-1, gamma)``."""
        p = self.params
        return self.blocks[group, p.r:p.n_L].transpose(1, 0, 2).copy()

    def flat(self):
        """Return the codeword symbols as ``(stripes, n * gamma)``."""
        return self.blocks.transpose(2, 0, 1, 3).reshape(self.stripes, -1)

    def __eq__(self, other):
        if not isinstance(other, ClusterState):
            return NotImplemented
        return (self.params == other.params and np.array_equal(self.blocks, other.blocks) and
                np.array_equal(self.alive, other.alive))

    def __repr__(self):
        return "<ClusterState m=%i width=%i stripes=%i failed=%i>" % (
            self.params.m, self.params.group_width, self.stripes, int((~self.alive).sum()))


class LCCRCode:
    """The local codes and generator matrix of one ``CodeParams``.

    Use ``get_code`` to obtain a cached instance.

    """

    def __init__(self, params):
        self.params = params
        self.field = get_field(params.field)
        self.locals = self._build_local_codes()
        self._generator = None

    def _build_local_codes(self):
        p = self.params
        if p.backend != BACKEND_SCALAR:
            code = make_local_code(p.local, self.field)
            return [code] * p.m

        if p.r == 1:
            code = make_local_code(p.local, self.field)
            return [code] * p.m

        # disjoint Cauchy supports when the field has room for all groups
        if p.r + p.m * (p.u - 1) <= self.field.order:
            offsets = [g * (p.u - 1) for g in range(p.m)]
        else:
            offsets = [0] * p.m
            log.debug("%s too small for distinct parity matrices; sharing one.", p.field)

        return [make_local_code(p.local, self.field,
                                scalar_parity_matrix(self.field, p.r, p.u - 1, offset))
                for offset in offsets]

    def local(self, group):
        return self.locals[group]

    def encode(self, message):
        """Encode a ``(stripes, m, r, gamma)`` (or ``(m, r, gamma)``) message."""
        p = self.params
        msg = self.field.check(message)
        if msg.ndim == 3:
            msg = msg[None]
        if msg.ndim != 4 or msg.shape[1:] != (p.m, p.r, p.gamma):
            raise DimensionMismatch("Message must have shape (stripes, %i, %i, %i), got %r." %
                                    (p.m, p.r, p.gamma, msg.shape))

        stripes = msg.shape[0]
        blocks = np.zeros((p.m, p.group_width, stripes, p.gamma), dtype=np.uint8)
        for g in range(p.m):
            blocks[g, :p.n_L] = self.locals[g].encode(msg[:, g]).transpose(1, 0, 2)

        parity = blocks[:, p.r:p.r + p.delta]
        blocks[:, p.n_L:] = np.roll(parity, 1, axis=0) ^ np.roll(parity, -1, axis=0)
        return ClusterState(p, blocks)

    def verify(self, state):
        """Return True if every node is alive and ``state`` re-encodes to itself."""
        if not state.all_alive():
            return False
        return np.array_equal(self.encode(state.message()).blocks, state.blocks)

    @property
    def generator(self):
        """The K_symbols × nΓ generator matrix of the whole code."""
        if self._generator is None:
            self._generator = self._build_generator()
            self._generator.setflags(write=False)
        return self._generator

    def _build_generator(self):
        p = self.params
        k_local = p.r * p.gamma
        width = p.group_width * p.gamma
        dp_symbols = p.delta * p.gamma
        gen = np.zeros((p.K_symbols, p.n * p.gamma), dtype=np.uint8)

        for g in range(p.m):
            rows = slice(g * k_local, (g + 1) * k_local)
            gen[rows, g * width:g * width + p.n_L * p.gamma] = self.locals[g].generator

            parity = self.locals[g].parity_generator[:, :dp_symbols]
            for h in adjacent_groups(p, g):
                start = h * width + p.n_L * p.gamma
                gen[rows, start:start + dp_symbols] ^= parity

        return gen

    def alive_columns(self, alive):
        """Return the generator column indices of the nodes marked in ``alive``."""
        nodes = np.flatnonzero(np.asarray(alive, dtype=bool).reshape(-1))
        gamma = self.params.gamma
        return (nodes[:, None] * gamma + np.arange(gamma)[None, :]).reshape(-1)

    def decodable(self, alive):
        """Return True if the nodes marked in ``alive`` determine the message."""
        cols = self.alive_columns(alive)
        return self.field.rank(self.generator[:, cols]) == self.params.K_symbols

    def erasure_decode(self, state):
        p = self.params
        cols = self.alive_columns(state.alive)
        msg = decode_columns(self.field, self.generator, cols, state.flat())
        return msg.reshape(state.stripes, p.m, p.r, p.gamma)


def decode_columns(field, generator, cols, codewords):
    """Solve for the messages given the codeword symbols at columns ``cols``.

    ``codewords`` holds one full-length (erased positions ignored) codeword
    per row. Raises ``Unrecoverable`` when the selected columns of
    ``generator`` do not have full row rank.

    """
    try:
        return field.solve_left(generator[:, cols], codewords[:, cols])
    except Singular as exc:
        raise Unrecoverable("Surviving nodes do not determine the message: %s" % exc)


@lru_cache(maxsize=64)
def get_code(params):
    """Return the shared ``LCCRCode`` for ``params``."""
    return LCCRCode(params)


def lccr_encode(params, message):
    """Encode ``message`` into a fresh, fully alive ``ClusterState``."""
    return get_code(params).encode(message)


def verify_codeword(state):
    return get_code(state.params).verify(state)


def global_generator(params):
    return get_code(params).generator


def erasure_decode_full(state):
    """Decode the message from all surviving nodes of ``state``.

    Returns a ``(stripes, m, r, gamma)`` array. Raises ``Unrecoverable``
    if the surviving nodes do not have full rank and ``InconsistentBlocks``
    if they contradict each other.

    """
    return get_code(state.params).erasure_decode(state)


def erasure_decodable(params, alive):
    return get_code(params).decodable(alive)


def min_distance_bruteforce(params):
    """Return the minimum number of non-zero node blocks over all non-zero codewords.

    Enumerates every message; raises ``TooLarge`` if there are more than
    ``BRUTEFORCE_LIMIT`` of them.

    """
    code = get_code(params)
    q = code.field.order
    k = params.K_symbols
    total = q ** k
    if total > BRUTEFORCE_LIMIT:
        raise TooLarge("Brute force over %i^%i messages exceeds the limit of %i." %
                       (q, k, BRUTEFORCE_LIMIT))

    gen = code.generator
    radix = q ** np.arange(k, dtype=np.int64)
    best = params.n

    for start in range(1, total, BRUTEFORCE_BATCH):
        index = np.arange(start, min(start + BRUTEFORCE_BATCH, total), dtype=np.int64)
        msgs = ((index[:, None] // radix[None, :]) % q).astype(np.uint8)
        words = code.field.matmul(msgs, gen).reshape(index.size, params.n, params.gamma)
        weight = int(words.any(axis=2).sum(axis=1).min())
        best = min(best, weight)

    log.debug("Brute-force minimum distance for %s: %i.", params, best)
    return best
