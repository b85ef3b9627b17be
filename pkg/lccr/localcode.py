# -*- coding: utf-8 -*-
#
# localcode.py
#
"""The exact-repair local code used inside every group.

A local code stores an r-block message on n_L = r + u - 1 nodes with
generator ``[I | P]`` (systematic) and tolerates any u - 1 node erasures.
Two backends are provided:

``ScalarMDSCode``
    Γ = 1, P is a Cauchy matrix (or the all-ones row for r = 1). Repair
    degenerates to decoding from r nodes and re-encoding.

``ProductMatrixMSRCode``
    The product-matrix MSR construction at d = 2r - 2 with Γ = r - 1 and
    β = 1, made systematic by precoding the message. A failed node is
    regenerated from one symbol of each of d helpers.

Blocks are ``(stripes, gamma)`` uint8 arrays; a one-dimensional block is
treated as a single stripe and results are returned in the same form.

"""

import logging
from dataclasses import dataclass

import numpy as np

from .constants import BACKEND_PRODUCT_MATRIX, BACKEND_SCALAR, BACKENDS
from .errors import (CapabilityMissing, DimensionMismatch, InsufficientBlocks,
                     InsufficientHelpers, ParameterError, Singular, Unrecoverable,
                     WrongHelperCount)


__all__ = (
    'LocalCode',
    'LocalCodeParams',
    'ProductMatrixMSRCode',
    'ScalarMDSCode',
    'make_local_code',
    'scalar_parity_matrix',
)

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LocalCodeParams:
    """Parameters of one local code: r information nodes, n_L = r + u - 1 nodes."""

    r: int
    u: int
    backend: str = BACKEND_SCALAR

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ParameterError("Unknown local code backend %r." % self.backend)
        if self.r < 1:
            raise ParameterError("r must be >= 1, got %r." % self.r)
        if self.u < 2:
            raise ParameterError("u must be >= 2, got %r." % self.u)
        if self.backend == BACKEND_PRODUCT_MATRIX:
            if self.r < 2:
                raise ParameterError("The product-matrix backend needs r >= 2.")
            if self.u < self.r:
                raise ParameterError("The product-matrix backend needs u >= r "
                                     "(d = 2r - 2 <= n_L - 1), got r=%i, u=%i." %
                                     (self.r, self.u))

    @property
    def n_L(self):
        return self.r + self.u - 1

    @property
    def gamma(self):
        return 1 if self.backend == BACKEND_SCALAR else self.r - 1

    @property
    def d_helpers(self):
        return self.r if self.backend == BACKEND_SCALAR else 2 * self.r - 2

    @property
    def beta(self):
        return 1

    @property
    def message_symbols(self):
        """K_L = rΓ."""
        return self.r * self.gamma


def scalar_parity_matrix(field, r, cols, offset=0, normalize=False):
    """Return an r × cols parity matrix whose every square submatrix is invertible.

    For r = 1 this is the all-ones row (a repetition code) in any field.
    Otherwise it is the Cauchy matrix on ``xs = 0..r-1`` and
    ``ys = r+offset .. r+offset+cols-1``. With ``normalize`` each column is
    scaled so that the first row is all ones.

    """
    if r == 1:
        return np.ones((1, cols), dtype=np.uint8)

    needed = r + offset + cols
    if needed > field.order:
        raise ParameterError("%s is too small: the Cauchy support needs %i distinct "
                             "elements." % (field.spec, needed))

    parity = field.cauchy(range(r), range(r + offset, needed))
    if normalize:
        parity = field.mul(parity, field.inv(parity[0])[None, :])
    return parity


class LocalCode:
    """Common encode/decode machinery of the local code backends.

    Subclasses build ``self.generator`` (rΓ × n_LΓ, systematic) and
    implement ``helper_payload`` and ``_regenerate``.

    """

    def __init__(self, params, field, generator):
        self.params = params
        self.field = field
        self.generator = generator
        self.generator.setflags(write=False)

    @property
    def parity_generator(self):
        """The rΓ × (u-1)Γ scalar expansion of the parity map P."""
        return self.generator[:, self.params.message_symbols:]

    def _stack(self, arr, nblocks):
        arr = self.field.check(arr)
        single = arr.ndim == 2
        if single:
            arr = arr[None]
        gamma = self.params.gamma
        if arr.ndim != 3 or arr.shape[1:] != (nblocks, gamma):
            raise DimensionMismatch("Expected %i blocks of %i symbols, got shape %r." %
                                    (nblocks, gamma, arr.shape))
        return arr, single

    def _block(self, block, width):
        block = self.field.check(block)
        if block.ndim == 1:
            block = block[None]
        if block.ndim != 2 or block.shape[1] != width:
            raise DimensionMismatch("Expected blocks of %i symbols, got shape %r." %
                                    (width, block.shape))
        return block

    def encode(self, msg):
        """Encode an r-block message into the n_L blocks of the local codeword."""
        p = self.params
        msg, single = self._stack(msg, p.r)
        stripes = msg.shape[0]
        flat = self.field.matmul(msg.reshape(stripes, -1), self.generator)
        out = flat.reshape(stripes, p.n_L, p.gamma)
        return out[0] if single else out

    def decode(self, available):
        """Return the message from a mapping of node index to block.

        Raises ``InsufficientBlocks`` with fewer than r blocks and
        ``InconsistentBlocks`` if more than r blocks contradict each other.

        """
        p = self.params
        if len(available) < p.r:
            raise InsufficientBlocks("Need %i blocks to decode, got %i." %
                                     (p.r, len(available)))

        indices = sorted(available)
        if indices[0] < 0 or indices[-1] >= p.n_L:
            raise DimensionMismatch("Node index out of range 0..%i." % (p.n_L - 1))

        single = all(np.ndim(available[i]) == 1 for i in indices)
        blocks = [self._block(available[i], p.gamma) for i in indices]
        cols = np.concatenate([np.arange(i * p.gamma, (i + 1) * p.gamma) for i in indices])

        try:
            msg = self.field.solve_left(self.generator[:, cols], np.hstack(blocks))
        except Singular as exc:
            raise Unrecoverable("Blocks %s do not determine the message: %s" %
                                (indices, exc))

        msg = msg.reshape(-1, p.r, p.gamma)
        return msg[0] if single else msg

    def decode_from_parity(self, parity_blocks):
        """Return the message from the u - 1 parity blocks alone.

        Raises ``CapabilityMissing`` unless u - 1 >= r.

        """
        p = self.params
        if p.u - 1 < p.r:
            raise CapabilityMissing("Decoding from parity needs u - 1 >= r (u=%i, r=%i)." %
                                    (p.u, p.r))
        if len(parity_blocks) != p.u - 1:
            raise DimensionMismatch("Expected %i parity blocks, got %i." %
                                    (p.u - 1, len(parity_blocks)))
        return self.decode({p.r + t: block for t, block in enumerate(parity_blocks)})

    def choose_helpers(self, failed, alive):
        """Return the d lowest-index surviving nodes other than ``failed``."""
        candidates = sorted(i for i in alive if i != failed)
        d = self.params.d_helpers
        if len(candidates) < d:
            raise InsufficientHelpers("Repair of node %i needs %i helpers, only %i alive." %
                                      (failed, d, len(candidates)))
        return candidates[:d]

    def helper_payload(self, helper, block, failed):
        """Return the β symbols per stripe which ``helper`` sends to repair ``failed``."""
        raise NotImplementedError

    def repair_node(self, failed, helpers):
        """Regenerate the block of node ``failed`` from helper payloads.

        ``helpers`` maps helper node index to the payload produced by
        ``helper_payload``. Exactly d helpers with β symbols each are needed.

        """
        p = self.params
        if len(helpers) != p.d_helpers:
            raise WrongHelperCount("Repair needs exactly %i helpers, got %i." %
                                   (p.d_helpers, len(helpers)))
        if failed in helpers:
            raise WrongHelperCount("Node %i cannot help repair itself." % failed)

        single = all(np.ndim(payload) == 1 for payload in helpers.values())
        payloads = {}
        for index, payload in helpers.items():
            payload = self.field.check(payload)
            if payload.shape[-1] != p.beta:
                raise WrongHelperCount("Helper %i sent %i symbols, expected %i." %
                                       (index, payload.shape[-1], p.beta))
            payloads[index] = payload.reshape(-1, p.beta)

        log.debug("Regenerating node %i from helpers %s.", failed, sorted(payloads))
        block = self._regenerate(failed, payloads)
        return block[0] if single else block

    def _regenerate(self, failed, payloads):
        raise NotImplementedError


class ScalarMDSCode(LocalCode):
    """Systematic MDS code with Γ = 1 and generator ``[I | P]``."""

    def __init__(self, params, field, parity=None):
        if params.backend != BACKEND_SCALAR:
            raise ParameterError("ScalarMDSCode needs the scalar backend.")

        if parity is None:
            parity = scalar_parity_matrix(field, params.r, params.u - 1)

        parity = field.matrix(parity)
        if parity.shape != (params.r, params.u - 1):
            raise DimensionMismatch("Parity matrix must be %ix%i." % (params.r, params.u - 1))

        generator = np.hstack([field.identity(params.r), parity])
        super().__init__(params, field, generator)
        self.parity = self.parity_generator

    def helper_payload(self, helper, block, failed):
        return self._block(block, 1).copy()

    def _regenerate(self, failed, payloads):
        msg = self.decode(payloads)
        return self.encode(msg)[:, failed]


class ProductMatrixMSRCode(LocalCode):
    """Systematic product-matrix MSR code at d = 2r - 2.

    Node i stores ``ψ_i^T M`` where M = [S1; S2] stacks two symmetric
    α × α matrices (α = Γ = r - 1) and ψ_i = (1, x_i, ..., x_i^(d-1)), so
    that ψ_i = [φ_i, λ_i φ_i] with λ_i = x_i^α. The raw matrix entries are
    precoded so that nodes 0..r-1 hold the message verbatim.

    """

    def __init__(self, params, field):
        if params.backend != BACKEND_PRODUCT_MATRIX:
            raise ParameterError("ProductMatrixMSRCode needs the product-matrix backend.")

        self.field = field
        self.params = params
        alpha = params.gamma
        self.points = self._choose_points(field, params.n_L, alpha)
        self.psi = field.vandermonde(self.points, params.d_helpers)
        self.phi = self.psi[:, :alpha]
        self.lambdas = self.psi[:, alpha]

        raw = self._raw_encoder()
        try:
            precode = field.inv_matrix(raw[:, :params.message_symbols])
        except Singular:
            raise ParameterError("%s is too small for a systematic product-matrix code "
                                 "with r=%i, u=%i." % (field.spec, params.r, params.u))

        super().__init__(params, field, field.matmul(precode, raw))
        log.debug("Product-matrix code r=%i u=%i uses points %s.",
                  params.r, params.u, self.points.tolist())

    @staticmethod
    def _choose_points(field, count, alpha):
        points, lambdas = [], set()
        for x in range(1, field.order):
            lam = field.power(x, alpha)
            if lam not in lambdas:
                points.append(x)
                lambdas.add(lam)
                if len(points) == count:
                    return np.array(points, dtype=np.uint8)

        raise ParameterError("%s has too few elements with distinct %i-th powers for "
                             "%i nodes." % (field.spec, alpha, count))

    def _raw_encoder(self):
        """Return the matrix mapping raw message-matrix entries to node contents."""
        p = self.params
        alpha = p.gamma
        entries = [(half, i, j) for half in (0, 1)
                   for i in range(alpha) for j in range(i, alpha)]
        raw = np.zeros((len(entries), p.n_L * alpha), dtype=np.uint8)

        for row, (half, i, j) in enumerate(entries):
            for l, t in {(half * alpha + i, j), (half * alpha + j, i)}:
                raw[row, t::alpha] ^= self.psi[:, l]

        return raw

    def helper_payload(self, helper, block, failed):
        block = self._block(block, self.params.gamma)
        products = self.field.mul_table[block, self.phi[failed][None, :]]
        return np.bitwise_xor.reduce(products, axis=1)[:, None]

    def _regenerate(self, failed, payloads):
        alpha = self.params.gamma
        helpers = sorted(payloads)
        received = np.hstack([payloads[i] for i in helpers])
        # received = (M φ_f)^T × Ψ_J^T
        m_phi = self.field.matmul(received, self.field.inv_matrix(self.psi[helpers].T))
        return m_phi[:, :alpha] ^ self.field.mul_table[self.lambdas[failed], m_phi[:, alpha:]]


def make_local_code(params, field, parity=None):
    """Return the local code implementation selected by ``params.backend``."""
    if params.backend == BACKEND_PRODUCT_MATRIX:
        return ProductMatrixMSRCode(params, field)
    return ScalarMDSCode(params, field, parity)
