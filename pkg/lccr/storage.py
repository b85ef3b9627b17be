# -*- coding: utf-8 -*-
#
# storage.py
#
"""Files striped over LCCR chunk files plus a JSON manifest.

A file is split into symbols of the field (one byte holds 8 // w symbols,
lowest bits first), zero-padded to a whole number of stripes of K symbols
and encoded. Every node becomes one chunk file::

    magic "LCCR" | version u8 | group u16 | node index u16 | kind u8 |
    payload symbols u32 | payload

All header integers are little-endian. The payload holds one byte per
symbol, stripe after stripe. The manifest records the code parameters,
the original length and a CRC-32C of every chunk file.

"""

import json
import logging
import os
import struct
from dataclasses import asdict, dataclass, field

import numpy as np

from .codec import ClusterState, CodeParams, NodeId, erasure_decode_full, lccr_encode, \
    verify_codeword
from .constants import (CHUNK_HEADER_FORMAT, CHUNK_MAGIC, CHUNK_SUFFIX, CHUNK_VERSION,
                        FAMILY_LCCR, MANIFEST_FORMAT_VERSION, MANIFEST_NAME)
from .errors import (ChecksumMismatch, ChunkFormatError, DimensionMismatch, LCCRError,
                     ManifestError, ParameterError)
from .galois import FieldSpec
from .repair import repair_pattern


__all__ = (
    'Manifest',
    'bytes_to_symbols',
    'chunk_name',
    'crc32c',
    'decode_file',
    'encode_file',
    'load_cluster',
    'read_chunk',
    'repair_files',
    'symbols_to_bytes',
    'verify_files',
    'write_chunk',
)

log = logging.getLogger(__name__)

CHUNK_HEADER = struct.Struct(CHUNK_HEADER_FORMAT)


def _crc32c_table():
    table = []
    for byte in range(256):
        crc = byte
        for _ in range(8):
            crc = (crc >> 1) ^ 0x82F63B78 if crc & 1 else crc >> 1
        table.append(crc)
    return table


_CRC32C_TABLE = _crc32c_table()


def crc32c(data, crc=0):
    """Return the CRC-32C (Castagnoli) checksum of ``data``."""
    crc ^= 0xFFFFFFFF
    table = _CRC32C_TABLE
    for byte in bytes(data):
        crc = table[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFF


def bytes_to_symbols(data, width_bits):
    """Split bytes into w-bit symbols, lowest bits of each byte first."""
    raw = np.frombuffer(bytes(data), dtype=np.uint8)
    if width_bits == 8:
        return raw.copy()
    per_byte = 8 // width_bits
    shifts = np.arange(per_byte, dtype=np.uint8) * width_bits
    mask = (1 << width_bits) - 1
    return ((raw[:, None] >> shifts[None, :]) & mask).astype(np.uint8).reshape(-1)


def symbols_to_bytes(symbols, width_bits):
    """Inverse of ``bytes_to_symbols``; trailing symbols of a partial byte are dropped."""
    symbols = np.asarray(symbols, dtype=np.uint8)
    if width_bits == 8:
        return symbols.tobytes()
    per_byte = 8 // width_bits
    count = symbols.size // per_byte
    groups = symbols[:count * per_byte].reshape(count, per_byte).astype(np.uint16)
    shifts = np.arange(per_byte, dtype=np.uint16) * width_bits
    return np.bitwise_or.reduce(groups << shifts[None, :], axis=1).astype(np.uint8).tobytes()


def chunk_name(group, index):
    return "g%03i_n%03i%s" % (group, index, CHUNK_SUFFIX)


@dataclass
class Manifest:
    """Everything needed to reassemble a file from its chunk files."""

    m: int
    r: int
    u: int
    delta: int
    gamma: int
    backend: str
    width_bits: int
    reduction_poly: int
    stripe_count: int
    original_length_bytes: int
    chunks: list = field(default_factory=list)
    family: str = FAMILY_LCCR
    format_version: int = MANIFEST_FORMAT_VERSION

    @classmethod
    def for_params(cls, params, stripe_count, original_length_bytes):
        return cls(params.m, params.r, params.u, params.delta, params.gamma, params.backend,
                   params.field.width_bits, params.field.reduction_poly, stripe_count,
                   original_length_bytes)

    @property
    def params(self):
        try:
            params = CodeParams(self.m, self.r, self.u, self.delta, self.backend,
                                FieldSpec(self.width_bits, self.reduction_poly))
        except LCCRError as exc:
            raise ManifestError("Manifest describes an invalid code: %s" % exc)
        if params.gamma != self.gamma:
            raise ManifestError("Manifest gamma %i does not match the code (%i)." %
                                (self.gamma, params.gamma))
        return params

    def checksum(self, group, index):
        for entry in self.chunks:
            if entry["group"] == group and entry["index"] == index:
                return entry["crc32c"]
        return None

    def set_chunk(self, group, index, kind, name, checksum):
        self.chunks = [entry for entry in self.chunks
                       if (entry["group"], entry["index"]) != (group, index)]
        self.chunks.append({"group": group, "index": index, "kind": int(kind), "file": name,
                            "crc32c": checksum})
        self.chunks.sort(key=lambda entry: (entry["group"], entry["index"]))

    def to_json(self):
        data = asdict(self)
        data["field"] = {"width_bits": data.pop("width_bits"),
                         "reduction_poly": data.pop("reduction_poly")}
        data["params"] = {key: data.pop(key)
                          for key in ("m", "r", "u", "delta", "gamma", "backend")}
        return json.dumps(data, indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        try:
            data = json.loads(text)
            if data["format_version"] != MANIFEST_FORMAT_VERSION:
                raise ManifestError("Unsupported manifest format version %r." %
                                    data["format_version"])
            if data["family"] != FAMILY_LCCR:
                raise ManifestError("Unsupported code family %r." % data["family"])
            return cls(width_bits=data["field"]["width_bits"],
                       reduction_poly=data["field"]["reduction_poly"],
                       stripe_count=data["stripe_count"],
                       original_length_bytes=data["original_length_bytes"],
                       chunks=list(data["chunks"]), family=data["family"],
                       format_version=data["format_version"], **data["params"])
        except (ValueError, KeyError, TypeError) as exc:
            raise ManifestError("Malformed manifest: %s" % exc)

    def save(self, path):
        with open(path, 'w') as fileobj:
            fileobj.write(self.to_json())

    @classmethod
    def load(cls, path):
        try:
            with open(path) as fileobj:
                return cls.from_json(fileobj.read())
        except OSError as exc:
            raise ManifestError("Cannot read manifest %s: %s" % (path, exc))


def write_chunk(path, node, block):
    """Write one node's blocks as a chunk file and return its CRC-32C."""
    payload = np.asarray(block, dtype=np.uint8).reshape(-1).tobytes()
    header = CHUNK_HEADER.pack(CHUNK_MAGIC, CHUNK_VERSION, node.group, node.index,
                               int(node.kind), len(payload))
    data = header + payload
    with open(path, 'wb') as fileobj:
        fileobj.write(data)
    return crc32c(data)


def read_chunk(path, checksum=None):
    """Return ``(group, index, kind, payload)`` of a chunk file.

    Raises ``ChecksumMismatch`` if ``checksum`` is given and differs from
    the file's CRC-32C, and ``ChunkFormatError`` for malformed files.

    """
    with open(path, 'rb') as fileobj:
        data = fileobj.read()

    name = os.path.basename(path)
    if checksum is not None and crc32c(data) != checksum:
        raise ChecksumMismatch("Checksum mismatch in chunk %s." % name, name)
    if len(data) < CHUNK_HEADER.size:
        raise ChunkFormatError("Chunk %s is truncated." % name)

    magic, version, group, index, kind, count = CHUNK_HEADER.unpack_from(data)
    if magic != CHUNK_MAGIC or version != CHUNK_VERSION:
        raise ChunkFormatError("Chunk %s has an unknown header." % name)
    payload = np.frombuffer(data, dtype=np.uint8, offset=CHUNK_HEADER.size)
    if payload.size != count:
        raise ChunkFormatError("Chunk %s holds %i symbols, header says %i." %
                               (name, payload.size, count))
    return group, index, kind, payload


def _write_nodes(state, manifest, out_dir, nodes):
    for node in nodes:
        name = chunk_name(node.group, node.index)
        checksum = write_chunk(os.path.join(out_dir, name), node,
                               state.blocks[node.group, node.index])
        manifest.set_chunk(node.group, node.index, node.kind, name, checksum)


def encode_file(data, params, out_dir):
    """Encode ``data`` into chunk files and a manifest in ``out_dir``.

    Returns the ``Manifest``. An empty input produces a manifest without
    chunks.

    """
    os.makedirs(out_dir, exist_ok=True)
    symbols = bytes_to_symbols(data, params.field.width_bits)
    k = params.K_symbols
    stripes = -(-symbols.size // k)

    manifest = Manifest.for_params(params, stripes, len(data))
    if stripes:
        padded = np.zeros(stripes * k, dtype=np.uint8)
        padded[:symbols.size] = symbols
        state = lccr_encode(params, padded.reshape(stripes, params.m, params.r, params.gamma))
        nodes = [NodeId.of(params, g, i)
                 for g in range(params.m) for i in range(params.group_width)]
        _write_nodes(state, manifest, out_dir, nodes)

    manifest.save(os.path.join(out_dir, MANIFEST_NAME))
    log.info("Encoded %i bytes into %i stripes in %s.", len(data), stripes, out_dir)
    return manifest


def _manifest_path(path):
    return os.path.join(path, MANIFEST_NAME) if os.path.isdir(path) else path


def load_cluster(manifest_path, strict=True):
    """Load the manifest and all readable chunks into a ``ClusterState``.

    Missing chunks are marked failed. Corrupt chunks raise
    ``ChecksumMismatch`` when ``strict``, otherwise they are marked failed
    as well. Returns ``(manifest, state, problems)`` where ``problems``
    maps chunk names to ``"missing"`` or ``"corrupt"``.

    """
    manifest_path = _manifest_path(manifest_path)
    base = os.path.dirname(manifest_path)
    manifest = Manifest.load(manifest_path)
    params = manifest.params

    state = ClusterState(params, np.zeros((params.m, params.group_width,
                                           manifest.stripe_count, params.gamma), np.uint8))
    symbols = manifest.stripe_count * params.gamma
    problems = {}
    if not manifest.stripe_count:
        return manifest, state, problems

    for g in range(params.m):
        for i in range(params.group_width):
            name = chunk_name(g, i)
            path = os.path.join(base, name)
            if not os.path.exists(path):
                problems[name] = "missing"
                state.erase(g, i)
                continue
            try:
                group, index, kind, payload = read_chunk(path, manifest.checksum(g, i))
                if (group, index) != (g, i) or payload.size != symbols:
                    raise ChunkFormatError("Chunk %s does not belong to node %i:%i." %
                                           (name, g, i))
            except (ChecksumMismatch, ChunkFormatError):
                if strict:
                    raise
                problems[name] = "corrupt"
                state.erase(g, i)
                continue
            state.blocks[g, i] = payload.reshape(manifest.stripe_count, params.gamma)

    if problems:
        log.info("Chunks unavailable: %s.", ", ".join(sorted(problems)))
    return manifest, state, problems


def decode_file(manifest_path):
    """Reassemble the original bytes from the surviving chunks.

    Raises ``Unrecoverable`` if they do not determine the data and
    ``ChecksumMismatch`` if a chunk is corrupt.

    """
    manifest, state, _ = load_cluster(manifest_path)
    if not manifest.stripe_count:
        return b''

    if state.all_alive():
        msg = state.message()
    else:
        msg = erasure_decode_full(state)

    data = symbols_to_bytes(msg.reshape(-1), manifest.width_bits)
    return data[:manifest.original_length_bytes]


def repair_files(manifest_path, failed_groups=(), failed_nodes=(), prefer='left'):
    """Repair missing chunks, treating ``failed_groups`` and ``failed_nodes`` as lost.

    Rewrites the repaired chunk files and the manifest checksums and
    returns the ``TransferLedger``. Raises ``UnrepairableFailure`` if the
    failed groups cannot be recovered and ``ParameterError`` for a failed
    node outside the code.

    """
    manifest_path = _manifest_path(manifest_path)
    manifest, state, _ = load_cluster(manifest_path, strict=False)
    params = state.params

    for g in failed_groups:
        if not 0 <= g < params.m:
            raise ManifestError("Group %i out of range 0..%i." % (g, params.m - 1))
        state.erase_group(g)
    for g, i in failed_nodes:
        try:
            NodeId.of(params, g, i)
        except DimensionMismatch as exc:
            raise ParameterError("Failed node %i:%i: %s" % (g, i, exc))
        state.erase(g, i)

    lost = state.failed_nodes()
    repaired, ledger = repair_pattern(state, prefer)
    _write_nodes(repaired, manifest, os.path.dirname(manifest_path), lost)
    manifest.save(manifest_path)
    log.info("Rewrote %i chunks.", len(lost))
    return ledger


def verify_files(manifest_path):
    """Check every chunk against the manifest and the code.

    Returns a report dictionary; a chunk set is ``ok`` when nothing is
    missing or corrupt and the blocks form a codeword.

    """
    manifest, state, problems = load_cluster(manifest_path, strict=False)
    valid = state.all_alive() and (not manifest.stripe_count or verify_codeword(state))
    return {
        "chunks": len(manifest.chunks),
        "missing": sorted(name for name, what in problems.items() if what == "missing"),
        "corrupt": sorted(name for name, what in problems.items() if what == "corrupt"),
        "codeword_valid": valid,
        "ok": valid and not problems,
    }
