# -*- coding: utf-8 -*-
"""Definitions of field polynomials, file format constants and defaults."""

###################################################
# Reduction polynomials (bitmask, bit i = coefficient of x^i)

GF2_POLY = 0x3
# x + 1

GF4_POLY = 0x7
# x^2 + x + 1

GF16_POLY = 0x13
# x^4 + x + 1

GF256_POLY = 0x11D
# x^8 + x^4 + x^3 + x^2 + 1

DEFAULT_FIELD_POLY = GF256_POLY

SUPPORTED_WIDTHS = (1, 2, 4, 8)


###################################################
# Local code backends

BACKEND_SCALAR = 'scalar'
BACKEND_PRODUCT_MATRIX = 'product-matrix'
BACKENDS = (BACKEND_SCALAR, BACKEND_PRODUCT_MATRIX)
DEFAULT_BACKEND = BACKEND_SCALAR


###################################################
# Node kinds (also the kind byte of a chunk header)

KIND_SYSTEMATIC = 0
KIND_MSR_PARITY = 1
KIND_DISTRIBUTED_PARITY = 2


###################################################
# Environment variables

ENV_BACKEND = 'LCCR_BACKEND'
ENV_FIELD_POLY = 'LCCR_FIELD_POLY'


###################################################
# Oracles

# max. number of messages enumerated by the minimum distance brute force
BRUTEFORCE_LIMIT = 1 << 24
# messages per vectorized batch
BRUTEFORCE_BATCH = 1 << 16


###################################################
# Chunk files
# header: magic, version, group (LE), node index (LE), kind, payload symbols (LE)

CHUNK_MAGIC = b'LCCR'
CHUNK_VERSION = 1
CHUNK_HEADER_FORMAT = '<4sBHHBI'
CHUNK_SUFFIX = '.chunk'


###################################################
# Manifest

MANIFEST_FORMAT_VERSION = 1
MANIFEST_NAME = 'manifest.json'
FAMILY_LCCR = 'lccr'


###################################################
# Sweep defaults

DEFAULT_SWEEP_N = 120
DEFAULT_SWEEP_DMIN = 16
CSV_HEADER = (
    'family', 'm', 'r', 'u', 'delta', 'n', 'd_min', 'storage_overhead',
    'node_locality', 'node_bw_overhead', 'group_locality', 'group_bw_overhead',
    'group_repairable',
)
CSV_SIGNIFICANT_DIGITS = 6


###################################################
# CLI exit codes

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_USAGE = 2
