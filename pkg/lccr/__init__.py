# -*- coding:utf-8 -*-
"""Local codes with cooperative repair for distributed storage.

The most commonly used names are re-exported here; see the individual
modules for the rest.

"""
from .version import version as __version__  # noqa
from .errors import *  # noqa
from .galois import FieldSpec, GaloisField, get_field  # noqa
from .localcode import LocalCodeParams, ProductMatrixMSRCode, ScalarMDSCode  # noqa
from .codec import (ClusterState, CodeParams, NodeId, NodeKind, erasure_decode_full,  # noqa
                    global_generator, lccr_encode, min_distance_bruteforce, verify_codeword)
from .repair import (execute_plan, plan_group_repair, repair_pattern,  # noqa
                     TransferLedger, Unrepairable)
