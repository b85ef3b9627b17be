# -*- coding: utf-8 -*-
#
# util.py
#
"""Collection of utility functions for configuring codes.

Contains functions to get the local code backend and the field polynomial
from the environment, to parse group and node specifications given on the
command line and to construct code parameters.

"""

import logging
import os

from .codec import CodeParams, NodeId
from .constants import BACKENDS, DEFAULT_BACKEND, DEFAULT_FIELD_POLY, ENV_BACKEND, ENV_FIELD_POLY
from .errors import FieldError, ParameterError
from .galois import FieldSpec


__all__ = (
    'get_backend_from_environment',
    'get_field_poly_from_environment',
    'make_code_params',
    'parse_group_list',
    'parse_int',
    'parse_node_spec',
)

log = logging.getLogger(__name__)


def parse_int(text):
    """Parse a decimal or ``0x``-prefixed hexadecimal integer."""
    try:
        return int(str(text).strip(), 0)
    except ValueError:
        raise ParameterError("Invalid integer %r." % (text,))


def get_backend_from_environment(backend=None):
    """Return the local code backend specified in the environment if any.

    If the optional backend argument is ``None`` (the default), look in the
    environment variable ``LCCR_BACKEND`` for the backend name. Valid names
    are ``scalar`` and ``product-matrix``. If no valid value is found,
    ``scalar`` will be used.

    """
    if backend is None:
        backend = DEFAULT_BACKEND
        if ENV_BACKEND in os.environ:
            name = os.environ[ENV_BACKEND].strip().lower()
            if name in BACKENDS:
                backend = name
            else:
                log.warning("Ignoring unknown backend '%s' in environment variable %s.",
                            name, ENV_BACKEND)

    return backend


def get_field_poly_from_environment(poly=None):
    """Return the reduction polynomial specified in the environment if any.

    If ``poly`` is ``None``, the environment variable ``LCCR_FIELD_POLY`` is
    consulted (decimal or ``0x`` hex). Values that are not an irreducible
    polynomial of a supported degree are ignored and the GF(2^8)
    polynomial 0x11D is used.

    """
    if poly is None:
        poly = DEFAULT_FIELD_POLY
        if ENV_FIELD_POLY in os.environ:
            value = os.environ[ENV_FIELD_POLY]
            try:
                candidate = parse_int(value)
                FieldSpec.from_poly(candidate)
            except (ParameterError, FieldError):
                log.warning("Ignoring invalid field polynomial '%s' in environment "
                            "variable %s.", value, ENV_FIELD_POLY)
            else:
                poly = candidate

    return poly


def parse_group_list(text):
    """Parse ``"a,b,c"`` into a sorted tuple of distinct group indices."""
    if not text or not text.strip():
        return ()
    groups = set()
    for part in text.split(','):
        value = parse_int(part)
        if value < 0:
            raise ParameterError("Negative group index %i." % value)
        groups.add(value)
    return tuple(sorted(groups))


def parse_node_spec(text, params=None):
    """Parse ``"g:i"`` into ``(group, index)``, or a ``NodeId`` if ``params`` is given."""
    group, sep, index = str(text).partition(':')
    if not sep:
        raise ParameterError("Node must be given as GROUP:INDEX, got %r." % (text,))

    group, index = parse_int(group), parse_int(index)
    if params is None:
        return group, index

    try:
        return NodeId.of(params, group, index)
    except ValueError as exc:
        raise ParameterError(str(exc))


def make_code_params(m, r, u, delta, backend=None, field_poly=None):
    """Construct ``CodeParams``, filling backend and field from the environment.

    Exceptions:

    ``lccr.errors.ParameterError``
        Raised for invalid parameter combinations.

    ``lccr.errors.FieldError``
        Raised when the field polynomial is not usable.

    """
    backend = get_backend_from_environment(backend)
    if backend not in BACKENDS:
        raise ParameterError("Unknown local code backend %r." % backend)

    field = FieldSpec.from_poly(get_field_poly_from_environment(field_poly))
    return CodeParams(m, r, u, delta, backend, field)
