# -*- coding: utf-8 -*-
#
# metrics.py
#
"""Closed-form storage and repair metrics of LCCR and its baselines.

All values are exact ``fractions.Fraction`` instances. ``n_L`` always
denotes r + u - 1. The formulas are the analytic model values, including
those which the repair simulator measures differently:

* the LCCR group repair bandwidth overhead 5(u - 1)/r, whereas a traced
  single-group repair moves (3(u - 1) + Δ)Γ symbols,
* the node repair bandwidth term n_L²(n_L - 1)/(r²(u - 1)), which counts
  n_L/r times the usual MSR repair bandwidth.

The baselines count their global parity part as one extra repair unit.

"""

from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction

from .constants import CSV_SIGNIFICANT_DIGITS
from .errors import DomainError


__all__ = (
    'Family',
    'MetricsRow',
    'TradeoffPoint',
    'code_length',
    'd_min_formula',
    'd_min_long_form',
    'format_value',
    'gamma_factor',
    'group_bw_overhead',
    'group_locality',
    'group_repairable',
    'lccr_group_repair_model_symbols',
    'lccr_group_repair_traced_symbols',
    'mbr_point',
    'msr_point',
    'node_bw_overhead',
    'node_locality',
    'storage_overhead',
)


class Family(Enum):
    LCCR = 'lccr'
    MSR_LOCAL = 'msr-local'
    MBR_LOCAL = 'mbr-local'

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class TradeoffPoint:
    per_node_storage: Fraction
    repair_bandwidth: Fraction


def _check_point(M, k, d):
    if k <= 0 or M <= 0:
        raise DomainError("Need M > 0 and k > 0, got M=%r, k=%r." % (M, k))
    if k > d:
        raise DomainError("Need k <= d, got k=%r, d=%r." % (k, d))


def msr_point(M, k, d):
    """Return the minimum-storage point ``(M/k, Md/(k(d-k+1)))``."""
    _check_point(M, k, d)
    return TradeoffPoint(Fraction(M, k), Fraction(M * d, k * (d - k + 1)))


def mbr_point(M, k, d):
    """Return the minimum-bandwidth point, where storage equals repair bandwidth."""
    _check_point(M, k, d)
    value = Fraction(2 * M * d, 2 * k * d - k * k + k)
    return TradeoffPoint(value, value)


def _family(family, m, r, u, delta):
    try:
        family = Family(family)
    except ValueError:
        raise DomainError("Unknown code family %r." % (family,))

    if m < 1 or r < 1 or u < 2 or delta < 0:
        raise DomainError("Invalid parameters m=%r, r=%r, u=%r, delta=%r." % (m, r, u, delta))
    return family


def gamma_factor(r, u):
    """Extra storage factor 2(r+u-2)/(r+2u-3) of MBR over MSR local codes.

    Defined for r >= 2 and u >= 3, where it is greater than one.

    """
    if r < 2 or u < 3:
        raise DomainError("gamma is defined for r >= 2 and u >= 3, got r=%r, u=%r." % (r, u))
    return Fraction(2 * (r + u - 2), r + 2 * u - 3)


def _mbr_factor(r, u):
    # gamma without the r >= 2, u >= 3 guard, for the relaxed parameter ranges
    return Fraction(2 * (r + u - 2), r + 2 * u - 3)


def code_length(family, m, r, u, delta):
    family = _family(family, m, r, u, delta)
    n_L = r + u - 1
    if family is Family.LCCR:
        return m * (n_L + delta)
    return m * n_L + delta


def storage_overhead(family, m, r, u, delta):
    family = _family(family, m, r, u, delta)
    n_L = r + u - 1
    if family is Family.LCCR:
        return Fraction(n_L + delta, r)

    msr = (n_L + Fraction(delta, m)) / r
    if family is Family.MSR_LOCAL:
        return msr
    return msr * _mbr_factor(r, u)


def node_locality(family, m, r, u, delta):
    """Average number of nodes contacted to repair one failed node."""
    family = _family(family, m, r, u, delta)
    n_L = r + u - 1
    if family is Family.LCCR:
        return Fraction((n_L - 1) * n_L + 2 * (u - 1) * delta, n_L + delta)
    return ((n_L - 1) * n_L + r * delta) / (n_L + Fraction(delta, m))


def node_bw_overhead(family, m, r, u, delta):
    family = _family(family, m, r, u, delta)
    n_L = r + u - 1
    if family is Family.MBR_LOCAL:
        return Fraction(2 * n_L * (n_L - 1), r * (r + 2 * u - 3)) + delta

    local = Fraction(n_L * n_L * (n_L - 1), r * r * (u - 1))
    if family is Family.LCCR:
        return local + Fraction(2 * (u - 1) ** 2, r)
    return local + delta


def group_locality(family, m, r=1, u=2, delta=0):
    """Number of groups taking part in the repair of one failed group."""
    family = _family(family, m, r, u, delta)
    return 3 if family is Family.LCCR else m


def group_bw_overhead(family, m, r, u, delta):
    family = _family(family, m, r, u, delta)
    if family is Family.LCCR:
        return Fraction(5 * (u - 1), r)
    if family is Family.MSR_LOCAL:
        return Fraction(delta, r) + m + 1
    return Fraction(2 * delta * (r + u - 2), r * (r + 2 * u - 3)) + m + 1


def group_repairable(family, m, r, u, delta):
    """True if one failed group can be recovered at all."""
    family = _family(family, m, r, u, delta)
    if family is Family.LCCR:
        return u - 1 >= r and delta >= r
    return delta >= r


def d_min_formula(family, m, r, u, delta):
    family = _family(family, m, r, u, delta)
    if family is Family.LCCR:
        return u + 2 * delta
    return u + delta


def d_min_long_form(m, r, u, delta):
    """n - mr + u - 2(m-1)(u-1), which equals u + 2Δ when Δ = u - 1."""
    _family(Family.LCCR, m, r, u, delta)
    n = m * (r + u - 1 + delta)
    return n - m * r + u - 2 * (m - 1) * (u - 1)


def lccr_group_repair_model_symbols(r, u):
    """Model symbol count 5(u - 1)r of one LCCR group repair."""
    return 5 * (u - 1) * r


def lccr_group_repair_traced_symbols(u, delta, gamma=1):
    """Symbols moved by the cooperative repair of one group.

    The relay receives (u-1)Γ, the failed group Δ·Γ of recovered parity
    and 2(u-1)Γ to rebuild its distributed parity.

    """
    return (3 * (u - 1) + delta) * gamma


def format_value(value):
    """Render a CSV cell; rationals use a fixed number of significant digits."""
    if isinstance(value, bool):
        return '1' if value else '0'
    if isinstance(value, Fraction):
        text = '{:#.{}g}'.format(float(value), CSV_SIGNIFICANT_DIGITS)
        return text.rstrip('.')
    return str(value)


@dataclass(frozen=True)
class MetricsRow:
    family: Family
    m: int
    r: int
    u: int
    delta: int
    n: int
    d_min: int
    storage_overhead: Fraction
    node_locality: Fraction
    node_bw_overhead: Fraction
    group_locality: int
    group_bw_overhead: Fraction
    group_repairable: bool

    @classmethod
    def compute(cls, family, m, r, u, delta):
        family = Family(family)
        args = (family, m, r, u, delta)
        return cls(family, m, r, u, delta,
                   n=code_length(*args),
                   d_min=d_min_formula(*args),
                   storage_overhead=storage_overhead(*args),
                   node_locality=node_locality(*args),
                   node_bw_overhead=node_bw_overhead(*args),
                   group_locality=group_locality(*args),
                   group_bw_overhead=group_bw_overhead(*args),
                   group_repairable=group_repairable(*args))

    def validate(self):
        """Raise ``DomainError`` unless n and d_min match the parameters."""
        args = (self.family, self.m, self.r, self.u, self.delta)
        if code_length(*args) != self.n or d_min_formula(*args) != self.d_min:
            raise DomainError("Row %s: n=%i, d_min=%i do not match its parameters." %
                              (self.family, self.n, self.d_min))
        return self

    def sort_key(self):
        return (list(Family).index(self.family), self.m, self.r, self.u, self.delta)

    def cells(self):
        """Return the CSV cells in column order."""
        return [format_value(value) for value in asdict(self).values()]
