#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Unit tests for the closed-form metrics."""

import dataclasses
import unittest
from fractions import Fraction

from lccr.errors import DomainError
from lccr.metrics import (Family, MetricsRow, code_length, d_min_formula, d_min_long_form,
                          format_value, gamma_factor, group_bw_overhead, group_locality,
                          group_repairable, lccr_group_repair_model_symbols,
                          lccr_group_repair_traced_symbols, mbr_point, msr_point,
                          node_bw_overhead, node_locality, storage_overhead)


LCCR_POINT = (Family.LCCR, 8, 5, 6, 5)
MSR_POINT = (Family.MSR_LOCAL, 4, 21, 8, 8)


class TradeoffPointTests(unittest.TestCase):
    def test_msr_point(self):
        point = msr_point(12, 3, 4)
        self.assertEqual(point.per_node_storage, 4)
        self.assertEqual(point.repair_bandwidth, 8)

    def test_mbr_point(self):
        point = mbr_point(12, 3, 4)
        self.assertEqual(point.per_node_storage, Fraction(16, 3))
        self.assertEqual(point.per_node_storage, point.repair_bandwidth)

    def test_msr_stores_less_mbr_repairs_cheaper(self):
        msr, mbr = msr_point(60, 5, 8), mbr_point(60, 5, 8)
        self.assertLess(msr.per_node_storage, mbr.per_node_storage)
        self.assertLess(mbr.repair_bandwidth, msr.repair_bandwidth)

    def test_domain(self):
        for args in ((0, 3, 4), (12, 0, 4), (12, 5, 4)):
            with self.assertRaises(DomainError):
                msr_point(*args)

    def test_gamma(self):
        self.assertEqual(gamma_factor(2, 3), Fraction(6, 5))
        self.assertGreater(gamma_factor(21, 8), 1)
        with self.assertRaises(DomainError):
            gamma_factor(1, 3)
        with self.assertRaises(DomainError):
            gamma_factor(2, 2)


class LCCRMetricsTests(unittest.TestCase):
    def test_point(self):
        self.assertEqual(code_length(*LCCR_POINT), 120)
        self.assertEqual(d_min_formula(*LCCR_POINT), 16)
        self.assertEqual(storage_overhead(*LCCR_POINT), 3)
        self.assertEqual(node_locality(*LCCR_POINT), Fraction(28, 3))
        self.assertEqual(node_bw_overhead(*LCCR_POINT), Fraction(86, 5))
        self.assertEqual(group_locality(*LCCR_POINT), 3)
        self.assertEqual(group_bw_overhead(*LCCR_POINT), 5)
        self.assertTrue(group_repairable(*LCCR_POINT))

    def test_not_group_repairable(self):
        self.assertFalse(group_repairable(Family.LCCR, 3, 30, 6, 5))
        self.assertFalse(group_repairable(Family.LCCR, 8, 5, 6, 4))

    def test_long_form_distance(self):
        self.assertEqual(d_min_long_form(8, 5, 6, 5), 16)
        self.assertEqual(d_min_long_form(3, 1, 2, 1), 4)

    def test_repair_symbol_counts(self):
        self.assertEqual(lccr_group_repair_model_symbols(5, 6), 125)
        self.assertEqual(lccr_group_repair_traced_symbols(6, 5), 20)
        self.assertEqual(lccr_group_repair_traced_symbols(4, 3, gamma=2), 24)

    def test_locality_independent_of_m(self):
        self.assertEqual(group_locality(Family.LCCR, 30), 3)


class BaselineMetricsTests(unittest.TestCase):
    def test_msr_local_point(self):
        self.assertEqual(code_length(*MSR_POINT), 120)
        self.assertEqual(d_min_formula(*MSR_POINT), 16)
        self.assertEqual(node_bw_overhead(*MSR_POINT), Fraction(104, 7))
        self.assertEqual(group_locality(*MSR_POINT), 4)
        self.assertEqual(group_bw_overhead(*MSR_POINT), Fraction(8, 21) + 5)
        self.assertFalse(group_repairable(*MSR_POINT))

    def test_msr_local_storage(self):
        self.assertEqual(storage_overhead(*MSR_POINT), Fraction(28 * 4 + 8, 4 * 21))

    def test_mbr_local_storage(self):
        mbr = storage_overhead(Family.MBR_LOCAL, 4, 21, 8, 8)
        self.assertEqual(mbr, storage_overhead(*MSR_POINT) * gamma_factor(21, 8))
        self.assertGreater(mbr, storage_overhead(*MSR_POINT))

    def test_mbr_local_repairs_cheaper(self):
        self.assertLess(node_bw_overhead(Family.MBR_LOCAL, 4, 21, 8, 8),
                        node_bw_overhead(*MSR_POINT))

    def test_family_by_name(self):
        self.assertEqual(code_length('msr-local', 4, 21, 8, 8), 120)

    def test_domain(self):
        with self.assertRaises(DomainError):
            storage_overhead('rs', 4, 21, 8, 8)
        with self.assertRaises(DomainError):
            node_locality(Family.LCCR, 0, 1, 2, 1)
        with self.assertRaises(DomainError):
            code_length(Family.LCCR, 3, 1, 1, 0)


class FormatTests(unittest.TestCase):
    def test_fraction(self):
        self.assertEqual(format_value(Fraction(1, 3)), '0.333333')
        self.assertEqual(format_value(Fraction(5)), '5.00000')
        self.assertEqual(format_value(Fraction(104, 7)), '14.8571')

    def test_other_values(self):
        self.assertEqual(format_value(True), '1')
        self.assertEqual(format_value(False), '0')
        self.assertEqual(format_value(120), '120')
        self.assertEqual(format_value(Family.MBR_LOCAL), 'mbr-local')


class MetricsRowTests(unittest.TestCase):
    def test_cells(self):
        row = MetricsRow.compute('lccr', 8, 5, 6, 5)
        self.assertEqual(row.cells(), ['lccr', '8', '5', '6', '5', '120', '16', '3.00000',
                                       '9.33333', '17.2000', '3', '5.00000', '1'])

    def test_validate(self):
        row = MetricsRow.compute(Family.MSR_LOCAL, 4, 21, 8, 8)
        self.assertIs(row.validate(), row)
        with self.assertRaises(DomainError):
            dataclasses.replace(row, n=119).validate()

    def test_sort_key(self):
        rows = [MetricsRow.compute(Family.MSR_LOCAL, 4, 21, 8, 8),
                MetricsRow.compute(Family.LCCR, 8, 5, 6, 5),
                MetricsRow.compute(Family.LCCR, 3, 30, 6, 5)]
        ordered = sorted(rows, key=MetricsRow.sort_key)
        self.assertEqual([(row.family, row.m) for row in ordered],
                         [(Family.LCCR, 3), (Family.LCCR, 8), (Family.MSR_LOCAL, 4)])


if __name__ == '__main__':
    unittest.main()
