#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Unit tests for node repair, group repair planning and plan execution."""

import dataclasses
import itertools
import unittest

import numpy as np

from lccr.codec import CodeParams, NodeId, erasure_decodable, lccr_encode, verify_codeword
from lccr.constants import BACKEND_PRODUCT_MATRIX, GF2_POLY, GF16_POLY
from lccr.errors import (CapabilityMissing, HelperGroupDown, InsufficientHelpers,
                         NeighborUnavailable, ParameterError, PlanInvalid, UnrepairableFailure)
from lccr.galois import FieldSpec
from lccr.repair import (Action, Compute, PayloadKind, RepairPlan, Side, Transfer,
                         TransferLedger, Unrepairable, classify_group_failures, execute_plan,
                         max_repairable_failed_groups_bound, plan_adjacent_pair_repair,
                         plan_group_repair, plan_single_group_repair, repair_group_in_place,
                         repair_node_distributed_parity, repair_node_msr_part, repair_pattern)


GF2 = FieldSpec.from_poly(GF2_POLY)
GF16 = FieldSpec.from_poly(GF16_POLY)


def encoded(params, stripes=1, seed=0):
    rng = np.random.default_rng(seed)
    msg = rng.integers(0, params.field.order, size=(stripes, params.m, params.r, params.gamma),
                       dtype=np.uint8)
    return lccr_encode(params, msg)


def failed_copy(state, groups=(), nodes=()):
    work = state.copy()
    for g in groups:
        work.erase_group(g)
    for g, i in nodes:
        work.erase(g, i)
    return work


class ClassifyTests(unittest.TestCase):
    PARAMS = CodeParams(4, 2, 3, 2, field=GF16)

    def setUp(self):
        self.state = encoded(self.PARAMS)

    def test_single_failure(self):
        pattern = classify_group_failures(failed_copy(self.state, nodes=[(1, 0)]))
        self.assertEqual(pattern.failed_groups, frozenset())
        self.assertEqual(pattern.node_failures, [NodeId.of(self.PARAMS, 1, 0)])

    def test_too_many_failures_in_one_group(self):
        pattern = classify_group_failures(failed_copy(self.state, nodes=[(2, 0), (2, 1), (2, 3)]))
        self.assertEqual(pattern.failed_groups, frozenset({2}))
        self.assertEqual(pattern.node_failures, [])

    def test_spread_failures(self):
        nodes = [(g, 0) for g in range(4)]
        pattern = classify_group_failures(failed_copy(self.state, nodes=nodes))
        self.assertEqual(pattern.failed_groups, frozenset())
        self.assertEqual(len(pattern.node_failures), 4)

    def test_distributed_parity_does_not_fail_group(self):
        pattern = classify_group_failures(failed_copy(self.state, nodes=[(0, 4), (0, 5)]))
        self.assertEqual(pattern.failed_groups, frozenset())


class NodeRepairTests(unittest.TestCase):
    PARAMS = CodeParams(8, 5, 6, 5)

    def setUp(self):
        self.state = encoded(self.PARAMS, stripes=3, seed=1)

    def test_systematic_node(self):
        work = failed_copy(self.state, nodes=[(4, 2)])
        block, ledger = repair_node_msr_part(work, NodeId.of(self.PARAMS, 4, 2))
        self.assertTrue(np.array_equal(block, self.state.blocks[4, 2]))
        self.assertEqual(ledger.symbols_moved, 5)
        self.assertEqual(ledger.nodes_contacted, 5)
        self.assertEqual(ledger.helper_groups, {4})

    def test_msr_parity_node(self):
        work = failed_copy(self.state, nodes=[(0, 7)])
        block, _ = repair_node_msr_part(work, NodeId.of(self.PARAMS, 0, 7))
        self.assertTrue(np.array_equal(block, self.state.blocks[0, 7]))

    def test_rejects_distributed_parity(self):
        with self.assertRaises(ParameterError):
            repair_node_msr_part(self.state, NodeId.of(self.PARAMS, 0, 12))

    def test_distributed_parity(self):
        work = failed_copy(self.state, nodes=[(3, 11)])
        blocks, ledger = repair_node_distributed_parity(work, 3)
        self.assertEqual(blocks.shape, (5, 3, 1))
        self.assertTrue(np.array_equal(blocks, self.state.blocks[3, 10:]))
        self.assertEqual(ledger.symbols_moved, 10)
        self.assertEqual(ledger.nodes_contacted, 10)
        self.assertEqual(ledger.helper_groups, {2, 4})

    def test_distributed_parity_all_lost(self):
        work = failed_copy(self.state, nodes=[(3, i) for i in range(10, 15)])
        blocks, ledger = repair_node_distributed_parity(work, 3)
        self.assertTrue(np.array_equal(blocks, self.state.blocks[3, 10:]))
        self.assertEqual(ledger.symbols_moved, 10)

    def test_neighbor_unavailable(self):
        work = failed_copy(self.state, nodes=[(3, 10), (4, 6)])
        with self.assertRaises(NeighborUnavailable):
            repair_node_distributed_parity(work, 3)

    def test_tiny_distributed_parity(self):
        params = CodeParams(3, 1, 2, 1, field=GF2)
        state = lccr_encode(params, [[[1]], [[0]], [[0]]])
        blocks, ledger = repair_node_distributed_parity(failed_copy(state, nodes=[(1, 2)]), 1)
        self.assertEqual(blocks.tolist(), [[[1]]])
        self.assertEqual(ledger.symbols_moved, 2)
        self.assertEqual(ledger.groups_contacted, 2)


class ProductMatrixNodeRepairTests(unittest.TestCase):
    PARAMS = CodeParams(4, 3, 4, 3, BACKEND_PRODUCT_MATRIX)

    def test_every_msr_node(self):
        state = encoded(self.PARAMS, stripes=4, seed=2)
        for index in range(self.PARAMS.n_L):
            work = failed_copy(state, nodes=[(1, index)])
            block, ledger = repair_node_msr_part(work, NodeId.of(self.PARAMS, 1, index))
            self.assertTrue(np.array_equal(block, state.blocks[1, index]), index)
            self.assertEqual(ledger.symbols_moved, 4)
            self.assertEqual(ledger.nodes_contacted, 4)


class ProductMatrixPatternTests(unittest.TestCase):
    # d = 4 helpers, but r = 3 survivors are enough to decode a group
    PARAMS = CodeParams(4, 3, 4, 2, BACKEND_PRODUCT_MATRIX)

    def setUp(self):
        self.state = encoded(self.PARAMS, stripes=3, seed=11)

    def test_group_below_repair_degree_is_not_failed(self):
        work = failed_copy(self.state, nodes=[(0, 0), (0, 1), (0, 2)])
        pattern = classify_group_failures(work)
        self.assertEqual(pattern.failed_groups, frozenset())
        self.assertEqual(len(pattern.node_failures), 3)

    def test_decode_in_place(self):
        work = failed_copy(self.state, nodes=[(0, 0), (0, 1), (0, 2)])
        blocks, ledger = repair_group_in_place(work, 0)
        self.assertEqual(sorted(blocks), [0, 1, 2])
        for index, block in blocks.items():
            self.assertTrue(np.array_equal(block, self.state.blocks[0, index]), index)
        self.assertEqual(ledger.symbols_moved, 6)
        self.assertEqual(ledger.nodes, {(0, 3), (0, 4), (0, 5)})

        repaired, ledger = repair_pattern(work)
        self.assertEqual(repaired, self.state)
        self.assertEqual(ledger.helper_groups, {0})

    def test_every_msr_pattern_in_a_group(self):
        p = self.PARAMS
        for size in range(1, p.u):
            for indices in itertools.combinations(range(p.n_L), size):
                work = failed_copy(self.state, nodes=[(2, i) for i in indices])
                repaired, ledger = repair_pattern(work)
                self.assertEqual(repaired, self.state, indices)
                if size <= p.n_L - p.local.d_helpers:
                    self.assertEqual(ledger.symbols_moved, size * 4, indices)
                else:
                    self.assertEqual(ledger.symbols_moved, 6, indices)

    def test_neighbour_distributed_parity(self):
        # group 1 rebuilds its distributed parity once group 0 is whole again
        work = failed_copy(self.state, nodes=[(0, 3), (0, 4), (0, 5), (1, 6)])
        repaired, ledger = repair_pattern(work)
        self.assertEqual(repaired, self.state)
        self.assertEqual(ledger.helper_groups, {0, 2})

    def test_too_few_survivors(self):
        work = failed_copy(self.state, nodes=[(1, i) for i in range(4)])
        with self.assertRaises(InsufficientHelpers):
            repair_group_in_place(work, 1)


class SingleGroupRepairTests(unittest.TestCase):
    PARAMS = CodeParams(8, 5, 6, 5)

    def setUp(self):
        self.state = encoded(self.PARAMS, stripes=2, seed=3)

    def test_left_variant(self):
        work = failed_copy(self.state, groups=[3])
        plan = plan_single_group_repair(work, 3)
        self.assertEqual(plan.helper_groups, frozenset({1, 2, 4}))
        self.assertEqual(plan.symbols, 20)
        self.assertEqual(plan.repaired_groups, (3,))

        repaired, ledger = execute_plan(work, plan)
        self.assertEqual(repaired, self.state)
        self.assertTrue(verify_codeword(repaired))
        self.assertEqual(ledger.symbols_moved, 20)
        self.assertEqual(ledger.total_symbols, 40)
        self.assertEqual(ledger.groups_contacted, 3)
        self.assertEqual(ledger.nodes_contacted, 20)

    def test_right_variant(self):
        work = failed_copy(self.state, groups=[7])
        plan = plan_single_group_repair(work, 7, Side.RIGHT)
        self.assertEqual(plan.helper_groups, frozenset({6, 0, 1}))
        repaired, _ = execute_plan(work, plan)
        self.assertEqual(repaired, self.state)

    def test_execute_leaves_input_untouched(self):
        work = failed_copy(self.state, groups=[0])
        execute_plan(work, plan_single_group_repair(work, 0))
        self.assertFalse(work.msr_intact(0))

    def test_plan_records(self):
        work = failed_copy(self.state, groups=[3])
        records = plan_single_group_repair(work, 3).to_records()
        self.assertEqual(records[0], {"event": "transfer", "from_group": 1, "to_group": 2,
                                      "payload": "msr_parity(1)", "symbols": 5})
        self.assertEqual(records[1], {"event": "compute", "at_group": 2,
                                      "action": "xor_parities", "target": 3})
        self.assertEqual(records[2]["payload"], "recovered_parity(3)")

    def test_helper_group_down(self):
        work = failed_copy(self.state, groups=[3], nodes=[(1, 6)])
        with self.assertRaises(HelperGroupDown):
            plan_single_group_repair(work, 3)
        plan = plan_single_group_repair(work, 3, Side.RIGHT)
        self.assertEqual(plan.helper_groups, frozenset({2, 4, 5}))

    def test_stale_plan(self):
        work = failed_copy(self.state, groups=[3])
        plan = plan_single_group_repair(work, 3)
        work.erase(1, 5)
        with self.assertRaises(PlanInvalid):
            execute_plan(work, plan)

    def test_declared_size_mismatch(self):
        work = failed_copy(self.state, groups=[3])
        plan = plan_single_group_repair(work, 3)
        first = plan.steps[0]
        steps = (dataclasses.replace(first, symbol_count=first.symbol_count + 1),) + \
            plan.steps[1:]
        with self.assertRaises(PlanInvalid):
            execute_plan(work, RepairPlan(steps, plan.helper_groups, plan.repaired_groups))

    def test_three_groups(self):
        params = CodeParams(3, 2, 3, 2, field=GF16)
        state = encoded(params, stripes=2, seed=4)
        work = failed_copy(state, groups=[1])
        plan = plan_single_group_repair(work, 1)
        self.assertEqual(plan.helper_groups, frozenset({0, 2}))
        repaired, ledger = execute_plan(work, plan)
        self.assertEqual(repaired, state)
        self.assertEqual(ledger.groups_contacted, 2)

    def test_capability_missing(self):
        for params in (CodeParams(4, 3, 3, 2, field=GF16), CodeParams(4, 2, 3, 1, field=GF16)):
            work = failed_copy(encoded(params), groups=[0])
            with self.assertRaises(CapabilityMissing):
                plan_single_group_repair(work, 0)

    def test_product_matrix_backend(self):
        params = CodeParams(4, 3, 4, 3, BACKEND_PRODUCT_MATRIX)
        state = encoded(params, stripes=3, seed=5)
        work = failed_copy(state, groups=[0])
        plan = plan_single_group_repair(work, 0)
        self.assertEqual(plan.symbols, 24)
        self.assertEqual(plan.helper_groups, frozenset({1, 2, 3}))
        repaired, _ = execute_plan(work, plan)
        self.assertEqual(repaired, state)


class AdjacentPairRepairTests(unittest.TestCase):
    PARAMS = CodeParams(8, 5, 6, 5)

    def setUp(self):
        self.state = encoded(self.PARAMS, seed=6)

    def test_pair(self):
        work = failed_copy(self.state, groups=[2, 3])
        plan = plan_adjacent_pair_repair(work, 2, 3)
        self.assertEqual(plan.helper_groups, frozenset({0, 1, 4, 5}))
        self.assertEqual(plan.symbols, 40)
        repaired, ledger = execute_plan(work, plan)
        self.assertEqual(repaired, self.state)
        self.assertEqual(ledger.groups_contacted, 4)

    def test_pair_reversed(self):
        work = failed_copy(self.state, groups=[7, 0])
        plan = plan_adjacent_pair_repair(work, 0, 7)
        self.assertEqual(plan.repaired_groups, (0, 7))
        repaired, _ = execute_plan(work, plan)
        self.assertEqual(repaired, self.state)

    def test_not_adjacent(self):
        with self.assertRaises(ParameterError):
            plan_adjacent_pair_repair(self.state, 1, 3)

    def test_three_consecutive_groups(self):
        work = failed_copy(self.state, groups=[2, 3, 4])
        verdict = plan_group_repair(work, [2, 3, 4])
        self.assertIsInstance(verdict, Unrepairable)
        self.assertEqual(verdict.unrecovered, (3,))
        self.assertFalse(erasure_decodable(self.PARAMS, work.alive))


class PeelingTests(unittest.TestCase):
    def tiny(self, m):
        return CodeParams(m, 1, 2, 1, field=GF2)

    def test_alternating_groups_six(self):
        params = self.tiny(6)
        work = failed_copy(encoded(params), groups=[0, 2, 4])
        verdict = plan_group_repair(work, [0, 2, 4])
        self.assertIsInstance(verdict, Unrepairable)
        self.assertEqual(verdict.unrecovered, (0, 2, 4))

    def test_alternating_groups_seven(self):
        params = CodeParams(7, 2, 3, 2, field=GF16)
        state = encoded(params, stripes=2, seed=7)
        work = failed_copy(state, groups=[0, 2, 4])
        plan = plan_group_repair(work, [0, 2, 4])
        self.assertIsInstance(plan, RepairPlan)
        # recovered groups serve as sources for the groups after them
        self.assertEqual(plan.helper_groups, frozenset({1, 3, 5, 6}))
        repaired, ledger = execute_plan(work, plan)
        self.assertEqual(repaired, state)
        self.assertEqual(ledger.groups_contacted, 4)

    def check_every_group_set(self, params, seed):
        """Plan every failed group set of ``params`` in several orders.

        Returns the sets which the full decoder recovers but peeling does not.

        """
        m = params.m
        state = encoded(params, stripes=4, seed=seed)
        bound = max_repairable_failed_groups_bound(params)
        rng = np.random.Generator(np.random.PCG64(seed))
        missed = []
        for size in range(1, m + 1):
            for groups in itertools.combinations(range(m), size):
                work = failed_copy(state, groups=groups)
                verdict = plan_group_repair(work, groups)
                for _ in range(3):
                    order = [int(g) for g in rng.permutation(groups)]
                    shuffled = plan_group_repair(work, groups, order=order)
                    self.assertEqual(type(verdict), type(shuffled), (m, groups, order))
                    if isinstance(verdict, Unrepairable):
                        self.assertEqual(sorted(verdict.unrecovered),
                                         sorted(shuffled.unrecovered), (m, groups, order))

                decodable = erasure_decodable(params, work.alive)
                if isinstance(verdict, Unrepairable):
                    if decodable:
                        missed.append(groups)
                    continue
                self.assertTrue(decodable, (m, groups))
                self.assertLessEqual(len(groups), bound)
                repaired, _ = execute_plan(work, verdict)
                self.assertEqual(repaired, state, (m, groups))
        return missed

    def test_exhaustive_small_codes(self):
        for m in range(3, 8):
            missed = self.check_every_group_set(self.tiny(m), seed=m)
            # a single failed group always has a chain
            self.assertTrue(all(len(groups) >= 2 for groups in missed), (m, missed))

    def test_exhaustive_two_block_groups(self):
        for m in range(4, 7):
            params = CodeParams(m, 2, 3, 2, field=GF16)
            missed = self.check_every_group_set(params, seed=10 + m)
            self.assertTrue(all(len(groups) >= 2 for groups in missed), (m, missed))

    def test_bad_order(self):
        params = self.tiny(5)
        work = failed_copy(encoded(params), groups=[0, 2])
        with self.assertRaises(ParameterError):
            plan_group_repair(work, [0, 2], order=[0, 3])

    def test_bound(self):
        self.assertEqual(max_repairable_failed_groups_bound(self.tiny(5)), 3)
        self.assertEqual(max_repairable_failed_groups_bound(CodeParams(8, 5, 6, 5)), 15)


class RepairPatternTests(unittest.TestCase):
    PARAMS = CodeParams(8, 5, 6, 5)

    def setUp(self):
        self.state = encoded(self.PARAMS, stripes=2, seed=8)

    def test_mixed_failures(self):
        work = failed_copy(self.state, groups=[3], nodes=[(6, 0), (0, 12)])
        repaired, ledger = repair_pattern(work)
        self.assertEqual(repaired, self.state)
        # node repair + group repair + distributed parity rebuild
        self.assertEqual(ledger.symbols_moved, 5 + 20 + 10)

    def test_nothing_failed(self):
        repaired, ledger = repair_pattern(self.state)
        self.assertEqual(repaired, self.state)
        self.assertEqual(ledger.symbols_moved, 0)

    def test_partially_failed_group(self):
        work = failed_copy(self.state, nodes=[(5, i) for i in range(6)])
        repaired, _ = repair_pattern(work, Side.RIGHT)
        self.assertEqual(repaired, self.state)

    def test_unrepairable(self):
        work = failed_copy(self.state, groups=[2, 3, 4])
        with self.assertRaises(UnrepairableFailure) as ctx:
            repair_pattern(work)
        self.assertEqual(ctx.exception.unrecovered, (3,))


class LedgerTests(unittest.TestCase):
    def test_merge_and_dict(self):
        a = TransferLedger(stripes=2)
        a.record(Transfer(0, 1, None, 3))
        a.touch(0, [1, 2])
        a.helper_groups.add(0)
        b = TransferLedger(stripes=2)
        b.record(Compute(1, Action.RE_ENCODE, 1))
        b.touch(2, [0])
        b.helper_groups.add(2)

        a.merge(b)
        self.assertEqual(a.to_dict(), {"symbols_moved": 3, "total_symbols": 6, "stripes": 2,
                                       "nodes_contacted": 3, "groups_contacted": 2,
                                       "helper_groups": [0, 2]})
        self.assertEqual(len(a.events), 2)

    def test_side(self):
        self.assertIs(Side.LEFT.other, Side.RIGHT)
        self.assertEqual(Side('right'), Side.RIGHT)

    def test_payload_names(self):
        self.assertEqual(PayloadKind.RECOVERED_PARITY.value, 'recovered_parity')


if __name__ == '__main__':
    unittest.main()
