#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""Tests for the lccr command line interface."""

import io
import json
import os
import shutil
import tempfile
import unittest

try:
    from unittest import mock
except ImportError:
    import mock

from lccr.cli import main
from lccr.constants import CSV_HEADER, EXIT_DOMAIN_ERROR, EXIT_OK, EXIT_USAGE
from lccr.storage import chunk_name


CODE_ARGS = ['--m', '8', '--r', '5', '--u', '6', '--delta', '5']
TINY_ARGS = ['--m', '3', '--r', '1', '--u', '2', '--delta', '1', '--field-poly', '0x3']


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.mkdtemp()
        env = mock.patch.dict(os.environ, {}, clear=True)
        env.start()
        self.addCleanup(env.stop)

    def tearDown(self):
        shutil.rmtree(self.tmpdir)

    def run_cli(self, *argv):
        with mock.patch('sys.stdout', new_callable=io.StringIO) as stdout, \
                mock.patch('sys.stderr', new_callable=io.StringIO):
            status = main(list(argv))
        return status, stdout.getvalue()

    def path(self, *names):
        return os.path.join(self.tmpdir, *names)


class MindistTests(CliTestCase):
    def test_tiny_code(self):
        status, out = self.run_cli('mindist', *TINY_ARGS)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(out.strip(), '4')

    def test_too_large(self):
        status, _ = self.run_cli('mindist', *CODE_ARGS)
        self.assertEqual(status, EXIT_DOMAIN_ERROR)


class SweepTests(CliTestCase):
    def test_lccr_rows(self):
        status, out = self.run_cli('sweep', '--families', 'lccr')
        self.assertEqual(status, EXIT_OK)
        lines = out.splitlines()
        self.assertEqual(lines[0], ','.join(CSV_HEADER))
        self.assertEqual(len(lines), 7)

    def test_output_file(self):
        path = self.path('sweep.csv')
        status, out = self.run_cli('sweep', '--families', 'lccr',
                                   '--require-group-repairable', '--out', path)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(out, '')
        with open(path) as fileobj:
            self.assertEqual(len(fileobj.read().splitlines()), 3)

    def test_unknown_family(self):
        status, _ = self.run_cli('sweep', '--families', 'lccr,rs')
        self.assertEqual(status, EXIT_USAGE)


class SimulateTests(CliTestCase):
    def test_single_group(self):
        trace = self.path('trace.jsonl')
        status, out = self.run_cli('simulate', *CODE_ARGS, '--scenario', 'single-group',
                                   '--failed-groups', '3', '--seed', '1', '--trace', trace)
        self.assertEqual(status, EXIT_OK)
        result = json.loads(out)
        self.assertEqual(result["verdict"], "repaired")
        self.assertTrue(result["exact"])
        self.assertEqual(result["ledger"]["symbols_moved"], 20)
        self.assertEqual(result["ledger"]["groups_contacted"], 3)
        with open(trace) as fileobj:
            records = [json.loads(line) for line in fileobj]
        self.assertEqual(sum(r["symbols"] for r in records if r["event"] == "transfer"), 20)

    def test_single_node(self):
        status, out = self.run_cli('simulate', *CODE_ARGS, '--scenario', 'single-node',
                                   '--failed-node', '2:11')
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(json.loads(out)["failed_nodes"], ["2:11"])

    def test_unrepairable(self):
        status, out = self.run_cli('simulate', *CODE_ARGS, '--scenario', 'group-set',
                                   '--failed-groups', '2,3,4')
        self.assertEqual(status, EXIT_DOMAIN_ERROR)
        self.assertEqual(json.loads(out)["verdict"], "unrepairable")

    def test_not_applicable(self):
        status, _ = self.run_cli('simulate', '--m', '4', '--r', '3', '--u', '3', '--delta',
                                 '2', '--field-poly', '0x13', '--failed-groups', '0')
        self.assertEqual(status, EXIT_USAGE)


class FileCommandTests(CliTestCase):
    def setUp(self):
        super().setUp()
        self.input = self.path('input.bin')
        self.data = bytes(range(256)) * 20
        with open(self.input, 'wb') as fileobj:
            fileobj.write(self.data)
        self.chunks = self.path('chunks')

    def encode(self):
        status, out = self.run_cli('encode', self.input, '--out', self.chunks, *CODE_ARGS)
        self.assertEqual(status, EXIT_OK)
        return json.loads(out)

    def decoded(self):
        out_path = self.path('output.bin')
        status, _ = self.run_cli('decode', '--manifest', self.chunks, '--out', out_path)
        self.assertEqual(status, EXIT_OK)
        with open(out_path, 'rb') as fileobj:
            return fileobj.read()

    def test_encode_decode(self):
        summary = self.encode()
        self.assertEqual(summary["bytes"], len(self.data))
        self.assertEqual(summary["chunks"], 120)
        self.assertEqual(self.decoded(), self.data)

    def test_repair_and_verify(self):
        self.encode()
        for i in range(15):
            os.remove(os.path.join(self.chunks, chunk_name(0, i)))

        status, out = self.run_cli('verify', '--manifest', self.chunks)
        self.assertEqual(status, EXIT_DOMAIN_ERROR)
        self.assertEqual(len(json.loads(out)["missing"]), 15)

        status, out = self.run_cli('repair', '--manifest', self.chunks, '--prefer', 'right')
        self.assertEqual(status, EXIT_OK)
        result = json.loads(out)
        self.assertEqual(result["verdict"], "repaired")
        self.assertEqual(result["helper_groups"], [1, 2, 7])

        status, _ = self.run_cli('verify', '--manifest', self.chunks)
        self.assertEqual(status, EXIT_OK)
        self.assertEqual(self.decoded(), self.data)

    def test_repair_unrepairable(self):
        self.encode()
        status, out = self.run_cli('repair', '--manifest', self.chunks,
                                   '--failed-groups', '2,3,4')
        self.assertEqual(status, EXIT_DOMAIN_ERROR)
        self.assertEqual(json.loads(out), {"verdict": "unrepairable", "unrecovered": [3]})

    def test_repair_node_out_of_range(self):
        self.encode()
        status, _ = self.run_cli('repair', '--manifest', self.chunks, '--failed-node', '0:15')
        self.assertEqual(status, EXIT_USAGE)

    def test_missing_manifest(self):
        status, _ = self.run_cli('decode', '--manifest', self.path('nowhere'))
        self.assertEqual(status, EXIT_DOMAIN_ERROR)


class UsageTests(CliTestCase):
    def test_no_command(self):
        status, _ = self.run_cli()
        self.assertEqual(status, EXIT_USAGE)

    def test_invalid_parameters(self):
        status, _ = self.run_cli('mindist', '--m', '2', '--r', '1', '--u', '2', '--delta', '1')
        self.assertEqual(status, EXIT_USAGE)

    def test_bad_field_poly(self):
        status, _ = self.run_cli('mindist', *TINY_ARGS[:-1], '0x15')
        self.assertEqual(status, EXIT_USAGE)

    def test_version(self):
        status, out = self.run_cli('--version')
        self.assertEqual(status, EXIT_OK)
        self.assertTrue(out.startswith('lccr '))


if __name__ == '__main__':
    unittest.main()
