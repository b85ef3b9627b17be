# -*- coding: utf-8 -*-
#
# cli.py
#
"""Command line interface of the lccr toolkit.

Machine-readable results go to standard output (JSON, CSV or a bare
integer), log messages to standard error. Exit status is 0 on success, 1
when the requested operation is impossible (e.g. unrepairable failures)
and 2 on usage errors.

"""

import argparse
import json
import logging
import sys

from .codec import min_distance_bruteforce
from .constants import (BACKENDS, DEFAULT_SWEEP_DMIN, DEFAULT_SWEEP_N, EXIT_DOMAIN_ERROR,
                        EXIT_OK, EXIT_USAGE)
from .errors import FieldError, LCCRError, ParameterError, ScenarioInvalid, UnrepairableFailure
from .metrics import Family
from .simulator import Scenario, ScenarioKind, simulate, write_trace
from .storage import decode_file, encode_file, repair_files, verify_files
from .sweep import SweepSpec, emit_csv, run_sweep, write_csv
from .util import make_code_params, parse_group_list, parse_int, parse_node_spec
from .version import version


__all__ = ('main',)

log = logging.getLogger(__name__)


def print_json(data):
    print(json.dumps(data, indent=2, sort_keys=True))


def _code_params(args):
    return make_code_params(args.m, args.r, args.u, args.delta, args.backend, args.field_poly)


def _failed_nodes(args):
    return [parse_node_spec(spec) for spec in args.failed_node or ()]


def cmd_encode(args):
    params = _code_params(args)
    with open(args.input, 'rb') as fileobj:
        data = fileobj.read()
    manifest = encode_file(data, params, args.out)
    print_json({"stripes": manifest.stripe_count, "bytes": manifest.original_length_bytes,
                "chunks": len(manifest.chunks), "params": params.describe()})
    return EXIT_OK


def cmd_decode(args):
    data = decode_file(args.manifest)
    if args.out:
        with open(args.out, 'wb') as fileobj:
            fileobj.write(data)
        print_json({"bytes": len(data)})
    else:
        sys.stdout.buffer.write(data)
    return EXIT_OK


def cmd_repair(args):
    try:
        ledger = repair_files(args.manifest, parse_group_list(args.failed_groups),
                              _failed_nodes(args), args.prefer)
    except UnrepairableFailure as exc:
        log.error("%s", exc)
        print_json({"verdict": "unrepairable", "unrecovered": list(exc.unrecovered)})
        return EXIT_DOMAIN_ERROR

    result = {"verdict": "repaired"}
    result.update(ledger.to_dict())
    print_json(result)
    return EXIT_OK


def cmd_simulate(args):
    params = _code_params(args)
    kind = ScenarioKind(args.scenario)
    if kind is ScenarioKind.SINGLE_NODE:
        targets = _failed_nodes(args)[:1]
    else:
        targets = parse_group_list(args.failed_groups)

    scenario = Scenario(kind, args.seed, targets, args.count, args.stripes, args.prefer)
    result = simulate(params, scenario)
    if args.trace:
        with open(args.trace, 'w') as fileobj:
            write_trace(result.trace, fileobj)
    print_json(result.to_dict())
    return EXIT_OK if result.verdict == "repaired" else EXIT_DOMAIN_ERROR


def cmd_sweep(args):
    families = [name.strip() for name in args.families.split(',') if name.strip()]
    try:
        spec = SweepSpec(args.n, args.dmin, tuple(Family(name) for name in families),
                         args.relaxed, args.require_group_repairable, args.workers)
    except ValueError as exc:
        raise ParameterError(str(exc))

    rows = run_sweep(spec)
    if args.out:
        emit_csv(rows, args.out)
    else:
        write_csv(rows, sys.stdout)
    return EXIT_OK


def cmd_mindist(args):
    print(min_distance_bruteforce(_code_params(args)))
    return EXIT_OK


def cmd_verify(args):
    report = verify_files(args.manifest)
    print_json(report)
    return EXIT_OK if report["ok"] else EXIT_DOMAIN_ERROR


def _add_code_arguments(parser):
    group = parser.add_argument_group('code parameters')
    group.add_argument('--m', type=int, required=True, help="number of groups")
    group.add_argument('--r', type=int, required=True, help="systematic nodes per group")
    group.add_argument('--u', type=int, required=True,
                       help="local code distance (u - 1 MSR parity nodes per group)")
    group.add_argument('--delta', type=int, required=True,
                       help="distributed parity nodes per group")
    group.add_argument('--backend', choices=BACKENDS,
                       help="local code backend (default: $LCCR_BACKEND or scalar)")
    group.add_argument('--field-poly', type=parse_int, metavar='POLY',
                       help="field reduction polynomial (default: $LCCR_FIELD_POLY or 0x11D)")


def _add_failure_arguments(parser):
    parser.add_argument('--failed-groups', metavar='A,B,C', help="failed group indices")
    parser.add_argument('--failed-node', metavar='G:I', action='append',
                        help="failed node (may be given more than once)")
    parser.add_argument('--prefer', choices=('left', 'right'), default='left',
                        help="preferred group recovery chain (default: %(default)s)")


def build_parser():
    parser = argparse.ArgumentParser(
        prog='lccr', description="Local codes with cooperative repair toolkit")
    parser.add_argument('--version', action='version', version='%(prog)s ' + version)
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help="more log output (repeat for debug messages)")
    subparsers = parser.add_subparsers(dest='command', metavar='COMMAND')
    subparsers.required = True

    p = subparsers.add_parser('encode', help="encode a file into chunk files")
    p.add_argument('input', help="input file")
    p.add_argument('--out', required=True, help="output directory")
    _add_code_arguments(p)
    p.set_defaults(func=cmd_encode)

    p = subparsers.add_parser('decode', help="reassemble a file from chunk files")
    p.add_argument('--manifest', required=True, help="manifest file or chunk directory")
    p.add_argument('--out', help="output file (default: standard output)")
    p.set_defaults(func=cmd_decode)

    p = subparsers.add_parser('repair', help="repair lost chunk files")
    p.add_argument('--manifest', required=True, help="manifest file or chunk directory")
    _add_failure_arguments(p)
    p.set_defaults(func=cmd_repair)

    p = subparsers.add_parser('simulate', help="simulate a failure scenario")
    _add_code_arguments(p)
    _add_failure_arguments(p)
    p.add_argument('--scenario', choices=[kind.value for kind in ScenarioKind],
                   default=ScenarioKind.SINGLE_GROUP.value, help="failure scenario")
    p.add_argument('--seed', type=int, default=0, help="random seed (default: %(default)s)")
    p.add_argument('--count', type=int, default=1, help="nodes to fail for random-nodes")
    p.add_argument('--stripes', type=int, default=1, help="stripes to simulate")
    p.add_argument('--trace', help="write the JSON lines trace to this file")
    p.set_defaults(func=cmd_simulate)

    p = subparsers.add_parser('sweep', help="tabulate metrics at fixed length and distance")
    p.add_argument('--n', type=int, default=DEFAULT_SWEEP_N, help="code length")
    p.add_argument('--dmin', type=int, default=DEFAULT_SWEEP_DMIN, help="minimum distance")
    p.add_argument('--families', default=','.join(f.value for f in Family),
                   help="comma separated code families (default: %(default)s)")
    p.add_argument('--relaxed', action='store_true', help="allow r >= 1, u >= 2, delta >= 0")
    p.add_argument('--require-group-repairable', action='store_true',
                   help="drop parameter sets that cannot repair a failed group")
    p.add_argument('--workers', type=int, default=1, help="worker processes")
    p.add_argument('--out', help="CSV output file (default: standard output)")
    p.set_defaults(func=cmd_sweep)

    p = subparsers.add_parser('mindist', help="brute-force the minimum distance")
    _add_code_arguments(p)
    p.set_defaults(func=cmd_mindist)

    p = subparsers.add_parser('verify', help="check chunk files against manifest and code")
    p.add_argument('--manifest', required=True, help="manifest file or chunk directory")
    p.set_defaults(func=cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code

    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s: %(message)s")

    try:
        return args.func(args)
    except (ParameterError, ScenarioInvalid, FieldError) as exc:
        log.error("%s", exc)
        return EXIT_USAGE
    except LCCRError as exc:
        log.error("%s", exc)
        return EXIT_DOMAIN_ERROR
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_DOMAIN_ERROR


if __name__ == '__main__':
    sys.exit(main())
