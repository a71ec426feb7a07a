"""
Copyright 2024 The entroscope developers
Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at
    http://www.apache.org/licenses/LICENSE-2.0
Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
"""

import io
import os
import sys
import csv
import json
import argparse
from entroscope.utils import C, ConfigError, SolverError, parse_sites, parse_assignments, parse_grid, write_atomic
from entroscope import config as config_module
from entroscope.lattice import load_lattice, make_preset_lattice, make_partition, preset_partition
from entroscope.hamiltonian import ModelSpec
from entroscope.sweep_analysis import run_sweep, derivative, detect_transitions, cached_point, hubbard_phase_scan
from entroscope.validation import run_validation

EXIT_OK, EXIT_FAILURE, EXIT_CONFIG = 0, 1, 2
CURVE_FILE = 'curve.csv'
REPORT_FILE = 'report.json'
BOUNDARY_FILE = 'boundary.csv'
PHASE_REPORT_FILE = 'phase_report.json'


def _number(x):
    return repr(float(x))


def curve_csv(curve, deriv):
    """
    Curve table; the derivative column is left empty at the two endpoints
    """

    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(C.CSV_COLUMNS)
    last = len(curve.grid) - 1
    for i, value in enumerate(curve.grid):
        slope = '' if i in (0, last) else _number(deriv.values[i])
        writer.writerow([_number(value), _number(curve.energy[i]), _number(curve.gap[i]),
                         'true' if curve.degenerate[i] else 'false', _number(curve.entropy_bits[i]),
                         _number(curve.s_over_n[i]), slope])
    return buffer.getvalue()


def report_json(payload):
    return json.dumps(dict(payload, schema=C.REPORT_SCHEMA), sort_keys=True, indent=2) + '\n'


def parse_size(text):
    if 'x' in text:
        return tuple(int(v) for v in text.split('x'))
    return int(text)


def parse_sector(text):
    if text is None:
        return None
    if text in ('even', 'odd', 'full'):
        return text
    if ',' in text:
        return tuple(int(v) for v in text.split(','))
    return int(text)


def cmd_sweep(args):
    cfg = config_module.load_config(args.config)
    cfg = config_module.apply_overrides(cfg, out=args.out, threads=args.threads,
                                        partition=parse_sites(args.partition) if args.partition else None,
                                        grid=args.grid, cache=args.cache)
    config_module.check_grid(cfg.grid)
    spec, partition = cfg.spec(), cfg.sublattice()
    cache_dir = config_module.resolve_cache_dir(args.cache, cfg)

    curve = run_sweep(spec, cfg.parameter, cfg.grid, partition=partition, sector=cfg.sector, method=cfg.method,
                      opts=cfg.solver, cache_dir=cache_dir, threads=cfg.threads, verbose=args.verbose)
    deriv = derivative(curve)
    report = detect_transitions(curve, deriv, cfg.thresholds)

    payload = {'config_fingerprint': cfg.fingerprint(), 'curve_fingerprint': curve.fingerprint,
               C.FAMILY: cfg.family, 'num_sites': spec.num_sites, C.PARAMETER: cfg.parameter,
               C.PARTITION: partition.to_dict(), C.COUPLINGS: dict(sorted(spec.couplings.items())),
               'degenerate_points': [float(x) for x, flag in zip(curve.grid, curve.degenerate) if flag]}
    payload.update(report.to_dict())
    write_atomic(os.path.join(cfg.output, CURVE_FILE), curve_csv(curve, deriv))
    write_atomic(os.path.join(cfg.output, REPORT_FILE), report_json(payload))
    sys.stdout.write('Wrote %s and %s to %s (%d candidates)\n'
                     % (CURVE_FILE, REPORT_FILE, cfg.output, len(report.candidates)))
    return EXIT_OK


def cmd_point(args):
    try:
        if args.lattice:
            lattice = load_lattice(args.lattice)
        else:
            if args.size is None:
                raise ConfigError('point needs --size or --lattice')
            lattice = make_preset_lattice(args.family, parse_size(args.size))
        spec = ModelSpec(args.family, parse_assignments(args.set), lattice)
        if args.partition:
            partition = make_partition(lattice, parse_sites(args.partition), balanced=True)
        else:
            partition = preset_partition(lattice)
        sector = parse_sector(args.sector)
    except (ValueError, OSError) as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e))

    try:
        result = cached_point(spec, partition, sector=sector, method=args.method,
                              cache_dir=config_module.resolve_cache_dir(args.cache))
    except SolverError:
        raise
    except ValueError as e:
        raise ConfigError(str(e))
    sys.stdout.write(json.dumps({C.ENERGY: result.energy, C.GAP: result.gap, C.ENTROPY_BITS: result.entropy_bits,
                                 C.DEGENERATE: result.degenerate}, sort_keys=True) + '\n')
    return EXIT_OK


def cmd_validate(args):
    results = run_validation(verbose=True)
    failed = [r.name for r in results if not r.passed]
    if failed:
        sys.stdout.write('%d of %d checks failed: %s\n' % (len(failed), len(results), ', '.join(failed)))
        return EXIT_FAILURE
    sys.stdout.write('All %d checks passed\n' % len(results))
    return EXIT_OK


def cmd_phase_scan(args):
    try:
        u_values = [float(u) for u in args.u.split(',') if u != '']
        grid = parse_grid(args.grid)
        config_module.check_grid(grid)
        lattice = make_preset_lattice(C.HUBBARD_CHAIN, args.size)
        partition = make_partition(lattice, parse_sites(args.partition), balanced=True) if args.partition else None
    except ValueError as e:
        if isinstance(e, ConfigError):
            raise
        raise ConfigError(str(e))

    rows, curves = hubbard_phase_scan(u_values, grid, args.size, partition=partition,
                                      cache_dir=config_module.resolve_cache_dir(args.cache), threads=args.threads,
                                      verbose=args.verbose)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow([C.U, 'first_order', 'second_order_low', 'second_order_high'])
    for row in rows:
        writer.writerow([_number(row.U)] + ['' if x is None else _number(x)
                                            for x in (row.first_order, row.second_order_low, row.second_order_high)])
    payload = {C.FAMILY: C.HUBBARD_CHAIN, 'num_sites': args.size, C.PARAMETER: C.V,
               'rows': [row.to_dict() for row in rows],
               'curve_fingerprints': {_number(u): curves[u].fingerprint for u in sorted(curves)}}
    write_atomic(os.path.join(args.out, BOUNDARY_FILE), buffer.getvalue())
    write_atomic(os.path.join(args.out, PHASE_REPORT_FILE), report_json(payload))
    sys.stdout.write('Wrote %s and %s to %s\n' % (BOUNDARY_FILE, PHASE_REPORT_FILE, args.out))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog='entroscope',
                                     description='Sublattice entropy sweeps and phase transition candidates')
    sub = parser.add_subparsers(dest='command', required=True)

    sweep = sub.add_parser('sweep', help='sweep one coupling and write curve CSV and report JSON')
    sweep.add_argument('--config', required=True, help='JSON run configuration')
    sweep.add_argument('--out', help='output directory')
    sweep.add_argument('--threads', type=int, help='grid points solved concurrently')
    sweep.add_argument('--partition', help='sublattice sites, e.g. "0,2,4"')
    sweep.add_argument('--grid', help='sweep grid "lo:hi:step"')
    sweep.add_argument('--cache', help='point cache directory (default $%s)' % config_module.CACHE_ENV)
    sweep.add_argument('--verbose', action='store_true')
    sweep.set_defaults(handler=cmd_sweep)

    point = sub.add_parser('point', help='solve one parameter point and print JSON')
    point.add_argument('--family', required=True)
    point.add_argument('--size', help='chain length or "4x4"')
    point.add_argument('--lattice', help='JSON lattice description')
    point.add_argument('--set', action='append', help='couplings, e.g. --set U=4 --set V=0.5')
    point.add_argument('--partition', help='sublattice sites, e.g. "0,2,4"')
    point.add_argument('--sector', help='2Sz, even, odd, full or "n_up,n_dn"')
    point.add_argument('--method', choices=('lanczos', 'dense', 'gaussian'))
    point.add_argument('--cache', help='point cache directory (default $%s)' % config_module.CACHE_ENV)
    point.set_defaults(handler=cmd_point)

    validate = sub.add_parser('validate', help='run the oracle checks')
    validate.set_defaults(handler=cmd_validate)

    scan = sub.add_parser('phase-scan', help='extended Hubbard boundaries from V sweeps at fixed U')
    scan.add_argument('--size', type=int, default=6)
    scan.add_argument('--u', default='1,2,3,4,5,6,7,8', help='comma separated U values')
    scan.add_argument('--grid', default='0:4:0.05', help='V grid "lo:hi:step"')
    scan.add_argument('--partition', help='sublattice sites, e.g. "0,2,4"')
    scan.add_argument('--out', default='entroscope_out')
    scan.add_argument('--threads', type=int, default=1)
    scan.add_argument('--cache', help='point cache directory (default $%s)' % config_module.CACHE_ENV)
    scan.add_argument('--verbose', action='store_true')
    scan.set_defaults(handler=cmd_phase_scan)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as e:
        sys.stderr.write('error: %s\n' % e)
        return EXIT_CONFIG
    except SolverError as e:
        sys.stderr.write('error: %s\n' % e)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
