"""
Command line interface: ``pcsample {sample,gen,bench,compare}``.

Exit status is 0 on success, 2 on a usage error and 1 when the command
itself fails.
"""
import argparse
import json
import logging
import os
import sys

from pcsample import __version__
from pcsample.bench import SOURCES, SWEEPS, BenchPlan, parse_range, run_bench
from pcsample.core import AXES, Method, PcsampleError, SamplerSpec, SeedPolicy
from pcsample.formats import FORMATS, export, read_cloud, stats_record, write_cloud, write_indices
from pcsample.metrics import compare
from pcsample.order import apply_condition
from pcsample.sampler import sample
from pcsample.synth import gen_scanning_lidar, gen_sparse_dense, gen_stepper_lidar

logger = logging.getLogger(__name__)

THREADS_ENV = 'PCSAMPLE_THREADS'


def default_threads():
    value = os.environ.get(THREADS_ENV, '1')
    try:
        threads = int(value)
    except ValueError:
        threads = 0
    if threads < 1:
        raise argparse.ArgumentTypeError(
            f'{THREADS_ENV} must be a positive integer; got {value!r}')
    return threads


def _positive(text):
    try:
        value = int(text)
    except ValueError:
        value = 0
    if value < 1:
        raise argparse.ArgumentTypeError(f'expected a positive integer; got {text!r}')
    return value


def _seed(text):
    try:
        return int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f'expected an integer seed; got {text!r}')


def _methods(text):
    try:
        return tuple(Method(name.strip()) for name in text.split(','))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f'methods must be drawn from {[m.value for m in Method]}; got {text!r}')


def _sort(text):
    if text in ('exact', 'shuffle'):
        return text
    if text.startswith('bin:'):
        try:
            return f'bin:{_positive(text[4:])}'
        except argparse.ArgumentTypeError:
            pass
    raise argparse.ArgumentTypeError(
        f'sort must be exact, bin:<positive size> or shuffle; got {text!r}')


def _add_sampler_flags(parser):
    parser.add_argument('--c', type=_positive, required=True, help='points to sample')
    parser.add_argument('--m', type=_positive, default=1, help='sectors (AFPS variants)')
    parser.add_argument('--k', type=_positive, default=8, help='update window (NPDU variants)')
    parser.add_argument('--g', type=_positive, default=40, help='grid cells per axis (grid)')
    parser.add_argument('--seed', type=_seed, default=0)
    parser.add_argument('--first', choices=[p.value for p in SeedPolicy],
                        default=SeedPolicy.RANDOM_FIRST_POINT.value,
                        help='how each sector picks its first point')


def _add_input_flags(parser):
    parser.add_argument('--in', dest='path', required=True, help='input cloud file')
    parser.add_argument('--format', choices=FORMATS, help='inferred from the suffix if omitted')


def build_parser():
    parser = argparse.ArgumentParser(
        prog='pcsample', description='Sample, generate and benchmark point clouds.')
    parser.add_argument('--version', action='version', version=f'%(prog)s {__version__}')
    parser.add_argument('-v', '--verbose', action='count', default=0,
                        help='-v for progress, -vv for per-run details')
    commands = parser.add_subparsers(dest='command', required=True)

    p = commands.add_parser('sample', help='sample a cloud file')
    _add_input_flags(p)
    p.add_argument('--method', type=Method, choices=list(Method), required=True,
                   metavar='{' + ','.join(m.value for m in Method) + '}')
    _add_sampler_flags(p)
    p.add_argument('--threads', type=_positive, default=None,
                   help=f'sector threads (default ${THREADS_ENV} or 1)')
    p.add_argument('--out', required=True, help='index list, one per line')
    p.add_argument('--stats-json', help='also write the stats object to this file')
    p.set_defaults(run=cmd_sample)

    p = commands.add_parser('gen', help='generate a synthetic cloud')
    p.add_argument('source', choices=['scan', 'stepper', 'sparse'])
    p.add_argument('--n', type=_positive, default=2048)
    p.add_argument('--fov', type=float, default=None,
                   help='field of view in degrees (scan: 120, stepper: 270)')
    p.add_argument('--jitter', type=float, default=0.0)
    p.add_argument('--layers', type=_positive, default=64)
    p.add_argument('--ppl', type=_positive, default=32, help='points per stepper layer')
    p.add_argument('--z-step', type=float, default=0.1)
    p.add_argument('--clusters', type=_positive, default=5)
    p.add_argument('--sparse-fraction', type=float, default=0.05)
    p.add_argument('--seed', type=_seed, default=0)
    p.add_argument('--sort', type=_sort, default=None, help='exact, bin:<size> or shuffle')
    p.add_argument('--axis', choices=AXES, default='x')
    p.add_argument('--format', choices=FORMATS)
    p.add_argument('--out', required=True)
    p.set_defaults(run=cmd_gen)

    p = commands.add_parser('bench', help='run a parameter sweep into a CSV')
    p.add_argument('--sweep', choices=sorted(SWEEPS), required=True)
    p.add_argument('--method', type=_methods, default=(Method.FPS, Method.NPDU_AFPS),
                   help='comma-separated methods')
    p.add_argument('--n', default='2048', help="value, list 'a,b' or doubling range 'a..b'")
    p.add_argument('--c', type=_positive, default=512)
    p.add_argument('--m', default='32')
    p.add_argument('--k', default='16')
    p.add_argument('--g', type=_positive, default=40)
    p.add_argument('--orders', default='native',
                   help='comma-separated: native, shuffle, exact:<axis>, bin:<axis>:<size>')
    p.add_argument('--source', choices=SOURCES, default='scan')
    p.add_argument('--trials', type=_positive, default=10)
    p.add_argument('--threads', type=_positive, default=None)
    p.add_argument('--seed', type=_seed, default=0)
    p.add_argument('--axis', choices=AXES, default='x')
    p.add_argument('--out', default='-', help="CSV path, '-' for stdout")
    p.set_defaults(run=cmd_bench)

    p = commands.add_parser('compare', help='compare samplers on one cloud')
    _add_input_flags(p)
    p.add_argument('--methods', type=_methods, required=True)
    _add_sampler_flags(p)
    p.add_argument('--trials', type=_positive, default=10)
    p.add_argument('--threads', type=_positive, default=None)
    p.add_argument('--axis', choices=AXES, default='x')
    p.add_argument('--out-dir', default='', help='directory for report.csv and report.json')
    p.add_argument('--prefix', default='{digest:.8}-',
                   help='file name prefix, may use {digest}')
    p.set_defaults(run=cmd_compare)
    return parser


def cmd_sample(args):
    cloud = read_cloud(args.path, args.format)
    spec = SamplerSpec(args.method, args.c, m=args.m, k=args.k, g=args.g, seed=args.seed,
                       seed_policy=args.first)
    result = sample(cloud, spec, workers=args.threads)
    write_indices(result.indices, args.out)
    record = json.dumps(stats_record(result), sort_keys=True)
    if args.stats_json:
        with open(args.stats_json, 'w', encoding='utf-8') as file:
            file.write(record + '\n')
    print(record)


def _sort_condition(sort, axis):
    if sort is None:
        return 'native'
    if sort == 'shuffle':
        return 'shuffle'
    if sort == 'exact':
        return f'exact:{axis}'
    return f'bin:{axis}:{sort[4:]}'


def cmd_gen(args):
    if args.source == 'scan':
        cloud = gen_scanning_lidar(args.n, fov_deg=120.0 if args.fov is None else args.fov,
                                   jitter=args.jitter, seed=args.seed)
    elif args.source == 'stepper':
        cloud = gen_stepper_lidar(args.layers, args.ppl, z_step=args.z_step, seed=args.seed,
                                  fov_deg=270.0 if args.fov is None else args.fov)
    else:
        cloud = gen_sparse_dense(args.n, n_clusters=args.clusters,
                                 sparse_fraction=args.sparse_fraction, seed=args.seed)
    cloud = apply_condition(cloud, _sort_condition(args.sort, args.axis), args.seed)
    write_cloud(cloud, args.out, args.format)
    logger.info('wrote %r to %s', cloud, args.out)


def cmd_bench(args):
    plan = BenchPlan(
        sweep=args.sweep, methods=args.method, n=parse_range(args.n), c=args.c,
        m=parse_range(args.m), k=parse_range(args.k), g=args.g,
        orders=tuple(o.strip() for o in args.orders.split(',')), source=args.source,
        trials=args.trials, seed=args.seed, axis=args.axis)
    frame = run_bench(plan, threads=args.threads)
    frame.to_csv(sys.stdout if args.out == '-' else args.out, index=False)
    logger.info('wrote %d row(s) to %s', len(frame), args.out)


def cmd_compare(args):
    cloud = read_cloud(args.path, args.format)
    specs = [SamplerSpec(method, args.c, m=args.m, k=args.k, g=args.g, seed=args.seed,
                         seed_policy=args.first)
             for method in args.methods]
    report = compare(cloud, specs, trials=args.trials, workers=args.threads, axis=args.axis)
    artifacts = export([('report', report)], args.out_dir, args.prefix)
    for path in artifacts['report']:
        logger.info('wrote %s', path)


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=[logging.WARNING, logging.INFO, logging.DEBUG][min(args.verbose, 2)],
        format='%(asctime)s %(levelname)s %(name)s: %(message)s', stream=sys.stderr)
    if getattr(args, 'threads', 1) is None:
        try:
            args.threads = default_threads()
        except argparse.ArgumentTypeError as err:
            parser.error(str(err))
    try:
        args.run(args)
    except (PcsampleError, OSError) as err:
        print(f'pcsample: error: {err}', file=sys.stderr)
        return 1
    return 0
