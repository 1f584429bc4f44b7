"""
Command-line entry point: python main.py <group> <command> [options]

Groups: criteria, unitsum, polytope, matrix, count.
"""
import argparse
import json
import logging
import random
import sys

import mpmath

import counting
import criteria
import matrix_units
import polytope
import unit_sums
from config import OUTPUT_FORMATS, SCOPE_REVISION, VERSION, load_config
from errors import InvalidInputError, SearchExhaustedError, UnitSumError
from quadratic import QuadraticOrder, parse_element
from reports import ReportWriter
from ring_core import get_ring

logger = logging.getLogger("unitsums")


def _number(text):
    """Positive count or bound such as 1e8; integral values come back as int."""
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return int(value) if value.is_integer() else value


def _int_list(text):
    try:
        return tuple(int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


# criteria

def cmd_criteria_quadratic(args, cfg):
    return {"d": args.d, **criteria.quadratic_usn(args.d).to_json()}


def cmd_criteria_cubic(args, cfg):
    return {"d": args.d, **criteria.cubic_usn(args.d).to_json()}


def cmd_criteria_widmer(args, cfg):
    data = criteria.CubicFieldData(args.abs_disc, args.regulator, prec=cfg.precision_bits)
    return {**data.to_json(), **criteria.widmer_sufficient(data).to_json()}


def cmd_criteria_erdos(args, cfg):
    if args.scan:
        return criteria.erdos_family_scan(args.n, prec=cfg.precision_bits)
    admissible, data = criteria.erdos_family(args.n, prec=cfg.precision_bits)
    lo, hi = data.root_interval
    payload = {"N": args.n, "admissible": admissible, "root_interval": [lo, hi], **data.to_json()}
    if admissible:
        payload.update(criteria.widmer_sufficient(data).to_json())
    else:
        payload.update(verdict="inconclusive", witness=f"4N^3 + 27 = {data.abs_disc} is not squarefree")
    return payload


def cmd_criteria_power_basis(args, cfg):
    return {"deg": args.deg, "m": args.m, **criteria.power_basis_units(args.deg, args.m).to_json()}


def cmd_criteria_index_check(args, cfg):
    if args.poly is None:
        data = criteria.pure_cubic_data(prec=cfg.precision_bits)
    else:
        if args.abs_disc is None:
            raise InvalidInputError("--poly needs --abs-disc")
        data = criteria.complex_cubic_data(list(args.poly), args.abs_disc, prec=cfg.precision_bits)
    index = criteria.widmer_index_check(data)
    sufficient = criteria.widmer_sufficient(data)
    return {**data.to_json(), "index_check": index.to_json(), "widmer_sufficient": sufficient.to_json()}


# unitsum

def _element(args):
    order = QuadraticOrder(args.d)
    return parse_element(order, args.elt, basis=args.basis)


def cmd_unitsum_find(args, cfg):
    alpha = _element(args)
    return unit_sums.find_k_units(alpha, args.k, args.bound or cfg.exp_bound).to_json()


def cmd_unitsum_distinct(args, cfg):
    alpha = _element(args)
    return unit_sums.find_distinct_units(alpha, args.bound or cfg.exp_bound, args.max_terms).to_json()


def cmd_unitsum_pad(args, cfg):
    alpha = _element(args)
    bound = args.bound or cfg.exp_bound
    outcome = unit_sums.find_k_units(alpha, args.k, bound)
    if not outcome.found:
        raise SearchExhaustedError(f"{alpha} has no {args.k}-term representation with exponents |a| <= {bound}")
    padded = unit_sums.pad_representation(outcome.representation, args.l, bound)
    return {"original": outcome.representation.to_json(), "padded": padded.to_json()}


def cmd_unitsum_lengths(args, cfg):
    order = QuadraticOrder(args.d)
    lengths = unit_sums.unit_sum_lengths(order, args.height, args.max_terms, args.bound or cfg.exp_bound)
    rows = [{"alpha": str(alpha), "coords": list(alpha.basis_coords()), "length": t}
            for alpha, t in lengths.items()]
    reached = [t for t in lengths.values() if t is not None]
    return {"d": args.d, "height": args.height, "max_terms": args.max_terms,
            "reached": len(reached), "elements": len(rows),
            "max_length": max(reached) if reached else None, "rows": rows}


# polytope

def cmd_polytope_volume(args, cfg):
    spec = polytope.PolytopeSpec(args.n, args.s)
    est = polytope.mc_volume(spec, args.samples or cfg.samples, cfg.seed, method=args.method,
                             streams=args.streams, threads=cfg.threads)
    payload = {"n": args.n, "s": args.s, **est.to_json()}
    exact = polytope.closed_form(args.n, args.s)
    if exact is not None:
        payload.update(closed_form=exact, z=round(est.z_score(exact), 3))
    return payload


def cmd_polytope_region(args, cfg):
    est = polytope.region_volume_mc(args.n, args.klm, args.case, args.samples or cfg.samples, cfg.seed,
                                    method=args.method, streams=args.streams, threads=cfg.threads)
    exact = polytope.region_exact(args.n, args.klm, args.case)
    return {"n": args.n, **est.to_json(), "exact": exact, "z": round(est.z_score(exact), 3),
            "agrees": est.agrees(exact)}


def cmd_polytope_table(args, cfg):
    rows = polytope.table_report(args.samples or cfg.samples, args.big_samples or cfg.big_samples, cfg.seed,
                                 streams=args.streams, threads=cfg.threads)
    args.save_as = "polytope_table.json"
    return rows


def cmd_polytope_identity(args, cfg):
    if args.exact_only:
        rows = []
        for n in range(2, args.n + 1):
            c = polytope.closed_form(n, 2)
            rhs = n * (n - 1) * (n - 2) * polytope.i_123(n) + 3 * n * (n - 1) * polytope.i_112(n)
            rows.append({"n": n, "closed_form": c, "i_123": polytope.i_123(n), "i_112": polytope.i_112(n),
                         "rhs": rhs, "holds": rhs == c})
        return rows
    return polytope.c_n2_identity_report(args.n, args.samples or cfg.samples, cfg.seed,
                                         streams=args.streams, threads=cfg.threads)


# matrix

def _load_matrix(args, ring):
    if args.matrix is not None:
        text = args.matrix
    elif args.input is not None:
        try:
            with open(args.input, 'r', encoding='utf-8') as f:
                text = f.read()
        except OSError as exc:
            raise InvalidInputError(f"cannot read {args.input}: {exc}")
    else:
        raise InvalidInputError("give a matrix with --input FILE or --matrix JSON")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidInputError(f"matrix is not valid JSON: {exc}")
    A = matrix_units.RingMatrix.decode(ring, data)
    if A.shape[0] != A.shape[1]:
        raise InvalidInputError(f"matrix must be square, got {A.shape}")
    return A


def cmd_matrix_decompose(args, cfg):
    ring = get_ring(args.ring, args.p)
    A = _load_matrix(args, ring)
    return matrix_units.two_units_decompose(A).to_json()


def cmd_matrix_diagonalize(args, cfg):
    ring = get_ring(args.ring, args.p)
    A = _load_matrix(args, ring)
    U, V, D = matrix_units.diagonalize(A)
    n = A.n
    check = matrix_units.en_eval(U, n, ring) * A * matrix_units.en_eval(V, n, ring) == D
    return {"ring": ring.name, "matrix": A.encode(), "U": U.to_json(ring), "V": V.to_json(ring),
            "D": D.encode(), "verified": check and D.is_diagonal()}


def cmd_matrix_vamos(args, cfg):
    _, report = matrix_units.vamos_witness(args.d, args.height or cfg.height_bound)
    return report.to_json()


def cmd_matrix_suite(args, cfg):
    ring = get_ring(args.ring, args.p)
    rng = random.Random(cfg.seed)
    rows = matrix_units.random_suite(ring, args.n, args.count, rng, bound=args.bound, threads=cfg.threads)
    return {"ring": ring.name, "n": args.n, "count": args.count, "seed": cfg.seed,
            "all_verified": all(r["verified"] for r in rows), "rows": rows}


# count

def cmd_count_classes(args, cfg):
    ctx = counting.CountingContext.for_field(args.d, cfg.precision_bits)
    result = counting.count_unit_sum_classes(ctx, args.n, args.x, count_zero_class=args.count_zero_class,
                                             threads=cfg.threads)
    payload = result.to_json(with_classes=args.list)
    if args.n >= 2:
        main_term = counting.asymptotic_main_term(ctx, args.n, args.x)
        payload.update(main_term=mpmath.nstr(main_term, 10), ratio=mpmath.nstr(result.count / main_term, 6))
    return payload


def cmd_count_rational(args, cfg):
    ctx = counting.CountingContext.for_field(args.d, cfg.precision_bits)
    count = counting.count_rational_k_sums(ctx, args.k, args.x)
    payload = {"d": args.d, "k": args.k, "x": args.x, "count": count, "density": format(count / args.x, ".8g")}
    if args.list:
        payload["values"] = counting.rational_k_sums(ctx, args.k, args.x)
    return payload


def cmd_count_compare(args, cfg):
    ctx = counting.CountingContext.for_field(args.d, cfg.precision_bits)
    args.save_as = f"count_compare_d{args.d}_n{args.n}.json"
    return counting.compare_rows(ctx, args.n, args.x, threads=cfg.threads)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--format', choices=OUTPUT_FORMATS, help='Output format (default from UNITSUMS_FORMAT or text)')
    common.add_argument('--output', type=str, help='Also write the rendering to this file')
    common.add_argument('--threads', type=int, help='Worker threads')
    common.add_argument('--seed', type=int, help='Random seed (default from UNITSUMS_SEED)')
    common.add_argument('--data-dir', type=str, help='Directory for saved reports')
    common.add_argument('--precision-bits', type=int, help='Working precision for certified numerics')
    common.add_argument('--verbose', action='store_true', help='Debug logging on stderr')

    parser = argparse.ArgumentParser(prog='unitsums', description='Sums of units: criteria, searches, volumes, matrices, counts')
    parser.add_argument('--version', action='version', version=f"unitsums {VERSION} ({SCOPE_REVISION})")
    groups = parser.add_subparsers(dest='group', required=True)

    def command(sub, name, handler, help_text):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.set_defaults(handler=handler)
        return p

    # criteria
    g = groups.add_parser('criteria', help='Unit sum number decisions').add_subparsers(dest='command', required=True)
    p = command(g, 'quadratic', cmd_criteria_quadratic, 'u(R) for Q(sqrt(d))')
    p.add_argument('--d', type=int, required=True)
    p = command(g, 'cubic', cmd_criteria_cubic, 'u(R) for Q(cbrt(d))')
    p.add_argument('--d', type=int, required=True)
    p = command(g, 'widmer', cmd_criteria_widmer, 'Sufficient condition for omega in complex cubic fields')
    p.add_argument('--abs-disc', type=int, required=True)
    p.add_argument('--regulator', type=mpmath.mpf, required=True, help='Regulator upper bound (decimal)')
    p = command(g, 'erdos-family', cmd_criteria_erdos, 'Fields of X^3 + N X + 1')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--scan', action='store_true', help='Report every N up to --n')
    p = command(g, 'power-basis', cmd_criteria_power_basis, 'Power basis of units for Z[m^(1/deg)]')
    p.add_argument('--deg', type=int, required=True)
    p.add_argument('--m', type=int, required=True)
    p = command(g, 'index-check', cmd_criteria_index_check, 'Index of Z[eta] from the embedding determinant')
    p.add_argument('--poly', type=_int_list, help='Minimal polynomial of eta, leading coefficient first (default Q(cbrt(2)))')
    p.add_argument('--abs-disc', type=int)

    # unitsum
    g = groups.add_parser('unitsum', help='Sums of units in quadratic orders').add_subparsers(dest='command', required=True)
    for name, handler, help_text in (('find', cmd_unitsum_find, 'alpha as a sum of exactly k units'),
                                     ('distinct', cmd_unitsum_distinct, 'alpha as a sum of distinct units'),
                                     ('pad', cmd_unitsum_pad, 'k-term representation padded to l terms')):
        p = command(g, name, handler, help_text)
        p.add_argument('--d', type=int, required=True)
        p.add_argument('--elt', type=str, required=True, help='u,v for (u + v sqrt(d))/2; write --elt=-1,0 for negatives')
        p.add_argument('--basis', action='store_true', help='Read --elt as a,b for a + b*omega')
        p.add_argument('--bound', type=int, help='Exponent bound |a| <= B')
        if name in ('find', 'pad'):
            p.add_argument('--k', type=int, required=True)
        if name == 'pad':
            p.add_argument('--l', type=int, required=True)
        if name == 'distinct':
            p.add_argument('--max-terms', type=int, default=24)
    p = command(g, 'lengths', cmd_unitsum_lengths, 'Least number of units for every element of bounded height')
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--height', type=int, default=5)
    p.add_argument('--max-terms', type=int, default=20)
    p.add_argument('--bound', type=int)

    # polytope
    g = groups.add_parser('polytope', help='Volumes of {g < 1}').add_subparsers(dest='command', required=True)
    p = command(g, 'volume', cmd_polytope_volume, 'Monte Carlo estimate of c_{n,s}')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--s', type=int, required=True)
    p.add_argument('--method', choices=('box', 'rows', 'regions'), default='box')
    p = command(g, 'region', cmd_polytope_region, 'Volume of one region V_{K,L,M} (s = 2)')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--klm', type=_int_list, default=(1, 2, 3))
    p.add_argument('--case', type=int, choices=range(1, 8))
    p.add_argument('--method', choices=('reduced', 'direct'), default='reduced')
    p = command(g, 'table', cmd_polytope_table, 'Printed table with closed forms and Monte Carlo checks')
    p.add_argument('--big-samples', type=_number)
    p = command(g, 'identity', cmd_polytope_identity, 'c_{n,2} assembled from region values')
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--exact-only', action='store_true', help='Exact check for every n from 2 to --n')
    for name in ('volume', 'region', 'table', 'identity'):
        sub = g.choices[name]
        sub.add_argument('--samples', type=_number)
        sub.add_argument('--streams', type=int, default=polytope.DEFAULT_STREAMS)

    # matrix
    g = groups.add_parser('matrix', help='Matrices as sums of two units').add_subparsers(dest='command', required=True)
    for name, handler, help_text in (('decompose', cmd_matrix_decompose, 'A = M1 + M2 with M1, M2 invertible'),
                                     ('diagonalize', cmd_matrix_diagonalize, 'U A V = D with U, V in E_n')):
        p = command(g, name, handler, help_text)
        p.add_argument('--input', type=str, help='JSON file with nested arrays of ring elements')
        p.add_argument('--matrix', type=str, help='Inline JSON matrix')
    p = command(g, 'suite', cmd_matrix_suite, 'Decompose random matrices')
    p.add_argument('--n', type=int, default=2)
    p.add_argument('--count', type=int, default=100)
    p.add_argument('--bound', type=int, default=10)
    for name in ('decompose', 'diagonalize', 'suite'):
        sub = g.choices[name]
        sub.add_argument('--ring', type=str, default='z', help='z, fp[x] or hurwitz')
        sub.add_argument('--p', type=int, default=2, help='Characteristic for fp[x]')
    p = command(g, 'vamos', cmd_matrix_vamos, 'Witness matrix over an imaginary quadratic non-PID')
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--height', type=int)

    # count
    g = groups.add_parser('count', help='Counting sums of units').add_subparsers(dest='command', required=True)
    p = command(g, 'classes', cmd_count_classes, 'u(n, x): classes of sums of n units')
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--x', type=_number, required=True)
    p.add_argument('--list', action='store_true')
    p.add_argument('--count-zero-class', action='store_true', help='Count the zero sum as a class')
    p = command(g, 'rational', cmd_count_rational, 'N_k(x): integers <= x that are sums of at most k units')
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--k', type=int, required=True)
    p.add_argument('--x', type=_number, required=True)
    p.add_argument('--list', action='store_true')
    p = command(g, 'compare', cmd_count_compare, 'Empirical counts against the main term')
    p.add_argument('--d', type=int, required=True)
    p.add_argument('--n', type=int, required=True)
    p.add_argument('--x', type=_number, nargs='+', required=True)

    return parser


def _configure_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
        force=True,
    )


def dispatch(argv=None):
    """Run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0

    _configure_logging(args.verbose)
    args.save_as = None
    title = f"{args.group} {args.command}"
    try:
        cfg = load_config().with_overrides(
            seed=args.seed,
            threads=args.threads,
            output_format=args.format,
            output=args.output,
            data_dir=args.data_dir,
            precision_bits=args.precision_bits,
        )
        payload = args.handler(args, cfg)
    except UnitSumError as exc:
        logger.debug("%s failed", title, exc_info=True)
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True))
        return 1

    writer = ReportWriter(cfg.data_dir)
    text = writer.render(payload, cfg.output_format)
    if cfg.output_format == 'text':
        print("=" * 60)
        print(f"Unit Sums: {title}")
        print("=" * 60)
    print(text)
    if cfg.output:
        writer.write(text, cfg.output)
    if args.save_as:
        path = writer.save_json(payload, args.save_as)
        if cfg.output_format == 'text':
            print(f"\nSaved report to {path}")
    return 0


def main():
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
