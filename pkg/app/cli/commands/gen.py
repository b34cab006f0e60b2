from app.cli.common import emit
from app.services.generator import KINDS, generate_instance
from app.services.instance import serialize_instance


def register(subparsers) -> None:
    parser = subparsers.add_parser("gen", help="Generate a seeded random instance")
    parser.add_argument("kind", help=f"One of {', '.join(KINDS)}")
    parser.add_argument("--n", type=int, required=True, help="Number of agents")
    parser.add_argument("--m", type=int, required=True, help="Number of goods")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--value-max", type=int, default=10)
    parser.add_argument("--k", type=int, default=2, help="Distinct values for kary instances")
    parser.add_argument("--out", default=None)
    parser.set_defaults(handler=run)


def run(args) -> int:
    instance = generate_instance(
        args.kind, args.n, args.m, seed=args.seed, value_max=args.value_max, k=args.k
    )
    emit(serialize_instance(instance), args.out)
    return 0
