from app.cli.common import emit
from app.services.instance import classify_instance, load_instance


def register(subparsers) -> None:
    parser = subparsers.add_parser("classify", help="Report which instance types apply")
    parser.add_argument("instance", help="Instance JSON file")
    parser.set_defaults(handler=run)


def run(args) -> int:
    instance = load_instance(args.instance)
    emit(classify_instance(instance).model_dump_json(indent=2))
    return 0
