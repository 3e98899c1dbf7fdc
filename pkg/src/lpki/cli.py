"""Command line entry point: ``lpki init | scenario | attack-demo | bench | serve``."""

import argparse
import sys
from pathlib import Path

from . import __version__
from .attack import format_report, run_attack_demo
from .bench import format_bench, run_bench
from .config import Config
from .ec import builtin_params
from .errors import ConfigError, DecodeError
from .flows import GATEWAY, OCSP, TSA, VA
from .network import FrameServer
from .rand import SeededRandomSource, SystemRandomSource
from .scenario import ScriptError, format_run, parse_script, run_scenario
from .wire import MsgType, Tag, decode_wire, encode_wire, error_message, message
from .world import CONFIG_FILE, World, init_world

DEFAULT_STATE = "lpki-state"


def _load_world(state: str, seed: int) -> World:
    return World.load(state, seed)


def cmd_init(args) -> int:
    try:
        world = init_world(args.config, args.state, args.force)
    except FileExistsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    print(f"initialized world in {args.state} (curve {world.params.name})")
    print("components:")
    for short, long in world.components():
        print(f"  {short:5s} {long}")
    print(f"endpoints: {', '.join(sorted(world.net.endpoints))}")
    print(f"components={len(world.components())}")
    return 0


def cmd_scenario(args) -> int:
    try:
        script = parse_script(Path(args.script).read_text())
    except OSError as exc:
        print(f"error: cannot read {args.script}: {exc.strerror}", file=sys.stderr)
        return 2
    except ScriptError as exc:
        print(f"error: {args.script}: {exc}", file=sys.stderr)
        return 2
    seed = args.seed if args.seed is not None else (script.seed or 0)
    try:
        world = _load_world(args.state, seed)
    except (ConfigError, DecodeError, OSError) as exc:
        print(f"error: {exc}; run 'lpki init' first", file=sys.stderr)
        return 2
    run = run_scenario(world, script)
    sys.stdout.write(format_run(run))
    if args.transcript:
        Path(args.transcript).write_bytes(run.transcript_bytes())
    bad = run.first_mismatch()
    if bad is not None:
        print(f"first mismatch: {bad.line()}", file=sys.stderr)
        return 1
    return 0


def cmd_attack_demo(args) -> int:
    if (Path(args.state) / CONFIG_FILE).is_file():
        params = _load_world(args.state, 0).params
    else:
        params = Config().params()
    bad, outcomes = run_attack_demo(params, SeededRandomSource(args.seed))
    sys.stdout.write(format_report(bad, outcomes, params))
    return 0


def cmd_bench(args) -> int:
    try:
        sizes = [int(s) for s in args.sizes.split(",") if s.strip()]
    except ValueError:
        print(f"error: --sizes must be comma-separated integers, got {args.sizes!r}",
              file=sys.stderr)
        return 2
    if not sizes or any(s < 0 for s in sizes):
        print("error: --sizes needs at least one non-negative size", file=sys.stderr)
        return 2
    try:
        params = builtin_params(args.curve)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = run_bench(params, sizes, SystemRandomSource(), args.iterations)
    sys.stdout.write(format_bench(rows, params, args.iterations))
    return 0


def make_dispatch(world: World):
    """Route a framed WireMessage to the service that handles its type."""
    routes = {
        MsgType.GATEWAY_QUERY: GATEWAY, MsgType.OCSP_REQUEST: OCSP,
        MsgType.TS_REQUEST: TSA, MsgType.DPV_REQUEST: VA, MsgType.MODE2_DATA: VA,
    }

    def dispatch(frame: bytes) -> bytes:
        try:
            msg = decode_wire(frame)
        except DecodeError as exc:
            return encode_wire(error_message("Malformed", str(exc)))
        dst = routes.get(msg.msg_type)
        if dst is None:
            return encode_wire(error_message("Unsupported", msg.msg_type.name))
        reply = world.net.endpoints[dst]("remote", frame)
        world.net.run()
        if reply is None:
            # relayed to the recipient; acknowledge with the message id
            return encode_wire(message(MsgType.MODE2_DATA, (Tag.MSG_ID, msg.get(Tag.MSG_ID))))
        return reply

    return dispatch


def _parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not port.isdigit():
        raise argparse.ArgumentTypeError(f"expected HOST:PORT, got {text!r}")
    return host or "127.0.0.1", int(port)


def cmd_serve(args) -> int:
    try:
        world = _load_world(args.state, args.seed)
    except (ConfigError, DecodeError, OSError) as exc:
        print(f"error: {exc}; run 'lpki init' first", file=sys.stderr)
        return 2
    with FrameServer(args.listen, make_dispatch(world)) as server:
        host, port = server.server_address[:2]
        print(f"listening on {host}:{port}", flush=True)
        try:
            server.serve_forever()
        except KeyboardInterrupt:
            pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lpki", description="Lightweight EC PKI testbed")
    ap.add_argument("--version", action="version", version=f"lpki {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("init", help="create authorities and persist the world")
    p.add_argument("--config", required=True, help="key = value config file")
    p.add_argument("--state", default=DEFAULT_STATE, help="state directory")
    p.add_argument("--force", action="store_true", help="replace an existing world")
    p.set_defaults(func=cmd_init)

    p = sub.add_parser("scenario", help="run a scenario script against the world")
    p.add_argument("script")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--state", default=DEFAULT_STATE)
    p.add_argument("--transcript", help="write raw transcript bytes here")
    p.set_defaults(func=cmd_scenario)

    p = sub.add_parser("attack-demo", help="invalid-curve enrollment against two CAs")
    p.add_argument("--state", default=DEFAULT_STATE)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_attack_demo)

    p = sub.add_parser("bench", help="signcryption vs sign-then-encrypt costs")
    p.add_argument("--curve", default="P-256")
    p.add_argument("--sizes", default="64,1024,65536")
    p.add_argument("--iterations", type=int, default=100)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("serve", help="expose the services over TCP")
    p.add_argument("--listen", type=_parse_address, default=("127.0.0.1", 7466))
    p.add_argument("--state", default=DEFAULT_STATE)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_serve)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "iterations", 1) < 1:
        print("error: --iterations must be at least 1", file=sys.stderr)
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
