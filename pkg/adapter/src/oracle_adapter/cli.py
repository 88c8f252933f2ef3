"""Command-line entry points: serve a model, or audit someone else's.

    oracle-adapter serve        answer protocol requests on stdio (or --tcp PORT)
    oracle-adapter conformance  run the corpus against an endpoint, print the report

Exit codes: 0 success (for conformance: all checks passed), 1 failed
conformance, 2 bad configuration.
"""

from __future__ import annotations

import argparse
import sys

from .config import MODE_STUB, MODE_USER, AdapterConfig, AdapterConfigError, StubSpec
from .conformance import conformance_check
from .server import FAULTS, serve, serve_tcp


def _stub_spec(args: argparse.Namespace) -> StubSpec:
    return StubSpec.testbed(args.latent_dim, args.num_classes, args.seed, args.temperature)


def _build_config(args: argparse.Namespace) -> AdapterConfig:
    stub = _stub_spec(args) if args.mode == MODE_STUB else None
    return AdapterConfig(
        mode=args.mode,
        latent_dim=args.latent_dim,
        num_classes=args.num_classes,
        stub=stub,
        generator=args.generator,
        classifier=args.classifier,
    )


def cmd_serve(args: argparse.Namespace) -> int:
    config = _build_config(args)
    if args.tcp is not None:
        serve_tcp(config, args.tcp, fault=args.fault)
    else:
        serve(config, fault=args.fault)
    return 0


def cmd_conformance(args: argparse.Namespace) -> int:
    expected = _stub_spec(args) if args.expect_stub else None
    report = conformance_check(args.endpoint, expected_stub=expected, timeout=args.timeout)
    print(report)
    return 0 if report.passed else 1


def _add_shape_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--latent-dim", type=int, default=8, help="code width (default 8)")
    p.add_argument("--num-classes", type=int, default=5, help="probability row width (default 5)")
    p.add_argument("--seed", type=int, default=101, help="stub prototype seed (default 101)")
    p.add_argument("--temperature", type=float, default=2.0,
                   help="stub softmax temperature (default 2.0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="oracle-adapter",
        description="Serve a generator + classifier behind the newline-JSON oracle protocol.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="answer requests on stdio, or a TCP port with --tcp")
    p.add_argument("--mode", choices=[MODE_STUB, MODE_USER], default=MODE_STUB)
    _add_shape_flags(p)
    p.add_argument("--generator", help="user entry point 'module:attribute' (optional)")
    p.add_argument("--classifier", help="user entry point 'module:attribute'")
    p.add_argument("--tcp", type=int, metavar="PORT", help="listen on a TCP port instead of stdio")
    p.add_argument("--fault", choices=FAULTS,
                   help="test hook: deliberately violate the protocol")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("conformance", help="audit an endpoint against the protocol corpus")
    p.add_argument("--endpoint", required=True, help="'cmd:<command>' or 'tcp:host:port'")
    p.add_argument("--expect-stub", action="store_true",
                   help="also require bit-exact stub numerics for the flags below")
    _add_shape_flags(p)
    p.add_argument("--timeout", type=float, default=10.0, help="per-response timeout in seconds")
    p.set_defaults(func=cmd_conformance)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except AdapterConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    sys.exit(main())
