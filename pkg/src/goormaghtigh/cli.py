"""Command-line entry point.

Exit statuses: 0 done with nothing beyond the known pair 31/8191, 1 usage
error, 2 I/O or format error, 3 an unexpected solution or survivor was
reported, 4 search paused (--max-blocks) with a checkpoint to resume from.
"""

import argparse
import logging
import sys
from decimal import Decimal, InvalidOperation

from . import abc_triples, oracle, search, tables
from .checkpoint import CheckpointError
from .runner import EXIT_OK, EXIT_UNEXPECTED, ResumeError, dump_record, run_search

EXIT_USAGE = 1
EXIT_IO = 2

log = logging.getLogger("goormaghtigh")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def natural(text: str) -> int:
    """Integer flag value; accepts plain digits or exact scientific notation like 1.275e10."""
    try:
        d = Decimal(text.replace("_", ""))
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not d.is_finite() or d != d.to_integral_value() or d < 0:
        raise argparse.ArgumentTypeError(f"not a nonnegative integer: {text!r}")
    return int(d)


def positive(text: str) -> int:
    v = natural(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1: {text!r}")
    return v


def shard_spec(text: str) -> tuple:
    try:
        i, k = (int(s) for s in text.split("/"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"shard must look like i/k, got {text!r}") from None
    if not 1 <= i <= k:
        raise argparse.ArgumentTypeError(f"shard needs 1 <= i <= k, got {text!r}")
    return i, k


def build_parser():
    parser = _Parser(prog="goormaghtigh", description="Exhaustive search for repunit coincidences f_m(x) = f_n(y).")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", help="key=value file; command-line flags take precedence")
        p.add_argument("--report", default="-", help="JSONL output path (default: standard output)")
        return p

    p = command("precompute", "build sieve tables and write them to a file")
    p.add_argument("--pmax", type=positive, default=tables.DEFAULT_PMAX, help="use odd primes below this")
    p.add_argument("--out", help="table file to write")

    p = command("search", "rule out repunit coincidences below 10^digits")
    p.add_argument("--digits", type=positive)
    p.add_argument("--m-min", type=positive, default=53)
    p.add_argument("--pmax", type=positive, default=tables.DEFAULT_PMAX)
    p.add_argument("--tables", help="table file from `precompute` (default: build in memory)")
    p.add_argument("--checkpoint", help="checkpoint file; resumed from when present")
    p.add_argument("--fresh", action="store_true", help="ignore any existing checkpoint and start over")
    p.add_argument("--shard", type=shard_spec, default=(1, 1), help="i/k: run the i-th of k shards")
    p.add_argument("--threads", type=positive, default=1)
    p.add_argument("--x-block", type=positive, default=1 << 20)
    p.add_argument("--y-floor", type=natural, default=100000, help="second base is known to exceed this")
    p.add_argument("--x-min", type=natural, default=3)
    p.add_argument("--no-y-prune", action="store_true")
    p.add_argument("--no-ratio-exclusion", action="store_true")
    p.add_argument("--no-m-min", action="store_true")
    p.add_argument("--no-n-floor", action="store_true", help="admit n = 3 and 5")
    p.add_argument("--adaptive", action="store_true", help="reorder sieve primes by witness success")
    p.add_argument("--max-blocks", type=positive, help="pause after about this many blocks")

    p = command("oracle", "brute-force repunit coincidences up to a limit")
    p.add_argument("--limit", type=natural, default=100000)

    p = command("bateman", "coincidences with N and two bases prime, up to a limit")
    p.add_argument("--limit", type=natural, default=12750000000)

    p = command("mersenne", "exhaustive x = 2 scan below 10^digits")
    p.add_argument("--digits", type=positive, default=100)

    p = command("abc", "abc triple for x, y, m, n")
    for flag in ("--x", "--y", "--m", "--n"):
        p.add_argument(flag, type=natural)

    p = command("verify", "exact check whether f_m(x) is a length-n repunit in a larger base")
    for flag in ("--x", "--m", "--n"):
        p.add_argument(flag, type=natural)

    return parser, sub


def _read_config(path) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("-", "_")] = v.strip()
    return out


def _apply_config(subparser, values: dict) -> None:
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in values.items():
        action = actions.get(key)
        if action is None or key in ("config", "help"):
            raise UsageError(f"unknown config key {key!r}")
        if isinstance(action, argparse._StoreTrueAction):
            if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
                raise UsageError(f"config key {key!r} needs a boolean, got {raw!r}")
            defaults[key] = raw.lower() in ("true", "1", "yes")
        else:
            try:
                defaults[key] = action.type(raw) if action.type else raw
            except argparse.ArgumentTypeError as exc:
                raise UsageError(f"config key {key!r}: {exc}") from None
    subparser.set_defaults(**defaults)


def parse(argv):
    parser, sub = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        subparser = sub.choices[args.command]
        try:
            values = _read_config(args.config)
        except OSError as exc:
            raise OSError(f"cannot read config: {exc}") from exc
        _apply_config(subparser, values)
        args = parser.parse_args(argv)
    return args


def _require(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + n.replace("_", "-") for n in missing))


class _Emitter:
    def __init__(self, path, stdout):
        self.fh = stdout if path in (None, "-") else open(path, "w")
        self.own = self.fh is not stdout
        self.unexpected = False

    def __call__(self, rec):
        self.unexpected = self.unexpected or search.is_unexpected(rec)
        self.fh.write(dump_record(rec))

    def close(self):
        self.fh.flush()
        if self.own:
            self.fh.close()

    def status(self):
        return EXIT_UNEXPECTED if self.unexpected else EXIT_OK


def _search_config(args) -> search.SearchConfig:
    try:
        return search.SearchConfig(
            digits=args.digits,
            m_min=args.m_min,
            sieve_pmax=args.pmax,
            y_floor=args.y_floor,
            x_min=args.x_min,
            use_m_min=not args.no_m_min,
            use_n_ge_7=not args.no_n_floor,
            use_ratio_exclusion=not args.no_ratio_exclusion,
            use_y_prune=not args.no_y_prune,
            shard=args.shard,
            x_block=args.x_block,
            adaptive=args.adaptive,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_precompute(args, stdout):
    _require(args, "out")
    ts = tables.build_tables(args.pmax)
    tables.save_tables(ts, args.out)
    log.info("wrote %d tables (odd primes below %d) to %s", len(ts), args.pmax, args.out)
    return EXIT_OK


def cmd_search(args, stdout):
    _require(args, "digits")
    cfg = _search_config(args)
    if args.tables:
        ts = tables.load_tables(args.tables)
    else:
        ts = tables.build_tables(cfg.sieve_pmax)
    return run_search(
        cfg,
        ts,
        report_path=args.report,
        checkpoint_path=args.checkpoint,
        fresh=args.fresh,
        threads=args.threads,
        max_blocks=args.max_blocks,
        stdout=stdout,
    )


def _emit_all(args, stdout, records):
    out = _Emitter(args.report, stdout)
    try:
        for rec in records:
            out(rec)
    finally:
        out.close()
    return out.status()


def cmd_oracle(args, stdout):
    if args.limit < 7:
        raise UsageError("--limit must be >= 7")
    return _emit_all(args, stdout, (h.record() for h in oracle.oracle_enumerate(args.limit)))


def cmd_bateman(args, stdout):
    if args.limit < 31:
        raise UsageError("--limit must be >= 31")
    return _emit_all(args, stdout, (h.record() for h in oracle.bateman_stemmler(args.limit)))


def cmd_mersenne(args, stdout):
    if args.digits < 2:
        raise UsageError("--digits must be >= 2")
    return _emit_all(args, stdout, (s.record() for s in oracle.mersenne_scan(args.digits)))


def cmd_abc(args, stdout):
    _require(args, "x", "y", "m", "n")
    try:
        t = abc_triples.abc_triple(args.x, args.y, args.m, args.n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return _emit_all(args, stdout, [t.record()])


def cmd_verify(args, stdout):
    _require(args, "x", "m", "n")
    if args.x < 2 or args.n < 3 or args.m <= args.n:
        raise UsageError("verify needs x >= 2 and m > n >= 3")
    sol = search.verify_candidate(args.m, args.x, args.n)
    return _emit_all(args, stdout, [] if sol is None else [sol.record()])


COMMANDS = {
    "precompute": cmd_precompute,
    "search": cmd_search,
    "oracle": cmd_oracle,
    "bateman": cmd_bateman,
    "mersenne": cmd_mersenne,
    "abc": cmd_abc,
    "verify": cmd_verify,
}


def run(argv=None, stdout=None) -> int:
    stdout = sys.stdout if stdout is None else stdout
    if hasattr(sys, "set_int_max_str_digits"):
        sys.set_int_max_str_digits(0)
    try:
        args = parse(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    except UsageError as exc:
        print(f"goormaghtigh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"goormaghtigh: {exc}", file=sys.stderr)
        return EXIT_IO
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args, stdout)
    except UsageError as exc:
        print(f"goormaghtigh: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, tables.TableFormatError, search.MissingTablesError, CheckpointError, ResumeError) as exc:
        print(f"goormaghtigh: {exc}", file=sys.stderr)
        return EXIT_IO
    except abc_triples.FactorizationError as exc:
        print(f"goormaghtigh: {exc}", file=sys.stderr)
        return EXIT_IO
    except KeyboardInterrupt:
        print("goormaghtigh: interrupted; rerun the same command to resume from the checkpoint", file=sys.stderr)
        return 130


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
