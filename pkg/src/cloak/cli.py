"""``cloak`` command line.

    cloak -i contract.cloak -o out_dir [--debug]
    cloak -t -i contract.cloak          # annotation check, policy to stdout
    cloak -s -i contract.cloak          # plain-subset check only
    cloak demo scenario.json
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path

from .diagnostics import render
from .owners import debug_lines, fmt_owners
from .pipeline import check, check_plain, compile_source

EXIT_OK, EXIT_DIAGNOSTICS, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _compile_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cloak", description="Compile a Cloak smart contract.")
    p.add_argument("-i", dest="input", required=True, help="input .cloak file")
    p.add_argument("-o", dest="out_dir", help="output directory")
    p.add_argument("-s", "--solc", action="store_true",
                   help="ignore the annotations and check the plain program only")
    p.add_argument("-t", dest="check_only", action="store_true",
                   help="check annotations and print the privacy policy")
    p.add_argument("--debug", action="store_true", help="show timings and artifact hashes")
    return p


def _demo_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="cloak demo", description="Run a scenario against the simulator.")
    p.add_argument("scenario", help="scenario JSON file")
    return p


def write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as f:
            f.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _report(res, text: str, path: str, err) -> int:
    for d in res.diagnostics:
        print(render(d, text, path), file=err)
    return EXIT_DIAGNOSTICS


def run_compile(args, out, err) -> int:
    path = args.input
    try:
        text = Path(path).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        print(f"cloak: cannot read {path}: {e}", file=err)
        return EXIT_USAGE

    if args.solc:
        res = check_plain(text, path)
        if not res.ok:
            return _report(res, text, path, err)
        print(f"{path}: plain program is valid", file=out)
        return EXIT_OK

    if args.check_only:
        res = check(text, path)
        if not res.ok:
            return _report(res, text, path, err)
        if args.debug:
            for line in debug_lines(res.checked):
                print(line, file=err)
        print(res.policy_bytes().decode("utf-8"), file=out)
        return EXIT_OK

    res = compile_source(text, path)
    if not res.ok:
        return _report(res, text, path, err)
    out_dir = Path(args.out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        write_atomic(out_dir / "policy.json", res.policy_bytes())
        write_atomic(out_dir / "service.sol", res.artifacts.service_source.encode("utf-8"))
        write_atomic(out_dir / "verifier.sol", res.artifacts.verifier_source.encode("utf-8"))
        write_atomic(out_dir / "summary.json", res.summary_bytes())
    except OSError as e:
        print(f"cloak: cannot write to {out_dir}: {e}", file=err)
        return EXIT_USAGE

    checked = res.checked
    print(f"contract {checked.ast.name}: {len(checked.ast.functions)} function(s), "
          f"compiled in {res.elapsed * 1000:.1f} ms", file=out)
    for fn in checked.ast.functions:
        print(f"  {fn.name}: {checked.kind_of[fn.name]} owners={fmt_owners(checked.function_owners[fn.name])}",
              file=out)
    if args.debug:
        for entry, line in zip(res.summary()["functions"], debug_lines(checked)):
            print(f"{line} codegen={entry['codegen_us']}µs", file=out)
        for name, h in res.hashes().items():
            print(f"hash {name}: {h}", file=out)
    return EXIT_OK


def run_demo(args, out, err) -> int:
    from .runtime.scenario import ScenarioError, load_scenario, run_scenario

    try:
        scenario = load_scenario(args.scenario)
    except (OSError, ScenarioError, ValueError) as e:
        print(f"cloak demo: {e}", file=err)
        return EXIT_USAGE
    report = run_scenario(scenario)
    for line in report.lines:
        print(line, file=out)
    for m in report.mismatches:
        print(m, file=err)
    return EXIT_OK if report.ok else EXIT_DIAGNOSTICS


def main(argv=None, out=None, err=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    out = out or sys.stdout
    err = err or sys.stderr
    demo = bool(argv) and argv[0] == "demo"
    parser = _demo_parser() if demo else _compile_parser()
    try:
        args = parser.parse_args(argv[1:] if demo else argv)
        if not demo:
            if args.solc and args.check_only:
                raise UsageError("-s and -t cannot be combined")
            if not (args.solc or args.check_only) and not args.out_dir:
                raise UsageError("-o is required unless -s or -t is given")
    except UsageError as e:
        print(parser.format_usage().rstrip(), file=err)
        print(f"{parser.prog}: error: {e}", file=err)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    return run_demo(args, out, err) if demo else run_compile(args, out, err)


if __name__ == "__main__":
    sys.exit(main())
