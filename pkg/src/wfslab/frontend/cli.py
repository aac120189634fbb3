"""``wfslab FILE [--task NAME] ...``: run the tasks of a ``.cat`` document.

Reports go to standard output, diagnostics to standard error.  The exit code
is the worst task status: 0 pass, 1 fail, 2 resource limit, 3 usage error.
"""

from __future__ import annotations

import argparse
import sys

from .report import USAGE_EXIT, render_json_lines, render_text
from .syntax import DocumentError, parse
from .tasks import UsageError, find_tasks, run_task


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        sys.exit(USAGE_EXIT)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="wfslab", description="Check weak factorization and Moore relation structure on finite data.")
    p.add_argument("file", help="a .cat document")
    p.add_argument("--task", help="task name or task kind; default runs every task")
    p.add_argument("--universe-depth", type=int, help="override the universe closure depth")
    p.add_argument("--max-objects", type=int)
    p.add_argument("--max-homs", type=int)
    p.add_argument("--max-morphisms", type=int)
    p.add_argument("--max-set-size", type=int)
    p.add_argument("--format", choices=("text", "json-lines"), default="text")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        with open(args.file, encoding="utf-8") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"wfslab: cannot read {args.file}: {exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        doc = parse(text)
    except DocumentError as exc:
        print(f"{args.file}:{exc}", file=sys.stderr)
        return USAGE_EXIT
    try:
        tasks = find_tasks(doc, args.task)
    except UsageError as exc:
        print(f"wfslab: {exc}", file=sys.stderr)
        return USAGE_EXIT
    if not tasks:
        print(f"wfslab: {args.file} declares no tasks", file=sys.stderr)
        return USAGE_EXIT
    bounds = {"max-objects": args.max_objects, "max-homs": args.max_homs,
              "max-morphisms": args.max_morphisms, "max-set-size": args.max_set_size}
    render = render_text if args.format == "text" else render_json_lines
    worst = 0
    for t in tasks:
        try:
            rep = run_task(doc, t.name, depth=args.universe_depth, bounds=bounds)
        except UsageError as exc:
            print(f"wfslab: {exc}", file=sys.stderr)
            return USAGE_EXIT
        sys.stdout.write(render(rep))
        sys.stdout.flush()
        worst = max(worst, rep.exit_code)
    return worst


if __name__ == "__main__":
    sys.exit(main())
