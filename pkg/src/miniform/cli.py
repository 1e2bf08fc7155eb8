"""Command-line driver: ``miniform [-s file] [-t dir] [-l] file...``.

Each input runs with its own settings (a ``form.set`` beside the input
wins) and its output goes both to standard output and to a log file
next to the input.  Runs stop at the first failing file.

Exit status: 0 success, 1 usage, 2 compile error, 3 runtime error,
4 I/O error.
"""

import argparse
import os
import re
import sys
import time
from dataclasses import dataclass

from . import __version__
from .errors import MiniformError, OutputError, UsageError
from .runtime import run_text
from .settings import resolve_settings, system_settings_path

USAGE = "Correct use is 'miniform [-options] inputfile'"


@dataclass
class PlanEntry:
    input_path: str
    settings: object
    settings_source: str
    log_path: str


@dataclass
class RunPlan:
    entries: list


def log_path_for(path):
    """``input.frm`` logs to ``input.log``; other names just gain ``.log``."""
    return re.sub(r"\.frm$", "", path) + ".log"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{USAGE}")


def _parser():
    parser = _Parser(
        prog="miniform",
        description="Run programs in batch mode; output is shown and logged to <file>.log.",
        epilog="Settings precedence: form.set beside the input, then -s, then the system "
               "file ($MINIFORM_SET, default /etc/form.set), then built-in defaults "
               "(SmallSize 16M, LargeSize 256M, MaxTermSize 64K, WorkSpace 64M). "
               "Unlike the shell wrapper this replaces, the run stops at the first failing file.",
    )
    parser.add_argument("-s", dest="settings", metavar="settingsfile",
                        help="settings file used when no form.set sits beside the input")
    parser.add_argument("-t", dest="tempdir", metavar="tempdir",
                        help="directory for temporary sort files (overrides TempDir)")
    parser.add_argument("-l", dest="log", action="store_true",
                        help="accepted for compatibility; logging is always on")
    parser.add_argument("files", nargs="*", metavar="file")
    parser.add_argument("--version", action="version", version=f"miniform {__version__}")
    return parser


def plan_run(args):
    """Resolve arguments into a :class:`RunPlan`; raises UsageError."""
    ns = _parser().parse_args(args)
    if not ns.files:
        raise UsageError(f"You must specify an input file.\n{USAGE}")
    system = system_settings_path()
    entries = []
    for name in ns.files:
        path = os.path.expanduser(name)
        if not os.path.isfile(path) or not os.access(path, os.R_OK):
            raise UsageError(f"cannot read input file {name!r}")
        settings, origin = resolve_settings(path, ns.settings, ns.tempdir, system)
        entries.append(PlanEntry(path, settings, origin, log_path_for(path)))
    return RunPlan(entries)


class Tee:
    """Write-through to several text streams."""

    def __init__(self, *streams):
        self.streams = streams

    def write(self, text):
        for stream in self.streams:
            stream.write(text)

    def flush(self):
        for stream in self.streams:
            stream.flush()


def banner():
    return f"miniform, version {__version__}\nRun at: {time.ctime()}\n"


def run(plan, stdout=None, stderr=None):
    """Execute every plan entry in order; returns the first nonzero status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    for entry in plan.entries:
        try:
            log = open(entry.log_path, "w", encoding="utf-8")
        except OSError as exc:
            raise OutputError(f"cannot write log file {entry.log_path!r}: {exc.strerror}") from None
        for key, value in entry.settings.unknown_keys:
            stderr.write(f"miniform: warning: setting {key} {value} is not supported, ignored\n")
        with log:
            sink = Tee(stdout, log)
            sink.write(banner())
            with open(entry.input_path, encoding="ascii", errors="replace") as fh:
                text = fh.read()
            status = run_text(text, sink, entry.settings, source=entry.input_path)
            sink.flush()
        stderr.write(f"miniform: output logged to {entry.log_path}\n")
        if status:
            return status
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        return run(plan_run(argv))
    except MiniformError as exc:
        sys.stderr.write(f"miniform: {exc}\n")
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
