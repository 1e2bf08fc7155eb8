"""``form.set`` parsing and settings resolution."""

import os
import re
import tempfile
from dataclasses import dataclass, field, replace

from .errors import SettingsError

KiB = 1024
MiB = 1024 * KiB
GiB = 1024 * MiB

SETTINGS_FILENAME = "form.set"
DEFAULT_SYSTEM_SETTINGS = "/etc/form.set"
SYSTEM_SETTINGS_ENV = "MINIFORM_SET"

# keyword -> Settings field
_SIZE_KEYS = {
    "smallsize": "small_size",
    "largesize": "large_size",
    "maxtermsize": "max_term_size",
    "workspace": "work_space",
}

_SIZE_VALUE = re.compile(r"^(\d+)([KMG]?)$", re.IGNORECASE)
_MULTIPLIER = {"": 1, "K": KiB, "M": MiB, "G": GiB}


@dataclass(frozen=True)
class Settings:
    temp_dir: str = field(default_factory=tempfile.gettempdir)
    include_dirs: tuple = ()
    comment_char: str = "*"
    small_size: int = 16 * MiB
    large_size: int = 256 * MiB
    max_term_size: int = 64 * KiB
    work_space: int = 64 * MiB
    unknown_keys: tuple = ()

    def overlay(self, values):
        """Copy with the fields in ``values`` (as from parse_settings_file) applied."""
        values = dict(values)
        if "unknown_keys" in values:
            values["unknown_keys"] = self.unknown_keys + tuple(values["unknown_keys"])
        return replace(self, **values)


def parse_size(text):
    m = _SIZE_VALUE.match(text.strip())
    if not m:
        raise SettingsError(f"invalid value {text!r}, expected a byte count")
    return int(m.group(1)) * _MULTIPLIER[m.group(2).upper()]


def parse_comment_char(text):
    if len(text) != 1 or not text.isprintable() or text.isspace():
        raise SettingsError(f"CommentChar must be one printable character, got {text!r}")
    if text == ";":
        raise SettingsError("CommentChar ';' would collide with statement termination")
    return text


def parse_settings_file(text, comment_char="*", *, source=None):
    """Parse ``form.set`` text into a dict of Settings field overrides.

    Unrecognised keywords are not errors: they end up in
    ``unknown_keys`` as ``(keyword, value)`` pairs.
    """
    values = {}
    unknown = []
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.startswith(comment_char):
            continue
        parts = line.split(None, 1)
        if len(parts) < 2:
            raise SettingsError(f"setting {parts[0]!r} has no value", source=source, line=lineno)
        key, value = parts[0], parts[1].strip()
        lowered = key.lower()
        try:
            if lowered == "tempdir":
                values["temp_dir"] = value
            elif lowered == "incdir":
                values["include_dirs"] = tuple(d for d in value.split(":") if d)
            elif lowered == "commentchar":
                comment_char = parse_comment_char(value)
                values["comment_char"] = comment_char
            elif lowered in _SIZE_KEYS:
                values[_SIZE_KEYS[lowered]] = parse_size(value)
            else:
                unknown.append((key, value))
        except SettingsError as exc:
            raise exc.located(source, lineno)
    if unknown:
        values["unknown_keys"] = tuple(unknown)
    return values


def _read(path):
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise SettingsError(f"cannot read settings file {path!r}: {exc.strerror}") from None


def system_settings_path():
    return os.environ.get(SYSTEM_SETTINGS_ENV, DEFAULT_SYSTEM_SETTINGS)


def resolve_settings(input_path, flag_s=None, flag_t=None, system_default_path=None):
    """Settings for one input file plus where they came from.

    Returns ``(settings, source)`` with ``source`` one of ``"local"``,
    ``"-s"``, ``"system"`` or ``"builtin"``.  A ``form.set`` next to the
    input wins over ``-s``, which wins over the system file; ``-t`` is
    applied last.
    """
    if system_default_path is None:
        system_default_path = system_settings_path()
    if flag_s is not None and not os.path.isfile(flag_s):
        raise SettingsError(f"settings file {flag_s!r} given with -s does not exist")

    local = os.path.join(os.path.dirname(os.path.abspath(input_path)), SETTINGS_FILENAME)
    if os.path.isfile(local):
        chosen, origin = local, "local"
    elif flag_s is not None:
        chosen, origin = flag_s, "-s"
    elif system_default_path and os.path.isfile(system_default_path):
        chosen, origin = system_default_path, "system"
    else:
        chosen, origin = None, "builtin"

    settings = Settings()
    if chosen is not None:
        settings = settings.overlay(parse_settings_file(_read(chosen), source=chosen))
    if flag_t is not None:
        settings = replace(settings, temp_dir=flag_t)
    return settings, origin
