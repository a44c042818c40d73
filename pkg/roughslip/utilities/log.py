"""
Console logging helpers
Tagged [DEBUG]/[ERROR] lines on stderr and JSON progress records on stdout
"""
import json
import sys
from typing import Any, Dict

_verbose = False


def set_verbose(flag: bool) -> None:
    global _verbose
    _verbose = bool(flag)


def is_verbose() -> bool:
    return _verbose


def debug(message: str) -> None:
    if _verbose:
        print(f"[DEBUG] {message}", file=sys.stderr, flush=True)


def error(message: str) -> None:
    print(f"[ERROR] {message}", file=sys.stderr, flush=True)


def status(message: str, ok: bool = True) -> None:
    """One human-readable status line, prefixed with a pass/fail marker"""
    marker = "✅" if ok else "❌"
    print(f"{marker} {message}", flush=True)


def progress(record: Dict[str, Any]) -> None:
    # one object per line so long runs can be tailed and parsed
    print(json.dumps(record, sort_keys=True), flush=True)
