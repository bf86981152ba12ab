from pathlib import Path

import qlaws.corpus
from qlaws.cli.printer import show
from qlaws.cli.workspace import load_workspace

CORPUS = Path(qlaws.corpus.__file__).parent
WS = load_workspace(CORPUS)


def load(name):
    parsed, lib = WS.load_program(name)
    return parsed.program, lib


def banner(text):
    print(f"\n== {text}")


__all__ = ["CORPUS", "WS", "banner", "load", "show"]
