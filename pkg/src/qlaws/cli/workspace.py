"""Workspace: library files, variable declarations and configuration.

A workspace is a directory, given by ``--workspace`` or the
``QLAWS_WORKSPACE`` environment variable (default: the current directory).
It may hold ``qlaws.json``::

    {
      "libraries": ["gates.json", "measurements.json"],
      "variables": {"c": 8},
      "config": {"eps_eq": 1e-9, "loop_cap": 512},
      "auto_register": true
    }

Every referenced library file is merged into the bundled standard library
and validated when the workspace loads.  ``--config FILE`` overrides the
``config`` section with the keys of a separate JSON file.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from qlaws.cli.parser import Parsed, diagnose, parse
from qlaws.config import Config
from qlaws.library import Library
from qlaws.syntax import Var

ENV_VAR = "QLAWS_WORKSPACE"
CONFIG_NAME = "qlaws.json"


class WorkspaceError(ValueError):
    pass


@dataclass
class Workspace:
    root: Path
    lib: Library
    cfg: Config
    variables: dict = field(default_factory=dict)
    libraries: tuple = ()

    def resolve(self, path: str | Path) -> Path:
        p = Path(path)
        if p.exists() or p.is_absolute():
            return p
        alt = self.root / p
        return alt if alt.exists() else p

    def load_program(self, path: str | Path, check: bool = True) -> tuple[Parsed, Library]:
        """Parse a program file and extend the library with its ``use`` files."""
        p = self.resolve(path)
        try:
            text = p.read_text()
        except OSError as e:
            raise WorkspaceError(f"cannot read {path}: {e.strerror}") from None
        parsed = parse(text, self.variables)
        lib = self.lib
        for use in parsed.uses:
            lib = lib.merge(_load_lib(p.parent / use))
        if check:
            problems = diagnose(parsed, lib)
            if problems:
                raise WorkspaceError(f"{p}: " + "; ".join(problems))
        return parsed, lib

    def parse_text(self, text: str, variables: dict | None = None) -> Parsed:
        return parse(text, {**self.variables, **(variables or {})})


def _load_lib(path: Path) -> Library:
    try:
        return Library.load(path)
    except OSError as e:
        raise WorkspaceError(f"cannot read library {path}: {e.strerror}") from None
    except (ValueError, KeyError, TypeError) as e:
        raise WorkspaceError(f"invalid library {path}: {e}") from None


def load_workspace(path: str | Path | None = None, config: str | Path | None = None) -> Workspace:
    root = Path(path or os.environ.get(ENV_VAR) or ".")
    if not root.is_dir():
        raise WorkspaceError(f"workspace {root} is not a directory")
    data: dict = {}
    cfg_file = root / CONFIG_NAME
    if cfg_file.exists():
        try:
            data = json.loads(cfg_file.read_text())
        except json.JSONDecodeError as e:
            raise WorkspaceError(f"{cfg_file}: {e}") from None
    unknown = set(data) - {"libraries", "variables", "config", "auto_register"}
    if unknown:
        raise WorkspaceError(f"{cfg_file}: unknown keys {sorted(unknown)}")
    lib = Library.standard()
    libs = tuple(data.get("libraries", ()))
    for name in libs:
        lib = lib.merge(_load_lib(root / name))
    settings = dict(data.get("config", {}))
    if "auto_register" in data:
        settings["auto_register"] = bool(data["auto_register"])
    if config is not None:
        try:
            settings.update(json.loads(Path(config).read_text()))
        except (OSError, json.JSONDecodeError) as e:
            raise WorkspaceError(f"cannot load config {config}: {e}") from None
    try:
        cfg = Config.from_dict(settings)
    except (TypeError, ValueError) as e:
        raise WorkspaceError(f"invalid configuration: {e}") from None
    variables = {}
    for name, dim in data.get("variables", {}).items():
        if not isinstance(dim, int) or dim < 1:
            raise WorkspaceError(f"variable {name}: dimension must be a positive integer")
        variables[name] = Var(name, dim)
    return Workspace(root, lib, cfg, variables, libs)
