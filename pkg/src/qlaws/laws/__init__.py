"""Catalog of algebraic laws as verified rewrite rules."""

from __future__ import annotations

from qlaws.laws import circuit, loops, nondet, program
from qlaws.laws.core import (
    LTR,
    RTL,
    Ctx,
    Law,
    LawError,
    LawTrace,
    NoMatch,
    RewriteResult,
    SideConditionFailed,
    SynthesisFailed,
    apply_law,
    candidate_sites,
    match_law,
    replay,
)

LAYERS = ("circuit", "program", "loop", "nondet")


def all_laws() -> list[Law]:
    return circuit.laws() + program.laws() + loops.laws() + nondet.laws()


CATALOG: dict[str, Law] = {law.id: law for law in all_laws()}


def get_law(law_id: str) -> Law:
    try:
        return CATALOG[law_id]
    except KeyError:
        raise KeyError(f"unknown law {law_id!r}") from None


def manifest() -> list[dict]:
    """JSON-ready description of every law."""
    return [
        {"id": law.id, "layer": law.layer, "title": law.title, "anchor": law.anchor,
         "bidirectional": law.bidirectional, "enabled": law.enabled}
        for law in CATALOG.values()
    ]


__all__ = [
    "CATALOG", "LAYERS", "LTR", "RTL", "Ctx", "Law", "LawError", "LawTrace", "NoMatch",
    "RewriteResult", "SideConditionFailed", "SynthesisFailed", "all_laws", "apply_law",
    "candidate_sites", "get_law", "manifest", "match_law", "replay",
]
