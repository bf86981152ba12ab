"""Numerical tolerances and resource caps shared by every module."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path


@dataclass(frozen=True)
class Config:
    """Tolerances, truncation limits and the dimension cap.

    Attributes
    ----------
    eps_comp, eps_orth, eps_psd:
        Completeness, orthonormality and positivity tolerances.
    eps_eq:
        Largest residual accepted as semantic equality.
    eps_rel:
        Relative tolerance of the measurement relations.
    eps_ref:
        Residual accepted by the convex feasibility check of refinement.
    loop_tol, loop_cap:
        A loop (or recursion) unrolling stops once the Choi increment has
        trace norm below ``loop_tol`` or after ``loop_cap`` steps.
    rec_cap:
        Separate cap on fixpoint iterations of ``mu``; ``None`` reuses
        ``loop_cap``.
    dmax:
        Largest Hilbert-space dimension any denotation may have.
    dedup_tol:
        Choi distance under which two elements of a semantic set coincide.
    auto_register:
        Whether rewrites may add synthesized gates and measurements to the
        library.
    """

    eps_comp: float = 1e-8
    eps_orth: float = 1e-8
    eps_psd: float = 1e-8
    eps_eq: float = 1e-9
    eps_rel: float = 1e-8
    eps_ref: float = 1e-6
    loop_tol: float = 1e-10
    loop_cap: int = 256
    rec_cap: int | None = None
    dmax: int = 128
    dedup_tol: float = 1e-9
    auto_register: bool = True

    @property
    def mu_cap(self) -> int:
        return self.loop_cap if self.rec_cap is None else self.rec_cap

    def replace(self, **changes) -> "Config":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "Config":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "Config":
        return cls.from_dict(json.loads(Path(path).read_text()))


DEFAULT = Config()


class DimensionCapError(ValueError):
    """Raised when a semantic computation would exceed ``Config.dmax``."""
