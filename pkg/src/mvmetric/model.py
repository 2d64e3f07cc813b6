"""Model container: learned per-view projections, view weights, and hyperparameters."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from ._format import FORMAT_VERSION

ORTHONORMALITY_TOL = 1e-8
SIMPLEX_TOL = 1e-12


@dataclass(frozen=True)
class Hyperparams:
    """Training knobs.

    embed_dim
        Shared number of projection columns per view; ``None`` resolves to
        ``min(10, smallest view dimension)`` at training time.
    weight_exponent
        Exponent r > 1 on the view weights; larger values push the learned
        weights toward uniform.
    coupling_eta
        Divisor of the cross-view coupling term (coefficient 1/(2*eta));
        larger values weaken the coupling, ``inf`` disables it.
    """

    embed_dim: int | None = None
    weight_exponent: float = 2.0
    coupling_eta: float = 1.0
    max_iters: int = 50
    tol: float = 1e-6

    def __post_init__(self):
        if self.embed_dim is not None and self.embed_dim < 1:
            raise ValueError("d must be >= 1")
        if not self.weight_exponent > 1.0:
            raise ValueError("r must be > 1")
        if not self.coupling_eta > 0.0:
            raise ValueError("eta must be > 0")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")

    def resolved(self, view_dims) -> "Hyperparams":
        """Copy with embed_dim pinned to a concrete, validated value."""
        min_dim = min(view_dims)
        d = self.embed_dim if self.embed_dim is not None else min(10, min_dim)
        if d > min_dim:
            raise ValueError(f"d={d} exceeds the smallest view dimension {min_dim}")
        return replace(self, embed_dim=d)


@dataclass(frozen=True)
class MultiviewMetricModel:
    """Learned projections W_v (columns orthonormal) and simplex view weights.

    The induced per-view metric matrix is ``W_v @ W_v.T``.  ``trace`` keeps
    per-iteration diagnostics from training.
    """

    projections: tuple
    view_weights: np.ndarray
    hyper: Hyperparams
    trace: tuple = ()

    def __post_init__(self):
        if self.hyper.embed_dim is None:
            raise ValueError("model requires a resolved embed_dim")
        d = self.hyper.embed_dim
        projections = []
        for i, w in enumerate(self.projections):
            w = np.array(w, dtype=float)
            if w.ndim != 2 or w.shape[1] != d:
                raise ValueError(f"projection {i + 1}: expected shape (D_v, {d}), got {w.shape}")
            if not np.isfinite(w).all():
                raise ValueError(f"projection {i + 1}: non-finite entries")
            gram_err = np.linalg.norm(w.T @ w - np.eye(d))
            if gram_err > ORTHONORMALITY_TOL:
                raise ValueError(f"projection {i + 1}: columns not orthonormal (error {gram_err:.2e})")
            w.setflags(write=False)
            projections.append(w)
        if not projections:
            raise ValueError("model needs at least one view projection")
        weights = np.array(self.view_weights, dtype=float)
        if weights.shape != (len(projections),):
            raise ValueError("one view weight per projection is required")
        if np.any(weights < 0.0) or abs(weights.sum() - 1.0) > SIMPLEX_TOL:
            raise ValueError("view weights must be nonnegative and sum to 1")
        weights.setflags(write=False)
        object.__setattr__(self, "projections", tuple(projections))
        object.__setattr__(self, "view_weights", weights)
        object.__setattr__(self, "trace", tuple(self.trace))

    @property
    def num_views(self) -> int:
        return len(self.projections)

    @property
    def view_dims(self) -> list:
        return [w.shape[0] for w in self.projections]

    @property
    def embed_dim(self) -> int:
        return self.hyper.embed_dim

    def to_dict(self, config: dict | None = None) -> dict:
        doc = {
            "format_version": FORMAT_VERSION,
            "num_views": self.num_views,
            "view_dims": self.view_dims,
            "embed_dim": self.embed_dim,
            "weight_exponent": self.hyper.weight_exponent,
            "coupling_eta": self.hyper.coupling_eta,
            "max_iters": self.hyper.max_iters,
            "tol": self.hyper.tol,
            "view_weights": self.view_weights.tolist(),
            "projections": [w.tolist() for w in self.projections],
            "trace": list(self.trace),
        }
        if config is not None:
            doc["config"] = config
        return doc

    def save(self, path, config: dict | None = None) -> None:
        Path(path).write_text(json.dumps(self.to_dict(config=config), indent=2) + "\n")

    @classmethod
    def from_dict(cls, doc: dict) -> "MultiviewMetricModel":
        try:
            hyper = Hyperparams(
                embed_dim=int(doc["embed_dim"]),
                weight_exponent=float(doc["weight_exponent"]),
                coupling_eta=float(doc["coupling_eta"]),
                max_iters=int(doc.get("max_iters", 50)),
                tol=float(doc.get("tol", 1e-6)),
            )
            projections = [np.asarray(w, dtype=float) for w in doc["projections"]]
            weights = np.asarray(doc["view_weights"], dtype=float)
            trace = tuple(doc.get("trace", ()))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"invalid model document: {exc}") from exc
        return cls(tuple(projections), weights, hyper, trace)

    @classmethod
    def load(cls, path) -> "MultiviewMetricModel":
        p = Path(path)
        if not p.is_file():
            raise FileNotFoundError(f"model file not found: {p}")
        try:
            doc = json.loads(p.read_text())
        except json.JSONDecodeError as exc:
            raise ValueError(f"model file {p}: invalid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ValueError(f"model file {p}: expected a JSON object")
        return cls.from_dict(doc)
