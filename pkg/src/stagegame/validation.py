"""Input validation helpers shared across the package."""

from __future__ import annotations

import numpy as np

__all__ = [
    "check_labels",
    "check_distribution",
    "check_stochastic_rows",
    "label_index",
]


def check_labels(labels, where: str) -> tuple[str, ...]:
    """Validate a label sequence: nonempty, unique, nonempty strings."""
    if not isinstance(labels, (list, tuple)) or len(labels) == 0:
        raise ValueError(f"{where}: expected a nonempty sequence of labels")
    for j, lab in enumerate(labels):
        if not isinstance(lab, str) or not lab:
            raise ValueError(f"{where}[{j}]: labels must be nonempty strings")
    if len(set(labels)) != len(labels):
        raise ValueError(f"{where}: duplicate labels")
    return tuple(labels)


def check_distribution(p, where: str, atol: float = 1e-9) -> np.ndarray:
    """Validate a 1-d probability vector; returns it clipped at zero."""
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or p.size == 0:
        raise ValueError(f"{where}: expected a nonempty 1-d probability vector")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{where}: entries must be finite")
    if np.any(p < -atol):
        raise ValueError(f"{where}: entries must be nonnegative")
    total = float(p.sum())
    if abs(total - 1.0) > atol:
        raise ValueError(f"{where}: entries must sum to 1 (got {total})")
    return np.clip(p, 0.0, None)


def check_stochastic_rows(mat, where: str, atol: float = 1e-9) -> np.ndarray:
    """Validate that the trailing axis of `mat` holds probability vectors."""
    mat = np.asarray(mat, dtype=float)
    if mat.ndim < 1:
        raise ValueError(f"{where}: expected at least one axis")
    flat = mat.reshape(-1, mat.shape[-1])
    for r in range(flat.shape[0]):
        check_distribution(flat[r], f"{where}[row {r}]", atol=atol)
    return mat


def label_index(label: str, labels: tuple[str, ...], where: str) -> int:
    """Index of `label` in `labels`, with a readable error."""
    try:
        return labels.index(label)
    except ValueError:
        raise KeyError(
            f"{where}: unknown label {label!r}; expected one of {list(labels)}"
        ) from None
