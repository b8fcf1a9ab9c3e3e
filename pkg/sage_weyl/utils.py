import csv
import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Any, Callable, Iterable, List, Mapping, Optional, Sequence, TypeVar

import numpy as np
from scipy import sparse

from sage_weyl.helpers.typings import MatrixLike

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

SYMMETRY_TOLERANCE = 1e-12


def format_float(value: float) -> str:
    """
    Formats a real number with 17 significant digits.

    Parameters
    ----------
    value : float
        The number to format.

    Returns
    -------
    str
        ``format(value, ".17g")`` for finite values, ``"inf"``, ``"-inf"`` or
        ``"nan"`` otherwise.
    """
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def to_serializable(obj: Any) -> Any:
    """
    Converts numpy scalars, arrays and complex numbers into JSON-ready values.

    Non-finite floats become strings so that the output stays valid JSON, and
    complex numbers become ``{"re": .., "im": ..}`` objects.
    """
    if hasattr(obj, "to_dict"):
        return to_serializable(obj.to_dict())
    if isinstance(obj, Mapping):
        return {str(key): to_serializable(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_serializable(item) for item in obj]
    if isinstance(obj, np.ndarray):
        return [to_serializable(item) for item in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": to_serializable(obj.real), "im": to_serializable(obj.imag)}
    if isinstance(obj, (float, np.floating)):
        if not math.isfinite(obj):
            return format_float(obj)
        return float(format_float(obj))
    return obj


def write_json(path: Path, payload: Any) -> Path:
    """Writes ``payload`` as sorted, indented UTF-8 JSON with a trailing newline."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = json.dumps(to_serializable(payload), sort_keys=True, indent=2)
    path.write_text(text + "\n", encoding="utf-8")
    logger.debug("Wrote %s", path)
    return path


def write_csv(
    path: Path, fieldnames: Sequence[str], rows: Iterable[Mapping[str, Any]]
) -> Path:
    """
    Writes rows to a CSV file with a header and LF line endings.

    Floats are printed with :func:`format_float`; booleans as ``true``/``false``.

    Parameters
    ----------
    path : Path
        Target file; parent directories are created.
    fieldnames : Sequence[str]
        Column order.
    rows : Iterable[Mapping[str, Any]]
        One mapping per row.

    Returns
    -------
    Path
        The written path.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        writer = csv.DictWriter(
            handle, fieldnames=list(fieldnames), lineterminator="\n"
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({key: _format_cell(row[key]) for key in fieldnames})
    logger.debug("Wrote %s", path)
    return path


def _format_cell(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating, int, np.integer)):
        return format_float(value)
    return str(value)


def seeded_rng(seed: Optional[int] = 0) -> np.random.Generator:
    return np.random.default_rng(0 if seed is None else seed)


def hermitian_defect(matrix: MatrixLike) -> float:
    """
    Returns ``max|H - H^H| / max(1, max|H|)`` for dense or sparse matrices.
    """
    if sparse.issparse(matrix):
        diff = abs(matrix - matrix.conj().T)
        scale = abs(matrix).max() if matrix.nnz else 0.0
        worst = diff.max() if diff.nnz else 0.0
    else:
        matrix = np.asarray(matrix)
        if matrix.size == 0:
            return 0.0
        worst = np.max(np.abs(matrix - matrix.conj().T))
        scale = np.max(np.abs(matrix))
    return float(worst) / max(1.0, float(scale))


def is_hermitian(matrix: MatrixLike, tol: float = SYMMETRY_TOLERANCE) -> bool:
    matrix_shape = matrix.shape
    if len(matrix_shape) != 2 or matrix_shape[0] != matrix_shape[1]:
        return False
    return hermitian_defect(matrix) <= tol


def hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().T)


def spectral_ladder(mu: float, lo: float, hi: float, count: int) -> np.ndarray:
    """
    Returns ``count`` real points in ``[lo, hi]`` spaced geometrically in ``mu - λ``.

    The points are sorted increasingly.
    """
    distances = np.geomspace(mu - lo, mu - hi, count)
    return np.sort(mu - distances)


def run_parallel(func: Callable[[T], R], items: Sequence[T], jobs: int = 1) -> List[R]:
    """
    Maps ``func`` over ``items`` with a thread pool, preserving input order.

    Parameters
    ----------
    func : Callable
        A pure function of one argument.
    items : Sequence
        Work items.
    jobs : int
        Worker count; ``1`` evaluates sequentially in the calling thread.

    Returns
    -------
    list
        ``[func(item) for item in items]``.
    """
    if jobs <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=jobs) as executor:
        return list(executor.map(func, items))
