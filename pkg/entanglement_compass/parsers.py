import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np

from .hermitian import (
    DensityOperator,
    DimensionError,
    HermitianOperator,
    InvariantError,
    dims_product,
)

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

REPORT_VERSION = 1


class MatrixFormatError(InvariantError):
    """A matrix document does not follow the MatrixFile grammar"""


def _encode_float(x: float) -> float:
    # 17 significant digits always reproduce the double exactly
    return float(f"{float(x):.17g}")


def _finite_or_none(x) -> Optional[float]:
    if x is None:
        return None
    x = float(x)
    return _encode_float(x) if math.isfinite(x) else None


@dataclass(frozen=True, eq=False)
class MatrixFile:
    """Parsed MatrixFile document: dims, a square complex matrix, and an optional name"""

    dims: tuple
    matrix: np.ndarray
    name: Optional[str] = None

    def to_hermitian(self) -> HermitianOperator:
        return HermitianOperator.from_data(self.matrix, tol=1e-9)

    def to_density(self) -> DensityOperator:
        return DensityOperator(self.dims, self.to_hermitian())


class MatrixFileParser:
    """Reads and writes MatrixFile and ReportFile documents"""

    @staticmethod
    def parse_document(document: Dict[str, Any]) -> MatrixFile:
        if not isinstance(document, dict):
            raise MatrixFormatError("matrix document must be a JSON object")
        if "dims" not in document or "matrix" not in document:
            raise MatrixFormatError("matrix document needs 'dims' and 'matrix' fields")

        dims = document["dims"]
        if not isinstance(dims, list) or not dims or not all(isinstance(d, int) and not isinstance(d, bool) for d in dims):
            raise MatrixFormatError(f"'dims' must be a non-empty list of integers, got {dims!r}")
        if any(d < 1 for d in dims):
            raise MatrixFormatError(f"'dims' entries must be positive, got {dims}")
        total = dims_product(dims)

        rows = document["matrix"]
        if not isinstance(rows, list) or len(rows) != total:
            raise DimensionError(f"matrix must have {total} rows for dims {dims}")
        matrix = np.zeros((total, total), dtype=np.complex128)
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != total:
                raise DimensionError(f"row {i} must have {total} entries for dims {dims}")
            for j, entry in enumerate(row):
                matrix[i, j] = MatrixFileParser._parse_complex(entry, i, j)

        name = document.get("name")
        if name is not None and not isinstance(name, str):
            raise MatrixFormatError("'name' must be a string")
        return MatrixFile(tuple(dims), matrix, name)

    @staticmethod
    def _parse_complex(entry, i: int, j: int) -> complex:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
        ):
            raise MatrixFormatError(f"entry ({i}, {j}) must be a [re, im] pair of numbers, got {entry!r}")
        re, im = float(entry[0]), float(entry[1])
        if not (math.isfinite(re) and math.isfinite(im)):
            raise MatrixFormatError(f"entry ({i}, {j}) is not finite")
        return complex(re, im)

    @staticmethod
    def parse_text(text: str) -> MatrixFile:
        try:
            document = json.loads(text)
        except json.JSONDecodeError as e:
            raise MatrixFormatError(f"not a valid JSON document: {e}") from e
        return MatrixFileParser.parse_document(document)

    @staticmethod
    def load(path: PathLike) -> MatrixFile:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise MatrixFormatError(f"cannot read {path}: {e}") from e
        logger.debug(f"Loaded matrix document from {path}")
        return MatrixFileParser.parse_text(text)

    @staticmethod
    def encode_matrix(matrix) -> List[List[List[float]]]:
        matrix = np.asarray(matrix, dtype=np.complex128)
        return [[[_encode_float(z.real), _encode_float(z.imag)] for z in row] for row in matrix]

    @staticmethod
    def matrix_document(matrix, dims: Sequence[int], name: Optional[str] = None) -> Dict[str, Any]:
        if isinstance(matrix, HermitianOperator):
            matrix = matrix.matrix
        document: Dict[str, Any] = {"dims": [int(d) for d in dims]}
        if name is not None:
            document["name"] = name
        document["matrix"] = MatrixFileParser.encode_matrix(matrix)
        return document

    @staticmethod
    def dumps(document: Dict[str, Any]) -> str:
        return json.dumps(document, indent=2, allow_nan=False) + "\n"

    @staticmethod
    def write(path: PathLike, document: Dict[str, Any]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(MatrixFileParser.dumps(document), encoding="utf-8")
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def report_document(
        method: str,
        verdict: str,
        value: Optional[float],
        detect_eps: float,
        certificates: Dict[str, Any],
        witness: Optional[Dict[str, Any]],
        seesaw_value: Optional[float],
        seed: int,
        wall_time: float,
        extra: Optional[Dict[str, Any]] = None,
    ) -> Dict[str, Any]:
        """ReportFile payload; non-finite numbers are stored as null"""
        cleaned = {
            key: (_finite_or_none(v) if isinstance(v, float) else v)
            for key, v in certificates.items()
        }
        report = {
            "version": REPORT_VERSION,
            "method": method,
            "verdict": verdict,
            "value": _finite_or_none(value),
            "detect_eps": _encode_float(detect_eps),
            "certificates": cleaned,
            "witness": witness,
            "seesaw_value": _finite_or_none(seesaw_value),
            "seed": int(seed),
            "wall_time": _encode_float(wall_time),
        }
        for key, v in (extra or {}).items():
            report[key] = v
        return report
