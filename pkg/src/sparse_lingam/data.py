"""Data ingestion, column standardization, pre-whitening and time-series windowing."""
import csv
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .exceptions import (
    DegenerateColumnError,
    InsufficientDataError,
    MissingDataError,
    ParseError,
    RankDeficiencyError,
)

__all__ = [
    "Dataset",
    "Whitening",
    "load_csv",
    "load_series",
    "standardize",
    "whiten",
    "apply_whitening",
    "slice_windows",
]

_MISSING_TOKENS = {"", "nan"}
RANK_TOL = 1e-10


@dataclass(frozen=True)
class Dataset:
    """An ``N x d`` observation matrix plus the affine map back to raw units.

    ``values`` holds the (possibly standardized) data. Raw values are recovered
    as ``values * column_scales + column_means``.
    """

    values: np.ndarray
    column_means: np.ndarray = None
    column_scales: np.ndarray = None
    standardized: bool = False
    names: tuple = field(default=None, compare=False)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.ndim != 2:
            raise ValueError("values must be a 2-d array")
        n, d = values.shape
        if n < 2 or d < 2:
            raise InsufficientDataError(f"need N >= 2 and d >= 2, got N={n}, d={d}")
        if not np.all(np.isfinite(values)):
            raise MissingDataError("values contain non-finite entries")
        object.__setattr__(self, "values", values)
        if self.column_means is None:
            object.__setattr__(self, "column_means", np.zeros(d))
        if self.column_scales is None:
            object.__setattr__(self, "column_scales", np.ones(d))

    @property
    def n_samples(self):
        return self.values.shape[0]

    @property
    def n_vars(self):
        return self.values.shape[1]

    def raw(self):
        return self.values * self.column_scales + self.column_means

    def take(self, rows):
        """Row subset sharing this dataset's standardization metadata."""
        return replace(self, values=self.values[rows])


@dataclass(frozen=True)
class Whitening:
    """Spectral pre-whitening ``(1/N) X^T X = V diag(D)^2 V^T``, ``Z = X V D^-1``."""

    rotation: np.ndarray
    scales: np.ndarray
    Z: np.ndarray

    @property
    def n_vars(self):
        return self.scales.shape[0]

    @property
    def unmix(self):
        """The fixed map ``D^-1 V^T`` taking ``W`` to ``M = W D^-1 V^T``."""
        return self.rotation.T / self.scales[:, None]

    def to_original(self, W):
        return W @ self.unmix

    def to_whitened(self, M):
        """Inverse of :meth:`to_original`: ``W = M V D``."""
        return (M @ self.rotation) * self.scales


def _parse_cell(text, lineno, col):
    token = text.strip()
    if token.lower() in _MISSING_TOKENS:
        raise MissingDataError(f"missing value in column {col}", line=lineno)
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric cell {token!r} in column {col}", line=lineno) from None


def load_csv(path, delimiter=",", header=False):
    """Read a rectangular numeric table into a raw :class:`Dataset`.

    Parameters
    ----------
    path : str or Path
        UTF-8 text file.
    delimiter : str
        Field separator.
    header : bool
        If True the first row holds column names and is skipped.

    Raises
    ------
    ParseError
        Ragged rows, non-numeric cells or an empty table. The message names
        the offending line.
    MissingDataError
        Any empty or ``NaN`` cell.
    """
    names = None
    rows = []
    width = None
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, record in enumerate(reader, start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if header and names is None:
                names = tuple(c.strip() for c in record)
                width = len(record)
                continue
            if width is None:
                width = len(record)
            elif len(record) != width:
                raise ParseError(f"expected {width} fields, found {len(record)}", line=lineno)
            rows.append([_parse_cell(c, lineno, j) for j, c in enumerate(record)])
    if not rows:
        raise ParseError("no data rows")
    return Dataset(np.array(rows, dtype=float), names=names)


def load_series(path, column=0, delimiter=",", header=False):
    """Read one column of a CSV as a float series; missing cells become NaN."""
    values = []
    with open(Path(path), newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter=delimiter)
        for lineno, record in enumerate(reader, start=1):
            if header and lineno == 1:
                continue
            if not record:
                continue
            if column >= len(record):
                raise ParseError(f"no column {column}", line=lineno)
            token = record[column].strip()
            if token.lower() in _MISSING_TOKENS:
                values.append(np.nan)
                continue
            try:
                values.append(float(token))
            except ValueError:
                raise ParseError(f"non-numeric cell {token!r}", line=lineno) from None
    if not values:
        raise ParseError("no data rows")
    return np.array(values)


def standardize(data):
    """Center each column and scale it to unit population standard deviation.

    The ``1/N`` variance convention keeps ``(1/N) X^T X`` equal to the sample
    correlation matrix, which is what :func:`whiten` decomposes.
    """
    X = data.values
    mean = X.mean(axis=0)
    sd = X.std(axis=0)
    for j, s in enumerate(sd):
        if not s > 1e-12 * max(1.0, abs(mean[j])):
            raise DegenerateColumnError(j)
    Xs = (X - mean) / sd
    return replace(
        data,
        values=Xs,
        column_means=data.column_means + mean * data.column_scales,
        column_scales=data.column_scales * sd,
        standardized=True,
    )


def _sign_fix(V):
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def whiten(data):
    """Pre-whiten (standardized) data.

    Eigenvalues are sorted in descending order and each eigenvector's largest
    entry is made nonnegative so the output does not depend on LAPACK's sign
    choices.
    """
    X = data.values if isinstance(data, Dataset) else np.asarray(data, dtype=float)
    n = X.shape[0]
    cov = X.T @ X / n
    cov = (cov + cov.T) / 2
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(evals)[::-1]
    evals, evecs = evals[order], evecs[:, order]
    if evals[-1] < RANK_TOL * max(evals[0], np.finfo(float).tiny):
        raise RankDeficiencyError(
            f"(1/N) X^T X is rank deficient (smallest eigenvalue {evals[-1]:.3e})"
        )
    V = _sign_fix(evecs)
    D = np.sqrt(evals)
    Z = (X @ V) / D
    return Whitening(rotation=V, scales=D, Z=Z)


def apply_whitening(whitening, X):
    """Map new rows through an existing whitening transform."""
    return (np.asarray(X, dtype=float) @ whitening.rotation) / whitening.scales


def slice_windows(series, window_len, transform=False):
    """Cut a series into non-overlapping windows, one window per row.

    ``transform`` applies ``log(1 + x)`` elementwise first. Windows containing
    a missing value are dropped, as is a trailing partial window.
    """
    if window_len < 2:
        raise ValueError("window_len must be >= 2")
    x = np.asarray(series, dtype=float).ravel()
    if transform:
        x = np.log1p(x)
    n_win = x.size // window_len
    windows = x[: n_win * window_len].reshape(n_win, window_len)
    keep = np.all(np.isfinite(windows), axis=1)
    windows = windows[keep]
    if windows.shape[0] < 2:
        raise InsufficientDataError(
            f"only {windows.shape[0]} complete window(s) of length {window_len}"
        )
    return Dataset(windows)
