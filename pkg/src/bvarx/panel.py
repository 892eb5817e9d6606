"""Monthly multivariate panels: ingestion, transforms, splitting, exogenous paths.

A :class:`Panel` keeps an endogenous block (the series being modelled and
forecast) and an exogenous block (conditioning series) on a shared, gapless
monthly index.  Ingestion is deliberately strict: misaligned dates, duplicated
months, gaps and missing cells are hard errors, never silently repaired.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .errors import (
    ConfigError,
    DataError,
    DateParseError,
    DuplicateDateError,
    MissingColumnError,
    MissingValueError,
    MonthlyGapError,
)

_MONTH_RE = re.compile(r"^(\d{4})-(\d{2})(?:-\d{2})?$")

ROLE_ENDOG = "endogenous"
ROLE_EXOG = "exogenous"

TRANSFORM_OPS = ("log", "log10", "standardize", "none")


def _parse_month(text: str) -> int:
    """Parse an ISO ``YYYY-MM`` (or ``YYYY-MM-DD``) string to a month code."""
    m = _MONTH_RE.match(str(text).strip())
    if not m:
        raise DateParseError(f"unparseable date {text!r}; expected ISO YYYY-MM")
    year, month = int(m.group(1)), int(m.group(2))
    if not 1 <= month <= 12:
        raise DateParseError(f"month out of range in date {text!r}")
    return year * 12 + (month - 1)


def _format_month(code: int) -> str:
    return f"{code // 12:04d}-{code % 12 + 1:02d}"


@dataclass(frozen=True)
class Panel:
    """Immutable monthly panel with endogenous/exogenous blocks.

    Parameters
    ----------
    dates : tuple of str
        ISO ``YYYY-MM`` labels, strictly increasing, consecutive months.
    endog : ndarray, shape (T, m)
        Endogenous block, ``m >= 1``.
    exog : ndarray, shape (T, k)
        Exogenous block, ``k >= 0``.
    endog_names, exog_names : tuple of str
        Column labels; all labels unique across both blocks.
    transforms : tuple of (column, op)
        Provenance of column transforms applied via :func:`transform`.
    """

    dates: tuple
    endog: np.ndarray
    exog: np.ndarray
    endog_names: tuple
    exog_names: tuple
    transforms: tuple = field(default=())

    def __post_init__(self):
        endog = np.ascontiguousarray(np.asarray(self.endog, dtype=np.float64))
        exog = np.ascontiguousarray(np.asarray(self.exog, dtype=np.float64))
        if endog.ndim != 2 or exog.ndim != 2:
            raise DataError("endog/exog must be 2-D arrays")
        object.__setattr__(self, "endog", endog)
        object.__setattr__(self, "exog", exog)
        T = len(self.dates)
        if endog.shape[0] != T or exog.shape[0] != T:
            raise DataError("date index and data blocks disagree on length")
        if endog.shape[1] < 1:
            raise DataError("at least one endogenous column is required")
        names = tuple(self.endog_names) + tuple(self.exog_names)
        if len(names) != len(set(names)):
            raise DataError("column names must be unique")
        if len(self.endog_names) != endog.shape[1] or len(self.exog_names) != exog.shape[1]:
            raise DataError("column names and block widths disagree")
        codes = [_parse_month(d) for d in self.dates]
        for a, b in zip(codes, codes[1:]):
            if b == a:
                raise DuplicateDateError(f"duplicated month {_format_month(a)}")
            if b < a:
                raise DataError("dates must be strictly increasing")
            if b != a + 1:
                raise MonthlyGapError(
                    f"gap in monthly index between {_format_month(a)} and {_format_month(b)}"
                )
        if np.isnan(endog).any() or np.isnan(exog).any():
            raise MissingValueError("NaN cell in panel after construction")
        endog.flags.writeable = False
        exog.flags.writeable = False

    # -- basic geometry -------------------------------------------------

    @property
    def T(self) -> int:
        return self.endog.shape[0]

    @property
    def m(self) -> int:
        return self.endog.shape[1]

    @property
    def k(self) -> int:
        return self.exog.shape[1]

    @property
    def names(self) -> tuple:
        return tuple(self.endog_names) + tuple(self.exog_names)

    @property
    def roles(self) -> tuple:
        return (ROLE_ENDOG,) * self.m + (ROLE_EXOG,) * self.k

    def column(self, name: str) -> np.ndarray:
        """Return one column by name (copy)."""
        if name in self.endog_names:
            return self.endog[:, list(self.endog_names).index(name)].copy()
        if name in self.exog_names:
            return self.exog[:, list(self.exog_names).index(name)].copy()
        raise MissingColumnError(f"no column named {name!r}")

    def rows(self, start: int, stop: int) -> "Panel":
        """Row slice ``[start:stop)`` as a new Panel."""
        return Panel(
            dates=self.dates[start:stop],
            endog=self.endog[start:stop].copy(),
            exog=self.exog[start:stop].copy(),
            endog_names=self.endog_names,
            exog_names=self.exog_names,
            transforms=self.transforms,
        )


@dataclass(frozen=True)
class SplitSpec:
    """Train/test split request: rows ``1..train_end`` train, next ``horizon`` test."""

    train_end: int
    horizon: int

    def __post_init__(self):
        if int(self.train_end) != self.train_end or int(self.horizon) != self.horizon:
            raise ConfigError("train_end and horizon must be integers")
        if self.horizon < 1:
            raise ConfigError("horizon must be a positive integer")
        if self.train_end < 1:
            raise ConfigError("train_end must be a positive integer")


@dataclass(frozen=True)
class ExogPath:
    """Pinned future exogenous values, one row per forecast step."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if vals.ndim != 2:
            raise DataError("exogenous path must be a 2-D array")
        object.__setattr__(self, "values", vals)
        vals.flags.writeable = False

    @property
    def H(self) -> int:
        return self.values.shape[0]

    @property
    def k(self) -> int:
        return self.values.shape[1]


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------


def _read_csv(path) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path, dtype=str)
    except FileNotFoundError as exc:
        raise DataError(f"input file not found: {path}") from exc
    except Exception as exc:  # malformed CSV
        raise DataError(f"could not read CSV {path}: {exc}") from exc
    if frame.shape[1] < 2:
        raise DataError(f"{path}: need a date column plus at least one value column")
    return frame


def load_panel(paths, schema) -> Panel:
    """Load and align one or more wide CSV files into a :class:`Panel`.

    Each file's first column holds ISO ``YYYY-MM`` dates; remaining columns
    are numeric.  ``schema`` maps column name -> role (``"endogenous"`` or
    ``"exogenous"``) and fixes the column order of the result.  Files are
    aligned on the intersection of their monthly indices; the intersection
    must itself be gapless.

    Raises
    ------
    MissingColumnError, DateParseError, DuplicateDateError, MonthlyGapError,
    MissingValueError
        One distinct error per ingestion failure mode.
    """
    if isinstance(paths, (str, bytes)) or hasattr(paths, "__fspath__"):
        paths = [paths]
    schema = dict(schema)
    if not schema:
        raise ConfigError("schema names no columns")
    bad_roles = {r for r in schema.values() if r not in (ROLE_ENDOG, ROLE_EXOG)}
    if bad_roles:
        raise ConfigError(f"unknown column roles: {sorted(bad_roles)}")

    columns = {}  # name -> dict(month code -> value string)
    month_sets = []
    for path in paths:
        frame = _read_csv(path)
        date_col = frame.columns[0]
        codes = [_parse_month(v) for v in frame[date_col]]
        seen = set()
        for c in codes:
            if c in seen:
                raise DuplicateDateError(
                    f"{path}: duplicated month {_format_month(c)}"
                )
            seen.add(c)
        month_sets.append(seen)
        for name in frame.columns[1:]:
            if name not in schema:
                continue  # unused column, ignore
            if name in columns:
                raise DataError(f"column {name!r} provided by more than one file")
            columns[name] = dict(zip(codes, frame[name].tolist()))

    missing = [n for n in schema if n not in columns]
    if missing:
        raise MissingColumnError(f"columns missing from inputs: {missing}")

    common = set.intersection(*month_sets) if month_sets else set()
    if not common:
        raise DataError("input files share no common months")
    codes = sorted(common)
    for a, b in zip(codes, codes[1:]):
        if b != a + 1:
            raise MonthlyGapError(
                f"gap in monthly index between {_format_month(a)} and {_format_month(b)}"
            )

    endog_names = tuple(n for n, r in schema.items() if r == ROLE_ENDOG)
    exog_names = tuple(n for n, r in schema.items() if r == ROLE_EXOG)

    def block(names):
        out = np.empty((len(codes), len(names)), dtype=np.float64)
        for j, name in enumerate(names):
            col = columns[name]
            for i, c in enumerate(codes):
                raw = col[c]
                try:
                    val = float(raw)
                except (TypeError, ValueError) as exc:
                    raise MissingValueError(
                        f"column {name!r}, month {_format_month(c)}: "
                        f"cell {raw!r} is not numeric"
                    ) from exc
                if np.isnan(val):
                    raise MissingValueError(
                        f"column {name!r}, month {_format_month(c)}: missing value"
                    )
                out[i, j] = val
        return out

    return Panel(
        dates=tuple(_format_month(c) for c in codes),
        endog=block(endog_names),
        exog=block(exog_names) if exog_names else np.empty((len(codes), 0)),
        endog_names=endog_names,
        exog_names=exog_names,
    )


def transform(panel: Panel, column: str, op: str) -> Panel:
    """Return a new Panel with ``op`` applied to ``column``.

    ``op`` is one of ``log`` (natural log, strictly positive input),
    ``log10``, ``standardize`` (sample mean/std, ddof=1) or ``none``.
    The applied transform is recorded in ``Panel.transforms``.
    """
    if op not in TRANSFORM_OPS:
        raise ConfigError(f"unknown transform op {op!r}; expected one of {TRANSFORM_OPS}")
    values = panel.column(column)
    if op in ("log", "log10"):
        if np.any(values <= 0.0):
            raise DataError(f"transform {op!r} on {column!r}: non-positive value present")
        new = np.log(values) if op == "log" else np.log10(values)
    elif op == "standardize":
        sd = float(np.std(values, ddof=1))
        if sd == 0.0:
            raise DataError(f"standardize on {column!r}: constant column")
        new = (values - float(np.mean(values))) / sd
    else:
        new = values

    endog = panel.endog.copy()
    exog = panel.exog.copy()
    if column in panel.endog_names:
        endog[:, list(panel.endog_names).index(column)] = new
    else:
        exog[:, list(panel.exog_names).index(column)] = new
    return Panel(
        dates=panel.dates,
        endog=endog,
        exog=exog,
        endog_names=panel.endog_names,
        exog_names=panel.exog_names,
        transforms=panel.transforms + ((column, op),),
    )


def split(panel: Panel, spec: SplitSpec):
    """Split into ``(train, test)``: rows 1..train_end and the next ``horizon`` rows."""
    if spec.train_end + spec.horizon > panel.T:
        raise DataError(
            f"horizon overruns data: train_end={spec.train_end} + H={spec.horizon} "
            f"> T={panel.T}"
        )
    train = panel.rows(0, spec.train_end)
    test = panel.rows(spec.train_end, spec.train_end + spec.horizon)
    return train, test


def future_exog(train: Panel, H: int) -> ExogPath:
    """Pin the future exogenous path to the last ``H`` training rows.

    Row ``h`` (1-based) of the result equals the training exogenous row
    ``T - H + h``, so the path uses no information beyond the training sample.
    """
    if train.k == 0:
        raise DataError("panel has no exogenous block (k = 0)")
    if H < 1 or H > train.T:
        raise DataError(f"H={H} must be in 1..{train.T}")
    return ExogPath(values=train.exog[train.T - H:].copy())


def panel_to_csv(panel: Panel, path) -> None:
    """Serialize to the canonical single-CSV layout (date + named columns)."""
    frame = pd.DataFrame(
        np.hstack([panel.endog, panel.exog]),
        columns=list(panel.names),
    )
    frame.insert(0, "date", list(panel.dates))
    frame.to_csv(path, index=False)


def panel_from_csv(path, schema) -> Panel:
    """Inverse of :func:`panel_to_csv` (delegates to :func:`load_panel`)."""
    return load_panel([path], schema)
