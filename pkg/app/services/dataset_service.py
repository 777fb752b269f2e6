"""Ingestion, validation and encoding of tabular lending data."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from io import StringIO
from pathlib import Path

import numpy as np
import pandas as pd
from pydantic import ValidationError

from app.core.errors import FeatureError, IngestionError, InvalidParameterError, SchemaError, ZeroVarianceError
from app.core.logger import logger
from app.core.seeding import rng
from app.schemas.dataset import DatasetSchema, DatasetSummary, FeatureSpec
from app.schemas.models import StandardizationParams

PERSONAL_STATUS_CODES = ("A91", "A92", "A93", "A94", "A95")
FEMALE_CODES = frozenset({"A92", "A95"})

# Raw codes renamed at load time so that the level itself is the value users fix.
RAW_RECODES: dict[str, dict[str, str]] = {"Telephone": {"A191": "0", "A192": "1"}}


def _categorical(name: str, codes: Sequence[str], role: str = "feature") -> FeatureSpec:
    return FeatureSpec(name=name, kind="categorical", levels=tuple(codes), role=role)  # type: ignore[arg-type]


def _numeric(name: str, role: str = "feature") -> FeatureSpec:
    return FeatureSpec(name=name, kind="numeric", role=role)  # type: ignore[arg-type]


def german_credit_specs() -> list[FeatureSpec]:
    """Columns of the German credit file in file order, followed by the derived Gender column."""
    return [
        _categorical("AccountStatus", ["A11", "A12", "A13", "A14"]),
        _numeric("CreditDuration"),
        _categorical("CreditHistory", ["A30", "A31", "A32", "A33", "A34"]),
        # A47 (vacation) is documented but never observed
        _categorical("Purpose", ["A40", "A41", "A42", "A43", "A44", "A45", "A46", "A48", "A49", "A410"]),
        _numeric("CreditAmount"),
        _categorical("Savings", ["A61", "A62", "A63", "A64", "A65"]),
        _categorical("EmploymentDuration", ["A71", "A72", "A73", "A74", "A75"]),
        _numeric("InstallmentRate"),
        _categorical("PersonalStatus", PERSONAL_STATUS_CODES, role="excluded"),
        _categorical("Guarantor", ["A101", "A102", "A103"]),
        _numeric("ResidenceTime"),
        _categorical("Property", ["A121", "A122", "A123", "A124"]),
        _numeric("Age"),
        _categorical("OtherInstallmentPlan", ["A141", "A142", "A143"]),
        _categorical("Housing", ["A151", "A152", "A153"]),
        _numeric("NumberOfCredit"),
        _categorical("Job", ["A171", "A172", "A173", "A174"]),
        _numeric("NumberLiablePeople"),
        _categorical("Telephone", ["0", "1"]),
        _categorical("ForeignWorker", ["A201", "A202"], role="excluded"),
        _numeric("CreditRisk", role="target"),
        _numeric("Gender", role="protected"),
    ]


@dataclass(frozen=True, eq=False)
class Dataset:
    """Validated table. Treat ``frame`` as read-only; every transformation returns a new object."""

    specs: tuple[FeatureSpec, ...]
    frame: pd.DataFrame

    def __post_init__(self) -> None:
        try:
            DatasetSchema(columns=list(self.specs))
        except ValidationError as e:
            raise SchemaError(str(e)) from e
        names = [spec.name for spec in self.specs]
        if list(self.frame.columns) != names:
            raise SchemaError(f"frame columns {list(self.frame.columns)} do not match specs {names}")
        if len(self.frame) == 0:
            raise IngestionError("dataset has no rows")

        frame = self.frame.copy()
        for spec in self.specs:
            column = frame[spec.name]
            if column.isna().any():
                row = int(np.flatnonzero(column.isna().to_numpy())[0])
                raise IngestionError(f"missing value in column {spec.name} (row {row})")
            if spec.kind == "categorical":
                frame[spec.name] = column.astype(str)
                unknown = ~frame[spec.name].isin(spec.levels)
                if unknown.any():
                    row = int(np.flatnonzero(unknown.to_numpy())[0])
                    level = frame[spec.name].iloc[row]
                    raise IngestionError(f"unknown level {level!r} in column {spec.name} (row {row})")
            else:
                try:
                    frame[spec.name] = pd.to_numeric(column, errors="raise").astype(float)
                except (TypeError, ValueError) as e:
                    raise IngestionError(f"non-numeric value in column {spec.name}") from e
            if spec.role in ("target", "protected"):
                if spec.kind != "numeric":
                    raise SchemaError(f"{spec.role} column {spec.name} must be numeric 0/1")
                if not frame[spec.name].isin([0.0, 1.0]).all():
                    raise IngestionError(f"{spec.role} column {spec.name} must contain only 0 and 1")
                frame[spec.name] = frame[spec.name].astype(int)
        object.__setattr__(self, "frame", frame)

    @property
    def n(self) -> int:
        return len(self.frame)

    def spec(self, name: str) -> FeatureSpec:
        for spec in self.specs:
            if spec.name == name:
                return spec
        raise FeatureError(f"unknown feature {name}")

    @property
    def target_name(self) -> str:
        return next(spec.name for spec in self.specs if spec.role == "target")

    @property
    def protected_name(self) -> str:
        return next(spec.name for spec in self.specs if spec.role == "protected")

    @property
    def target(self) -> np.ndarray:
        return self.frame[self.target_name].to_numpy(dtype=int)

    @property
    def protected(self) -> np.ndarray:
        return self.frame[self.protected_name].to_numpy(dtype=int)

    @property
    def feature_specs(self) -> list[FeatureSpec]:
        return [spec for spec in self.specs if spec.role == "feature"]


def derive_gender(personal_status_code: str) -> int:
    """1 for the female personal-status codes, 0 for the male ones."""
    if personal_status_code not in PERSONAL_STATUS_CODES:
        raise IngestionError(f"unknown personal status code {personal_status_code!r}")
    return int(personal_status_code in FEMALE_CODES)


def _read_utf8(path: Path, what: str = "") -> str:
    try:
        raw = path.read_bytes()
    except OSError as e:
        raise IngestionError(f"cannot read {what}{path}: {e}") from e
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError as e:
        line = raw.count(b"\n", 0, e.start) + 1
        raise IngestionError(f"{what}{path} is not valid UTF-8 (byte 0x{raw[e.start]:02x})", line=line) from e


def load_german_credit(path: Path | str) -> Dataset:
    """Parse the whitespace-separated German credit file (20 attributes and the outcome per line)."""
    path = Path(path)
    text = _read_utf8(path)

    specs = german_credit_specs()
    raw_specs = specs[:-1]
    records: list[list[object]] = []
    for line_number, line in enumerate(text.splitlines(), start=1):
        fields = line.split()
        if not fields:
            continue
        if len(fields) != len(raw_specs):
            raise IngestionError(f"expected {len(raw_specs)} fields, found {len(fields)}", line=line_number)
        record: list[object] = []
        for spec, token in zip(raw_specs, fields, strict=True):
            if spec.kind == "categorical":
                code = RAW_RECODES.get(spec.name, {}).get(token, token)
                if code not in spec.levels:
                    raise IngestionError(f"unknown code {token!r} for {spec.name}", line=line_number)
                record.append(code)
            elif spec.role == "target":
                if token not in ("1", "2"):
                    raise IngestionError(f"credit risk must be 1 or 2, found {token!r}", line=line_number)
                record.append(1 if token == "1" else 0)
            else:
                try:
                    record.append(float(token))
                except ValueError as e:
                    raise IngestionError(f"non-numeric value {token!r} for {spec.name}", line=line_number) from e
        record.append(derive_gender(fields[8]))
        records.append(record)

    if not records:
        raise IngestionError("empty file", line=1)

    frame = pd.DataFrame(records, columns=[spec.name for spec in specs])
    dataset = Dataset(specs=tuple(specs), frame=frame)
    logger.info("dataset_loaded", path=str(path), n=dataset.n, protected=int(dataset.protected.sum()))
    return dataset


def load_csv_dataset(csv_path: Path | str, schema_path: Path | str) -> Dataset:
    """Read a headered CSV whose columns are described by a JSON sidecar schema."""
    schema_text = _read_utf8(Path(schema_path), what="schema ")
    try:
        schema = DatasetSchema.model_validate_json(schema_text)
    except ValidationError as e:
        raise SchemaError(f"invalid schema {schema_path}: {e}") from e

    csv_text = _read_utf8(Path(csv_path))
    try:
        frame = pd.read_csv(StringIO(csv_text), dtype=str, keep_default_na=False)
    except pd.errors.ParserError as e:
        raise IngestionError(f"cannot read {csv_path}: {e}") from e
    except pd.errors.EmptyDataError as e:
        raise IngestionError("empty file", line=1) from e

    names = [spec.name for spec in schema.columns]
    missing = [name for name in names if name not in frame.columns]
    if missing:
        raise SchemaError(f"columns {missing} declared in the schema are absent from {csv_path}")
    frame = frame[names].copy()
    for spec in schema.columns:
        empty = frame[spec.name].str.strip() == ""
        if empty.any():
            # header is line 1
            raise IngestionError(f"empty cell in column {spec.name}", line=int(np.flatnonzero(empty.to_numpy())[0]) + 2)
        if spec.kind == "numeric":
            converted = pd.to_numeric(frame[spec.name], errors="coerce")
            if converted.isna().any():
                line = int(np.flatnonzero(converted.isna().to_numpy())[0]) + 2
                raise IngestionError(f"non-numeric value in column {spec.name}", line=line)
            frame[spec.name] = converted

    dataset = Dataset(specs=tuple(schema.columns), frame=frame.reset_index(drop=True))
    logger.info("dataset_loaded", path=str(csv_path), n=dataset.n, protected=int(dataset.protected.sum()))
    return dataset


@dataclass(frozen=True, eq=False)
class EncodedMatrix:
    """Model-ready numeric grid. ``groups`` maps each original feature to its column indices."""

    column_names: tuple[str, ...]
    values: np.ndarray
    groups: dict[str, tuple[int, ...]]
    levels: dict[str, tuple[str, ...]] = field(default_factory=dict)
    protected: str | None = None

    def __post_init__(self) -> None:
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[1] != len(self.column_names):
            raise SchemaError(f"values of shape {values.shape} do not match {len(self.column_names)} columns")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def p(self) -> int:
        return int(self.values.shape[1])

    @property
    def features(self) -> list[str]:
        return list(self.groups)

    def columns_for(self, feature: str) -> tuple[int, ...]:
        if feature not in self.groups:
            raise FeatureError(f"unknown feature {feature}")
        return self.groups[feature]

    def is_categorical(self, feature: str) -> bool:
        self.columns_for(feature)
        return feature in self.levels

    def numeric_columns(self) -> list[int]:
        """Indices of numeric feature columns, the protected column excluded."""
        return [
            self.groups[name][0] for name in self.groups if name not in self.levels and name != self.protected
        ]

    def decode(self, row: int, feature: str) -> str | float:
        columns = self.columns_for(feature)
        if feature not in self.levels:
            return float(self.values[row, columns[0]])
        block = self.values[row, list(columns)]
        return self.levels[feature][int(np.argmax(block))]

    def with_feature_value(self, feature: str, value: str | float) -> "EncodedMatrix":
        """Copy with ``feature`` set to ``value`` on every row.

        A numeric value must be finite and lie within the column's observed [min, max].
        """
        columns = self.columns_for(feature)
        values = self.values.copy()
        if feature in self.levels:
            level = str(value)
            if level not in self.levels[feature]:
                raise FeatureError(f"{value!r} is not a level of {feature}")
            values[:, list(columns)] = 0.0
            values[:, columns[self.levels[feature].index(level)]] = 1.0
        else:
            try:
                number = float(value)
            except (TypeError, ValueError) as e:
                raise FeatureError(f"{value!r} is not a numeric value for {feature}") from e
            if not np.isfinite(number):
                raise FeatureError(f"{value!r} is not a finite value for {feature}")
            if self.n > 0:
                low, high = float(self.values[:, columns[0]].min()), float(self.values[:, columns[0]].max())
                if not low <= number <= high:
                    raise FeatureError(f"{number:g} is outside the observed range [{low:g}, {high:g}] of {feature}")
            values[:, columns[0]] = number
        return EncodedMatrix(self.column_names, values, self.groups, self.levels, self.protected)

    def take(self, rows: Sequence[int] | np.ndarray) -> "EncodedMatrix":
        subset = self.values[np.asarray(rows, dtype=int)]
        return EncodedMatrix(self.column_names, subset, self.groups, self.levels, self.protected)

    def without_feature(self, feature: str) -> "EncodedMatrix":
        dropped = set(self.columns_for(feature))
        keep = [index for index in range(self.p) if index not in dropped]
        remap = {old: new for new, old in enumerate(keep)}
        groups = {
            name: tuple(remap[index] for index in columns) for name, columns in self.groups.items() if name != feature
        }
        levels = {name: codes for name, codes in self.levels.items() if name != feature}
        protected = None if feature == self.protected else self.protected
        return EncodedMatrix(
            tuple(self.column_names[index] for index in keep), self.values[:, keep], groups, levels, protected
        )


def one_hot_encode(d: Dataset, include_protected: bool = False) -> EncodedMatrix:
    """Full one-hot encoding of categorical features; excluded and target columns are dropped."""
    names: list[str] = []
    blocks: list[np.ndarray] = []
    groups: dict[str, tuple[int, ...]] = {}
    levels: dict[str, tuple[str, ...]] = {}

    for spec in d.feature_specs:
        column = d.frame[spec.name]
        start = len(names)
        if spec.kind == "numeric":
            names.append(spec.name)
            blocks.append(column.to_numpy(dtype=float)[:, None])
        else:
            names.extend(f"{spec.name}={level}" for level in spec.levels)
            codes = pd.Categorical(column, categories=list(spec.levels)).codes
            blocks.append(np.eye(len(spec.levels))[codes])
            levels[spec.name] = spec.levels
        groups[spec.name] = tuple(range(start, len(names)))

    protected = None
    if include_protected:
        protected = d.protected_name
        groups[protected] = (len(names),)
        names.append(protected)
        blocks.append(d.protected.astype(float)[:, None])

    values = np.hstack(blocks) if blocks else np.empty((d.n, 0))
    return EncodedMatrix(tuple(names), values, groups, levels, protected)


def standardize(
    m: EncodedMatrix, columns: Sequence[str] | None = None
) -> tuple[EncodedMatrix, StandardizationParams]:
    """Center and scale the selected columns (population standard deviation).

    ``columns`` defaults to the numeric feature columns.
    """
    if columns is None:
        indices = m.numeric_columns()
    else:
        unknown = [name for name in columns if name not in m.column_names]
        if unknown:
            raise FeatureError(f"unknown columns {unknown}")
        indices = [m.column_names.index(name) for name in columns]

    block = m.values[:, indices]
    means = block.mean(axis=0) if indices else np.empty(0)
    stds = block.std(axis=0) if indices else np.empty(0)
    for index, std in zip(indices, stds, strict=True):
        if std == 0.0:
            raise ZeroVarianceError(f"column {m.column_names[index]} has zero variance")

    params = StandardizationParams(columns=indices, means=means.tolist(), stds=stds.tolist())
    values = apply_standardization(m.values, params)
    return EncodedMatrix(m.column_names, values, m.groups, m.levels, m.protected), params


def apply_standardization(values: np.ndarray, params: StandardizationParams) -> np.ndarray:
    out = np.array(values, dtype=float)
    if params.columns:
        out[:, params.columns] = (out[:, params.columns] - np.asarray(params.means)) / np.asarray(params.stds)
    return out


def kfold_indices(n: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffled partition of ``range(n)`` into ``k`` folds whose sizes differ by at most one."""
    if not 2 <= k <= n:
        raise InvalidParameterError(f"fold count {k} must lie in [2, {n}]")
    permutation = rng(seed).permutation(n)
    return [np.sort(fold) for fold in np.array_split(permutation, k)]


def summarize_dataset(d: Dataset) -> DatasetSummary:
    y, protected = d.target, d.protected
    female_defaults = int(((y == 0) & (protected == 1)).sum())
    male_defaults = int(((y == 0) & (protected == 0)).sum())
    n_protected = int(protected.sum())
    n_unprotected = d.n - n_protected

    marginals: dict[str, dict[str, float]] = {}
    for spec in d.specs:
        column = d.frame[spec.name]
        if spec.kind == "categorical":
            counts = column.value_counts()
            marginals[spec.name] = {level: float(counts.get(level, 0)) for level in spec.levels}
        else:
            marginals[spec.name] = {
                "mean": float(column.mean()),
                "std": float(column.std(ddof=0)),
                "min": float(column.min()),
                "max": float(column.max()),
            }

    return DatasetSummary(
        n=d.n,
        protected_count=n_protected,
        unprotected_count=n_unprotected,
        default_count=int((y == 0).sum()),
        protected_default_count=female_defaults,
        default_rate_protected=100.0 * female_defaults / n_protected if n_protected else 0.0,
        default_rate_unprotected=100.0 * male_defaults / n_unprotected if n_unprotected else 0.0,
        marginals=marginals,
    )
