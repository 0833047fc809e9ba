"""Feature tables with greedy-gap labels."""

import hashlib
import math
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from wdp_triage.errors import DatasetError
from wdp_triage.features import FEATURE_NAMES, N_FEATURES, FeatureVector, feature_matrix
from wdp_triage.generators.base import LabeledInstance
from wdp_triage.utils.io import read_csv, write_csv

ID_COLUMNS = ("name", "seed", "tag")
LABEL_COLUMN = "greedy_gap"


@dataclass(frozen=True, eq=False)
class HardnessDataset:
    """Rows of (instance id, tag, 20 features, optional gap label)."""

    names: tuple[str, ...]
    seeds: tuple[int, ...]
    tags: tuple[str | None, ...]
    features: np.ndarray
    gaps: np.ndarray | None = None

    def __post_init__(self) -> None:
        rows = len(self.names)
        if self.features.shape != (rows, N_FEATURES):
            raise DatasetError(
                f"feature matrix has shape {self.features.shape}, expected ({rows}, {N_FEATURES})"
            )
        if len(self.seeds) != rows or len(self.tags) != rows:
            raise DatasetError("names, seeds and tags must have one entry per row")
        if self.gaps is not None and self.gaps.shape != (rows,):
            raise DatasetError(f"gap vector has shape {self.gaps.shape}, expected ({rows},)")

    def __len__(self) -> int:
        return len(self.names)

    @property
    def has_labels(self) -> bool:
        return self.gaps is not None

    def labels(self) -> np.ndarray:
        """
        The gap vector.

        Raises:
            DatasetError: If the dataset is unlabeled
        """
        if self.gaps is None:
            raise DatasetError("dataset has no greedy_gap labels")
        return self.gaps

    @classmethod
    def from_labeled(
        cls, labeled: Sequence[LabeledInstance], vectors: Sequence[FeatureVector]
    ) -> "HardnessDataset":
        """Pair labeled instances with their feature vectors.

        Gaps are attached only when every instance carries one.
        """
        if len(labeled) != len(vectors):
            raise DatasetError(f"{len(labeled)} instances but {len(vectors)} feature vectors")
        gaps = None
        if labeled and all(item.greedy_gap is not None for item in labeled):
            gaps = np.array([item.greedy_gap for item in labeled], dtype=np.float64)
        return cls(
            names=tuple(item.name for item in labeled),
            seeds=tuple(item.instance.seed for item in labeled),
            tags=tuple(item.tag for item in labeled),
            features=feature_matrix(vectors),
            gaps=gaps,
        )

    def subset(self, rows: Sequence[int]) -> "HardnessDataset":
        """Rows at the given positions, in the given order."""
        index = np.asarray(rows, dtype=np.int64)
        return HardnessDataset(
            names=tuple(self.names[i] for i in rows),
            seeds=tuple(self.seeds[i] for i in rows),
            tags=tuple(self.tags[i] for i in rows),
            features=self.features[index].reshape(len(index), N_FEATURES),
            gaps=None if self.gaps is None else self.gaps[index],
        )

    def with_zeroed(self, columns: Sequence[int]) -> "HardnessDataset":
        """Copy with the given feature columns set to 0."""
        features = self.features.copy()
        features[:, list(columns)] = 0.0
        return HardnessDataset(self.names, self.seeds, self.tags, features, self.gaps)

    def write_csv(self, output_path: Path) -> Path:
        """
        Write the features CSV.

        Columns: name, seed, tag, the 20 feature names, then greedy_gap when
        labels exist.
        """
        header = [*ID_COLUMNS, *FEATURE_NAMES]
        if self.gaps is not None:
            header.append(LABEL_COLUMN)

        def rows() -> list[list[object]]:
            out: list[list[object]] = []
            for i, name in enumerate(self.names):
                row: list[object] = [name, self.seeds[i], self.tags[i] or ""]
                row.extend(repr(float(x)) for x in self.features[i])
                if self.gaps is not None:
                    row.append(repr(float(self.gaps[i])))
                out.append(row)
            return out

        return write_csv(output_path, header, rows())

    @classmethod
    def read_csv(cls, path: Path) -> "HardnessDataset":
        """
        Load a features CSV written by ``write_csv``.

        Raises:
            DatasetError: If feature columns are missing or a value is not numeric
        """
        records = read_csv(path)
        if not records:
            raise DatasetError(f"{path}: no rows")
        missing = [c for c in FEATURE_NAMES if c not in records[0]]
        if missing:
            raise DatasetError(f"{path}: missing feature columns {missing}")
        labeled = LABEL_COLUMN in records[0] and all(r[LABEL_COLUMN] != "" for r in records)

        try:
            features = np.array(
                [[float(r[c]) for c in FEATURE_NAMES] for r in records], dtype=np.float64
            )
            gaps = (
                np.array([float(r[LABEL_COLUMN]) for r in records], dtype=np.float64)
                if labeled
                else None
            )
            seeds = tuple(int(r.get("seed") or 0) for r in records)
        except ValueError as e:
            raise DatasetError(f"{path}: non-numeric value: {e}") from e

        return cls(
            names=tuple(r.get("name") or f"row{i}" for i, r in enumerate(records)),
            seeds=seeds,
            tags=tuple(r.get("tag") or None for r in records),
            features=features,
            gaps=gaps,
        )


def split_key(name: str, seed: int) -> str:
    """Stable hash ordering rows for the train/test split."""
    return hashlib.sha256(f"{name}:{seed}".encode()).hexdigest()


def train_test_split(
    dataset: HardnessDataset, test_fraction: float = 0.2
) -> tuple[HardnessDataset, HardnessDataset]:
    """
    Hold out the last ``test_fraction`` of rows ordered by ``split_key``.

    The split depends only on row identities, so every training seed
    evaluates on the same held-out rows. Both halves keep dataset order.

    Raises:
        DatasetError: If the fraction is outside (0, 1) or a half would be empty
    """
    if not 0.0 < test_fraction < 1.0:
        raise DatasetError(f"test_fraction must be in (0, 1), got {test_fraction}")
    n = len(dataset)
    n_test = int(math.floor(test_fraction * n + 0.5))
    if n_test < 1 or n_test >= n:
        raise DatasetError(f"cannot hold out {test_fraction:.0%} of {n} rows")

    ranked = sorted(range(n), key=lambda i: split_key(dataset.names[i], dataset.seeds[i]))
    held_out = set(ranked[n - n_test :])
    train_rows = [i for i in range(n) if i not in held_out]
    test_rows = [i for i in range(n) if i in held_out]
    return dataset.subset(train_rows), dataset.subset(test_rows)
