"""File helpers for instances, label sidecars, CSV tables and JSON documents."""

import csv
import hashlib
import json
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

from wdp_triage.errors import DatasetError, InvalidInstanceError
from wdp_triage.generators.base import LabeledInstance
from wdp_triage.models import WdpInstance

INSTANCES_DIR = "instances"
LABEL_SUFFIX = ".label.json"
MANIFEST_FILENAME = "manifest.json"


def write_json(data: Any, path: Path) -> Path:
    """Write a JSON document (indent 2, trailing newline), creating parent dirs."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2)
        f.write("\n")
    return path


def read_json(path: Path) -> Any:
    """
    Read a JSON document.

    Raises:
        DatasetError: If the file is missing or not valid JSON
    """
    if not path.exists():
        raise DatasetError(f"File not found: {path}")
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise DatasetError(f"Could not parse JSON in {path}: {e}") from e


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a CSV table with a header row."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def read_csv(path: Path) -> list[dict[str, str]]:
    """
    Read a CSV table into one dict per row.

    Raises:
        DatasetError: If the file is missing or has no header
    """
    if not path.exists():
        raise DatasetError(f"File not found: {path}")
    with open(path, newline="", encoding="utf-8") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None:
            raise DatasetError(f"{path}: empty CSV")
        return list(reader)


def read_instance(path: Path) -> WdpInstance:
    """
    Load one instance JSON file.

    Raises:
        DatasetError: If the file cannot be read
        InvalidInstanceError: If the document is malformed
    """
    data = read_json(path)
    if not isinstance(data, dict):
        raise InvalidInstanceError(f"{path}: instance document must be a JSON object")
    return WdpInstance.from_dict(data)


def label_path(instance_path: Path) -> Path:
    """Sidecar path for an instance file (``x.json`` -> ``x.label.json``)."""
    return instance_path.with_name(instance_path.stem + LABEL_SUFFIX)


def write_dataset(labeled: Sequence[LabeledInstance], out_dir: Path) -> list[Path]:
    """
    Write instances and label sidecars under ``out_dir/instances``.

    Returns:
        Paths of the written instance files, in input order
    """
    instances_dir = out_dir / INSTANCES_DIR
    instances_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for item in labeled:
        path = instances_dir / f"{item.name}.json"
        write_json(item.instance.to_dict(), path)
        write_json(item.label_dict(), label_path(path))
        written.append(path)
    return written


class DatasetReader:
    """
    Loads instance files (plus optional label sidecars) and collects failures.

    Usage:
        reader = DatasetReader()
        labeled = reader.read_directory(Path("data"))
        for path, message in reader.errors:
            ...
    """

    def __init__(self) -> None:
        self._errors: list[tuple[Path, str]] = []

    @property
    def errors(self) -> list[tuple[Path, str]]:
        """Get list of (filepath, error_message) for unreadable files."""
        return self._errors.copy()

    def read_file(self, path: Path) -> LabeledInstance | None:
        """
        Read one instance and its sidecar, if present.

        Returns:
            The labeled instance, or None when the file failed (see ``errors``)
        """
        try:
            instance = read_instance(path)
            sidecar = label_path(path)
            label = read_json(sidecar) if sidecar.exists() else None
        except (DatasetError, InvalidInstanceError) as e:
            self._errors.append((path, e.message))
            return None
        if label is not None and not isinstance(label, dict):
            self._errors.append((path, "label sidecar must be a JSON object"))
            return None
        return LabeledInstance.from_documents(instance, label)

    def read_files(self, paths: Iterable[Path]) -> list[LabeledInstance]:
        """Read several instance files in the given order."""
        self._errors = []
        out: list[LabeledInstance] = []
        for path in paths:
            item = self.read_file(path)
            if item is not None:
                out.append(item)
        return out

    def read_directory(self, directory: Path) -> list[LabeledInstance]:
        """
        Read every instance in a dataset directory, sorted by file name.

        Accepts either the dataset root (with an ``instances`` folder) or
        the folder of instance files itself.
        """
        root = directory / INSTANCES_DIR if (directory / INSTANCES_DIR).is_dir() else directory
        if not root.is_dir():
            raise DatasetError(f"Not a dataset directory: {directory}")
        paths = sorted(
            p for p in root.glob("*.json") if not p.name.endswith(LABEL_SUFFIX)
        )
        return self.read_files(paths)


def directory_checksum(directory: Path, exclude: Sequence[str] = (MANIFEST_FILENAME,)) -> str:
    """SHA-256 over relative paths and bytes of every file, skipping ``exclude`` names."""
    digest = hashlib.sha256()
    for path in sorted(p for p in directory.rglob("*") if p.is_file()):
        if path.name in exclude:
            continue
        digest.update(path.relative_to(directory).as_posix().encode("utf-8"))
        digest.update(b"\0")
        digest.update(path.read_bytes())
    return digest.hexdigest()
