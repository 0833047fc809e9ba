"""Tests for utility functions."""

from pathlib import Path

import pytest

from wdp_triage.errors import DatasetError, InvalidInstanceError
from wdp_triage.generators import TrapConfig, gen_trap
from wdp_triage.generators.base import HARD, LabeledInstance
from wdp_triage.models import WdpInstance
from wdp_triage.utils.io import (
    DatasetReader,
    directory_checksum,
    label_path,
    read_csv,
    read_instance,
    read_json,
    write_csv,
    write_dataset,
    write_json,
)
from wdp_triage.utils.parallel import parallel_map


@pytest.fixture
def labeled_trap() -> LabeledInstance:
    """A certified trap with solver labels attached."""
    instance, certificate = gen_trap(TrapConfig(k=3, v_w=100.0, v_f=40.0))
    item = LabeledInstance(instance=instance, tag=HARD, certificate=certificate)
    return item.with_labels(
        greedy_gap=1 / 6, optimal_welfare=120.0, greedy_welfare=100.0, proven_optimal=True
    )


class TestJsonAndCsv:
    """Tests for the JSON and CSV helpers."""

    def test_write_json_creates_parents(self, tmp_path: Path) -> None:
        """Test parent directories are created and a newline ends the file."""
        path = write_json({"a": 1}, tmp_path / "x" / "y.json")
        assert path.read_text(encoding="utf-8") == '{\n  "a": 1\n}\n'
        assert read_json(path) == {"a": 1}

    def test_read_json_errors(self, tmp_path: Path) -> None:
        """Test missing and malformed files raise DatasetError."""
        with pytest.raises(DatasetError, match="File not found"):
            read_json(tmp_path / "missing.json")
        bad = tmp_path / "bad.json"
        bad.write_text("[1,", encoding="utf-8")
        with pytest.raises(DatasetError, match="Could not parse"):
            read_json(bad)

    def test_csv(self, tmp_path: Path) -> None:
        """Test rows come back as dicts keyed by header."""
        path = write_csv(tmp_path / "t.csv", ["a", "b"], [[1, "x"], [2, "y"]])
        assert read_csv(path) == [{"a": "1", "b": "x"}, {"a": "2", "b": "y"}]

    def test_empty_csv(self, tmp_path: Path) -> None:
        """Test a file with no header raises."""
        path = tmp_path / "empty.csv"
        path.write_text("", encoding="utf-8")
        with pytest.raises(DatasetError, match="empty CSV"):
            read_csv(path)


class TestInstanceFiles:
    """Tests for instance files and label sidecars."""

    def test_label_path(self) -> None:
        """Test the sidecar sits next to the instance."""
        assert label_path(Path("data/a.json")) == Path("data/a.label.json")

    def test_read_instance_not_object(self, tmp_path: Path) -> None:
        """Test a JSON list is not an instance."""
        path = write_json([1, 2], tmp_path / "list.json")
        with pytest.raises(InvalidInstanceError):
            read_instance(path)

    def test_dataset_round_trip(self, tmp_path: Path, labeled_trap: LabeledInstance) -> None:
        """Test written instances and labels read back."""
        paths = write_dataset([labeled_trap], tmp_path)
        assert paths == [tmp_path / "instances" / f"{labeled_trap.name}.json"]
        assert label_path(paths[0]).exists()

        loaded = DatasetReader().read_directory(tmp_path)
        assert len(loaded) == 1
        assert loaded[0].instance == labeled_trap.instance
        assert loaded[0].tag == HARD
        assert loaded[0].optimal_welfare == 120.0
        assert loaded[0].proven_optimal is True
        assert loaded[0].certificate == labeled_trap.certificate

    def test_instance_without_sidecar(
        self, tmp_path: Path, trap_instance: WdpInstance
    ) -> None:
        """Test an instance file alone loads unlabeled."""
        write_json(trap_instance.to_dict(), tmp_path / "trap.json")
        loaded = DatasetReader().read_directory(tmp_path)
        assert len(loaded) == 1
        assert loaded[0].tag is None
        assert not loaded[0].is_labeled


class TestDatasetReader:
    """Tests for DatasetReader error collection."""

    def test_collects_errors(self, tmp_path: Path, trap_instance: WdpInstance) -> None:
        """Test unreadable files are skipped and reported."""
        write_json(trap_instance.to_dict(), tmp_path / "a.json")
        (tmp_path / "b.json").write_text("{broken", encoding="utf-8")
        write_json({"items": []}, tmp_path / "c.json")

        reader = DatasetReader()
        loaded = reader.read_directory(tmp_path)

        assert [item.name for item in loaded] == [trap_instance.name]
        assert [path.name for path, _ in reader.errors] == ["b.json", "c.json"]

    def test_bad_sidecar(self, tmp_path: Path, trap_instance: WdpInstance) -> None:
        """Test a sidecar that is not an object is reported."""
        path = write_json(trap_instance.to_dict(), tmp_path / "a.json")
        write_json([1], label_path(path))

        reader = DatasetReader()
        assert reader.read_files([path]) == []
        assert "sidecar" in reader.errors[0][1]

    def test_not_a_directory(self, tmp_path: Path) -> None:
        """Test a missing directory raises."""
        with pytest.raises(DatasetError, match="Not a dataset directory"):
            DatasetReader().read_directory(tmp_path / "nowhere")

    def test_errors_reset_per_read(self, tmp_path: Path) -> None:
        """Test each read starts with an empty error list."""
        (tmp_path / "b.json").write_text("{broken", encoding="utf-8")
        reader = DatasetReader()
        reader.read_directory(tmp_path)
        assert len(reader.errors) == 1
        reader.read_files([])
        assert reader.errors == []


class TestDirectoryChecksum:
    """Tests for directory_checksum."""

    def test_ignores_manifest(self, tmp_path: Path) -> None:
        """Test the manifest does not affect the checksum."""
        write_json({"x": 1}, tmp_path / "a.json")
        before = directory_checksum(tmp_path)
        write_json({"wall_time": 3.2}, tmp_path / "manifest.json")
        assert directory_checksum(tmp_path) == before

    def test_detects_changes(self, tmp_path: Path) -> None:
        """Test content and file names both count."""
        write_json({"x": 1}, tmp_path / "a.json")
        before = directory_checksum(tmp_path)
        write_json({"x": 2}, tmp_path / "a.json")
        changed = directory_checksum(tmp_path)
        assert changed != before
        (tmp_path / "a.json").rename(tmp_path / "b.json")
        assert directory_checksum(tmp_path) != changed


class TestParallelMap:
    """Tests for parallel_map."""

    def test_sequential(self) -> None:
        """Test one worker maps in order."""
        assert parallel_map(str, [3, 1, 2]) == ["3", "1", "2"]

    def test_pool_keeps_order(self) -> None:
        """Test several workers return results in input order."""
        assert parallel_map(abs, [-3, 1, -2, 5, -4], workers=2) == [3, 1, 2, 5, 4]

    def test_empty(self) -> None:
        """Test an empty input gives an empty list."""
        assert parallel_map(abs, [], workers=4) == []
