"""Utility functions for wdp-triage."""

from wdp_triage.utils.io import (
    DatasetReader,
    directory_checksum,
    read_csv,
    read_instance,
    read_json,
    write_csv,
    write_dataset,
    write_json,
)
from wdp_triage.utils.parallel import parallel_map

__all__ = [
    "DatasetReader",
    "directory_checksum",
    "parallel_map",
    "read_csv",
    "read_instance",
    "read_json",
    "write_csv",
    "write_dataset",
    "write_json",
]
