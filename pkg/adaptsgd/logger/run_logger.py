"""
Logger for adaptsgd runs.

Writes the run metadata and every completed record (ensemble, study row, check, bound
evaluation) to a JSON-lines file for analysis and debugging. Log files carry timestamps and
are not part of the reproducible CSV output.
"""

import json
import os
import uuid
from datetime import datetime
from typing import Any

from adaptsgd.core.types import RunMetadata, _serialize_value


class RunLogger:
    """Logger that writes run records to a JSON-lines file."""

    def __init__(self, log_dir: str, file_name: str = "adaptsgd"):
        self.log_dir = log_dir
        os.makedirs(log_dir, exist_ok=True)

        timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
        run_id = str(uuid.uuid4())[:8]
        self.log_file_path = os.path.join(log_dir, f"{file_name}_{timestamp}_{run_id}.jsonl")

        self._record_count = 0
        self._metadata_logged = False

    def _write(self, entry: dict[str, Any]) -> None:
        with open(self.log_file_path, "a") as f:
            json.dump(entry, f)
            f.write("\n")

    def log_metadata(self, metadata: RunMetadata):
        """Log run metadata as the first entry in the file."""
        if self._metadata_logged:
            return

        self._write(
            {
                "type": "metadata",
                "timestamp": datetime.now().isoformat(),
                **metadata.to_dict(),
            }
        )
        self._metadata_logged = True

    def log(self, record: Any):
        """Log any record exposing to_dict()."""
        self._record_count += 1
        self._write(
            {
                "type": "record",
                "record": self._record_count,
                "kind": type(record).__name__,
                "timestamp": datetime.now().isoformat(),
                **_serialize_value(record.to_dict()),
            }
        )

    @property
    def record_count(self) -> int:
        return self._record_count
