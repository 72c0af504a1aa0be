"""
Report writing.

Reports are written with sorted keys and fixed indentation so identical
inputs produce byte-identical files. An optional JSONL check log records
each verification check as it completes; failures to write it are logged
and swallowed.
"""

import json
import logging
from datetime import datetime
from pathlib import Path
from typing import Any, Optional, Union

from metastable import __version__

logger = logging.getLogger(__name__)


def tool_version() -> str:
    return __version__


def dumps(document: Any) -> str:
    """Deterministic JSON text with trailing newline."""
    return json.dumps(document, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def write_json(document: Any, path: Union[str, Path]) -> Path:
    """Write a JSON document deterministically, creating parent directories."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(document), encoding="utf-8")
    logger.info(f"Wrote {path}")
    return path


def append_check_log(record: dict[str, Any], log_path: Optional[Union[str, Path]]) -> None:
    """
    Append one check record to a JSONL log.

    Never raises: a broken log must not abort a verification run.
    """
    if log_path is None:
        return
    try:
        entry = dict(record)
        entry["timestamp"] = datetime.now().isoformat(timespec="seconds")
        entry["version"] = tool_version()
        path = Path(log_path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "a", encoding="utf-8") as f:
            f.write(json.dumps(entry, sort_keys=True, ensure_ascii=False, default=str) + "\n")
        logger.debug(f"Check logged to {path}")
    except Exception as e:
        logger.warning(f"Failed to log check: {e}")
