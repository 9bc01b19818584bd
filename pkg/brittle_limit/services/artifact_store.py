import os
import json
import logging
from typing import Any, Dict, Optional

import pandas as pd

from brittle_limit.config import Config

logger = logging.getLogger(__name__)


class ArtifactStore:
    """CSV and JSON artifacts under one output directory, addressed by key."""

    def __init__(self, base_path: Optional[str] = None, float_format: Optional[str] = None):
        self.base_path = base_path or Config.OUT_DIR
        self.float_format = float_format or Config.FLOAT_FORMAT
        self._ensure_base_directory()

    def _ensure_base_directory(self):
        try:
            os.makedirs(self.base_path, exist_ok=True)
            logger.debug(f"Output directory ensured: {self.base_path}")
        except Exception as e:
            logger.error(f"Failed to create output directory {self.base_path}: {e}")
            raise

    def get_file_path(self, file_key: str) -> str:
        return os.path.join(self.base_path, file_key)

    def _prepare(self, file_key: str) -> str:
        path = self.get_file_path(file_key)
        os.makedirs(os.path.dirname(path) or self.base_path, exist_ok=True)
        return path

    def write_csv(self, frame: pd.DataFrame, file_key: str) -> str:
        """Write ``frame`` with 17 significant digits and a header row."""
        try:
            path = self._prepare(file_key)
            frame.to_csv(path, index=False, float_format=self.float_format, lineterminator='\n')
            logger.info(f"Wrote {len(frame)} rows to {path}")
            return path
        except Exception as e:
            logger.error(f"Failed to write CSV {file_key}: {e}")
            raise

    def read_csv(self, file_key: str) -> pd.DataFrame:
        path = self.get_file_path(file_key)
        if not os.path.exists(path):
            raise FileNotFoundError(f"Artifact not found: {path}")
        return pd.read_csv(path, float_precision='round_trip')

    def write_json(self, payload: Dict[str, Any], file_key: str) -> str:
        try:
            path = self._prepare(file_key)
            with open(path, 'w', encoding='utf-8') as f:
                json.dump(payload, f, indent=2, sort_keys=True, default=_jsonable)
                f.write('\n')
            logger.info(f"Wrote {path}")
            return path
        except Exception as e:
            logger.error(f"Failed to write JSON {file_key}: {e}")
            raise

    def read_json(self, file_key: str) -> Dict[str, Any]:
        with open(self.get_file_path(file_key), encoding='utf-8') as f:
            return json.load(f)


def _jsonable(value):
    if hasattr(value, 'to_dict'):
        return value.to_dict()
    if hasattr(value, 'tolist'):
        return value.tolist()
    if hasattr(value, 'value'):
        return value.value
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
