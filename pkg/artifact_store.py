"""
Artifact store for solver runs with local file storage
"""
from typing import Any, Dict, List, Optional, Sequence
from datetime import datetime
import json
import logging
import os

import numpy as np

from rendezvous import __version__

logger = logging.getLogger(__name__)

MANIFEST = "manifest.json"
SWEEP_SUMMARY = "sweep_summary.csv"
SWEEP_COLUMNS = ("k", "T_pred", "T_achieved", "iterations", "worst_residual")


class ArtifactStore:
    """Run directories holding trajectory CSVs, solver reports and manifests"""

    def __init__(self, output_dir: str = "runs"):
        self.output_dir = output_dir
        os.makedirs(self.output_dir, exist_ok=True)
        logger.info("SUCCESS: ArtifactStore initialized at %s", os.path.abspath(self.output_dir))

    def run_dir(self, name: str) -> str:
        """Directory for one run, created on demand"""
        path = os.path.join(self.output_dir, name)
        os.makedirs(path, exist_ok=True)
        return path

    def run_dir_if_exists(self, name: str) -> Optional[str]:
        """Existing run directory, None for unknown names or names escaping the output directory"""
        path = os.path.join(self.output_dir, name)
        if os.path.dirname(os.path.normpath(path)) != os.path.normpath(self.output_dir):
            return None
        return path if os.path.isdir(path) else None

    @staticmethod
    def run_name(scenario: str, k_aggr: float) -> str:
        return f"{scenario}_k{k_aggr:.2f}"

    def write_csv(self, directory: str, filename: str, header: Sequence[str], rows: np.ndarray) -> str:
        """Write a numeric table with a mandatory header row"""
        path = os.path.join(directory, filename)
        np.savetxt(path, rows, delimiter=",", header=",".join(header), comments="", fmt="%.10g")
        return path

    def write_json(self, directory: str, filename: str, data: Any) -> str:
        """Save JSON, keeping the previous version as .backup until the write succeeds"""
        path = os.path.join(directory, filename)
        backup_file = f"{path}.backup"
        try:
            if os.path.exists(path):
                os.replace(path, backup_file)
            with open(path, "w", encoding="utf-8") as f:
                json.dump(data, f, indent=2, ensure_ascii=False)
            if os.path.exists(backup_file):
                os.remove(backup_file)
        except Exception as e:
            logger.error("ERROR: Could not save %s: %s", path, e)
            if os.path.exists(backup_file):
                os.replace(backup_file, path)
            raise
        return path

    def write_manifest(self, directory: str, scenario: Dict[str, Any], summary: Dict[str, Any],
                       files: List[str]) -> str:
        """Manifest of a finished run; every listed file must exist"""
        missing = [f for f in files if not os.path.exists(os.path.join(directory, f))]
        if missing:
            raise FileNotFoundError(f"manifest references missing files: {', '.join(missing)}")
        manifest = {
            "tool_version": __version__,
            "timestamp": datetime.now().isoformat(),
            "scenario": scenario,
            "files": list(files) + [MANIFEST],
            "summary": summary,
        }
        return self.write_json(directory, MANIFEST, manifest)

    def write_sweep_summary(self, rows: List[Dict[str, Any]], directory: Optional[str] = None) -> str:
        """sweep_summary.csv: one line per k, empty fields for failed solves"""
        path = os.path.join(directory or self.output_dir, SWEEP_SUMMARY)
        with open(path, "w", encoding="utf-8") as f:
            f.write(",".join(SWEEP_COLUMNS) + "\n")
            for row in rows:
                f.write(",".join("" if row.get(c) is None else f"{row[c]:.10g}" for c in SWEEP_COLUMNS) + "\n")
        return path

    def load_manifest(self, directory: str) -> Optional[Dict[str, Any]]:
        path = os.path.join(directory, MANIFEST)
        try:
            with open(path, "r", encoding="utf-8") as f:
                return json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            logger.warning("WARNING: Could not read manifest %s: %s", path, e)
            return None

    def list_runs(self) -> List[Dict[str, Any]]:
        """Summaries of every run directory holding a manifest"""
        runs = []
        for name in sorted(os.listdir(self.output_dir)):
            directory = os.path.join(self.output_dir, name)
            if not os.path.isfile(os.path.join(directory, MANIFEST)):
                continue
            manifest = self.load_manifest(directory)
            if manifest:
                runs.append({"run": name, "timestamp": manifest.get("timestamp"),
                             "summary": manifest.get("summary", {})})
        return runs

    def get_data_file_info(self, directory: Optional[str] = None) -> Dict[str, Any]:
        """Information about the files of a run directory (or the output root)"""
        directory = directory or self.output_dir
        files = {}
        for name in sorted(os.listdir(directory)):
            path = os.path.join(directory, name)
            if os.path.isfile(path):
                stat = os.stat(path)
                files[name] = {"size_bytes": stat.st_size,
                               "last_modified": datetime.fromtimestamp(stat.st_mtime).isoformat()}
        return {"directory": os.path.abspath(directory), "files": files}
