"""Training run directories: config snapshot, per-epoch CSV and checkpoints."""

import csv
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml

from config.logging_config import setup_logger
from constitutive.base import ConstitutiveModel
from constitutive.checkpoint import save_checkpoint

LOG = setup_logger(__name__)

HISTORY_COLUMNS = ["epoch", "loss", "displacement_term", "reaction_term", "step", "rejections",
                   "grad_norm", "newton_iters"]


class RunDirectory:
    """
    Owns one output directory. Rows are flushed as they are written so an interrupted run
    keeps its history.
    """

    def __init__(self, root: Union[str, Path], config: Optional[Dict[str, Any]] = None):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        (self.root / "checkpoints").mkdir(exist_ok=True)
        if config is not None:
            self.write_config(config)
        self.history_path = self.root / "history.csv"
        with open(self.history_path, "w", newline="", encoding="utf-8") as f:
            csv.writer(f).writerow(HISTORY_COLUMNS)

    def write_config(self, config: Dict[str, Any]):
        with open(self.root / "config.yaml", "w", encoding="utf-8") as f:
            yaml.safe_dump(config, f, sort_keys=True)

    def append(self, record):
        row = [record.epoch, f"{record.loss:.17g}", f"{record.displacement_term:.17g}",
               f"{record.reaction_term:.17g}", f"{record.step:.17g}", record.rejections,
               f"{record.grad_norm:.17g}", ";".join(str(n) for n in record.newton_iters)]
        with open(self.history_path, "a", newline="", encoding="utf-8") as f:
            csv.writer(f).writerow(row)

    def checkpoint(self, model: ConstitutiveModel, epoch: int, final: bool = False, **metadata) -> Path:
        name = "final.json" if final else f"epoch_{epoch:05d}.json"
        path = self.root / "checkpoints" / name
        save_checkpoint(model, path, {"epoch": str(epoch), **{k: str(v) for k, v in metadata.items()}})
        LOG.debug(f"Checkpoint written to {path}")
        return path
