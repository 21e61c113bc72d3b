import json
import os
import tempfile
from dataclasses import dataclass, field


class CheckpointError(Exception):
    pass


class ConfigMismatchError(CheckpointError):
    pass


@dataclass
class Checkpoint:
    config_hash: str
    m: int | None = None
    next_x: int | None = None
    completed_m: list = field(default_factory=list)
    block_index: int = 0
    report_offset: int = 0
    kills: dict = field(default_factory=dict)
    unexpected: bool = False
    done: bool = False

    @property
    def position(self):
        """(m, next_x, next_block_index) for iter_blocks, or None at the start."""
        if self.m is None:
            return None
        return self.m, self.next_x, self.block_index

    def to_json(self) -> dict:
        return {
            "config_hash": self.config_hash,
            "m": self.m,
            "next_x": None if self.next_x is None else str(self.next_x),
            "completed_m": list(self.completed_m),
            "block_index": self.block_index,
            "report_offset": self.report_offset,
            "kills": {str(p): c for p, c in sorted(self.kills.items())},
            "unexpected": self.unexpected,
            "done": self.done,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Checkpoint":
        try:
            return cls(
                config_hash=obj["config_hash"],
                m=obj["m"],
                next_x=None if obj["next_x"] is None else int(obj["next_x"]),
                completed_m=list(obj["completed_m"]),
                block_index=int(obj.get("block_index", 0)),
                report_offset=int(obj.get("report_offset", 0)),
                kills={int(p): int(c) for p, c in obj.get("kills", {}).items()},
                unexpected=bool(obj.get("unexpected", False)),
                done=bool(obj.get("done", False)),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CheckpointError(f"malformed checkpoint: {exc}") from exc


def save_checkpoint(ck: Checkpoint, path) -> None:
    """Write-temp-then-rename so a crash never leaves a half-written checkpoint."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(prefix=".ck-", dir=d)
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(ck.to_json(), fh, sort_keys=True)
            fh.write("\n")
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_checkpoint(path, config_hash: str) -> Checkpoint:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not valid JSON: {exc}") from exc
    ck = Checkpoint.from_json(obj)
    if ck.config_hash != config_hash:
        raise ConfigMismatchError(
            f"{path}: checkpoint was written for config {ck.config_hash}, current config is {config_hash}"
        )
    return ck
