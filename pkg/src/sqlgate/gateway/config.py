"""Gate service configuration, loaded from `key=value` lines."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from sqlgate.errors import ConfigError

DEFAULT_MAX_FRAME = 1 << 20  # 1 MiB


@dataclass(frozen=True)
class GateConfig:
    mode: str  # "TRAIN" | "ENFORCE"
    listen_addr: str = "127.0.0.1:7632"
    dal_path: str = ""
    profile_path: str = ""
    training_log_path: str = ""
    untagged_policy: str = "block"  # "allow" | "block"
    parsefail_policy: str = "block"
    max_frame: int = DEFAULT_MAX_FRAME

    def __post_init__(self):
        if self.mode not in ("TRAIN", "ENFORCE"):
            raise ConfigError(f"mode must be TRAIN or ENFORCE, not {self.mode!r}")
        if self.mode == "ENFORCE" and not self.profile_path:
            raise ConfigError("ENFORCE mode requires profile_path")
        if self.mode == "TRAIN" and not self.training_log_path:
            raise ConfigError("TRAIN mode requires training_log_path")
        for policy in (self.untagged_policy, self.parsefail_policy):
            if policy not in ("allow", "block"):
                raise ConfigError(f"policy must be allow or block, not {policy!r}")
        if self.max_frame <= 0:
            raise ConfigError("max_frame must be positive")

    @property
    def host(self) -> str:
        return self.listen_addr.rsplit(":", 1)[0]

    @property
    def port(self) -> int:
        try:
            return int(self.listen_addr.rsplit(":", 1)[1])
        except (IndexError, ValueError) as exc:
            raise ConfigError(f"bad listen_addr {self.listen_addr!r}") from exc


def parse_config(text: str) -> GateConfig:
    values: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        values[key.strip()] = value.strip()
    known = {
        "mode", "listen_addr", "dal_path", "profile_path",
        "training_log_path", "untagged_policy", "parsefail_policy", "max_frame",
    }
    unknown = set(values) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    if "mode" not in values:
        raise ConfigError("config is missing mode")
    if "max_frame" in values:
        try:
            values["max_frame"] = int(values["max_frame"])  # type: ignore[assignment]
        except ValueError as exc:
            raise ConfigError("max_frame must be an integer") from exc
    return GateConfig(**values)  # type: ignore[arg-type]


def load_config(path: str | Path) -> GateConfig:
    return parse_config(Path(path).read_text())
