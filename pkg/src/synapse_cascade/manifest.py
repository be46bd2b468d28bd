"""Run manifests: every CLI output is accompanied by a JSON record of the
fully resolved configuration, the expanded seed list, the tool version, and
the produced files, sufficient to replay the run bit-identically."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .errors import IngestionError


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int | None
    seeds: list[int]
    version: str
    outputs: list[str]
    duration_s: float = 0.0
    threads: int = 1

    def write(self, path) -> None:
        path = Path(path)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(json.dumps(asdict(self), indent=2, sort_keys=True) + "\n")
        os.replace(tmp, path)


def load_manifest(path) -> RunManifest:
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except OSError as exc:
        raise IngestionError(f"cannot read manifest {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestionError(f"malformed manifest {path}: {exc}") from exc
    try:
        return RunManifest(**raw)
    except TypeError as exc:
        raise IngestionError(f"manifest {path} has unexpected fields: {exc}") from exc
