"""Run manifests: what was run, on which inputs, producing which outputs"""
import hashlib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Iterable, Optional

from ..models.schema import RunManifest

CHUNK_SIZE = 1 << 20


def file_digest(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(CHUNK_SIZE), b""):
            digest.update(chunk)
    return f"sha256:{digest.hexdigest()}"


def digests(paths: Iterable[Path]) -> Dict[str, str]:
    """Digest per file name; directories contribute each file they contain"""
    out: Dict[str, str] = {}
    for path in paths:
        path = Path(path)
        if path.is_dir():
            for child in sorted(p for p in path.rglob("*") if p.is_file()):
                out[str(child.relative_to(path.parent))] = file_digest(child)
        elif path.exists():
            out[path.name] = file_digest(path)
    return dict(sorted(out.items()))


def tool_version() -> str:
    from ... import __version__

    return __version__


def start_manifest(command: str, config: Dict[str, Any], seed: Optional[int], inputs: Iterable[Path]) -> RunManifest:
    return RunManifest(
        command=command,
        tool_version=tool_version(),
        seed=seed,
        config=config,
        input_digests=digests(inputs),
        started_at=datetime.now(timezone.utc).replace(microsecond=0),
    )


def finish_manifest(manifest: RunManifest, outputs: Iterable[Path]) -> RunManifest:
    return manifest.model_copy(
        update={
            "output_digests": digests(outputs),
            "finished_at": datetime.now(timezone.utc).replace(microsecond=0),
        }
    )
