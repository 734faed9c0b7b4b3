"""Output directories, atomic writes and run manifests."""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from datetime import datetime, timezone
from importlib import metadata
from pathlib import Path

OUTPUT_ROOT_ENV = "MUSKAT_OUTPUT_ROOT"


def output_dir(directory: str) -> Path:
    """Resolve a configured output directory; relative paths go under ``$MUSKAT_OUTPUT_ROOT`` if set."""
    p = Path(directory)
    root = os.environ.get(OUTPUT_ROOT_ENV)
    if root and not p.is_absolute():
        p = Path(root) / p
    p.mkdir(parents=True, exist_ok=True)
    return p


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def code_version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "unknown"


def now() -> str:
    return datetime.now(timezone.utc).isoformat()


def write_manifest(directory, config_text: str, config: dict, artifacts, status: str,
                   started: str, extra: dict | None = None) -> Path:
    """Manifest with the config echo, its hash and a hash for every artifact; written last, atomically."""
    directory = Path(directory)
    inventory = {}
    for a in artifacts:
        p = Path(a)
        inventory[p.name] = sha256_file(p)
    manifest = {
        "config": config,
        "config_hash": sha256_bytes(config_text.encode()),
        "code_version": code_version(),
        "started": started,
        "finished": now(),
        "status": status,
        "files": inventory,
    }
    if extra:
        manifest.update(extra)
    path = directory / "manifest.json"
    atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def verify_manifest(path) -> bool:
    """True iff every listed file exists next to the manifest and matches its hash."""
    path = Path(path)
    manifest = json.loads(path.read_text())
    for name, digest in manifest["files"].items():
        p = path.parent / name
        if not p.exists() or sha256_file(p) != digest:
            return False
    return True
