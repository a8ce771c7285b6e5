"""Run manifests: reproducibility records written alongside output files.

Every CLI run that writes an output file also writes ``<out>.manifest.json``
holding the command, the fully resolved parameter set, the seed, trial
counts, the package version, and the output file's SHA-256.  Because every
Monte Carlo draw is a pure function of (seed, trial index), replaying a
manifest's argument vector reproduces the output file byte for byte; the
only manifest fields excluded from that contract are the wall-clock time
and the output path.

A manifest is first written with ``complete = false`` when the run starts
(so interrupted sweeps are recognizable) and rewritten with the checksum and
``complete = true`` on success.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

__all__ = ["RunManifest", "write_manifest", "load_manifest", "sha256_file", "replay"]


@dataclass
class RunManifest:
    """Reproducibility record for one CLI run."""

    command: str
    argv: list[str]
    params: dict
    seed: int
    trial_counts: dict = field(default_factory=dict)
    wall_clock_s: float = 0.0
    version: str = ""
    output_format: str = "csv"
    output_path: str = ""
    output_sha256: str = ""
    complete: bool = False


def write_manifest(path: str | Path, manifest: RunManifest) -> None:
    """Serialize a manifest as stable, human-readable JSON."""
    payload = json.dumps(asdict(manifest), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(payload)


def load_manifest(path: str | Path) -> RunManifest:
    """Load a manifest written by :func:`write_manifest`."""
    data = json.loads(Path(path).read_text())
    return RunManifest(**data)


def sha256_file(path: str | Path) -> str:
    """Hex SHA-256 of a file's bytes."""
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def replay(manifest_path: str | Path, out_path: str | Path) -> tuple[bool, str, str]:
    """Re-run a manifest's command into ``out_path``; verify reproduction.

    Returns ``(match, new_sha256, recorded_sha256)`` where ``match`` is True
    when the replayed output is byte-identical to the recorded checksum.
    Only complete manifests can be replayed.
    """
    manifest = load_manifest(manifest_path)
    if not manifest.complete:
        raise ValueError("manifest marks an incomplete run; nothing to reproduce")
    if not manifest.output_sha256:
        raise ValueError("manifest records no output checksum")
    from . import cli

    rc = cli.main([*manifest.argv, "--out", str(out_path)])
    if rc != 0:
        raise RuntimeError(f"replayed command exited with status {rc}")
    new_sha = sha256_file(out_path)
    return new_sha == manifest.output_sha256, new_sha, manifest.output_sha256
