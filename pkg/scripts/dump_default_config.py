#!/usr/bin/env python3
"""Write the built-in ingest defaults to configs/sf_default.json.

Run after changing defaults in vcfat.config so the shipped file stays
in sync; tests assert the two are identical.
"""
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))

from vcfat.config import IngestConfig  # noqa: E402

target = Path(__file__).resolve().parents[1] / "configs" / "sf_default.json"
target.parent.mkdir(exist_ok=True)
IngestConfig().save(target)
print(f"wrote {target}")
