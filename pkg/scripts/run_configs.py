"""Run each JSON config in scripts/configs through the CLI.

    python scripts/run_configs.py [config ...]
"""

import json
import sys
from pathlib import Path

from lowrank_aqc.cli import main

HERE = Path(__file__).parent / "configs"

if __name__ == "__main__":
    paths = [Path(p) for p in sys.argv[1:]] or sorted(HERE.glob("*.json"))
    worst = 0
    for p in paths:
        name = json.loads(p.read_text())["experiment"]
        print(f"== {p.name} ({name})")
        worst = max(worst, main([name, "--config", str(p)]))
        print()
    sys.exit(worst)
