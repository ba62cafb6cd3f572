#!/usr/bin/env python3
"""
MemDrift: degenerate drift-diffusion memristor simulator
Command line entry point

    python main.py run scenarios/relax_memristor_1d.json
    python main.py check scenarios/sweep_memristor_1d.json
    python main.py converge scenarios/converge_poisson_1d.json --levels 4
    python main.py exponents --alpha 5/3,1.25,6/5
"""

import sys
from pathlib import Path
from dotenv import load_dotenv


load_dotenv()

# Add repo root to path
sys.path.insert(0, str(Path(__file__).parent))

from src.harness.cli import main


if __name__ == "__main__":
    sys.exit(main())
