"""
bibkit CLI Module

Command-line surface of the toolkit. Every command has a human mode (rich
tables) and a machine mode (``--machine``, JSON on stdout).

Usage:
    bibkit basins --out basins.ppm --res 512 512
    bibkit dimension --in basins.ppm --out boxes.csv
    bibkit partition --in basins.ppm --basin 0 --radius 2 --out-dir partition/
    bibkit infer --config config/tri_stable.conf --mode bib
    bibkit perceive --kernel partition/partition.jsonl --steps 100000
    bibkit walk --config config/tri_stable.conf --machine
    bibkit analyze walk.csv
"""

from .main import app, main
from .output_formatter import OutputFormatter, OutputMode

__all__ = ["app", "main", "OutputFormatter", "OutputMode"]
