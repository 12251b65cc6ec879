"""
Driving everything from the command line
========================================

Each capability is exposed as a subcommand.  Stochastic commands
require an explicit seed, output is deterministic for a given seed,
and thread count does not change it, so runs are reproducible byte
for byte.  The verify subcommand re-runs the built-in statistical and
exact checks.
"""

from freewalk.cli import main

# Harmonic measure of {2, 3, 9} on the 3-regular tree, seen from 4.
print("$ freewalk harmonic --graph regular_tree --param b=3 "
      "--targets 2,3,9 --viewpoints 4")
main(["harmonic", "--graph", "regular_tree", "--param", "b=3",
      "--targets", "2,3,9", "--viewpoints", "4"])

# A seeded trajectory as JSON lines.
print("\n$ freewalk walk simulate --graph binary_tree --level 3 "
      "--start 1 --stop-steps 6 --seed 1")
main(["walk", "simulate", "--graph", "binary_tree", "--level", "3",
      "--start", "1", "--stop-steps", "6", "--seed", "1"])

# Forest samples; --threads only changes wall time, never the bytes.
print("\n$ freewalk forest sample --graph binary_tree --level 3 "
      "--replicas 2 --seed 3 --threads 2")
main(["forest", "sample", "--graph", "binary_tree", "--level", "3",
      "--replicas", "2", "--seed", "3", "--threads", "2"])

# The fast verification suite.
print("\n$ freewalk verify --suite tutte-embedding --seed 0")
main(["verify", "--suite", "tutte-embedding", "--seed", "0"])
