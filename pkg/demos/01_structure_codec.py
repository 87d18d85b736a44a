#!/usr/bin/env python3
"""Tour of the 11-gene structure encoding.

Every evolution strategy in the framework is named by an 11-digit
string: one digit per switchable module, in catalog order. This script
walks the catalog, decodes a few named variants, and shows what the
self-adaptive mutation operator does to a genome.
"""

import numpy as np

from modcmaes import CATALOG, decode, encode, enumerate_all, mutate

# The catalog: nine binary switches plus two three-way choices.
print("module catalog")
for i, entry in enumerate(CATALOG.entries, start=1):
    print(f"  {i:2d}. {entry.name:24s} options: {', '.join(entry.option_labels)}")
print(f"total structures: {CATALOG.size}")

# Some familiar variants and their names.
print("\nnamed variants")
for text, label in [
    ("00000000000", "plain CMA-ES"),
    ("10000000000", "active covariance update"),
    ("01000000000", "elitist (mu+lambda)"),
    ("00100001000", "mirrored sampling with pairwise selection"),
    ("00000000001", "restarts with doubling population"),
    ("00000000002", "restarts alternating large/small population"),
    ("11111111122", "everything switched on"),
]:
    cfg = decode(text)
    active = [
        CATALOG.entries[i].name for i, g in enumerate(cfg.genes) if g > 0
    ]
    print(f"  {text}  {label:44s} active: {', '.join(active) or '-'}")

# Enumeration is lexicographic, so the space is stably ordered.
first = [encode(c) for _, c in zip(range(3), enumerate_all())]
print("\nfirst three structures:", ", ".join(first))

# Mutation flips binary genes; ternary genes always move elsewhere.
rng = np.random.default_rng(7)
genome = decode("00000000000")
print("\nmutation walk at rate 0.3")
for step in range(5):
    genome = mutate(genome, 0.3, rng)
    print(f"  step {step + 1}: {encode(genome)}")
