#!/usr/bin/env python3
"""What the native feature encoder sees in typical email lines."""

import numpy as np

from zoneseg import FEATURE_NAMES, feature_vector

samples = [
    "Hello Ana,",
    "",
    "The meeting moved to Friday, please confirm.",
    "> > are you coming?",
    "-- ",
    "----------------",
    "2021-03-04 10:31:22 INFO worker[3]: job 8841 finished in 84 ms",
    "for (int i = 0; i < n; i++) {",
    "From: ana@acme.example",
    "On Mon, 8 Mar 2021 at 10:31, Ana Martins wrote:",
]

np.set_printoptions(precision=3, suppress=True)
width = max(len(name) for name in FEATURE_NAMES)
vectors = {line: feature_vector(line) for line in samples}

for line in samples:
    print(f"{line!r}")
    vec = vectors[line]
    active = [(FEATURE_NAMES[i], vec[i]) for i in range(len(vec)) if vec[i] != 0.0]
    for name, value in active:
        print(f"    {name:<{width}} {value:.3f}")
print("\nfeature order:", ", ".join(FEATURE_NAMES))
