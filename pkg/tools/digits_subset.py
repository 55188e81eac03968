#!/usr/bin/env python3
"""Write an n-sample handwritten digit set (8x8 images, 64 features) as CSV.

Beyond the 1797 originals, samples are noisy copies of them.
"""
import argparse

from scembed import fileio
from scembed.datasets import digits

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("output", help="vector CSV; labels go to OUTPUT.labels")
parser.add_argument("--n", type=int, default=5000)
parser.add_argument("--noise", type=float, default=1.0)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

ds = digits(args.n, args.noise, args.seed)
fileio.write_vectors(args.output, ds.rows)
fileio.write_labels(args.output + ".labels", ds.labels)
print(f"wrote {ds.rows.shape[0]} x {ds.rows.shape[1]} to {args.output}")
