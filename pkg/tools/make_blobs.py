#!/usr/bin/env python3
"""Write the Gaussian blob fixture as CSV vectors plus a labels file."""
import argparse

from scembed import fileio
from scembed.datasets import gaussian_blobs

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("output", help="vector CSV; labels go to OUTPUT.labels")
parser.add_argument("--n", type=int, default=600)
parser.add_argument("--dim", type=int, default=10)
parser.add_argument("--centers", type=int, default=3)
parser.add_argument("--separation", type=float, default=10.0)
parser.add_argument("--seed", type=int, default=0)
args = parser.parse_args()

ds = gaussian_blobs(args.n, args.dim, args.centers, args.separation, seed=args.seed)
fileio.write_vectors(args.output, ds.rows)
fileio.write_labels(args.output + ".labels", ds.labels)
print(f"wrote {ds.rows.shape[0]} x {ds.rows.shape[1]} to {args.output}")
