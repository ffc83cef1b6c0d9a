#!/usr/bin/env python3
"""Write a 5000-image MNIST subset as IDX files.

The subset ships inside the `mlxtend` wheel (mlxtend/data/data/mnist_5k.csv.gz,
500 images per class taken from the MNIST training set). The wheel is fetched
with `pip download`, the CSV is shuffled with a fixed seed and written as

    <out>/mnist5k-images-idx3-ubyte
    <out>/mnist5k-labels-idx1-ubyte

The default configs train on the first 2000 images and test on the next 1000.
Point task.mnist at the official files instead when they are available.
"""

import argparse
import glob
import gzip
import io
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

import numpy as np


def load_csv(wheel_dir):
    wheels = glob.glob(os.path.join(wheel_dir, "mlxtend-*.whl"))
    if not wheels:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "mlxtend", "--no-deps", "-q", "-d", wheel_dir],
            check=True,
        )
        wheels = glob.glob(os.path.join(wheel_dir, "mlxtend-*.whl"))
    with zipfile.ZipFile(wheels[0]) as z:
        raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
    return table[:, :-1].astype(np.uint8), table[:, -1].astype(np.uint8)


def write_idx(out_dir, images, labels):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "mnist5k-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        f.write(images.tobytes())
    with open(os.path.join(out_dir, "mnist5k-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.tobytes())


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "data", "mnist"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--wheel-dir", default=None, help="reuse a directory holding the mlxtend wheel")
    args = parser.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        images, labels = load_csv(args.wheel_dir or tmp)
    order = np.random.default_rng(args.seed).permutation(len(labels))
    write_idx(args.out, images[order], labels[order])
    print(f"wrote {len(labels)} images to {os.path.abspath(args.out)}")


if __name__ == "__main__":
    main()
