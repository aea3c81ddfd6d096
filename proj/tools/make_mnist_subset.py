#!/usr/bin/env python3
# Copyright 2026 The boltzgen Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the bundled desk-scale MNIST subset in IDX format.

Input is the digit directory of the `mnist` npm package (MIT licensed,
10000 MNIST digits stored as JSON arrays of pixel/255). The digits are
shuffled with a fixed seed and written as gzip-compressed IDX files:
the first --test images become the t10k pair, the rest the train pair.

    npm pack mnist@1.1.0 && tar xzf mnist-1.1.0.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist
"""

import argparse
import gzip
import json
import pathlib
import random
import struct


def write_gz(path, payload):
    with open(path, "wb") as raw:
        with gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as out:
            out.write(payload)


def idx_images(images):
    head = struct.pack(">IIII", 0x803, len(images), 28, 28)
    return head + b"".join(bytes(img) for img in images)


def idx_labels(labels):
    return struct.pack(">II", 0x801, len(labels)) + bytes(labels)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("digits", type=pathlib.Path)
    parser.add_argument("out", type=pathlib.Path)
    parser.add_argument("--test", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=2026)
    args = parser.parse_args()

    records = []
    for digit in range(10):
        data = json.loads((args.digits / f"{digit}.json").read_text())["data"]
        if len(data) % 784:
            raise SystemExit(f"{digit}.json: length {len(data)} is not a multiple of 784")
        for k in range(0, len(data), 784):
            pixels = [min(255, max(0, round(v * 255))) for v in data[k:k + 784]]
            records.append((pixels, digit))
    random.Random(args.seed).shuffle(records)

    test, train = records[:args.test], records[args.test:]
    args.out.mkdir(parents=True, exist_ok=True)
    for prefix, part in (("train", train), ("t10k", test)):
        write_gz(args.out / f"{prefix}-images-idx3-ubyte.gz", idx_images([p for p, _ in part]))
        write_gz(args.out / f"{prefix}-labels-idx1-ubyte.gz", idx_labels([d for _, d in part]))
        print(f"{prefix}: {len(part)} images")


if __name__ == "__main__":
    main()
