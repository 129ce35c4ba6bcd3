"""Rebuild ``src/lexnav/data/object_vectors.txt`` from a public word2vec release.

The source is the 26,423-word subset of the GoogleNews word2vec vectors
(300 dimensions) that ships inside the ``responsibly`` wheel on PyPI::

    pip download --no-deps -d /tmp/wheels responsibly==0.1.2
    python tools/build_object_vectors.py /tmp/wheels/responsibly-0.1.2-py3-none-any.whl

Two object words are missing from that subset. They are filled from in-vocabulary
words and the substitution is written into the file header:

    toaster    <- toast
    nightstand <- mean(night, stand)

Vectors are written without any rescaling or dimension reduction.
"""

import sys
import zipfile

import numpy as np

MEMBER = "responsibly/we/data/GoogleNews-vectors-negative300-bolukbasi.bin"
OBJECTS = ["shower", "bathtub", "toilet", "stove", "toaster",
           "table", "microwave", "bed", "wardrobe", "nightstand"]
PROXIES = {"toaster": ["toast"], "nightstand": ["night", "stand"]}


def read_word2vec_binary(data):
    header_end = data.index(b"\n")
    count, dim = map(int, data[:header_end].split())
    pos = header_end + 1
    vectors = {}
    for _ in range(count):
        space = data.index(b" ", pos)
        word = data[pos:space].decode("utf-8", "replace").strip()
        pos = space + 1
        vectors[word] = np.frombuffer(data[pos:pos + 4 * dim], dtype="<f4").astype(np.float64)
        pos += 4 * dim
        if data[pos:pos + 1] == b"\n":
            pos += 1
    return dim, vectors


def main(wheel_path, out_path="src/lexnav/data/object_vectors.txt"):
    with zipfile.ZipFile(wheel_path) as wheel:
        dim, vectors = read_word2vec_binary(wheel.read(MEMBER))
    lines = [
        "# GoogleNews word2vec (300-d) rows for the ten apartment objects.",
        "# Source: responsibly 0.1.2 wheel, " + MEMBER,
        "# Out-of-vocabulary in the source: "
        + "; ".join(f"{w} <- mean({', '.join(p)})" for w, p in PROXIES.items()),
    ]
    for word in OBJECTS:
        if word in vectors:
            row = vectors[word]
        else:
            row = np.mean([vectors[p] for p in PROXIES[word]], axis=0)
        assert row.shape == (dim,)
        lines.append(word + " " + " ".join(repr(float(v)) for v in row))
    with open(out_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


if __name__ == "__main__":
    main(*sys.argv[1:])
