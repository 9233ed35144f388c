#!/usr/bin/env python3
"""Fetch MovieLens-100k and write it as data/ml-100k/u.data.

Tries the GroupLens archive first. If that host is unreachable, falls back to
the copy bundled in the `recbole` wheel, fetched with pip.
"""
import argparse
import io
import pathlib
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
RECBOLE_MEMBER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def from_grouplens():
    with urllib.request.urlopen(GROUPLENS, timeout=60) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data").decode()


def from_recbole():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run(
            [sys.executable, "-m", "pip", "download", "--no-deps", "-q", "-d", tmp, "recbole==1.2.1"],
            check=True,
        )
        wheel = next(pathlib.Path(tmp).glob("recbole-*.whl"))
        lines = zipfile.ZipFile(wheel).read(RECBOLE_MEMBER).decode().splitlines()
    # drop the typed header row; columns are user, item, rating, timestamp
    return "".join(line + "\n" for line in lines[1:] if line.strip())


def main():
    root = pathlib.Path(__file__).resolve().parent.parent
    parser = argparse.ArgumentParser()
    parser.add_argument("--out", default=str(root / "data" / "ml-100k" / "u.data"))
    args = parser.parse_args()

    try:
        text = from_grouplens()
    except Exception as exc:  # network or archive failure
        print(f"grouplens download failed ({exc}); trying the recbole wheel", file=sys.stderr)
        text = from_recbole()

    rows = [line.split("\t") for line in text.splitlines()]
    users = {r[0] for r in rows}
    items = {r[1] for r in rows}
    if (len(rows), len(users), len(items)) != (100000, 943, 1682):
        sys.exit(f"unexpected contents: {len(rows)} records, {len(users)} users, {len(items)} items")

    out = pathlib.Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
