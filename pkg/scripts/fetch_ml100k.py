"""Download the MovieLens-100K ratings file into data/ml-100k/u.data.

    python scripts/fetch_ml100k.py                # from grouplens.org
    python scripts/fetch_ml100k.py --from-wheel   # offline mirrors: rebuild from pytorch-widedeep

The second form downloads the pytorch-widedeep wheel through pip (which
bundles the same 100,000 ratings as parquet) and writes them back out in
the tab-separated u.data layout.  It needs pandas and pyarrow.
"""

import argparse
import io
import subprocess
import sys
import tempfile
import urllib.request
import zipfile
from pathlib import Path

URL = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL = "pytorch-widedeep==1.7.0"
PARQUET = "pytorch_widedeep/datasets/data/MovieLens100k_data.parquet.brotli"


def from_grouplens(dest):
    with urllib.request.urlopen(URL, timeout=60) as resp:
        payload = resp.read()
    with zipfile.ZipFile(io.BytesIO(payload)) as zf:
        dest.write_bytes(zf.read("ml-100k/u.data"))


def from_wheel(dest):
    import pandas as pd

    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-d", tmp, WHEEL],
                       check=True)
        wheel = next(Path(tmp).glob("*.whl"))
        with zipfile.ZipFile(wheel) as zf:
            zf.extract(PARQUET, tmp)
        df = pd.read_parquet(Path(tmp) / PARQUET)
    df.iloc[:, :4].to_csv(dest, sep="\t", header=False, index=False)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--from-wheel", action="store_true")
    ap.add_argument("--dest", default=Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data",
                    type=Path)
    args = ap.parse_args()
    args.dest.parent.mkdir(parents=True, exist_ok=True)
    (from_wheel if args.from_wheel else from_grouplens)(args.dest)
    n = sum(1 for _ in open(args.dest))
    print(f"wrote {args.dest} ({n} ratings)")


if __name__ == "__main__":
    main()
