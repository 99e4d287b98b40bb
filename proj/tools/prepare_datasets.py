#!/usr/bin/env python3
"""Build data/adult.csv and data/german.csv from the UCI source files.

The raw UCI files are taken from the `responsibly` wheel, which ships
adult.data, adult.test and german.data unmodified. Pass --wheel to use a
local copy; otherwise the wheel is fetched with `pip download`.
"""
import argparse
import csv
import io
import subprocess
import sys
import tempfile
import zipfile
from pathlib import Path

WHEEL = "responsibly==0.1.2"

ADULT_COLUMNS = [
    "age", "workclass", "fnlwgt", "education", "education-num",
    "marital-status", "occupation", "relationship", "race", "sex",
    "capital-gain", "capital-loss", "hours-per-week", "native-country",
    "income",
]

GERMAN_COLUMNS = [
    "checking-status", "duration", "credit-history", "purpose",
    "credit-amount", "savings", "employment-since", "installment-rate",
    "personal-status", "other-debtors", "residence-since", "property",
    "age", "other-installment-plans", "housing", "existing-credits", "job",
    "dependents", "telephone", "foreign-worker", "credit",
]


def fetch_wheel(dest: Path) -> Path:
    subprocess.run(
        [sys.executable, "-m", "pip", "download", "--no-deps", WHEEL, "-d", str(dest)],
        check=True,
    )
    return next(dest.glob("responsibly-*.whl"))


def adult_rows(raw: str):
    for line in raw.splitlines():
        line = line.strip()
        if not line or line.startswith("|"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if len(cells) != len(ADULT_COLUMNS) or "?" in cells:
            continue
        cells[-1] = cells[-1].rstrip(".")
        yield cells


def german_rows(raw: str):
    for line in raw.splitlines():
        cells = line.split()
        if len(cells) != len(GERMAN_COLUMNS):
            continue
        row = dict(zip(GERMAN_COLUMNS, cells))
        # A92 / A95 are the female personal-status codes.
        sex = "female" if row["personal-status"] in ("A92", "A95") else "male"
        age_group = "old" if int(row["age"]) > 25 else "young"
        credit = "good" if row["credit"] == "1" else "bad"
        out = [row[c] for c in GERMAN_COLUMNS if c not in ("personal-status", "age", "credit")]
        yield out + [sex, age_group, credit]


def write_csv(path: Path, header, rows) -> int:
    n = 0
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow(r)
            n += 1
    return n


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--wheel", type=Path, help="local responsibly wheel")
    ap.add_argument("--out", type=Path, default=Path(__file__).resolve().parent.parent / "data")
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        wheel = args.wheel or fetch_wheel(Path(tmp))
        z = zipfile.ZipFile(wheel)
        read = lambda n: z.read(f"responsibly/dataset/{n}").decode("utf-8")
        adult_raw = read("adult/adult.data") + "\n" + read("adult/adult.test")
        german_raw = read("german/german.data")

    args.out.mkdir(parents=True, exist_ok=True)
    n_adult = write_csv(args.out / "adult.csv", ADULT_COLUMNS, adult_rows(adult_raw))
    german_header = [c for c in GERMAN_COLUMNS if c not in ("personal-status", "age", "credit")]
    n_german = write_csv(args.out / "german.csv", german_header + ["sex", "age-group", "credit"],
                         german_rows(german_raw))
    print(f"adult.csv: {n_adult} rows; german.csv: {n_german} rows")
    return 0


if __name__ == "__main__":
    sys.exit(main())
