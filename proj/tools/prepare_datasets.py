#!/usr/bin/env python3
"""Convert the raw WBC and PID files into label-first 0/1 CSV files.

WBC: comma-separated, 9 attributes and the class (2 benign, 4 malignant) last;
an optional leading sample-id column is dropped, rows with missing values
('?') are skipped. PID: 8 attributes and the class last, either
tested_positive/tested_negative or 1/0.
"""

import argparse
import csv
import sys

WBC_LABELS = {"2": "0", "4": "1"}
PID_LABELS = {"tested_negative": "0", "tested_positive": "1", "0": "0", "1": "1"}


def convert(rows, features, labels):
    out = []
    for lineno, row in enumerate(rows, 1):
        row = [f.strip() for f in row]
        if not row or all(not f for f in row) or row[0].startswith("@"):
            continue
        if len(row) == features + 2:
            row = row[1:]
        if len(row) != features + 1:
            sys.exit(f"line {lineno}: expected {features + 1} fields, found {len(row)}")
        if "?" in row:
            continue
        label = labels.get(row[-1])
        if label is None:
            sys.exit(f"line {lineno}: unknown class '{row[-1]}'")
        out.append([label] + row[:-1])
    return out


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("kind", choices=["wbc", "pid"])
    p.add_argument("source")
    p.add_argument("target")
    a = p.parse_args()
    features, labels = (9, WBC_LABELS) if a.kind == "wbc" else (8, PID_LABELS)
    with open(a.source, newline="") as f:
        rows = convert(csv.reader(f), features, labels)
    with open(a.target, "w", newline="") as f:
        csv.writer(f, lineterminator="\n").writerows(rows)
    print(f"{a.target}: {len(rows)} rows, {sum(r[0] == '1' for r in rows)} positive")


if __name__ == "__main__":
    main()
