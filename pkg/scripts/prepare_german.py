"""Convert the UCI Statlog German credit file to the numeric CSV used by the harness.

Accepts either the original whitespace-separated ``german.data`` or a CSV copy
with a header row. Categorical codes ``A<attr><level>`` become the integer
level, numeric attributes are kept, and the label keeps its original values
(1 = good, 2 = bad). Row order is preserved, since tasks are contiguous blocks.

Usage: python scripts/prepare_german.py RAW_FILE datasets/german.csv
"""

import csv
import json
import re
import sys

NAMES = [
    "checking_status", "duration", "credit_history", "purpose", "credit_amount",
    "savings", "employment_since", "installment_rate", "personal_status", "other_debtors",
    "residence_since", "property", "age", "other_installment_plans", "housing",
    "existing_credits", "job", "people_liable", "telephone", "foreign_worker",
]
CODE = re.compile(r"^A(\d+)$")


def _rows(path):
    with open(path, newline="") as fh:
        text = fh.read()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if "," in lines[0]:
        return [r for r in csv.reader(lines[1:])]
    return [ln.split() for ln in lines]


def _encode(value, attribute):
    match = CODE.match(value)
    if not match:
        return value
    digits = match.group(1)
    prefix = str(attribute)
    if not digits.startswith(prefix) or len(digits) == len(prefix):
        raise ValueError(f"unexpected code {value!r} for attribute {attribute}")
    return str(int(digits[len(prefix):]))


def main(src, dst):
    rows = _rows(src)
    with open(dst, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(NAMES + ["credit_risk"])
        for row in rows:
            if len(row) != 21:
                raise ValueError(f"expected 21 fields, got {len(row)}")
            writer.writerow([_encode(v, a) for a, v in enumerate(row[:20], start=1)] + [row[20]])
    schema = {"label": "credit_risk", "n_tasks": 3, "test_size": 100, "classes": ["1", "2"]}
    with open(dst.rsplit(".", 1)[0] + ".schema.json", "w") as fh:
        json.dump(schema, fh, indent=2)
        fh.write("\n")


if __name__ == "__main__":
    main(*sys.argv[1:3])
