import csv
from pathlib import Path


def out_dir(name):
    from muskat.io import output_dir
    return output_dir(str(Path("runs") / name))


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([x if isinstance(x, str) else repr(float(x)) for x in r])
    print(f"wrote {path}")
