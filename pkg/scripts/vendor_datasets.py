"""Rebuild the CSV files under data/ from datasets bundled in PyPI wheels.

Needs scikit-learn plus (installed, e.g. with ``pip install --no-deps -t``)
``common-datasets``, ``Orange3`` and ``rdatasets``. Run once; the output is
committed so the test suite does not depend on these packages.
"""
import csv
import sys
from pathlib import Path

from sklearn.datasets import load_iris, load_wine

OUT = Path(__file__).resolve().parents[1] / "data"


def write(name, header, rows):
    with open(OUT / f"{name}.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
    print(name, len(rows))


def sk(name, bunch, label):
    names = [n.replace(" (cm)", "").replace(" ", "_") for n in bunch.feature_names]
    rows = [
        [repr(float(v)) for v in x] + [bunch.target_names[t]]
        for x, t in zip(bunch.data, bunch.target)
    ]
    write(name, names + [label], rows)


def keel(name, path):
    header, rows = [], []
    for line in Path(path).read_text().splitlines():
        if line.startswith("@attribute"):
            header.append(line.split()[1])
        elif line and not line.startswith("@"):
            rows.append([c.strip() for c in line.split(",")])
    write(name, header, rows)


def plain(name, path, header=None, skip_header=False):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if skip_header:
        header, rows = rows[0], rows[1:]
    write(name, header, rows)


def main(site):
    site = Path(site)
    cd = site / "common_datasets" / "data"
    sk("iris", load_iris(), "species")
    sk("wine", load_wine(), "class")
    plain("glass", cd / "classification/glass/glass.data.txt",
          ["Id", "RI", "Na", "Mg", "Al", "Si", "K", "Ca", "Ba", "Fe", "Type"])
    keel("diabetes", cd / "classification/pima/pima.dat")
    keel("segment", cd / "classification/segment/segment.dat")
    plain("forest", cd / "regression/forestfires/forestfires.csv", skip_header=True)
    plain("slump", cd / "regression/slump_test/slump_test.data.txt", skip_header=True)
    plain("machine", cd / "regression/cpu_performance/machine.data.txt",
          ["vendor", "model", "MYCT", "MMIN", "MMAX", "CACH", "CHMIN", "CHMAX",
           "PRP", "ERP"])

    # Orange .tab: header row, type row, flag row, then tab-separated data
    lines = (site / "Orange/tests/datasets/ionosphere.tab").read_text().splitlines()
    header = lines[0].split("\t")
    header[-1] = "class"
    write("ionosphere", header, [l.split("\t") for l in lines[3:] if l.strip()])

    sys.path.insert(0, str(site))
    import rdatasets

    milk = rdatasets.data("robustbase", "milk").drop(columns=["rownames"])
    write("milk", list(milk.columns), [[repr(float(v)) for v in r] for r in milk.values])


if __name__ == "__main__":
    main(sys.argv[1])
