import argparse
import json
import os
import sys

from hdmvl.experiments import ExperimentConfig

HERE = os.path.dirname(os.path.abspath(__file__))
DEFAULT_CONFIG = os.path.join(HERE, "..", "configs", "toy.json")


def parser(description):
    p = argparse.ArgumentParser(description=description)
    p.add_argument("--config", default=DEFAULT_CONFIG)
    p.add_argument("--out", help="also write the JSON report here")
    return p


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return ExperimentConfig.from_dict(json.load(fh))


def emit(report, out=None):
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def table(rows, cols):
    print("  ".join(f"{c:>16}" for c in cols), file=sys.stderr)
    for r in rows:
        cells = [f"{r[c]:16.4f}" if isinstance(r[c], float) else f"{str(r[c]):>16}" for c in cols]
        print("  ".join(cells), file=sys.stderr)
