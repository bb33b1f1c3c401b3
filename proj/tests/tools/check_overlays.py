"""Runs the overlay command on a dataset and parses every SVG it writes."""

import subprocess
import sys
import xml.etree.ElementTree as ET
from pathlib import Path


def main() -> int:
    exe, dataset, workdir = sys.argv[1], sys.argv[2], Path(sys.argv[3])
    workdir.mkdir(parents=True, exist_ok=True)
    preds = workdir / "preds.txt"
    subprocess.run([exe, "baseline", dataset, "--strategy", "ohfb", "--out", str(preds)], check=True)
    out = workdir / "svg"
    subprocess.run([exe, "overlay", dataset, str(preds), "--out", str(out)], check=True)
    files = sorted(out.glob("*.svg"))
    if not files:
        print("no overlays written")
        return 1
    ns = "{http://www.w3.org/2000/svg}"
    for f in files:
        root = ET.parse(f).getroot()
        if root.tag != ns + "svg":
            print(f"{f.name}: root element is {root.tag}")
            return 1
        groups = {g.get("id") for g in root.iter(ns + "g")}
        if groups != {"humans", "firearms", "pairs"}:
            print(f"{f.name}: unexpected groups {groups}")
            return 1
    print(f"{len(files)} overlays parsed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
