"""Runs the CLI on a generated store and checks the output with the geojson package."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import geojson


def main():
    cli, make_store = sys.argv[1], sys.argv[2]
    with tempfile.TemporaryDirectory() as tmp:
        store = Path(tmp) / "store"
        out = Path(tmp) / "zones.geojson"
        subprocess.run([make_store, "--out", str(store)], check=True, stdout=subprocess.DEVNULL)
        subprocess.run([cli, "pipeline", "--store", str(store), "--include-members",
                        "--keyword", "Medellín", "--keyword", "4sq.com", "--output", str(out)],
                       check=True, stdout=subprocess.DEVNULL)
        with open(out, encoding="utf-8") as fh:
            doc = geojson.loads(fh.read())
        if not doc.is_valid:
            print("invalid:", doc.errors())
            return 1
        for feature in doc["features"]:
            if not feature.is_valid:
                print("invalid feature:", feature.errors())
                return 1
        kinds = [f["properties"]["feature"] for f in doc["features"]]
        print(json.dumps({"features": len(kinds), "centroids": kinds.count("centroid")}))
        return 0 if kinds.count("centroid") > 0 else 1


if __name__ == "__main__":
    sys.exit(main())
