"""Runs the CLI on small graphs and validates every manifest against the schema."""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema


def write_path(path, n):
    lines = ["%%MatrixMarket matrix coordinate real symmetric", f"{n} {n} {n - 1}"]
    lines += [f"{i + 2} {i + 1} 1" for i in range(n - 1)]
    path.write_text("\n".join(lines) + "\n")


def main():
    binary, schema_path = sys.argv[1], sys.argv[2]
    schema = json.loads(Path(schema_path).read_text())
    jsonschema.Draft7Validator.check_schema(schema)
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        write_path(tmp / "p3.mtx", 3)
        write_path(tmp / "p30.mtx", 30)
        runs = [
            ["fiedler", "--input", str(tmp / "p3.mtx")],
            ["fiedler", "--input", str(tmp / "p30.mtx"), "--p", "4"],
            ["reorder", "--input", str(tmp / "p30.mtx"), "--plots", "--k", "1", "--k", "3"],
            ["fiedler", "--input", str(tmp / "p30.mtx"), "--max-outer", "1", "--eps-out", "1e-13"],
        ]
        for i, args in enumerate(runs):
            out = tmp / f"run{i}"
            proc = subprocess.run([binary, *args, "--output-dir", str(out)], capture_output=True, text=True)
            if proc.returncode not in (0, 2):
                sys.exit(f"{args}: exit {proc.returncode}\n{proc.stderr}")
            manifest = json.loads((out / "manifest.json").read_text())
            jsonschema.validate(manifest, schema)
            for f in manifest["outputs"]:
                if not Path(f).exists():
                    sys.exit(f"{args}: listed output {f} missing")
            print(f"ok {' '.join(args[:1])} run{i}")


if __name__ == "__main__":
    main()
