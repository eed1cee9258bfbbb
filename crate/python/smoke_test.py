"""Build the extension, import it and run the bundled fixture through it."""

import json
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURE = ROOT / "crates" / "core" / "tests" / "fixtures" / "sample.qs"


def build() -> pathlib.Path:
    subprocess.run(["cargo", "build", "-q", "-p", "jiuchan-py"], cwd=ROOT, check=True)
    lib = ROOT / "target" / "debug" / "libpyjiuchan.so"
    if not lib.exists():
        sys.exit(f"missing {lib}")
    return lib


def main() -> None:
    lib = build()
    with tempfile.TemporaryDirectory() as tmp:
        shutil.copy(lib, pathlib.Path(tmp) / "pyjiuchan.so")
        sys.path.insert(0, tmp)
        import pyjiuchan

        src = FIXTURE.read_text()
        graph = json.loads(pyjiuchan.analyze(src))
        assert graph["components"] == [["qs[0]", "qs[1]", "qs[2]"]], graph["components"]

        fixed = json.loads(pyjiuchan.analyze(src, assume={"a": 0}))
        assert fixed["components"] == [["qs[0]", "qs[2]"]], fixed["components"]

        dot = pyjiuchan.analyze(src, format="dot")
        assert dot.startswith("graph entanglement {")

        points = json.loads(pyjiuchan.per_point(src))
        assert len(points) == 24

        report = json.loads(pyjiuchan.verify(src))
        assert report["violations"] == []

        try:
            pyjiuchan.analyze("namespace T { operation")
        except ValueError as e:
            assert "error" in str(e)
        else:
            raise AssertionError("syntax error not raised")

        print(f"pyjiuchan {pyjiuchan.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
