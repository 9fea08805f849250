"""Regenerates the golden prompt renderings from templates/ and slots.json.

Plain string substitution, kept independent of the C++ renderer.
"""
import json
import pathlib
import re

here = pathlib.Path(__file__).resolve().parent
root = here.parent.parent
slots = json.loads((here / "slots.json").read_text())

for version in ("v1", "baseline"):
    tdir = root / "templates" / version
    out = here / version
    out.mkdir(exist_ok=True)
    for path in sorted(tdir.glob("*.txt")):
        name = path.stem
        body = path.read_text().rstrip("\r\n")
        examples = sorted((tdir / "examples").glob(f"{name}.*.txt")) if (tdir / "examples").exists() else []
        joined = "\n\n".join(p.read_text().rstrip("\r\n") for p in examples)

        def fill(m):
            key = m.group(1)
            return joined if key == "examples" else slots[key]

        (out / f"{name}.txt").write_text(re.sub(r"\{\{([a-z_]+)\}\}", fill, body))
