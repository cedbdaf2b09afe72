#!/usr/bin/env python3
"""Regenerates src/html/entities.inc from the named character reference table."""
import html.entities
import pathlib

out = pathlib.Path(__file__).resolve().parent.parent / "src" / "html" / "entities.inc"


def c_escape(s: str) -> str:
    return "".join(f"\\x{b:02x}" for b in s.encode("utf-8"))


rows = sorted(html.entities.html5.items())
with out.open("w") as f:
    f.write("// Generated by tools/gen_entities.py. Do not edit.\n")
    f.write(f"// {len(rows)} entries, sorted by name.\n")
    for name, value in rows:
        f.write(f'{{"{name}", "{c_escape(value)}"}},\n')
print(f"wrote {len(rows)} entries to {out}")
