#!/usr/bin/env python3
"""Checks the CLI and the committed test data against the html5lib-based oracles.

Usage: check_agreement.py DOMCITY_CLI TESTS_DIR

Exits 77 (skipped) when html5lib is not installed.
"""
import argparse
import json
import pathlib
import shlex
import subprocess
import sys

try:
    import html5lib  # noqa: F401
except ImportError:
    print("html5lib not installed; skipping")
    sys.exit(77)

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parent))
import html5lib_reference  # noqa: E402
import scene_reference  # noqa: E402

FLAG_SETS = [
    [],
    ["--layer-gap", "2.5", "--color-mode", "tag-hash"],
    ["--texture-mode", "leaves"],
    ["--texture-mode", "all", "--viewport", "640x2000"],
    ["--no-crop", "--query", "<img"],
    ["--depth-min", "1", "--depth-max", "3", "--query", "class"],
]


def oracle_scene(path, flags):
    p = argparse.ArgumentParser()
    p.add_argument("--layer-gap", type=float, default=1.0)
    p.add_argument("--color-mode", default="per-layer")
    p.add_argument("--texture-mode", default="none")
    p.add_argument("--no-crop", action="store_true")
    p.add_argument("--query", default="")
    p.add_argument("--depth-min", type=int, default=0)
    p.add_argument("--depth-max", type=int, default=None)
    p.add_argument("--viewport", default="1280x800")
    a = p.parse_args(flags)
    a.viewport = tuple(float(v) for v in a.viewport.lower().split("x"))
    return scene_reference.scene(html5lib_reference.read(path), a)


def cli_scene(cli, path, flags):
    out = subprocess.run([cli, "export", "--input", str(path), "--out", "-", *flags],
                         check=True, capture_output=True)
    return out.stdout.decode("utf-8")


def main():
    cli, tests = sys.argv[1], pathlib.Path(sys.argv[2])
    failures = []

    reference = json.loads((tests / "corpus" / "reference.json").read_text())
    for f in sorted((tests / "corpus").glob("*.html")):
        els = html5lib_reference.elements(html5lib_reference.read(f))
        if reference.get(f.name, {}).get("elements") != els:
            failures.append(f"reference.json is stale for {f.name}")
        for flags in FLAG_SETS:
            if cli_scene(cli, f, flags) != oracle_scene(f, flags):
                failures.append(f"{f.name} {' '.join(flags)}: CLI differs from oracle")

    for line in (tests / "golden" / "manifest.txt").read_text().splitlines():
        if not line.strip() or line.startswith("#"):
            continue
        golden, source, flags = (part.strip() for part in line.split("|"))
        expected = oracle_scene(tests / source, shlex.split(flags))
        if (tests / "golden" / golden).read_text() != expected:
            failures.append(f"golden {golden} differs from oracle")

    for msg in failures:
        print("FAIL", msg)
    print(f"{len(failures)} disagreement(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
