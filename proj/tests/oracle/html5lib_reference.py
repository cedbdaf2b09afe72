#!/usr/bin/env python3
"""Reference element trees from html5lib, used to freeze parser expectations.

Usage:
  html5lib_reference.py dump FILE        # print "depth tag" lines in preorder
  html5lib_reference.py corpus DIR OUT   # write OUT (JSON) for every DIR/*.html
"""
import json
import pathlib
import sys

import html5lib


def elements(html_text):
    doc = html5lib.parse(html_text, treebuilder="dom", namespaceHTMLElements=False, scripting=True)
    root = doc.documentElement
    out = []

    def walk(node, path, depth):
        out.append({"path": path, "tag": node.tagName.lower(), "depth": depth})
        index = 0
        for child in node.childNodes:
            if child.nodeType == child.ELEMENT_NODE:
                walk(child, path + [index], depth + 1)
                index += 1

    walk(root, [], 0)
    return out


def read(path):
    return pathlib.Path(path).read_bytes().decode("utf-8", errors="replace")


def main(argv):
    if argv[1] == "dump":
        text = read(argv[2]) if argv[2] != "-" else sys.stdin.buffer.read().decode("utf-8", "replace")
        for e in elements(text):
            print("  " * e["depth"] + e["tag"])
    elif argv[1] == "corpus":
        corpus = pathlib.Path(argv[2])
        result = {}
        for f in sorted(corpus.glob("*.html")):
            els = elements(read(f))
            result[f.name] = {
                "element_count": len(els),
                "max_depth": max(e["depth"] for e in els),
                "elements": els,
            }
        pathlib.Path(argv[3]).write_text(json.dumps(result, indent=1) + "\n")
    else:
        raise SystemExit(__doc__)


if __name__ == "__main__":
    main(sys.argv)
