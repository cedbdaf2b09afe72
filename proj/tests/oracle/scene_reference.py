#!/usr/bin/env python3
"""Reference scene documents computed from html5lib, independent of the C++ engine.

Usage:
  scene_reference.py FILE [--layer-gap F] [--color-mode per-layer|tag-hash]
                          [--texture-mode none|leaves|all] [--no-crop] [--query STR]
                          [--depth-min N] [--depth-max N] [--viewport WxH]

Writes the canonical scene JSON (revision 1, synthetic layout) to stdout.
"""
import argparse
import colorsys
import sys

import html5lib

SET3 = [0x8DD3C7, 0xFFFFB3, 0xBEBADA, 0xFB8072, 0x80B1D3, 0xFDB462,
        0xB3DE69, 0xFCCDE5, 0xD9D9D9, 0xBC80BD, 0xCCEBC5, 0xFFED6F]
VOID = {"area", "base", "br", "col", "embed", "hr", "img", "input", "link", "meta", "source", "track", "wbr"}
SPACE = " \t\n\f\r"


class Node:
    def __init__(self, tag, attrs, text, depth, path, parent):
        self.tag, self.attrs, self.text = tag, attrs, text
        self.depth, self.path, self.parent = depth, path, parent
        self.children = []


def collapse(text):
    return " ".join(w for w in "".join(" " if c in SPACE else c for c in text).split(" ") if w)


def parse(html_text):
    doc = html5lib.parse(html_text, treebuilder="dom", namespaceHTMLElements=False, scripting=True)
    nodes = []

    def walk(el, path, depth, parent):
        attrs = [(a.name, a.value) for a in (el.attributes.item(i) for i in range(el.attributes.length))]
        tag = el.tagName.lower()
        # Template contents belong to a separate fragment; html5lib leaks some of it.
        kids = [] if tag == "template" else el.childNodes
        text = "".join(c.data for c in kids if c.nodeType == c.TEXT_NODE)
        n = Node(tag, attrs, collapse(text), depth, path, parent)
        nodes.append(n)
        i = 0
        for c in kids:
            if c.nodeType == c.ELEMENT_NODE:
                n.children.append(walk(c, path + [i], depth + 1, n))
                i += 1
        return n

    walk(doc.documentElement, [], 0, None)
    return nodes


def size(n):
    return 1 + sum(size(c) for c in n.children)


def treemap(root, w, h):
    rects = {id(root): (0.0, 0.0, w, h)}

    def place(n):
        x, y, pw, ph = rects[id(n)]
        if not n.children:
            return
        weights = [size(c) for c in n.children]
        total = float(sum(weights))
        horizontal = n.depth % 2 == 0
        origin, extent = (x, pw) if horizontal else (y, ph)
        start, acc = origin, 0.0
        for k, c in enumerate(n.children):
            acc += weights[k]
            end = origin + extent if k == len(n.children) - 1 else origin + extent * (acc / total)
            rects[id(c)] = (start, y, end - start, ph) if horizontal else (x, start, pw, end - start)
            start = end
            place(c)

    place(root)
    return rects


def match_text(n):
    s = "<" + n.tag + "".join(' %s="%s"' % a for a in n.attrs) + ">" + n.text
    return s if n.tag in VOID else s + "</" + n.tag + ">"


def ascii_lower(s):
    return "".join(chr(ord(c) + 32) if "A" <= c <= "Z" else c for c in s)


def fnv1a64(data):
    h = 0xCBF29CE484222325
    for b in data:
        h = ((h ^ b) * 0x100000001B3) & 0xFFFFFFFFFFFFFFFF
    return h


def color(n, mode):
    if mode == "per-layer":
        v = SET3[n.depth % 12]
        return [(v >> 16 & 255) / 255.0, (v >> 8 & 255) / 255.0, (v & 255) / 255.0]
    hue = fnv1a64(n.tag.encode()) % 360
    return list(colorsys.hls_to_rgb(hue / 360.0, 0.55, 0.65))


def num(v):
    if v == 0:
        return "0"
    return "%.6g" % v


def jstr(s):
    out = ['"']
    for c in s:
        if c == '"':
            out.append('\\"')
        elif c == "\\":
            out.append("\\\\")
        elif c in "\b\f\n\r\t":
            out.append({"\b": "\\b", "\f": "\\f", "\n": "\\n", "\r": "\\r", "\t": "\\t"}[c])
        elif ord(c) < 0x20:
            out.append("\\u%04x" % ord(c))
        else:
            out.append(c)
    out.append('"')
    return "".join(out)


def arr(vals):
    return "[" + ",".join(num(v) for v in vals) + "]"


def path(p):
    return "[" + ",".join(str(i) for i in p) + "]"


def scene(html_text, a):
    nodes = parse(html_text)
    vw, vh = a.viewport
    rects = treemap(nodes[0], vw, vh)
    max_depth = max(n.depth for n in nodes)
    depth_max = max_depth if a.depth_max is None else a.depth_max
    scale, gap, height = 0.001, a.layer_gap, 0.2
    boxes = []
    for n in nodes:
        x, y, w, h = rects[id(n)]
        if not (a.depth_min <= n.depth <= depth_max):
            continue
        if ascii_lower(a.query) not in ascii_lower(match_text(n)):
            continue
        if not a.no_crop:
            x0, y0 = max(x, 0.0), max(y, 0.0)
            x1, y1 = min(x + w, vw), min(y + h, vh)
            if x1 <= x0 or y1 <= y0:
                continue
            x, y, w, h = x0, y0, x1 - x0, y1 - y0
        uv = None
        if a.texture_mode == "all" or (a.texture_mode == "leaves" and not n.children):
            clamp = lambda v: min(max(v, 0.0), 1.0)
            uv = [clamp(x / vw), clamp(1 - (y + h) / vh), clamp((x + w) / vw), clamp(1 - y / vh)]
        boxes.append({
            "node": n,
            "pos": [scale * (x + w / 2), n.depth * gap, scale * (y + h / 2)],
            "size": [scale * w, height, scale * h],
            "color": color(n, a.color_mode),
            "uv": uv,
        })
    by_path = {tuple(b["node"].path): b for b in boxes}
    lines = []
    for b in boxes:
        n = b["node"]
        parent = by_path.get(tuple(n.path[:-1])) if n.path else None
        if parent is None:
            continue
        pa, ps, ca, cs = parent["pos"], parent["size"], b["pos"], b["size"]
        lines.append((n.path, n.path[:-1], [ca[0], ca[1] - cs[1] / 2, ca[2]], [pa[0], pa[1] + ps[1] / 2, pa[2]]))

    out = ['{\n  "revision": 1,\n  "style": ']
    out.append('{"layer_gap":%s,"box_height":%s,"color_mode":%s,"texture_mode":%s,"world_scale":%s}'
               % (num(gap), num(height), jstr(a.color_mode), jstr(a.texture_mode), num(scale)))
    out.append(',\n  "boxes": ')
    if boxes:
        rows = []
        for b in boxes:
            n = b["node"]
            rows.append('    {"path":%s,"pos":%s,"size":%s,"color":%s,"uv":%s,"depth":%d,"match_text":%s}'
                        % (path(n.path), arr(b["pos"]), arr(b["size"]), arr(b["color"]),
                           arr(b["uv"]) if b["uv"] else "null", n.depth, jstr(match_text(n))))
        out.append("[\n" + ",\n".join(rows) + "\n  ]")
    else:
        out.append("[]")
    out.append(',\n  "lines": ')
    if lines:
        rows = ['    {"from":%s,"to":%s,"a":%s,"b":%s}' % (path(f), path(t), arr(p), arr(q)) for f, t, p, q in lines]
        out.append("[\n" + ",\n".join(rows) + "\n  ]")
    else:
        out.append("[]")
    out.append(',\n  "visible_count": %d,\n  "max_depth": %d,\n  "screenshot_ref": null\n}\n' % (len(boxes), max_depth))
    return "".join(out)


def main():
    p = argparse.ArgumentParser()
    p.add_argument("file")
    p.add_argument("--layer-gap", type=float, default=1.0)
    p.add_argument("--color-mode", default="per-layer", choices=["per-layer", "tag-hash"])
    p.add_argument("--texture-mode", default="none", choices=["none", "leaves", "all"])
    p.add_argument("--no-crop", action="store_true")
    p.add_argument("--query", default="")
    p.add_argument("--depth-min", type=int, default=0)
    p.add_argument("--depth-max", type=int, default=None)
    p.add_argument("--viewport", default="1280x800")
    a = p.parse_args()
    a.viewport = tuple(float(v) for v in a.viewport.lower().split("x"))
    with open(a.file, "rb") as f:
        sys.stdout.write(scene(f.read().decode("utf-8", "replace"), a))


if __name__ == "__main__":
    main()
