"""HTML documents as layered 3D scenes."""

import json

from ._domcity import (
    DomcityError,
    DomTree,
    Session,
    __version__,
    apply_diff,
    apply_filters,
    color_for,
    diff_scenes,
    export_scene,
    match_search,
    parse_html,
    synthetic_layout,
    texture_uv,
)


def scene(html, style=None, filter=None, width=1280.0, height=800.0):
    """Scene for `html` as a dict. `style` and `filter` are dicts."""
    return json.loads(
        export_scene(
            html,
            json.dumps(style) if style is not None else None,
            json.dumps(filter) if filter is not None else None,
            width,
            height,
        )
    )


__all__ = [
    "DomcityError",
    "DomTree",
    "Session",
    "__version__",
    "apply_diff",
    "apply_filters",
    "color_for",
    "diff_scenes",
    "export_scene",
    "match_search",
    "parse_html",
    "scene",
    "synthetic_layout",
    "texture_uv",
]
