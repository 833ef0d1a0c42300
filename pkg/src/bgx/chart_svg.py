"""Write-only SVG rendering of bigraded charts.

Classes are dots at (x, y) = (t - s, s), with several classes in one
bidegree fanned out horizontally.  Registered operations draw on top:
vertical segments for the two-cell splice tower, labelled arrows for the
family and Steenrod operations.  Layout is fixed by the input ordering so
identical inputs give identical bytes.
"""

from __future__ import annotations

__all__ = ["render_chart_svg"]

CELL = 40
DOT = 3.5
PAD = 60


def _positions(dims):
    """Pixel position of every class: (s,t,k) -> (px, py), plus extents."""
    pos = {}
    if dims:
        xs = [t - s for (s, t) in dims]
        ys = [s for (s, t) in dims]
        x0, x1 = min(xs + [0]), max(xs + [0])
        y0, y1 = min(ys + [0]), max(ys + [0])
    else:
        x0 = y0 = 0
        x1 = y1 = 1
    for (s, t), count in dims.items():
        cx = PAD + (t - s - x0) * CELL
        cy = PAD + (y1 - s) * CELL
        spread = min(CELL * 0.7, 10 * max(count - 1, 0))
        for k in range(count):
            off = 0.0 if count == 1 else -spread / 2 + spread * k / (count - 1)
            pos[(s, t, k)] = (cx + off, cy)
    return pos, (x0, x1, y0, y1)


def render_chart_svg(dims: dict, edges=()) -> str:
    """Render a chart.

    dims: {(s, t): number of classes}; edges: iterable of
    (kind, (s1,t1,k1), (s2,t2,k2), label) with kind in {"h0","Q","Sq"}.
    """
    dims = {k: v for k, v in dims.items() if v}
    pos, (x0, x1, y0, y1) = _positions(dims)
    width = PAD * 2 + (x1 - x0 + 1) * CELL
    height = PAD * 2 + (y1 - y0 + 1) * CELL
    out = []
    out.append(
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" '
        'viewBox="0 0 %d %d">' % (width, height, width, height)
    )
    out.append('<rect width="100%" height="100%" fill="white"/>')
    # axes
    ax_y = PAD + (y1 - y0 + 0.5) * CELL
    out.append(
        '<line x1="%d" y1="%.1f" x2="%d" y2="%.1f" stroke="black"/>'
        % (PAD - CELL // 2, ax_y, width - PAD // 2, ax_y)
    )
    out.append(
        '<line x1="%d" y1="%d" x2="%d" y2="%.1f" stroke="black"/>'
        % (PAD - CELL // 2, PAD - CELL // 2, PAD - CELL // 2, ax_y)
    )
    for x in range(x0, x1 + 1):
        px = PAD + (x - x0) * CELL
        out.append(
            '<text x="%.1f" y="%.1f" font-size="10" text-anchor="middle">%d</text>'
            % (px, ax_y + 14, x)
        )
    for y in range(y0, y1 + 1):
        py = PAD + (y1 - y) * CELL
        out.append(
            '<text x="%.1f" y="%.1f" font-size="10" text-anchor="end">%d</text>'
            % (PAD - CELL // 2 - 4, py + 3, y)
        )
    style = {
        "h0": ('stroke="black"', False),
        "Q": ('stroke="#993333" stroke-dasharray="4 2"', True),
        "Sq": ('stroke="#336699" stroke-dasharray="1 3"', True),
    }
    for kind, a, b, label in edges:
        if a not in pos or b not in pos:
            continue
        (xa, ya), (xb, yb) = pos[a], pos[b]
        stroke, labelled = style.get(kind, ('stroke="gray"', True))
        out.append(
            '<line x1="%.1f" y1="%.1f" x2="%.1f" y2="%.1f" %s/>'
            % (xa, ya, xb, yb, stroke)
        )
        if labelled and label:
            out.append(
                '<text x="%.1f" y="%.1f" font-size="8" fill="#555">%s</text>'
                % ((xa + xb) / 2 + 3, (ya + yb) / 2 - 3, label)
            )
    for key in sorted(pos):
        x, y = pos[key]
        out.append('<circle cx="%.1f" cy="%.1f" r="%.1f" fill="black"/>' % (x, y, DOT))
    out.append("</svg>")
    return "\n".join(out) + "\n"
