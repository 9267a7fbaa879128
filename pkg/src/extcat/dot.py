"""DOT rendering of a window's AR quiver with optional highlight sets."""

from __future__ import annotations

from .core import CategoryModel


def render_dot(model: CategoryModel, highlight=None) -> str:
    """Graphviz source; nodes in canonical order, highlighted nodes shaded.

    Derived-backend windows draw their AR-quiver arrows; table windows are
    rendered as bare vertex sets.
    """
    highlight = set(highlight or [])
    lines = [f'digraph "{model.window_label}" {{', "  rankdir=LR;"]
    for ind in model.indecs:
        attrs = ' [style=filled, fillcolor=lightgrey]' if ind.name in highlight else ""
        lines.append(f'  "{ind.name}"{attrs};')
    try:
        from .derived import ar_edges

        edges = ar_edges(model)
    except TypeError:
        edges = []
    for i, j in edges:
        lines.append(f'  "{model.name_of(i)}" -> "{model.name_of(j)}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
