"""Bundled fixtures: the three worked systems on the printed window, the
window itself, and two exact module-category models.

Names: ex5_1, ex5_2, ex5_3 (system fixtures carrying phi), win4 (the
17-object printed segment), modA2 (hand-authored interchange text for the
A_2 module category), modA4 (the A_4 module window in exact mode via the
interchange round trip).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import strat
from .core import CategoryModel
from .derived import build_window, fig1_window, restrict_window
from .errors import UnknownIndec
from .tables import dumps_model, loads_model

FIXTURE_NAMES = ("ex5_1", "ex5_2", "ex5_3", "win4", "modA2", "modA4")

SYSTEM_PHIS = {
    "ex5_1": ("S2", "P3", "S3[1]"),
    "ex5_2": ("P2[1]", "S2", "P3"),
    "ex5_3": ("N[1]", "S2", "P3"),
}

MODA2_TEXT = """\
# mod kA2: quiver 1 -> 2, three indecomposables
[meta]
label = modA2
mode = exact
characteristic = 2
wic = true
[indecs]
S1
S2
P1
[hom]
S1 S1 1
S2 S2 1
P1 P1 1
P1 S1 1
S2 P1 1
[ext]
S1 S2 1
[extriangles]
S2 | P1 | S1 | e:1 | {}
"""


@dataclass
class Fixture:
    name: str
    model: CategoryModel
    ambient: Optional[CategoryModel] = None
    phi_names: Optional[tuple] = None

    def phi(self, ambient: bool = False):
        model = self.ambient if ambient else self.model
        return tuple(model.index_of(nm) for nm in self.phi_names)


_CACHE = {}


def fixture(name: str, p: int = 2) -> Fixture:
    """Build (and cache) a bundled fixture by name."""
    key = (name, p)
    if key in _CACHE:
        return _CACHE[key]
    if name in SYSTEM_PHIS:
        win = fixture("win4", p).model
        phi_names = SYSTEM_PHIS[name]
        phi_w = tuple(win.index_of(nm) for nm in phi_names)
        closure = strat.filtered_closure(phi_w, win)
        model = restrict_window(win, closure.member_names(win))
        model.meta["window_label"] = name
        fx = Fixture(name, model, ambient=win, phi_names=phi_names)
    elif name == "win4":
        fx = Fixture(name, fig1_window(p))
    elif name == "modA2":
        model = loads_model(MODA2_TEXT)
        model.meta["field_characteristic"] = p
        fx = Fixture(name, model)
    elif name == "modA4":
        derived = build_window(4, [0], label="modA4", p=p)
        model = loads_model(dumps_model(derived))
        fx = Fixture(name, model)
    else:
        raise UnknownIndec(f"unknown fixture {name!r}; choose from {FIXTURE_NAMES}")
    _CACHE[key] = fx
    return fx
