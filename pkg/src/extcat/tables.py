"""Interchange files and the table-backed engine.

Format (UTF-8, line oriented, '#' comments):

    [meta]
    label = mod-kA2
    mode = exact              # exact | general
    characteristic = 2
    [indecs]
    S1
    S2
    P1
    [hom]                     # src dst dim, sparse, missing = 0
    S1 S1 1
    P1 S1 1
    [ext]                     # C A dim, sparse: dim E(C, A)
    S1 S2 1
    [extriangles]             # a_end | mid | c_end | ext_id | annotations-json
    S2 | P1 | S1 | e:1 | {"epi": true, "defect": {}}

Objects are written as '0' or 'name', 'name+name', '2*name+name'.  The split
extriangle for every pair is implicit.  In general mode the morphism-level
ops are served from record annotations and raise AnnotationMissing when the
needed key is absent; exact mode hardwires epi deflations and zero defects.

Round trip: load(save(m)) equals m at object level (names, tables, records).
"""

from __future__ import annotations

import json

import numpy as np

from .core import (
    BackendContract,
    CategoryModel,
    Extriangle,
    IndecId,
    Obj,
    split_extriangle,
    validate_model,
)
from .errors import (
    AnnotationMissing,
    NoExtension,
    ParseError,
    SchemaError,
    ValidationError,
    WindowOverflow,
)

COMBO_VISIT_CAP = 4096


class TableBackend(BackendContract):
    """Serves the contract from explicitly stored extriangle records.

    Extriangles with decomposable ends are derived as direct sums of stored
    records plus split pieces, deduplicated by object-level data.
    """

    def __init__(self, records, exact_mode: bool):
        self.records = tuple(records)
        self.exact_mode = exact_mode
        self._deflation_cache = {}

    # -- record combination -------------------------------------------------
    def _fitting_records(self, c: Obj, a: Obj):
        return [
            r
            for r in self.records
            if c.contains(r.c_end) and a.contains(r.a_end)
        ]

    def middle_terms(self, model, c: Obj, a: Obj, on_overflow="raise"):
        out = {("split",): split_extriangle(a, c)}
        fitting = self._fitting_records(c, a)
        budget = [COMBO_VISIT_CAP]

        def walk(start, used_c, used_a, mid_acc, parts):
            if budget[0] <= 0:
                return
            budget[0] -= 1
            if parts:
                rest_a = a - used_a
                rest_c = c - used_c
                mid = mid_acc + rest_a + rest_c
                key = tuple(sorted(parts))
                if key not in out:
                    ann = self._sum_annotations(parts)
                    out[key] = Extriangle(a, mid, c, "+".join(key), ann)
            for i in range(start, len(fitting)):
                r = fitting[i]
                if (c - used_c).contains(r.c_end) and (a - used_a).contains(r.a_end):
                    walk(
                        i,
                        used_c + r.c_end,
                        used_a + r.a_end,
                        mid_acc + r.mid,
                        parts + [self._record_token(r)],
                    )

        walk(0, Obj.zero(), Obj.zero(), Obj.zero(), [])
        return sorted(out.values(), key=lambda x: (x.mid.sort_key(), x.ext_id))

    def _record_token(self, r: Extriangle) -> str:
        return f"{r.ext_id}@{r.a_end.items}|{r.c_end.items}"

    def _by_token(self, token: str):
        for r in self.records:
            if self._record_token(r) == token:
                return r
        raise SchemaError(f"unknown record token {token}")

    def _sum_annotations(self, tokens):
        parts = [self._by_token(t) for t in tokens]
        ann = {"_parts": tuple(tokens)}
        defect = {}
        codefect = {}
        epi = True
        complete = True
        for r in parts:
            ra = r.annotations or {}
            if "defect" in ra:
                for k, v in ra["defect"].items():
                    defect[k] = defect.get(k, 0) + v
            elif not self.exact_mode:
                complete = False
            if "codefect" in ra:
                for k, v in ra["codefect"].items():
                    codefect[k] = codefect.get(k, 0) + v
            if "epi" in ra:
                epi = epi and bool(ra["epi"])
            elif not self.exact_mode:
                complete = False
        if self.exact_mode or complete:
            ann["defect"] = defect
            ann["codefect"] = codefect
            ann["epi"] = epi if not self.exact_mode else True
        return ann

    # -- contract ops ---------------------------------------------------------
    def left_exact_defect(self, model, q: Obj, xi: Extriangle) -> int:
        if xi.is_split or q.is_zero:
            return 0
        if self.exact_mode:
            return 0
        ann = xi.annotations or {}
        if "defect" not in ann:
            raise AnnotationMissing(
                f"no left-exactness annotation on record {xi.ext_id}"
            )
        table = ann["defect"]
        return sum(m * int(table.get(model.name_of(i), 0)) for i, m in q.items)

    def co_defect(self, model, t: Obj, xi: Extriangle) -> int:
        if xi.is_split or t.is_zero:
            return 0
        if self.exact_mode:
            return 0
        ann = xi.annotations or {}
        if "codefect" not in ann:
            raise AnnotationMissing(f"no codefect annotation on record {xi.ext_id}")
        table = ann["codefect"]
        return sum(m * int(table.get(model.name_of(i), 0)) for i, m in t.items)

    def mono_defect(self, model, t: Obj, xi: Extriangle) -> int:
        if xi.is_split or t.is_zero or self.exact_mode:
            return 0
        raise AnnotationMissing("mono defects are not annotated in general mode")

    def is_epi(self, model, xi: Extriangle, window=None) -> bool:
        if xi.is_split or self.exact_mode:
            return True
        ann = xi.annotations or {}
        if "epi" not in ann:
            raise AnnotationMissing(f"no epi annotation on record {xi.ext_id}")
        return bool(ann["epi"])

    def is_mono(self, model, xi: Extriangle, window=None) -> bool:
        if xi.is_split or self.exact_mode:
            return True
        raise AnnotationMissing("mono flags are not annotated in general mode")

    def deflation_nonzero(self, model, xi: Extriangle):
        if xi.c_end.is_zero or xi.mid.is_zero:
            return False
        if xi.is_split or xi.a_end.is_zero:
            return True
        ann = xi.annotations or {}
        if "q_nonzero" in ann:
            return bool(ann["q_nonzero"])
        if self.exact_mode:
            # exact deflations onto nonzero objects are epi, hence nonzero
            return True
        raise AnnotationMissing("q_nonzero not annotated")

    def universal_extension(self, model, c: Obj, a_index: int) -> Extriangle:
        a = Obj.of(a_index)
        l = model.ext_dim(c, a)
        if l == 0:
            raise NoExtension(f"E({model.label(c)}, {model.label(a)}) = 0")
        want_a = Obj.from_dict({a_index: l})
        candidates = [
            xi
            for xi in self.middle_terms(model, c, want_a)
            if not xi.is_split and xi.a_end == want_a
        ]
        if len(candidates) != 1:
            raise AnnotationMissing(
                "universal extension not determined by stored records"
            )
        return candidates[0]

    def right_minimal_reduce(self, model, q: Obj, target_index: int, xi: Extriangle):
        if q.is_zero:
            return q, xi
        if xi.is_split:
            if xi.a_end.is_zero:
                return q, xi
            c = xi.c_end
            return c, Extriangle(Obj.zero(), c, c, "split")
        # components with no morphism to the target are forced to strip
        target = Obj.of(target_index)
        keep = {
            i: m for i, m in q.items if model.hom_dim(Obj.of(i), target) > 0
        }
        reduced = Obj.from_dict(keep)
        if reduced != q:
            stripped = q - reduced
            new_a = xi.a_end - stripped
            new_xi = Extriangle(new_a, reduced, xi.c_end, xi.ext_id + "|rmin", xi.annotations)
            q, xi = reduced, new_xi
        if q.total() <= 1:
            return q, xi
        ann = xi.annotations or {}
        if ann.get("right_minimal"):
            return q, xi
        raise AnnotationMissing(
            "right minimality undecidable from tables for a decomposable cover"
        )

    def nonzero_deflation_orbits(self, model, m: Obj, c_index: int):
        cache_key = (m.items, c_index)
        if cache_key in self._deflation_cache:
            return self._deflation_cache[cache_key]
        c = Obj.of(c_index)
        out = []
        if m.contains(c):
            out.append((m - c, Extriangle(m - c, m, c, "split")))
        for r in self.records:
            if r.c_end == c and m.contains(r.mid):
                rest = m - r.mid
                a = r.a_end + rest
                ann = dict(r.annotations or {})
                ann["_parts"] = (self._record_token(r),)
                out.append((a, Extriangle(a, m, c, r.ext_id, ann)))
        self._deflation_cache[cache_key] = out
        return out


def _parse_obj(model_names, text, line_no):
    text = text.strip()
    if text == "0":
        return Obj.zero()
    counts = {}
    for part in text.split("+"):
        part = part.strip()
        mult = 1
        if "*" in part:
            head, part = part.split("*", 1)
            try:
                mult = int(head)
            except ValueError as exc:
                raise ParseError(f"bad multiplicity {head!r}", line_no) from exc
        if part not in model_names:
            raise SchemaError(f"line {line_no}: unknown indecomposable {part!r}")
        counts[model_names[part]] = counts.get(model_names[part], 0) + mult
    return Obj.from_dict(counts)


def loads_model(text: str, validate: bool = True) -> CategoryModel:
    section = None
    meta = {"mode": "general", "characteristic": "2", "label": "", "wic": "true"}
    names = []
    hom_entries = []
    ext_entries = []
    record_lines = []
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            section = line[1:-1].strip().lower()
            if section not in ("meta", "indecs", "hom", "ext", "extriangles"):
                raise ParseError(f"unknown section {section!r}", line_no)
            continue
        if section is None:
            raise ParseError("content before first section header", line_no)
        if section == "meta":
            if "=" not in line:
                raise ParseError("meta lines must be key = value", line_no)
            key, val = (s.strip() for s in line.split("=", 1))
            meta[key] = val
        elif section == "indecs":
            if not line or any(ch in line for ch in "|+*"):
                raise SchemaError(f"line {line_no}: bad indecomposable name {line!r}")
            names.append(line)
        elif section in ("hom", "ext"):
            parts = line.split()
            if len(parts) != 3:
                raise ParseError("expected: src dst dim", line_no)
            try:
                dim = int(parts[2])
            except ValueError as exc:
                raise ParseError(f"bad dimension {parts[2]!r}", line_no) from exc
            (hom_entries if section == "hom" else ext_entries).append(
                (parts[0], parts[1], dim, line_no)
            )
        else:
            record_lines.append((line, line_no))

    if len(set(names)) != len(names):
        raise SchemaError("duplicate indecomposable names")
    name_index = {nm: i for i, nm in enumerate(names)}
    n = len(names)
    hom = np.zeros((n, n), dtype=np.int64)
    ext = np.zeros((n, n), dtype=np.int64)
    for src, dst, dim, line_no in hom_entries:
        for nm in (src, dst):
            if nm not in name_index:
                raise SchemaError(f"line {line_no}: unknown indecomposable {nm!r}")
        hom[name_index[src], name_index[dst]] = dim
    for c, a, dim, line_no in ext_entries:
        for nm in (c, a):
            if nm not in name_index:
                raise SchemaError(f"line {line_no}: unknown indecomposable {nm!r}")
        ext[name_index[c], name_index[a]] = dim

    mode = meta.get("mode", "general").strip().lower()
    if mode not in ("general", "exact"):
        raise SchemaError(f"unknown mode {mode!r}")
    records = []
    for line, line_no in record_lines:
        parts = [s.strip() for s in line.split("|")]
        if len(parts) not in (4, 5):
            raise ParseError("expected: a_end | mid | c_end | ext_id [| json]", line_no)
        a_end = _parse_obj(name_index, parts[0], line_no)
        mid = _parse_obj(name_index, parts[1], line_no)
        c_end = _parse_obj(name_index, parts[2], line_no)
        ext_id = parts[3]
        if ext_id == "split":
            raise SchemaError(f"line {line_no}: split records are implicit")
        ann = None
        if len(parts) == 5 and parts[4]:
            try:
                ann = json.loads(parts[4])
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad annotation json: {exc}", line_no) from exc
        records.append(Extriangle(a_end, mid, c_end, ext_id, ann))

    backend = TableBackend(records, exact_mode=(mode == "exact"))
    model = CategoryModel(
        indecs=tuple(IndecId(i, nm) for i, nm in enumerate(names)),
        hom_table=hom,
        ext_table=ext,
        backend=backend,
        meta={
            "is_exact_mode": mode == "exact",
            "field_characteristic": int(meta.get("characteristic", "2")),
            "window_label": meta.get("label", ""),
            "wic": meta.get("wic", "true").lower() == "true",
        },
    )
    if validate:
        report = validate_model(model)
        if not report.ok:
            raise ValidationError(report)
    return model


def load_model(path, validate: bool = True) -> CategoryModel:
    with open(path, "r", encoding="utf-8") as fh:
        return loads_model(fh.read(), validate=validate)


def _annotations_for_save(model, xi: Extriangle) -> dict:
    backend = model.backend
    ann = {}
    source = xi.annotations or {}
    carried = {k: source[k] for k in ("defect", "codefect", "epi", "q_nonzero") if k in source}
    if carried:
        return carried
    try:
        defect = {}
        codefect = {}
        for ind in model.indec_objs():
            d = backend.left_exact_defect(model, ind, xi)
            if d:
                defect[model.label(ind)] = d
            cd = backend.co_defect(model, ind, xi)
            if cd:
                codefect[model.label(ind)] = cd
        ann["defect"] = defect
        ann["codefect"] = codefect
        ann["epi"] = not codefect
    except (AnnotationMissing, NotImplementedError):
        pass
    return ann


def dumps_model(model: CategoryModel) -> str:
    lines = ["# extcat model interchange v1", "[meta]"]
    lines.append(f"label = {model.window_label}")
    lines.append(f"mode = {'exact' if model.is_exact_mode else 'general'}")
    lines.append(f"characteristic = {model.characteristic}")
    lines.append(f"wic = {'true' if model.meta.get('wic', True) else 'false'}")
    lines.append("[indecs]")
    for ind in model.indecs:
        if not ind.name or any(ch in ind.name for ch in "|+*# "):
            raise SchemaError(f"indecomposable name {ind.name!r} not serialisable")
        lines.append(ind.name)
    n = model.n_indecs()
    lines.append("[hom]")
    for i in range(n):
        for j in range(n):
            if model.hom_table[i, j]:
                lines.append(
                    f"{model.name_of(i)} {model.name_of(j)} {int(model.hom_table[i, j])}"
                )
    lines.append("[ext]")
    for i in range(n):
        for j in range(n):
            if model.ext_table[i, j]:
                lines.append(
                    f"{model.name_of(i)} {model.name_of(j)} {int(model.ext_table[i, j])}"
                )
    lines.append("[extriangles]")
    for xi in model.extriangle_records(include_split=False):
        ann = _annotations_for_save(model, xi)
        ann_text = json.dumps(ann, sort_keys=True) if ann else "{}"
        lines.append(
            f"{model.label(xi.a_end)} | {model.label(xi.mid)} | "
            f"{model.label(xi.c_end)} | {xi.ext_id} | {ann_text}"
        )
    return "\n".join(lines) + "\n"


def save_model(model: CategoryModel, path) -> None:
    text = dumps_model(model)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def models_equal_object_level(m1: CategoryModel, m2: CategoryModel) -> bool:
    """Object-level equality: names, tables, and nonsplit record triples."""
    if [i.name for i in m1.indecs] != [i.name for i in m2.indecs]:
        return False
    if not np.array_equal(m1.hom_table, m2.hom_table):
        return False
    if not np.array_equal(m1.ext_table, m2.ext_table):
        return False

    def record_set(m):
        return {
            (xi.a_end.items, xi.mid.items, xi.c_end.items)
            for xi in m.extriangle_records(include_split=False)
        }

    return record_set(m1) == record_set(m2)
