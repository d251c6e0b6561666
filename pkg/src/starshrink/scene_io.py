"""Scene file format: parse, validate, assemble, serialize.

The format is line-based key-value text.  A scene file declares the
domain, the sampling mesh, the open region U, and a list of elements of
kind ``starlike``, ``starlike-equivalent``, or ``recursive``.  Parsing
produces a plain spec dict (exact round-trip through ``serialize_scene``)
and assembly turns the spec into a sampled :class:`Scene` plus an
:class:`RSEDecomposition` with every invariant checked at load.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .decomposition import Decomposition, Scene
from .errors import ShrinkError
from .geometry import (
    CompactSample,
    Disc,
    RadiusFunction,
    Region,
    Segment,
    StarlikeSet,
    epsilon_net,
)
from .maps import Affine, Identity, PlanarMap, map_from_spec
from .shrink import Chart, RecursiveSet, RSEDecomposition, StageChart, pad_filtration
from .starlike import NullCollection


class SceneParseError(ValueError):
    """Malformed scene text, with the offending line number."""


@dataclass
class SceneBundle:
    """Assembled scene plus its decomposition and squeeze ingredients."""

    name: str
    scene: Scene
    rse: RSEDecomposition
    spec: dict

    @property
    def u_region(self) -> Region:
        return self.rse.u_region

    def decomposition(self) -> Decomposition:
        return Decomposition(self.scene, self.rse.carriers(), self.u_region)

    def squeeze_inputs(self, element_id: Optional[str] = None):
        """(star, collar, bystanders) for a direct radial squeeze.

        The element must be of kind starlike; every other element's
        carrier becomes a bystander.
        """
        specs = {e["id"]: e for e in self.spec["elements"]}
        if element_id is None:
            element_id = next(e["id"] for e in self.spec["elements"] if e["kind"] == "starlike")
        espec = specs[element_id]
        if espec["kind"] != "starlike":
            raise ValueError(f"element {element_id} is not starlike")
        star = StarlikeSet(espec["origin"], RadiusFunction(espec["radii"]))
        collar = star.radius.offset(espec["collar"])
        others = [(el.id, el.carrier) for el in self.rse.elements if el.id != element_id]
        bystanders = (
            NullCollection([c for _, c in others], [i for i, _ in others]) if others else None
        )
        return star, collar, bystanders


# ---------------------------------------------------------------------------
# region and chart specs
# ---------------------------------------------------------------------------


def region_from_spec(spec: list) -> Region:
    kind = spec[0]
    if kind == "disc":
        return Disc((spec[1], spec[2]), spec[3])
    if kind == "segment":
        return Segment((spec[1], spec[2]), (spec[3], spec[4]))
    if kind == "star":
        return StarlikeSet((spec[1], spec[2]), RadiusFunction(spec[3]))
    raise ValueError(f"unknown region kind {kind!r}")


def region_to_spec(region: Region) -> list:
    if isinstance(region, Disc):
        return ["disc", region.center[0], region.center[1], region.radius]
    if isinstance(region, Segment):
        return ["segment", region.a[0], region.a[1], region.b[0], region.b[1]]
    if isinstance(region, StarlikeSet):
        return ["star", region.origin[0], region.origin[1], list(region.radius.radii)]
    raise ValueError(f"region kind {type(region).__name__} has no file form")


def chart_from_spec(spec: list) -> PlanarMap:
    kind = spec[0]
    if kind == "scale":
        return Affine.scaling(spec[1], (spec[2], spec[3]))
    if kind == "translate":
        return Affine.translation(spec[1], spec[2])
    return map_from_spec(spec)


# ---------------------------------------------------------------------------
# assembly
# ---------------------------------------------------------------------------


def _inverse_stretch_estimate(chart: Chart, mesh: float) -> float:
    sample = epsilon_net(chart.domain, mesh)
    img = chart.map.apply(sample.points)
    if len(sample) < 2:
        return 1.0
    k = min(6, len(sample) - 1)
    _, idx = sample.kdtree.query(sample.points, k=k + 1)
    idx = idx[:, 1:]
    d_scene = np.linalg.norm(sample.points[:, None, :] - sample.points[idx], axis=2)
    d_img = np.linalg.norm(img[:, None, :] - img[idx], axis=2)
    ok = d_img > 0
    return float((d_scene[ok] / d_img[ok]).max()) if ok.any() else 1.0


def _dedupe_after(first: np.ndarray, extra: np.ndarray) -> np.ndarray:
    """Append extra points, dropping those colliding with earlier ones."""
    if len(first) == 0:
        return extra
    d, _ = CompactSample(first, 1.0).kdtree.query(extra)
    return np.concatenate([first, extra[d > 1e-12]])


def _stage_chart_from_spec(sspec: dict, mesh: float) -> StageChart:
    chart = Chart(chart_from_spec(sspec["chart"]), region_from_spec(sspec["domain"]))
    chart.validate(mesh)
    image = StarlikeSet(sspec["image_origin"], RadiusFunction(sspec["image_radii"]))
    return StageChart(
        chart=chart,
        image=image,
        activation_center=np.asarray(sspec["activation_center"], dtype=float),
        activation_radius=sspec["activation_radius"],
    )


def _stage_carrier(sc: StageChart, mesh: float) -> np.ndarray:
    """Scene-coordinate sample of one stage's chart-image body."""
    stretch = _inverse_stretch_estimate(sc.chart, mesh)
    image_net = epsilon_net(sc.image, mesh / max(stretch, 1.0))
    return sc.chart.map.inverse().apply(image_net.points)


def _element_from_spec(espec: dict, mesh: float) -> RecursiveSet:
    el_id = espec["id"]
    kind = espec["kind"]
    if kind == "starlike":
        origin = np.asarray(espec["origin"], dtype=float)
        radii = RadiusFunction(espec["radii"])
        body = StarlikeSet(origin, radii)
        domain = Disc(origin, radii.max_radius + 2.0 * espec["collar"])
        sc = StageChart(
            chart=Chart(Identity(), domain),
            image=body,
            activation_center=origin,
            activation_radius=espec["collar"],
        )
        sc.chart.validate(mesh)
        carrier = epsilon_net(body, mesh)
        tail = CompactSample(origin.reshape(1, 2), mesh)
        return RecursiveSet([carrier, tail], [sc], id=el_id)
    if kind == "starlike-equivalent":
        sc = _stage_chart_from_spec(espec, mesh)
        pts = _stage_carrier(sc, mesh)
        tail_pt = sc.chart.map.inverse().apply(sc.image.origin.reshape(1, 2))
        pts = _dedupe_after(tail_pt, pts)
        carrier = CompactSample(pts, mesh)
        return RecursiveSet([carrier, CompactSample(tail_pt, mesh)], [sc], id=el_id)
    if kind == "recursive":
        tail_pt = np.asarray(espec["tail"], dtype=float).reshape(1, 2)
        stage_charts = [_stage_chart_from_spec(s, mesh) for s in espec["stages"]]
        stages = [CompactSample(tail_pt, mesh)]
        for sc in reversed(stage_charts):
            pts = _dedupe_after(stages[0].points, _stage_carrier(sc, mesh))
            stages.insert(0, CompactSample(pts, mesh))
        return RecursiveSet(stages, stage_charts, id=el_id)
    raise ValueError(f"unknown element kind {kind!r}")


def _carrier_inside_body(points: np.ndarray, sc) -> bool:
    """True when some point lies strictly inside the stage's declared body."""
    mask = sc.chart.domain.contains(points)
    if not mask.any():
        return False
    excess = sc.image.radial_excess(sc.chart.map.apply(points[mask]))
    return bool((excess < -1e-9).any())


def assemble_scene(spec: dict) -> SceneBundle:
    """Build the sampled scene and decomposition, checking all invariants."""
    mesh = spec["mesh"]
    domain = region_from_spec(spec["domain"])
    u_region = region_from_spec(spec["u"])
    elements = []
    for espec in spec["elements"]:
        try:
            elements.append(_element_from_spec(espec, mesh))
        except (ValueError, ShrinkError) as exc:
            raise ValueError(f"element {espec.get('id', '?')}: {exc}") from exc
    for a in range(len(elements)):
        for b in range(len(elements)):
            if a == b:
                continue
            if any(
                _carrier_inside_body(elements[a].carrier.points, sc)
                for sc in elements[b].stage_charts
            ):
                raise ValueError(
                    f"elements {elements[a].id} and {elements[b].id} overlap"
                )
    if elements:
        max_len = max(el.length for el in elements)
        elements = [pad_filtration(el, max_len, pad_radius=mesh) for el in elements]
    rse = RSEDecomposition(elements, u_region)
    extras = (
        np.concatenate([el.carrier.points for el in elements]) if elements else None
    )
    scene = Scene.build(domain, mesh, extra_points=extras, name=spec["name"])
    bundle = SceneBundle(spec["name"], scene, rse, spec)
    bundle.decomposition()  # disjointness / containment invariants fire here
    return bundle


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_seq(xs) -> str:
    return " ".join(_fmt(x) for x in xs)


def _region_line(key: str, rspec: list) -> str:
    kind = rspec[0]
    if kind == "star":
        return f"{key} star {_fmt(rspec[1])} {_fmt(rspec[2])} {_fmt_seq(rspec[3])}"
    return f"{key} {kind} {_fmt_seq(rspec[1:])}"


def _chart_line(cspec: list) -> str:
    if cspec[0] == "identity":
        return "chart identity"
    return f"chart {cspec[0]} {_fmt_seq(cspec[1:])}"


def serialize_scene(spec: dict) -> str:
    lines = [f"scene {spec['name']}", f"mesh {_fmt(spec['mesh'])}"]
    lines.append(_region_line("domain", spec["domain"]))
    lines.append(_region_line("u", spec["u"]))
    for espec in spec["elements"]:
        lines.append("")
        lines.append(f"element {espec['id']} {espec['kind']}")
        if espec["kind"] == "starlike":
            lines.append(f"  origin {_fmt_seq(espec['origin'])}")
            lines.append(f"  radii {_fmt_seq(espec['radii'])}")
            lines.append(f"  collar {_fmt(espec['collar'])}")
        elif espec["kind"] == "starlike-equivalent":
            lines.extend(_stage_lines(espec, indent="  "))
        else:
            lines.append(f"  tail {_fmt_seq(espec['tail'])}")
            for sspec in espec["stages"]:
                lines.append("  stage")
                lines.extend(_stage_lines(sspec, indent="    "))
        lines.append("end")
    return "\n".join(lines) + "\n"


def _stage_lines(sspec: dict, indent: str) -> list[str]:
    return [
        indent + _chart_line(sspec["chart"]),
        indent + _region_line("domain", sspec["domain"]),
        indent + f"image-origin {_fmt_seq(sspec['image_origin'])}",
        indent + f"image-radii {_fmt_seq(sspec['image_radii'])}",
        indent + f"activation {_fmt_seq(sspec['activation_center'])} {_fmt(sspec['activation_radius'])}",
        indent + f"collar {_fmt(sspec['collar'])}",
    ]


class _Lines:
    def __init__(self, text: str):
        self.rows = text.splitlines()
        self.pos = 0

    def next_content(self) -> tuple[int, list[str]] | None:
        while self.pos < len(self.rows):
            n = self.pos
            self.pos += 1
            row = self.rows[n].strip()
            if row and not row.startswith("#"):
                return n + 1, row.split()
            continue
        return None

    def peek_content(self) -> tuple[int, list[str]] | None:
        saved = self.pos
        out = self.next_content()
        self.pos = saved
        return out


def _parse_floats(tokens: list[str], lineno: int, expect: Optional[int] = None) -> list[float]:
    try:
        vals = [float(t) for t in tokens]
    except ValueError as exc:
        raise SceneParseError(f"line {lineno}: expected numbers, got {tokens!r}") from exc
    if expect is not None and len(vals) != expect:
        raise SceneParseError(f"line {lineno}: expected {expect} numbers, got {len(vals)}")
    return vals


def _parse_region(tokens: list[str], lineno: int) -> list:
    if not tokens:
        raise SceneParseError(f"line {lineno}: missing region")
    kind = tokens[0]
    if kind == "disc":
        return ["disc"] + _parse_floats(tokens[1:], lineno, 3)
    if kind == "segment":
        return ["segment"] + _parse_floats(tokens[1:], lineno, 4)
    if kind == "star":
        vals = _parse_floats(tokens[1:], lineno)
        if len(vals) < 10:
            raise SceneParseError(f"line {lineno}: star region needs origin plus >= 8 radii")
        return ["star", vals[0], vals[1], vals[2:]]
    raise SceneParseError(f"line {lineno}: unknown region kind {kind!r}")


def _parse_chart(tokens: list[str], lineno: int) -> list:
    if not tokens:
        raise SceneParseError(f"line {lineno}: missing chart constructor")
    kind = tokens[0]
    if kind == "identity":
        return ["identity"]
    if kind == "affine":
        return ["affine"] + _parse_floats(tokens[1:], lineno, 6)
    if kind == "scale":
        return ["scale"] + _parse_floats(tokens[1:], lineno, 3)
    if kind == "translate":
        return ["translate"] + _parse_floats(tokens[1:], lineno, 2)
    raise SceneParseError(f"line {lineno}: unknown chart constructor {kind!r}")


def _parse_stage_fields(lines: _Lines, terminators: set[str]) -> dict:
    out: dict = {}
    while True:
        peek = lines.peek_content()
        if peek is None:
            break
        lineno, tokens = peek
        if tokens[0] in terminators:
            break
        lines.next_content()
        key = tokens[0]
        if key == "chart":
            out["chart"] = _parse_chart(tokens[1:], lineno)
        elif key == "domain":
            out["domain"] = _parse_region(tokens[1:], lineno)
        elif key == "image-origin":
            out["image_origin"] = tuple(_parse_floats(tokens[1:], lineno, 2))
        elif key == "image-radii":
            vals = _parse_floats(tokens[1:], lineno)
            if len(vals) < 8:
                raise SceneParseError(f"line {lineno}: need at least 8 radii")
            out["image_radii"] = vals
        elif key == "activation":
            vals = _parse_floats(tokens[1:], lineno, 3)
            out["activation_center"] = (vals[0], vals[1])
            out["activation_radius"] = vals[2]
        elif key == "collar":
            out["collar"] = _parse_floats(tokens[1:], lineno, 1)[0]
        elif key == "origin":
            out["origin"] = tuple(_parse_floats(tokens[1:], lineno, 2))
        elif key == "radii":
            vals = _parse_floats(tokens[1:], lineno)
            if len(vals) < 8:
                raise SceneParseError(f"line {lineno}: need at least 8 radii")
            out["radii"] = vals
        elif key == "tail":
            out["tail"] = tuple(_parse_floats(tokens[1:], lineno, 2))
        else:
            raise SceneParseError(f"line {lineno}: unknown field {key!r}")
    return out


_STAGE_KEYS = {"chart", "domain", "image_origin", "image_radii", "activation_center",
               "activation_radius", "collar"}


def parse_scene_text(text: str) -> dict:
    """Parse scene text into a spec dict (no assembly)."""
    lines = _Lines(text)
    spec: dict = {"elements": []}
    head = lines.next_content()
    if head is None or head[1][0] != "scene" or len(head[1]) != 2:
        raise SceneParseError("line 1: file must start with 'scene <name>'")
    spec["name"] = head[1][1]
    while True:
        item = lines.next_content()
        if item is None:
            break
        lineno, tokens = item
        key = tokens[0]
        if key == "mesh":
            spec["mesh"] = _parse_floats(tokens[1:], lineno, 1)[0]
        elif key == "domain":
            spec["domain"] = _parse_region(tokens[1:], lineno)
        elif key == "u":
            spec["u"] = _parse_region(tokens[1:], lineno)
        elif key == "element":
            if len(tokens) != 3:
                raise SceneParseError(f"line {lineno}: element needs an id and a kind")
            espec: dict = {"id": tokens[1], "kind": tokens[2]}
            if tokens[2] == "recursive":
                espec["stages"] = []
                while True:
                    fields = _parse_stage_fields(lines, {"stage", "end", "element"})
                    espec.update({k: v for k, v in fields.items() if k == "tail"})
                    nxt = lines.next_content()
                    if nxt is None:
                        raise SceneParseError(f"line {lineno}: element {tokens[1]} missing 'end'")
                    if nxt[1][0] == "end":
                        break
                    if nxt[1][0] != "stage":
                        raise SceneParseError(f"line {nxt[0]}: expected 'stage' or 'end'")
                    stage_fields = _parse_stage_fields(lines, {"stage", "end"})
                    missing = _STAGE_KEYS - set(stage_fields)
                    if missing:
                        raise SceneParseError(
                            f"line {nxt[0]}: stage is missing {sorted(missing)}"
                        )
                    espec["stages"].append(stage_fields)
                if "tail" not in espec:
                    raise SceneParseError(f"line {lineno}: recursive element needs a tail point")
                if not espec["stages"]:
                    raise SceneParseError(f"line {lineno}: recursive element needs stages")
            elif tokens[2] in ("starlike", "starlike-equivalent"):
                fields = _parse_stage_fields(lines, {"end", "element"})
                nxt = lines.next_content()
                if nxt is None or nxt[1][0] != "end":
                    raise SceneParseError(f"line {lineno}: element {tokens[1]} missing 'end'")
                if tokens[2] == "starlike":
                    for need in ("origin", "radii", "collar"):
                        if need not in fields:
                            raise SceneParseError(f"line {lineno}: starlike element missing {need}")
                else:
                    missing = _STAGE_KEYS - set(fields)
                    if missing:
                        raise SceneParseError(f"line {lineno}: element missing {sorted(missing)}")
                espec.update(fields)
            else:
                raise SceneParseError(f"line {lineno}: unknown element kind {tokens[2]!r}")
            spec["elements"].append(espec)
        else:
            raise SceneParseError(f"line {lineno}: unknown directive {key!r}")
    for need in ("mesh", "domain", "u"):
        if need not in spec:
            raise SceneParseError(f"scene file is missing '{need}'")
    return spec


def parse_scene(text: str) -> SceneBundle:
    """Parse and assemble a scene file."""
    return assemble_scene(parse_scene_text(text))


def load_scene(path) -> SceneBundle:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_scene(fh.read())
