"""Instance and tour file formats, run traces and SVG rendering.

Native instances are JSON ``{"name": ..., "points": [[x, y], ...]}`` or
``{"name": ..., "matrix": [[...], ...]}``; TSPLIB input is the EUC_2D
subset (NAME, COMMENT, TYPE: TSP, DIMENSION, EDGE_WEIGHT_TYPE: EUC_2D,
NODE_COORD_SECTION, EOF). TSPLIB instances carry the rounded distance
convention; native ones use exact distances unless ``"distance": "euc_2d"``.
"""
from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from importlib import resources
from pathlib import Path
from typing import Optional, Sequence

from .instance import (EUC_2D, EXACT, Instance, InstanceError, instance_from_matrix,
                       instance_from_points, tour_length)


class FormatError(ValueError):
    pass


# -- native JSON ------------------------------------------------------------

def instance_to_dict(inst: Instance) -> dict:
    doc = {"name": inst.name}
    if inst.has_coords:
        doc["points"] = inst.coords.tolist()
        if inst.convention != EXACT:
            doc["distance"] = inst.convention
    else:
        doc["matrix"] = inst.dist.tolist()
    return doc


def instance_from_dict(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise FormatError("instance document must be a JSON object")
    name = str(doc.get("name", "instance"))
    try:
        if "points" in doc:
            return instance_from_points(doc["points"], name=name,
                                        convention=doc.get("distance", EXACT))
        if "matrix" in doc:
            return instance_from_matrix(doc["matrix"], name=name)
    except (InstanceError, TypeError, ValueError) as exc:
        raise FormatError(f"invalid instance {name!r}: {exc}") from exc
    raise FormatError("instance document needs 'points' or 'matrix'")


def dumps_instance(inst: Instance) -> str:
    return json.dumps(instance_to_dict(inst), indent=1) + "\n"


# -- TSPLIB -----------------------------------------------------------------

def parse_tsplib(text: str) -> Instance:
    header = {}
    coords = []
    lines = iter(text.splitlines())
    in_coords = False
    for raw in lines:
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if line.startswith("NODE_COORD_SECTION"):
            in_coords = True
            continue
        if in_coords:
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"bad coordinate line: {raw!r}")
            try:
                coords.append((int(parts[0]), float(parts[1]), float(parts[2])))
            except ValueError as exc:
                raise FormatError(f"bad coordinate line: {raw!r}") from exc
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise FormatError(f"unexpected line: {raw!r}")
        header[key.strip().upper()] = value.strip()
    if header.get("TYPE", "TSP").split()[0] != "TSP":
        raise FormatError(f"unsupported TYPE {header.get('TYPE')!r}")
    if header.get("EDGE_WEIGHT_TYPE") != "EUC_2D":
        raise FormatError(f"unsupported EDGE_WEIGHT_TYPE {header.get('EDGE_WEIGHT_TYPE')!r}")
    try:
        n = int(header["DIMENSION"])
    except (KeyError, ValueError) as exc:
        raise FormatError("missing or bad DIMENSION") from exc
    if len(coords) != n:
        raise FormatError(f"DIMENSION is {n} but {len(coords)} coordinates were given")
    if sorted(c[0] for c in coords) != list(range(1, n + 1)):
        raise FormatError("node ids must be 1..DIMENSION")
    coords.sort()
    meta = {"comment": header["COMMENT"]} if "COMMENT" in header else {}
    try:
        return instance_from_points([(x, y) for _, x, y in coords], name=header.get("NAME", "instance"),
                                    convention=EUC_2D, meta=meta)
    except InstanceError as exc:
        raise FormatError(str(exc)) from exc


def dumps_tsplib(inst: Instance) -> str:
    xy = inst.require_coords()
    out = [f"NAME : {inst.name}", "TYPE : TSP", f"DIMENSION : {inst.n}",
           "EDGE_WEIGHT_TYPE : EUC_2D", "NODE_COORD_SECTION"]
    out += [f"{i + 1} {x!r} {y!r}" for i, (x, y) in enumerate(xy.tolist())]
    out.append("EOF")
    return "\n".join(out) + "\n"


def loads_instance(text: str) -> Instance:
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        return instance_from_dict(doc)
    return parse_tsplib(text)


def load_instance(path) -> Instance:
    return loads_instance(Path(path).read_text())


def save_instance(inst: Instance, path, fmt: Optional[str] = None) -> None:
    path = Path(path)
    fmt = fmt or ("tsplib" if path.suffix == ".tsp" else "json")
    path.write_text(dumps_tsplib(inst) if fmt == "tsplib" else dumps_instance(inst))


# -- tours ------------------------------------------------------------------

def tour_to_dict(inst: Instance, tour: Sequence[int]) -> dict:
    return {"instance_name": inst.name, "order": [int(p) for p in tour],
            "length": tour_length(inst, tour)}


def dumps_tsplib_tour(inst: Instance, tour: Sequence[int]) -> str:
    out = [f"NAME : {inst.name}.tour", "TYPE : TOUR", f"DIMENSION : {len(tour)}", "TOUR_SECTION"]
    out += [str(int(p) + 1) for p in tour]
    out += ["-1", "EOF"]
    return "\n".join(out) + "\n"


def loads_tour(text: str) -> dict:
    """Parse a JSON or TSPLIB tour into ``{"order": [...], ...}`` with 0-based ids."""
    stripped = text.lstrip()
    if stripped.startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid JSON: {exc}") from exc
        if not isinstance(doc.get("order"), list):
            raise FormatError("tour document needs an 'order' list")
        return doc
    header, order, in_tour = {}, [], False
    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line == "EOF":
            break
        if line.startswith("TOUR_SECTION"):
            in_tour = True
            continue
        if in_tour:
            for tok in line.split():
                try:
                    node = int(tok)
                except ValueError as exc:
                    raise FormatError(f"bad tour entry {tok!r}") from exc
                if node == -1:
                    in_tour = False
                    break
                order.append(node - 1)
            continue
        key, _, value = line.partition(":")
        header[key.strip().upper()] = value.strip()
    if not order:
        raise FormatError("no TOUR_SECTION entries")
    return {"instance_name": header.get("NAME", "").removesuffix(".opt.tour").removesuffix(".tour"),
            "order": order, "comment": header.get("COMMENT")}


def load_tour(path) -> dict:
    return loads_tour(Path(path).read_text())


# -- traces -----------------------------------------------------------------

def dumps_trace(trace) -> str:
    return json.dumps(trace.to_dict(), indent=1) + "\n"


# -- bundled data -----------------------------------------------------------

# pcb442 (Groetschel/Juenger/Reinelt drilling problem) with its published
# optimal tour; optimum 50778 under rounded EUC_2D distances.
BUNDLED = {"pcb442": 50778}


def bundled_path(name: str, suffix: str = ".tsp") -> Path:
    return Path(str(resources.files("ylab") / "data" / f"{name}{suffix}"))


# -- SVG --------------------------------------------------------------------

def render_svg(inst: Instance, tour: Sequence[int], crossings=(), size: int = 480) -> str:
    """Points plus the closed tour as a polyline; crossing locations in red."""
    xy = inst.require_coords()
    lo = xy.min(axis=0)
    span = float(max((xy.max(axis=0) - lo).max(), 1e-12))
    pad = 12.0
    scale = (size - 2 * pad) / span

    def sx(x, y):
        # flip y so larger coordinates are drawn higher
        return pad + (x - lo[0]) * scale, size - pad - (y - lo[1]) * scale

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(size), height=str(size),
                     viewBox=f"0 0 {size} {size}")
    ET.SubElement(svg, "title").text = inst.name
    order = list(tour)
    if order:
        pts = [sx(*xy[p]) for p in order + order[:1]]
        ET.SubElement(svg, "polyline", {"class": "tour", "fill": "none", "stroke": "#333",
                                        "stroke-width": "1.5",
                                        "points": " ".join(f"{x:.3f},{y:.3f}" for x, y in pts)})
    for i, (x, y) in enumerate(xy):
        cx, cy = sx(x, y)
        ET.SubElement(svg, "circle", {"class": "point", "cx": f"{cx:.3f}", "cy": f"{cy:.3f}",
                                      "r": "3", "fill": "#1f4e9c", "data-id": str(i)})
    for c in crossings:
        cx, cy = sx(*c.point)
        ET.SubElement(svg, "circle", {"class": "crossing", "cx": f"{cx:.3f}", "cy": f"{cy:.3f}",
                                      "r": "6", "fill": "none", "stroke": "#d62728",
                                      "stroke-width": "2"})
    return ET.tostring(svg, encoding="unicode") + "\n"
