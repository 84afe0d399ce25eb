"""Surface JSON files, OBJ meshes and report schemas."""
from __future__ import annotations

import json
import os
from importlib import resources
from pathlib import Path

import numpy as np

from . import catalog
from .weierstrass import ParamDomain, SurfaceMesh, WeierstrassData, make_weierstrass

OUT_DIR_ENV = "MAXSURF_OUT_DIR"


class SurfaceFormatError(ValueError):
    pass


def surface_from_dict(d: dict) -> WeierstrassData:
    """Build validated data from {kind, domain, g, phi3, basepoint, base_value}."""
    if not isinstance(d, dict):
        raise SurfaceFormatError("surface JSON must be an object")
    missing = [k for k in ("domain", "g", "phi3") if k not in d]
    if missing:
        raise SurfaceFormatError(f"surface JSON lacks {', '.join(missing)}")
    try:
        domain = ParamDomain.from_dict(d["domain"])
        bp = d.get("basepoint", [0.0, 0.0])
        basepoint = complex(float(bp[0]), float(bp[1]))
        base_value = tuple(float(x) for x in d.get("base_value", (0.0, 0.0, 0.0)))
    except (KeyError, TypeError, IndexError) as exc:
        raise SurfaceFormatError(f"malformed surface JSON: {exc}") from exc
    if len(base_value) != 3:
        raise SurfaceFormatError("base_value needs three coordinates")
    return make_weierstrass(domain, str(d["g"]), str(d["phi3"]), basepoint, base_value,
                            d.get("kind", "maximal"))


def load_surface(spec: str):
    """A catalog name or a path to a surface JSON file -> (name, data, entry or None)."""
    if spec in catalog.names():
        entry = catalog.get_catalog_surface(spec)
        return spec, entry.data, entry
    path = Path(spec)
    if not path.is_file():
        raise SurfaceFormatError(f"{spec!r} is neither a catalog surface nor a readable file")
    try:
        d = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SurfaceFormatError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return path.stem, surface_from_dict(d), None


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_obj(mesh: SurfaceMesh, stream) -> None:
    """Vertices, Euclidean-normalized normals and faces (1-based)."""
    normals = mesh.euclidean_normals()
    stream.write(f"# {mesh.kind} surface, {mesh.grid.size} vertices\n")
    for p in mesh.positions:
        stream.write(f"v {p[0]:.12g} {p[1]:.12g} {p[2]:.12g}\n")
    for n in normals:
        stream.write(f"vn {n[0]:.12g} {n[1]:.12g} {n[2]:.12g}\n")
    for face in mesh.faces:
        stream.write("f " + " ".join(f"{k + 1}//{k + 1}" for k in face) + "\n")


def read_obj(path) -> tuple[np.ndarray, np.ndarray, list]:
    verts, norms, faces = [], [], []
    for line in Path(path).read_text().splitlines():
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "v":
            verts.append([float(x) for x in parts[1:4]])
        elif parts[0] == "vn":
            norms.append([float(x) for x in parts[1:4]])
        elif parts[0] == "f":
            faces.append(tuple(int(p.split("/")[0]) - 1 for p in parts[1:]))
    return np.array(verts), np.array(norms), faces


def output_path(name: str | None) -> Path | None:
    """Resolve an output name; relative names go under $MAXSURF_OUT_DIR when set."""
    if name is None:
        return None
    p = Path(name)
    base = os.environ.get(OUT_DIR_ENV)
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def load_schema(name: str) -> dict:
    text = resources.files("maxsurf").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)
