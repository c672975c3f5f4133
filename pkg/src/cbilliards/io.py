"""Configuration parsing, output bundles and SVG rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Mapping
from xml.sax.saxutils import escape

import numpy as np

from .mirrors import Mirror, MirrorError
from .orbits import Billiard


class ConfigError(ValueError):
    """Invalid configuration; ``path`` is a JSON path like ``$.mirrors[0]``."""

    def __init__(self, message: str, path: str = "$", position: tuple[int, int] | None = None):
        self.path = path
        self.position = position
        where = f" at line {position[0]} column {position[1]}" if position else f" at {path}"
        super().__init__(message + where)

    def to_json(self) -> dict:
        out: dict[str, Any] = {"error": str(self), "path": self.path}
        if self.position:
            out["line"], out["column"] = self.position
        return out


class NothingToRender(ValueError):
    pass


TOLERANCE_KEYS = {"solve", "rank_ratio", "invisible"}
_TOP_KEYS = {"mirrors", "billiard", "seed_boxes", "tolerances", "params", "body", "rays", "bundle"}
_PARAM_KEYS = {"period", "seeds", "rng_seed", "max_reflections", "scale", "radius", "grid"}
_MIRROR_KINDS = {"circle", "line", "graph", "conic"}


@dataclass
class Config:
    mirrors: dict[str, Mirror]
    order: list[str]
    seed_boxes: list[dict] | dict | None = None
    tolerances: dict[str, float] = field(default_factory=dict)
    params: dict[str, Any] = field(default_factory=dict)
    body: dict | None = None
    rays: list[dict] | None = None
    bundle: dict | None = None

    @property
    def billiard(self) -> Billiard:
        return Billiard([self.mirrors[label] for label in self.order])

    @property
    def k(self) -> int:
        return len(self.order)

    def billiard_for(self, period: int) -> Billiard:
        """Billiard of the requested period, cycling the configured order."""
        if period < 2:
            raise ConfigError("period must be at least 2", "$.params.period")
        return Billiard([self.mirrors[self.order[j % len(self.order)]] for j in range(period)])

    def to_json(self) -> dict:
        out: dict[str, Any] = {
            "mirrors": [m.to_json() for m in self.mirrors.values()],
            "billiard": list(self.order),
        }
        for key, value in (("seed_boxes", self.seed_boxes), ("body", self.body),
                           ("rays", self.rays), ("bundle", self.bundle)):
            if value is not None:
                out[key] = value
        if self.tolerances:
            out["tolerances"] = dict(self.tolerances)
        if self.params:
            out["params"] = dict(self.params)
        return out


def _check_keys(obj: Any, allowed: set[str], path: str, required: set[str] = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise ConfigError("expected an object", path)
    for key in obj:
        if key not in allowed:
            raise ConfigError(f"unknown field {key!r}", f"{path}.{key}")
    for key in required:
        if key not in obj:
            raise ConfigError(f"missing field {key!r}", path)


def _number(x: Any, path: str) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise ConfigError("expected a number", path)
    return float(x)


def _complex(x: Any, path: str) -> complex:
    if isinstance(x, list) and len(x) == 2:
        return complex(_number(x[0], path + "[0]"), _number(x[1], path + "[1]"))
    return complex(_number(x, path))


def _mirror(obj: Any, path: str) -> Mirror:
    if not isinstance(obj, dict):
        raise ConfigError("expected a mirror object", path)
    try:
        if "kind" in obj:
            _check_keys(obj, {"kind", "label", "args"}, path, {"kind", "label", "args"})
            kind = obj["kind"]
            if kind not in _MIRROR_KINDS:
                raise ConfigError(f"unknown mirror kind {kind!r}", path + ".kind")
            args = obj["args"]
            if not isinstance(args, list):
                raise ConfigError("args must be a list", path + ".args")
            label = str(obj["label"])
            if kind == "graph":
                return Mirror.graph([_complex(a, f"{path}.args[{i}]") for i, a in enumerate(args)],
                                    label=label)
            vals = [_complex(a, f"{path}.args[{i}]") for i, a in enumerate(args)]
            if kind == "circle":
                if len(vals) != 3 or any(v.imag for v in vals):
                    raise ConfigError("circle needs real [cx, cy, r]", path + ".args")
                return Mirror.circle(vals[0].real, vals[1].real, vals[2].real, label=label)
            if kind == "line":
                if len(vals) != 3:
                    raise ConfigError("line needs [a, b, c]", path + ".args")
                return Mirror.line(*vals, label=label)
            if len(vals) != 6:
                raise ConfigError("conic needs [A, B, C, D, E, F]", path + ".args")
            return Mirror.conic(*vals, label=label)
        _check_keys(obj, {"label", "degree", "coeffs", "param", "arcs"}, path,
                    {"label", "degree", "coeffs"})
        for i, term in enumerate(obj["coeffs"]):
            if not (isinstance(term, list) and len(term) == 3 and isinstance(term[0], int)
                    and isinstance(term[1], int)):
                raise ConfigError("coefficient must be [i, j, [re, im]]", f"{path}.coeffs[{i}]")
            _complex(term[2], f"{path}.coeffs[{i}][2]")
        return Mirror.from_json(obj)
    except ConfigError:
        raise
    except MirrorError as exc:
        msg = "mirror is an isotropic line" if "isotropic" in str(exc) else str(exc)
        raise ConfigError(msg, path) from exc
    except (TypeError, KeyError, ValueError) as exc:
        raise ConfigError(f"invalid mirror: {exc}", path) from exc


def _box(obj: Any, path: str) -> dict:
    _check_keys(obj, {"re", "im"}, path)
    out = {}
    for key in ("re", "im"):
        if key in obj:
            v = obj[key]
            if not (isinstance(v, list) and len(v) == 2):
                raise ConfigError("expected [lo, hi]", f"{path}.{key}")
            lo, hi = _number(v[0], f"{path}.{key}[0]"), _number(v[1], f"{path}.{key}[1]")
            if lo > hi:
                raise ConfigError("empty interval", f"{path}.{key}")
            out[key] = (lo, hi)
    return out


def validate_tolerances(obj: Any, path: str = "$.tolerances") -> dict[str, float]:
    _check_keys(obj, TOLERANCE_KEYS, path)
    out = {}
    for key, v in obj.items():
        x = _number(v, f"{path}.{key}")
        if not x > 0:
            raise ConfigError("tolerance overrides must be positive", f"{path}.{key}")
        out[key] = x
    return out


def parse_config(text: bytes | str) -> Config:
    """Validate a UTF-8 JSON configuration."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ConfigError(f"not UTF-8: {exc.reason}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", "$", (exc.lineno, exc.colno)) from exc
    _check_keys(data, _TOP_KEYS, "$", {"mirrors"})
    if not isinstance(data["mirrors"], list) or not data["mirrors"]:
        raise ConfigError("mirrors must be a non-empty list", "$.mirrors")
    mirrors: dict[str, Mirror] = {}
    for i, obj in enumerate(data["mirrors"]):
        m = _mirror(obj, f"$.mirrors[{i}]")
        if m.label in mirrors:
            raise ConfigError(f"duplicate mirror label {m.label!r}", f"$.mirrors[{i}].label")
        mirrors[m.label] = m
    order = data.get("billiard", list(mirrors))
    if not isinstance(order, list) or len(order) < 1:
        raise ConfigError("billiard must be a non-empty list of labels", "$.billiard")
    for i, label in enumerate(order):
        if label not in mirrors:
            raise ConfigError(f"unknown mirror {label!r}", f"$.billiard[{i}]")
    boxes = data.get("seed_boxes")
    if isinstance(boxes, list):
        if len(boxes) != len(order):
            raise ConfigError("need one seed box per billiard mirror", "$.seed_boxes")
        boxes = [_box(b, f"$.seed_boxes[{i}]") for i, b in enumerate(boxes)]
    elif boxes is not None:
        boxes = _box(boxes, "$.seed_boxes")
    tolerances = validate_tolerances(data.get("tolerances", {}))
    params = data.get("params", {})
    _check_keys(params, _PARAM_KEYS, "$.params")
    for key, v in params.items():
        x = _number(v, f"$.params.{key}")
        if key in {"period", "seeds", "rng_seed", "max_reflections", "grid"} and x != int(x):
            raise ConfigError("expected an integer", f"$.params.{key}")
    body = data.get("body")
    if body is not None:
        _check_body(body, mirrors)
    rays = data.get("rays")
    if rays is not None:
        if not isinstance(rays, list):
            raise ConfigError("rays must be a list", "$.rays")
        for i, r in enumerate(rays):
            _check_keys(r, {"origin", "direction"}, f"$.rays[{i}]", {"origin", "direction"})
            for key in ("origin", "direction"):
                v = r[key]
                if not (isinstance(v, list) and len(v) == 2):
                    raise ConfigError("expected [x, y]", f"$.rays[{i}].{key}")
                for j, x in enumerate(v):
                    _number(x, f"$.rays[{i}].{key}[{j}]")
    bundle = data.get("bundle")
    if bundle is not None and not isinstance(bundle, dict):
        raise ConfigError("bundle must be an object", "$.bundle")
    return Config(mirrors, list(order), boxes, tolerances, dict(params), body, rays, bundle)


def _check_body(body: Any, mirrors: Mapping[str, Mirror]) -> None:
    path = "$.body"
    if isinstance(body, dict) and "builder" in body:
        _check_keys(body, {"builder", "scale"}, path)
        if body["builder"] != "two-parabola":
            raise ConfigError(f"unknown body builder {body['builder']!r}", path + ".builder")
        if "scale" in body and not _number(body["scale"], path + ".scale") > 0:
            raise ConfigError("scale must be positive", path + ".scale")
        return
    _check_keys(body, {"arcs"}, path, {"arcs"})
    if not isinstance(body["arcs"], list) or not body["arcs"]:
        raise ConfigError("arcs must be a non-empty list", path + ".arcs")
    for i, arc in enumerate(body["arcs"]):
        p = f"{path}.arcs[{i}]"
        _check_keys(arc, {"mirror", "interval", "inside"}, p, {"mirror", "interval"})
        if arc["mirror"] not in mirrors:
            raise ConfigError(f"unknown mirror {arc['mirror']!r}", p + ".mirror")
        iv = arc["interval"]
        if not (isinstance(iv, list) and len(iv) == 2):
            raise ConfigError("expected [t_min, t_max]", p + ".interval")
        if not _number(iv[0], p + ".interval[0]") < _number(iv[1], p + ".interval[1]"):
            raise ConfigError("empty interval", p + ".interval")


# bundles --------------------------------------------------------------------


@dataclass
class OutputBundle:
    command: str = ""
    mirrors: list[dict] = field(default_factory=list)
    orbits: list[dict] = field(default_factory=list)
    reports: list[dict] = field(default_factory=list)
    chains: list[dict] = field(default_factory=list)
    trajectories: list[dict] = field(default_factory=list)
    checks: list[dict] = field(default_factory=list)
    body: dict | None = None
    svg: list[str] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "mirrors": self.mirrors,
            "orbits": self.orbits,
            "reports": self.reports,
            "chains": self.chains,
            "trajectories": self.trajectories,
            "checks": self.checks,
            "body": self.body,
            "svg": self.svg,
        }

    def dumps(self) -> str:
        return dumps(self.to_json())

    @classmethod
    def from_json(cls, data: Mapping) -> OutputBundle:
        known = set(cls().to_json())
        extra = set(data) - known
        if extra:
            raise ConfigError(f"unknown bundle fields {sorted(extra)}", "$.bundle")
        return cls(**{k: data[k] for k in known if k in data})

    @classmethod
    def loads(cls, text: str) -> OutputBundle:
        return cls.from_json(json.loads(text))


def _clean(obj: Any) -> Any:
    """Plain JSON types only (numpy scalars become Python numbers)."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def dumps(obj: Any) -> str:
    """Normalized JSON text: sorted keys, fixed separators."""
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=True)


# SVG ------------------------------------------------------------------------


def _mirror_polylines(m: Mirror, box: tuple[float, float, float, float],
                      interval: tuple[float, float] | None = None) -> list[np.ndarray]:
    """Real points of a mirror inside the box, split into connected runs."""
    x0, y0, x1, y1 = box
    span = max(x1 - x0, y1 - y0)
    if m.param is not None:
        if interval is None:
            s = np.tan(np.linspace(-np.pi / 2, np.pi / 2, 801)[1:-1])
        else:
            s = np.linspace(interval[0], interval[1], 201)
        pts = np.array([m.param.affine(v).real if abs(m.param(v)[2]) > 1e-12 else [np.nan, np.nan]
                        for v in s])
    else:
        rows = []
        for x in np.linspace(x0, x1, 401):
            col = np.array([np.sum(m.coeffs[i, j] * x**i for i in range(m.coeffs.shape[0]))
                            for j in range(m.coeffs.shape[1])])
            nz = np.nonzero(np.abs(col) > 1e-12)[0]
            if nz.size == 0 or nz.max() == 0:
                continue
            for r in np.roots(col[: nz.max() + 1][::-1]):
                if abs(r.imag) < 1e-9:
                    rows.append([x, r.real])
        return [np.array([p]) for p in rows]
    inside = ((pts[:, 0] >= x0 - span) & (pts[:, 0] <= x1 + span)
              & (pts[:, 1] >= y0 - span) & (pts[:, 1] <= y1 + span))
    runs, cur = [], []
    for p, ok in zip(pts, inside):
        if ok and np.all(np.isfinite(p)) and (not cur or np.linalg.norm(p - cur[-1]) < span):
            cur.append(p)
        else:
            if len(cur) > 1:
                runs.append(np.array(cur))
            cur = [p] if ok and np.all(np.isfinite(p)) else []
    if len(cur) > 1:
        runs.append(np.array(cur))
    return runs


def _real_points(bundle: OutputBundle) -> list[np.ndarray]:
    pts = []
    for o in bundle.orbits:
        for v in o.get("vertices", []):
            h = np.array([complex(*c) for c in v["point"]])
            if abs(h[2]) > 1e-12 * np.linalg.norm(h):
                pts.append((h[:2] / h[2]).real)
    for t in bundle.trajectories:
        pts.extend(np.array(p, dtype=float) for p in t.get("points", []))
    return pts


def render_svg(bundle: OutputBundle, size: int = 600) -> str:
    """Real-slice picture: mirrors as paths, orbit edges as lines.

    Isotropic edges are dashed; trajectory reflection points are marked
    with small circles. Complex data is drawn by its real part.
    """
    mirrors = {m["label"]: Mirror.from_json(m) for m in bundle.mirrors}
    pts = _real_points(bundle)
    if not mirrors and not pts:
        raise NothingToRender("bundle has no mirrors, orbits or trajectories")
    arcs: dict[str, list[tuple[float, float]]] = {}
    if bundle.body:
        for a in bundle.body.get("arcs", []):
            arcs.setdefault(a["mirror"], []).append(tuple(a["interval"]))
        for m in bundle.body.get("mirrors", []):
            mirrors.setdefault(m["label"], Mirror.from_json(m))
    if arcs:
        for label, ivs in arcs.items():
            m = mirrors[label]
            pts.extend(m.param.affine(s).real for iv in ivs for s in iv)
    if pts:
        P = np.array(pts)
        lo, hi = P.min(axis=0), P.max(axis=0)
    else:
        lo, hi = np.array([-2.0, -2.0]), np.array([2.0, 2.0])
    pad = 0.15 * max(float(np.max(hi - lo)), 1.0)
    lo, hi = lo - pad, hi + pad
    box = (float(lo[0]), float(lo[1]), float(hi[0]), float(hi[1]))
    w, h = hi - lo
    scale = size / max(w, h)

    def xy(p) -> tuple[float, float]:
        return (float((p[0] - lo[0]) * scale), float((hi[1] - p[1]) * scale))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
           f'width="{w * scale:.1f}" height="{h * scale:.1f}" '
           f'viewBox="0 0 {w * scale:.1f} {h * scale:.1f}">']
    out.append('<g id="mirrors" fill="none" stroke="#1f4e79" stroke-width="1.5">')
    for label, m in mirrors.items():
        runs = []
        if label in arcs:
            for iv in arcs[label]:
                runs += _mirror_polylines(m, box, iv)
        elif not arcs:
            runs = _mirror_polylines(m, box)
        if not runs:
            continue
        d = " ".join("M " + " L ".join("%.2f %.2f" % xy(p) for p in run) for run in runs)
        out.append(f'<path data-mirror="{escape(label)}" d="{d}"/>')
    out.append("</g>")
    if bundle.orbits:
        out.append('<g id="orbits" stroke="#c0392b" stroke-width="1.2">')
        for o in bundle.orbits:
            verts = []
            for v in o["vertices"]:
                hh = np.array([complex(*c) for c in v["point"]])
                verts.append((hh[:2] / hh[2]).real)
            tags = o.get("edge_tags") or ["NonIsotropic"] * len(verts)
            for j, p in enumerate(verts):
                q = verts[(j + 1) % len(verts)]
                dash = ' stroke-dasharray="4 3" class="isotropic"' if tags[j] != "NonIsotropic" else ""
                (ax, ay), (bx, by) = xy(p), xy(q)
                out.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}"{dash}/>')
        out.append("</g>")
    if bundle.trajectories:
        out.append('<g id="trajectories" stroke="#27ae60" stroke-width="1" fill="#27ae60">')
        reach = float(max(w, h))
        for t in bundle.trajectories:
            P = [np.array(p, dtype=float) for p in t.get("points", [])]
            ri, ro = t["input"], t["output"]
            chain = [np.array(ri["origin"])] + P + [np.array(ro["origin"]) + reach * np.array(ro["direction"])]
            for a, b in zip(chain[:-1], chain[1:]):
                (ax, ay), (bx, by) = xy(a), xy(b)
                out.append(f'<line x1="{ax:.2f}" y1="{ay:.2f}" x2="{bx:.2f}" y2="{by:.2f}"/>')
            for p in P:
                cx, cy = xy(p)
                out.append(f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="3"/>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out)
