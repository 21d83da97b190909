"""Plain-dict forms of bodies and gauges, and replay digests.

A body is a one-key mapping naming its shape::

    {"ball": {"radius": 1.0, "center": [0, 0, 0.3]}}
    {"ellipsoid": {"semi_axes": [1, 2, 3], "rotation": [[...]], "center": [...]}}
    {"perturbed_sphere": {"base_radius": 1, "dimension": 3,
                          "terms": [{"coef": 0.1, "direction": [0, 0, 1], "power": 2}]}}
    {"tabulated": {"rule": "circle:64", "values": [...]}}
    {"linear_image": {"matrix": [[...]], "body": <body>}}
    {"dilate": {"factor": 2, "body": <body>}}
    {"lp_add": {"p": 2, "alpha": 1, "beta": 1, "left": <body>, "right": <body>}}
    {"orlicz_add": {"parts": [<body>, ...], "coefficients": [...],
                    "gauges": [<gauge>, ...]}}      # or "gauge": <gauge>

Inside a scene config a ``<body>`` or ``<gauge>`` may also be a string naming
an entry defined earlier.  ``to_dict`` on every body and gauge produces this
format, so ``body_from_dict(K.to_dict())`` rebuilds K exactly.
"""
from __future__ import annotations

import base64
import json
import zlib

import numpy as np

from .chord_addition import LpSum, OrliczSum
from .errors import ChordError, ConfigError, DigestParseError
from .orlicz_fn import gauge_from_dict
from .quadrature import parse_rule
from .star_body import Ball, Dilate, Ellipsoid, LinearImage, PerturbationTerm, PerturbedSphere, Tabulated

DIGEST_PREFIX = "ocd1."


def _need(spec, key, path):
    if not isinstance(spec, dict):
        raise ConfigError(f"expected a mapping, got {type(spec).__name__}", field=path)
    if key not in spec:
        raise ConfigError(f"missing required field {key!r}", field=path)
    return spec[key]


def _number(v, path):
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"expected a number, got {v!r}", field=path)
    return v


def _vector(v, path):
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError(f"expected a list of numbers, got {v!r}", field=path)
    return [_number(x, f"{path}[{k}]") for k, x in enumerate(v)]


def _matrix(v, path):
    if not isinstance(v, (list, tuple)) or not v:
        raise ConfigError("expected a list of rows", field=path)
    return [_vector(row, f"{path}[{k}]") for k, row in enumerate(v)]


def gauge_from_spec(spec, gauges=None, path="gauge"):
    if isinstance(spec, str):
        if gauges is None or spec not in gauges:
            raise ConfigError(f"unknown gauge {spec!r}", field=path)
        return gauges[spec]
    if not isinstance(spec, dict):
        raise ConfigError(f"expected a gauge mapping or name, got {spec!r}", field=path)
    try:
        return gauge_from_dict(spec)
    except ChordError as exc:
        raise ConfigError(str(exc), field=path) from None


def body_from_dict(spec, dimension=None, bodies=None, gauges=None, path="body"):
    """Build a star body from its dict form.

    ``bodies`` and ``gauges`` map names to already-built objects.  Errors are
    raised as :class:`ConfigError` carrying the dotted field path.
    """
    if isinstance(spec, str):
        if bodies is None or spec not in bodies:
            raise ConfigError(f"unknown body {spec!r}", field=path)
        return bodies[spec]
    if not isinstance(spec, dict) or len(spec) != 1:
        raise ConfigError("a body must be a name or a mapping with exactly one shape key", field=path)
    (kind, args), = spec.items()
    here = f"{path}.{kind}"

    def sub(value, name):
        return body_from_dict(value, dimension, bodies, gauges, f"{here}.{name}")

    try:
        if kind == "ball":
            radius = _number(_need(args, "radius", here), f"{here}.radius")
            if "center" in args:
                center = _vector(args["center"], f"{here}.center")
            elif dimension is not None:
                center = [0.0] * dimension
            else:
                raise ConfigError("ball needs a center or a known dimension", field=here)
            return Ball(radius, center)
        if kind == "ellipsoid":
            axes = _vector(_need(args, "semi_axes", here), f"{here}.semi_axes")
            rot = _matrix(args["rotation"], f"{here}.rotation") if "rotation" in args else None
            center = _vector(args["center"], f"{here}.center") if "center" in args else None
            return Ellipsoid(axes, rot, center)
        if kind == "perturbed_sphere":
            base = _number(_need(args, "base_radius", here), f"{here}.base_radius")
            n = args.get("dimension", dimension)
            if n is None:
                raise ConfigError("perturbed_sphere needs a dimension", field=here)
            terms = []
            for k, t in enumerate(args.get("terms", [])):
                tp = f"{here}.terms[{k}]"
                terms.append(
                    PerturbationTerm(
                        _number(_need(t, "coef", tp), f"{tp}.coef"),
                        _vector(_need(t, "direction", tp), f"{tp}.direction"),
                        _number(_need(t, "power", tp), f"{tp}.power"),
                    )
                )
            return PerturbedSphere(base, terms, n)
        if kind == "tabulated":
            rule = parse_rule(str(_need(args, "rule", here)))
            return Tabulated(rule, _vector(_need(args, "values", here), f"{here}.values"))
        if kind == "linear_image":
            A = _matrix(_need(args, "matrix", here), f"{here}.matrix")
            return LinearImage(np.array(A, dtype=float), sub(_need(args, "body", here), "body"))
        if kind == "dilate":
            c = _number(_need(args, "factor", here), f"{here}.factor")
            return Dilate(c, sub(_need(args, "body", here), "body"))
        if kind == "lp_add":
            return LpSum(
                _number(_need(args, "p", here), f"{here}.p"),
                _number(args.get("alpha", 1.0), f"{here}.alpha"),
                _number(args.get("beta", 1.0), f"{here}.beta"),
                sub(_need(args, "left", here), "left"),
                sub(_need(args, "right", here), "right"),
            )
        if kind == "orlicz_add":
            parts_spec = _need(args, "parts", here)
            if not isinstance(parts_spec, list):
                raise ConfigError("parts must be a list", field=f"{here}.parts")
            parts = [sub(p, f"parts[{k}]") for k, p in enumerate(parts_spec)]
            coefs = _vector(args.get("coefficients", [1.0] * len(parts)), f"{here}.coefficients")
            if "gauges" in args:
                gs = args["gauges"]
                if not isinstance(gs, list):
                    raise ConfigError("gauges must be a list", field=f"{here}.gauges")
                gauge = [gauge_from_spec(g, gauges, f"{here}.gauges[{k}]") for k, g in enumerate(gs)]
            else:
                gauge = gauge_from_spec(_need(args, "gauge", here), gauges, f"{here}.gauge")
            return OrliczSum(tuple(parts), tuple(coefs), gauge)
    except ConfigError:
        raise
    except ChordError as exc:
        raise ConfigError(str(exc), field=here) from None
    raise ConfigError(f"unknown body kind {kind!r}", field=path)


def encode_digest(payload: dict) -> str:
    """Compact, shell-safe, lossless encoding of a replay payload."""
    raw = json.dumps(payload, sort_keys=True, separators=(",", ":"), allow_nan=False)
    packed = base64.urlsafe_b64encode(zlib.compress(raw.encode("utf-8"), 9)).decode("ascii")
    return DIGEST_PREFIX + packed.rstrip("=")


def decode_digest(digest: str) -> dict:
    if not isinstance(digest, str) or not digest.startswith(DIGEST_PREFIX):
        raise DigestParseError("digest does not start with the expected prefix")
    body = digest[len(DIGEST_PREFIX):].strip()
    body += "=" * (-len(body) % 4)
    try:
        packed = base64.b64decode(body.encode("ascii"), altchars=b"-_", validate=True)
        inflater = zlib.decompressobj()
        raw = inflater.decompress(packed)
        if not inflater.eof or inflater.unused_data:
            raise ValueError("truncated or trailing data")
        payload = json.loads(raw.decode("utf-8"))
    except (ValueError, zlib.error, UnicodeError) as exc:
        raise DigestParseError(f"digest is corrupted: {exc}") from None
    if not isinstance(payload, dict):
        raise DigestParseError("digest payload is not a mapping")
    return payload
