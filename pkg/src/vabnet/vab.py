"""Visual authentication beacon payload codec and QR geometry calculator.

The beacon payload is versioned hex text carrying a 32-byte public key;
the simulator delivers it over visibility edges instead of rendering a
physical code. The geometry calculator answers how large a printed code
must be for a camera with a given field of view, distance, and resolution
to resolve every module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

VAB_PREFIX = "VAB1:"
VAB_PAYLOAD_LEN = len(VAB_PREFIX) + 64

# A 32-byte key fits QR version 2 (25x25 modules) with a 4-module quiet
# zone on each side.
_QR_V2_MODULES = 25
_QR_QUIET_ZONE = 4
SUPPORTED_KEY_BYTES = 32


class VabError(ValueError):
    """Base class for beacon payload failures."""


class VabPrefixError(VabError):
    pass


class VabLengthError(VabError):
    pass


class VabCharacterError(VabError):
    pass


def encode_vab(key: bytes) -> str:
    """Render a 32-byte public key as beacon payload text."""
    if len(key) != SUPPORTED_KEY_BYTES:
        raise VabLengthError(f"key must be {SUPPORTED_KEY_BYTES} bytes, got {len(key)}")
    return VAB_PREFIX + key.hex()


def decode_vab(payload: str) -> bytes:
    """Inverse of encode_vab; each malformation is reported distinctly."""
    if not payload.startswith(VAB_PREFIX):
        raise VabPrefixError(f"payload does not start with {VAB_PREFIX!r}")
    if len(payload) != VAB_PAYLOAD_LEN:
        raise VabLengthError(
            f"payload must be {VAB_PAYLOAD_LEN} characters, got {len(payload)}")
    body = payload[len(VAB_PREFIX):]
    if body != body.lower() or any(c not in "0123456789abcdef" for c in body):
        raise VabCharacterError("payload body must be lowercase hex")
    return bytes.fromhex(body)


def qr_modules_for_key(key_bytes: int) -> int:
    """Module count per side, quiet zones included, for a key of this size."""
    if key_bytes != SUPPORTED_KEY_BYTES:
        raise ValueError(f"only {SUPPORTED_KEY_BYTES}-byte keys are supported")
    return _QR_V2_MODULES + 2 * _QR_QUIET_ZONE


@dataclass(frozen=True)
class QrGeometry:
    """Camera and code parameters for the physical size calculation.

    aspect_ratio is width:height as a single value; both 3/4 and 4/3
    readings are in use, so it is left to the caller.
    """

    fov_deg: float
    distance_m: float
    resolution_px: float
    aspect_ratio: float
    modules: int = 33
    px_per_module: int = 3

    def __post_init__(self):
        if not 0.0 < self.fov_deg < 180.0:
            raise ValueError(f"fov_deg must be in (0, 180), got {self.fov_deg}")
        if self.distance_m < 0.0:
            raise ValueError("distance_m must be non-negative")
        for name in ("resolution_px", "aspect_ratio", "modules", "px_per_module"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


def qr_physical_size(g: QrGeometry) -> float:
    """Required code side length in meters.

    size = (2 * tan(fov/2) * distance / sqrt(resolution / aspect))
           * modules * px_per_module
    """
    half_angle = math.radians(g.fov_deg) / 2.0
    meters_per_px = 2.0 * math.tan(half_angle) * g.distance_m / math.sqrt(
        g.resolution_px / g.aspect_ratio)
    return meters_per_px * g.modules * g.px_per_module
