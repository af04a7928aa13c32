"""Weather presets and the canonical sweep order.

Illumination is the only parameter the proxy renderer consumes; precipitation
and fog ride along as scene metadata. Every adjacent pair in the sweep order
differs in illumination by more than 5 % relative, so every transition is an
illumination-changing one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import WeatherNotFound


@dataclass(frozen=True)
class WeatherPreset:
    name: str
    illumination: float
    precipitation: float
    fog_density: float


def _rain(name: str) -> float:
    if "HardRain" in name:
        return 0.9
    if "MidRain" in name:
        return 0.6
    if "SoftRain" in name:
        return 0.2
    if "Wet" in name:
        return 0.3
    return 0.0


def _fog(name: str) -> float:
    return 0.05 if "Sunset" in name else 0.0


_ILLUMINATION = [
    ("ClearNoon", 1.00),
    ("CloudyNoon", 0.80),
    ("WetNoon", 0.85),
    ("WetCloudyNoon", 0.70),
    ("MidRainyNoon", 0.60),
    ("HardRainNoon", 0.45),
    ("SoftRainNoon", 0.75),
    ("ClearSunset", 0.55),
    ("CloudySunset", 0.45),
    ("WetSunset", 0.50),
    ("WetCloudySunset", 0.40),
    ("MidRainSunset", 0.35),
    ("HardRainSunset", 0.25),
    ("SoftRainSunset", 0.40),
]

SWEEP_ORDER = tuple(name for name, _ in _ILLUMINATION)

PRESETS = {
    name: WeatherPreset(name, ill, _rain(name), _fog(name)) for name, ill in _ILLUMINATION
}

DEFAULT_PRESET = "ClearNoon"

# Adjacent sweep pairs whose illumination differs by >5 % relative; with the
# pinned table that is all of them.
ILLUMINATION_CHANGING = tuple(
    (SWEEP_ORDER[i], SWEEP_ORDER[i + 1])
    for i in range(len(SWEEP_ORDER) - 1)
    if abs(PRESETS[SWEEP_ORDER[i + 1]].illumination - PRESETS[SWEEP_ORDER[i]].illumination)
    > 0.05 * PRESETS[SWEEP_ORDER[i]].illumination
)


def get_preset(name: str) -> WeatherPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise WeatherNotFound(f"unknown weather preset {name!r}") from None


def sweep() -> list[WeatherPreset]:
    return [PRESETS[name] for name in SWEEP_ORDER]
