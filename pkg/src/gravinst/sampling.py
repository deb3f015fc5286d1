"""Deterministic low-discrepancy sampling of chart points.

Verification scans must be reproducible byte for byte, so points come
from Halton sequences (one prime base per coordinate) with the seed
folded into the start index.  Equal seeds give equal streams on every
platform; no stateful RNG is involved.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator

from gravinst import ghawking, hitchin
from gravinst.errors import ScanError
from gravinst.singularities import CenterConfiguration

_BASES = (2, 3, 5, 7)


def halton(index: int, base: int) -> float:
    """Halton radical-inverse of a positive integer in the given base."""
    if index <= 0:
        raise ValueError("Halton index must be positive")
    f = 1.0
    r = 0.0
    i = index
    while i > 0:
        f /= base
        r += f * (i % base)
        i //= base
    return r


@dataclass(frozen=True)
class SampleSpec:
    """Annulus sampling request: count base points with |x| in
    [r_min, r_max]*scale, keeping clear of centers, Dirac strings and
    chart poles by the stated margins."""

    count: int = 20
    seed: int = 0
    r_min: float = 2.0
    r_max: float = 6.0
    clearance: float = 0.25
    chart_margin: float = 1e-3

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be positive")
        if not (0.0 < self.r_min < self.r_max):
            raise ValueError("need 0 < r_min < r_max")


def _start_index(seed: int) -> int:
    return 1 + (int(seed) % (2**31))


def _candidates(
    config: CenterConfiguration, spec: SampleSpec
) -> Iterator[tuple[float, complex, float]]:
    """Unbounded stream of (b, a, theta) samples clear of centers and of
    the default-gauge Dirac strings.  Radii are volume-uniform over the
    annulus, scaled by the configuration extent."""
    scale = max(1.0, config.extent())
    lo, hi = spec.r_min * scale, spec.r_max * scale
    clear = spec.clearance * scale
    idx = _start_index(spec.seed)
    while True:
        u = [halton(idx, b) for b in _BASES]
        idx += 1
        r = (lo**3 + u[0] * (hi**3 - lo**3)) ** (1.0 / 3.0)
        cos_t = 2.0 * u[1] - 1.0
        sin_t = math.sqrt(max(0.0, 1.0 - cos_t * cos_t))
        phi = 2.0 * math.pi * u[2]
        b = r * cos_t
        a = complex(r * sin_t * math.cos(phi), r * sin_t * math.sin(phi))
        theta = 2.0 * math.pi * u[3]
        if ghawking.center_clearance(config, b, a) < clear:
            continue
        if ghawking.string_clearance(config, b, a) < clear:
            continue
        yield b, a, theta


def base_points(
    config: CenterConfiguration, spec: SampleSpec
) -> list[tuple[float, complex, float]]:
    """First spec.count accepted (b, a, theta) samples."""
    out = []
    for tries, cand in enumerate(_candidates(config, spec)):
        out.append(cand)
        if len(out) >= spec.count:
            return out
        if tries > 10000 * spec.count:
            break
    raise ScanError("sampling rejected too many candidate points")


def gh_points(config: CenterConfiguration, spec: SampleSpec) -> list[ghawking.GHPoint]:
    return [
        ghawking.GHPoint(theta=t, b=b, a=a) for b, a, t in base_points(config, spec)
    ]


def hitchin_points(
    config: CenterConfiguration, spec: SampleSpec
) -> list[hitchin.HitchinPoint]:
    """Same base stream, lifted to the complex chart.

    Candidates whose chart coordinates fall inside the chart margin (near
    the branch locus y = 0 or a puncture z = -conj(a_i)) are discarded
    and replaced by later stream entries, keeping the accepted list a
    deterministic function of the SampleSpec.
    """
    scale = max(1.0, config.extent())
    out: list[hitchin.HitchinPoint] = []
    for tries, (b, a, theta) in enumerate(_candidates(config, spec)):
        if tries > 10000 * spec.count:
            raise ScanError("chart lift rejected too many sample points")
        z = -a.conjugate()
        if any(
            abs(z.conjugate() + c.a) < spec.chart_margin * scale
            for c in config.centers
        ):
            continue
        p = hitchin.base_to_chart(config, b, a, phase=theta)
        if abs(p.y) < spec.chart_margin:
            continue
        out.append(p)
        if len(out) >= spec.count:
            return out
    raise ScanError("chart lift rejected too many sample points")
