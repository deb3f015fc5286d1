"""Center configurations for the cyclic-quotient metrics.

A configuration is a finite list of centers (b_i, a_i) in R x C, tagged
with a quotient signature (d, n, m) and an asymptotic mode.  The symmetric
configurations are unions of d regular n-gons: polygon i has vertices

    a_{i,j} = -conj(c_i) * rho**(-j),   b_{i,j} = b_i,   j = 1..n,

with rho = exp(2*pi*i/n), so the center set is invariant under the cyclic
action a -> rho**(-m) a.  The same data determines the deformed A-type
equation x*y = prod_i (z**n - c_i**n) whose coefficient pattern is checked
against the centers.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from gravinst.errors import InvalidSignatureError, SingularFiberError

_COLLISION_TOL = 1e-9


@dataclass(frozen=True)
class QuotientSignature:
    """Signature (d, n, m) of the quotient 1/(d*n^2) * (1, d*n*m - 1).

    n = 1 is admitted as the trivial quotient (plain A_{k-1} data, m = 0).
    """

    d: int
    n: int
    m: int

    def __post_init__(self):
        if self.d < 1:
            raise InvalidSignatureError(f"d must be >= 1, got {self.d}")
        if self.n < 1:
            raise InvalidSignatureError(f"n must be >= 1, got {self.n}")
        if self.n == 1:
            if self.m != 0:
                raise InvalidSignatureError("n = 1 requires m = 0")
        else:
            if not (1 <= self.m < self.n):
                raise InvalidSignatureError(
                    f"m must satisfy 1 <= m < n, got m={self.m}, n={self.n}"
                )
            if math.gcd(self.m, self.n) != 1:
                raise InvalidSignatureError(
                    f"m and n must be coprime, got gcd({self.m},{self.n}) != 1"
                )

    @property
    def k(self) -> int:
        """Total number of centers d*n."""
        return self.d * self.n

    @property
    def rho(self) -> complex:
        return cmath.exp(2j * math.pi / self.n)


@dataclass(frozen=True)
class Center:
    """One center: height b on the real axis, position a in the plane."""

    b: float
    a: complex

    def __post_init__(self):
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "a", complex(self.a))
        if not (math.isfinite(self.b) and cmath.isfinite(self.a)):
            raise ValueError("center coordinates must be finite")

    def as_r3(self) -> np.ndarray:
        """Coordinates (b, Re a, Im a) as a point of R^3."""
        return np.array([self.b, self.a.real, self.a.imag])


@dataclass(frozen=True)
class GroupElement:
    """Element rho^ell of the cyclic group Z_n attached to a signature."""

    ell: int
    signature: QuotientSignature

    def __post_init__(self):
        object.__setattr__(self, "ell", int(self.ell) % self.signature.n)

    def compose(self, other: "GroupElement") -> "GroupElement":
        if other.signature != self.signature:
            raise ValueError("cannot compose elements of different groups")
        return GroupElement(self.ell + other.ell, self.signature)

    @property
    def is_identity(self) -> bool:
        return self.ell == 0


@dataclass(frozen=True)
class CenterConfiguration:
    """Centers plus signature plus asymptotic mode.

    mode is one of "ale", "alf", "akl"; akl_j_max records the truncation
    level of an infinite-topology configuration (mode "akl" only).
    Coincident centers are rejected: the corresponding space is singular.
    Symmetry is *not* enforced here -- deliberately broken configurations
    must remain constructible so the invariance checks can fail on them.
    """

    centers: tuple[Center, ...]
    signature: QuotientSignature
    mode: str = "ale"
    akl_j_max: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "centers", tuple(self.centers))
        if self.mode not in ("ale", "alf", "akl"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if (self.mode == "akl") != (self.akl_j_max is not None):
            raise ValueError("akl_j_max must be set exactly for mode 'akl'")
        if len(self.centers) != self.signature.k:
            raise ValueError(
                f"expected {self.signature.k} centers, got {len(self.centers)}"
            )
        pts = np.array([c.as_r3() for c in self.centers])
        scale = max(1.0, float(np.max(np.abs(pts))))
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if np.linalg.norm(pts[i] - pts[j]) <= _COLLISION_TOL * scale:
                    raise SingularFiberError(
                        f"centers {i} and {j} coincide; the space is singular"
                    )

    @property
    def k(self) -> int:
        return len(self.centers)

    def points_r3(self) -> np.ndarray:
        """(k, 3) array of centers as points (b, Re a, Im a)."""
        return np.array([c.as_r3() for c in self.centers])

    def diameter(self) -> float:
        """Largest pairwise distance between centers (0 for k = 1)."""
        pts = self.points_r3()
        best = 0.0
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                best = max(best, float(np.linalg.norm(pts[i] - pts[j])))
        return best

    def extent(self) -> float:
        """Largest center distance from the origin of R^3."""
        pts = self.points_r3()
        return float(np.max(np.linalg.norm(pts, axis=1)))


def _principal_branch(c: complex, n: int) -> complex:
    """Rotate c by a power of rho so its argument lands in [0, 2*pi/n)."""
    if n == 1:
        return c
    sector = 2.0 * math.pi / n
    ang = cmath.phase(c) % (2.0 * math.pi)
    shift = math.floor(ang / sector)
    return c * cmath.exp(-2j * math.pi * shift / n)


def make_polygon_config(
    signature: QuotientSignature,
    radii: Sequence[complex],
    heights: Sequence[float],
    mode: str = "ale",
    akl_j_max: int | None = None,
) -> CenterConfiguration:
    """Build the symmetric configuration of d regular n-gons.

    radii are the deformation roots c_i (nonzero, distinct n-th powers);
    heights are the polygon heights b_i.  Each c_i is first normalized to
    the principal branch (argument in [0, 2*pi/n)), which permutes the
    vertices of its polygon but not the vertex set.
    """
    if len(radii) != signature.d or len(heights) != signature.d:
        raise ValueError("radii and heights must each have length d")
    cs = [complex(c) for c in radii]
    if any(c == 0 for c in cs):
        raise ValueError("deformation roots c_i must be nonzero")
    powers = [c**signature.n for c in cs]
    pscale = max(abs(p) for p in powers)
    for i in range(len(powers)):
        for j in range(i + 1, len(powers)):
            if abs(powers[i] - powers[j]) <= 1e-12 * pscale:
                raise SingularFiberError(
                    "repeated deformation value c_i**n: the fiber is singular"
                )
    cs = [_principal_branch(c, signature.n) for c in cs]
    rho = signature.rho
    centers = []
    for i in range(signature.d):
        for j in range(1, signature.n + 1):
            a = -cs[i].conjugate() * rho ** (-j)
            centers.append(Center(b=float(heights[i]), a=a))
    return CenterConfiguration(
        centers=tuple(centers), signature=signature, mode=mode, akl_j_max=akl_j_max
    )


def make_akl_config(
    n: int, m: int, j_max: int, heights: Sequence[float] | None = None
) -> CenterConfiguration:
    """Truncated infinite-topology configuration: polygons j = 1..j_max
    inscribed in circles of radius j**2 about the vertical axis, height 0
    by default."""
    if j_max < 1:
        raise ValueError("j_max must be >= 1")
    signature = QuotientSignature(d=j_max, n=n, m=m)
    radii = [float(j) ** 2 for j in range(1, j_max + 1)]
    if heights is None:
        heights = [0.0] * j_max
    return make_polygon_config(
        signature, radii, heights, mode="akl", akl_j_max=j_max
    )


@dataclass(frozen=True)
class DeformationPolynomial:
    """Monic polynomial prod_i (z + conj(a_i)) attached to a configuration;
    for polygon data this equals prod_i (z**n - c_i**n)."""

    coefficients: tuple[complex, ...]  # highest degree first, leading 1

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, z: complex) -> complex:
        acc = 0j
        for c in self.coefficients:
            acc = acc * z + c
        return acc


def defining_polynomial(config: CenterConfiguration) -> DeformationPolynomial:
    """Coefficients of the defining equation x*y = prod_i (z + conj(a_i))."""
    coeffs = np.array([1.0 + 0j])
    for c in config.centers:
        coeffs = np.convolve(coeffs, np.array([1.0 + 0j, c.a.conjugate()]))
    return DeformationPolynomial(coefficients=tuple(complex(v) for v in coeffs))


def apply_action_hitchin(
    gel: GroupElement, z: complex, y: complex
) -> tuple[complex, complex]:
    """Cyclic action in the (z, y) chart: (z, y) -> (rho^(m*ell) z, rho^(-ell) y)."""
    n = gel.signature.n
    m = gel.signature.m
    zf = cmath.exp(2j * math.pi * m * gel.ell / n)
    yf = cmath.exp(-2j * math.pi * gel.ell / n)
    return zf * z, yf * y


def apply_action_gh(
    gel: GroupElement, theta: float, b: float, a: complex
) -> tuple[float, float, complex]:
    """Cyclic action on the circle-fibered chart:
    (theta, b, a) -> (theta + 2*pi*ell/n mod 2*pi, b, rho^(-m*ell) a)."""
    n = gel.signature.n
    m = gel.signature.m
    theta2 = (theta + 2.0 * math.pi * gel.ell / n) % (2.0 * math.pi)
    a2 = a * cmath.exp(-2j * math.pi * m * gel.ell / n)
    return theta2, b, a2


def symmetry_residual(config: CenterConfiguration) -> float:
    """Hausdorff-type distance between the center set and its image under
    the group generator (a -> rho^(-m) a, b fixed).  Zero for exactly
    symmetric configurations."""
    n = config.signature.n
    if n == 1:
        return 0.0
    rot = cmath.exp(-2j * math.pi * config.signature.m / n)
    worst = 0.0
    for c in config.centers:
        image = Center(b=c.b, a=rot * c.a)
        best = min(
            float(np.linalg.norm(image.as_r3() - other.as_r3()))
            for other in config.centers
        )
        worst = max(worst, best)
    return worst


def canonical_center_order(config: CenterConfiguration) -> list[int]:
    """Indices of the centers in canonical order: b descending, then
    arg(a) ascending in [0, 2*pi), then |a| ascending."""

    def key(idx: int):
        c = config.centers[idx]
        ang = cmath.phase(c.a) % (2.0 * math.pi) if c.a != 0 else 0.0
        return (-c.b, ang, abs(c.a))

    return sorted(range(config.k), key=key)


def kahler_class(config: CenterConfiguration) -> np.ndarray:
    """Cohomology-class vector of the metric: entry i is 8*pi*(b_i - b_{i+1})
    for consecutive centers in canonical order (k - 1 entries)."""
    order = canonical_center_order(config)
    bs = [config.centers[i].b for i in order]
    return np.array(
        [8.0 * math.pi * (bs[i] - bs[i + 1]) for i in range(len(bs) - 1)]
    )


_CONFIG_KEYS = {"d", "n", "m", "radii", "heights", "mode"}


def config_from_json(data: dict) -> CenterConfiguration:
    """Parse the configuration object {"d","n","m","radii","heights","mode"}.

    radii entries are [re, im] pairs; heights is a list of d reals and
    defaults to zeros; mode is "ale" (default), "alf", or {"akl": J}.  For
    akl mode the polygons are generated from (n, m, J): d, radii and
    heights must be omitted.  Unknown keys are rejected.
    """
    if not isinstance(data, dict):
        raise ValueError("configuration must be a JSON object")
    unknown = set(data) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    mode = data.get("mode", "ale")
    if isinstance(mode, dict):
        if set(mode) != {"akl"}:
            raise ValueError('mode object must be {"akl": J}')
        j_max = mode["akl"]
        if not isinstance(j_max, int) or j_max < 1:
            raise ValueError("akl truncation level must be a positive integer")
        for key in ("d", "radii", "heights"):
            if key in data:
                raise ValueError(f"akl mode generates its polygons; remove {key!r}")
        n = _require_int(data, "n")
        m = _require_int(data, "m")
        return make_akl_config(n=n, m=m, j_max=j_max)
    if mode not in ("ale", "alf"):
        raise ValueError(f"mode must be 'ale', 'alf' or {{'akl': J}}, got {mode!r}")
    d = _require_int(data, "d")
    n = _require_int(data, "n")
    m = _require_int(data, "m")
    signature = QuotientSignature(d=d, n=n, m=m)
    if "radii" not in data:
        raise ValueError("missing configuration key 'radii'")
    radii_raw = data["radii"]
    if not isinstance(radii_raw, list) or len(radii_raw) != d:
        raise ValueError("radii must be a list of d [re, im] pairs")
    radii = []
    for entry in radii_raw:
        if (
            not isinstance(entry, list)
            or len(entry) != 2
            or not all(isinstance(v, (int, float)) for v in entry)
        ):
            raise ValueError("each radius must be a [re, im] pair of numbers")
        radii.append(complex(entry[0], entry[1]))
    heights_raw = data.get("heights", [0.0] * d)
    if not isinstance(heights_raw, list) or len(heights_raw) != d:
        raise ValueError("heights must be a list of d reals")
    if not all(isinstance(v, (int, float)) for v in heights_raw):
        raise ValueError("heights entries must be numbers")
    return make_polygon_config(signature, radii, [float(h) for h in heights_raw], mode=mode)


def _require_int(data: dict, key: str) -> int:
    if key not in data:
        raise ValueError(f"missing configuration key {key!r}")
    value = data[key]
    if not isinstance(value, int) or isinstance(value, bool):
        raise ValueError(f"configuration key {key!r} must be an integer")
    return value
