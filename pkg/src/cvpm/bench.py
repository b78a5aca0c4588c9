"""Physical bench parameters <-> dimensionless displacement amplitudes.

A q-displacement is a transverse beam shift (the beam-displacer shear) and a
p-displacement a transverse wavenumber kick ``k = 2 pi tilt / lambda`` from
the wedge plates. With a phase-space length scale ``s`` we identify

    q0 = shear / s,        p0 = k * s,

so the product ``q0 p0 = shear * k`` is independent of ``s``. This follows
the calibration arithmetic used on the bench (3 mm shear needs a
78.3 urad deflection at 940 nm).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional

from .algebra import SquareParams

SMALL_ANGLE = 1e-2
PRODUCT_TOL = 1e-6


@dataclass(frozen=True)
class BenchParams:
    """Displacer geometry, all lengths in metres and angles in radians.

    ``wedge_deflection`` is the relative p-displacement tilt; when None the
    tilt that makes q0 p0 = pi/2 for the given shear is used.
    ``length_scale`` None selects the symmetric scale with q0 = p0.
    """

    wavelength: float = 940e-9
    shear: float = 3e-3
    farfield_distance: float = 3.0
    wedge_deflection: Optional[float] = None
    length_scale: Optional[float] = None
    emitter_wavelength: Optional[float] = None

    def __post_init__(self):
        for name in ("wavelength", "shear", "farfield_distance"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.length_scale is not None and not self.length_scale > 0:
            raise ValueError("length_scale must be positive")
        if self.wedge_deflection is not None and self.wedge_deflection < 0:
            raise ValueError("wedge_deflection must be non-negative")

    @property
    def target_wavenumber(self) -> float:
        """Wavenumber kick giving q0 p0 = pi/2 for this shear."""
        return math.pi / (2.0 * self.shear)

    @property
    def tilt(self) -> float:
        if self.wedge_deflection is not None:
            return self.wedge_deflection
        return tilt_from_p(self.target_wavenumber, self.wavelength)


def tilt_from_p(p0_phys: float, wavelength: float) -> float:
    """Beam deflection (rad) produced by a wavenumber kick ``p0_phys`` (1/m)."""
    if p0_phys < 0 or wavelength <= 0:
        raise ValueError("wavenumber must be non-negative and wavelength positive")
    return p0_phys * wavelength / (2.0 * math.pi)


def p_from_tilt(tilt: float, wavelength: float) -> float:
    return 2.0 * math.pi * tilt / wavelength


def farfield_shift(tilt: float, distance: float) -> float:
    """Change of beam separation after free propagation (small-angle)."""
    if abs(tilt) >= SMALL_ANGLE:
        warnings.warn(
            f"tilt {tilt:.3e} rad is outside the small-angle regime", RuntimeWarning, stacklevel=2
        )
    return tilt * distance


def dimensionless_map(bench: BenchParams) -> tuple[SquareParams, dict]:
    k = p_from_tilt(bench.tilt, bench.wavelength)
    product = bench.shear * k
    s = bench.length_scale
    if s is None:
        s = math.sqrt(bench.shear / k) if k > 0 else 1.0
    params = SquareParams(bench.shear / s, k * s) if k > 0 else None
    report = {
        "length_scale": s,
        "wavenumber": k,
        "product": product,
        "product_target": math.pi / 2.0,
        "product_deviation": product - math.pi / 2.0,
        "valid": abs(product - math.pi / 2.0) <= PRODUCT_TOL,
    }
    return params, report


def bench_from_dimensionless(params: SquareParams, wavelength: float, length_scale: float,
                             farfield_distance: float = 3.0) -> BenchParams:
    """Inverse of :func:`dimensionless_map` for a known length scale."""
    shear = params.q0 * length_scale
    k = params.p0 / length_scale
    return BenchParams(
        wavelength=wavelength,
        shear=shear,
        farfield_distance=farfield_distance,
        wedge_deflection=tilt_from_p(k, wavelength),
        length_scale=length_scale,
    )


def bench_report(bench: BenchParams) -> dict:
    params, mapping = dimensionless_map(bench)
    tilt = bench.tilt
    notes = []
    if not mapping["valid"]:
        notes.append(
            "q0*p0 deviates from pi/2 by "
            f"{mapping['product_deviation']:.3e}; same-mode displacements will not anticommute"
        )
    if bench.emitter_wavelength is not None and bench.emitter_wavelength != bench.wavelength:
        notes.append(
            f"displacer calibrated at {bench.wavelength * 1e9:.1f} nm but emitter line is "
            f"{bench.emitter_wavelength * 1e9:.1f} nm; calibration uses the displacer value"
        )
    return {
        "wavelength_m": bench.wavelength,
        "shear_m": bench.shear,
        "tilt_rad": tilt,
        "farfield_distance_m": bench.farfield_distance,
        "farfield_shift_m": farfield_shift(tilt, bench.farfield_distance),
        "wavenumber_per_m": mapping["wavenumber"],
        "length_scale_m": mapping["length_scale"],
        "q0": params.q0 if params else 0.0,
        "p0": params.p0 if params else 0.0,
        "product": mapping["product"],
        "product_valid": mapping["valid"],
        "notes": notes,
    }
