"""The tolerance record shared by every check."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Any, Dict, Mapping

from fdtlab.app.infra.errors import ConfigError
from . import constants


@dataclass(frozen=True)
class Tolerances:
    row_sum: float = constants.ROW_SUM_TOL
    expm_tail: float = constants.EXPM_TAIL_TOL
    semigroup_law: float = constants.SEMIGROUP_LAW_TOL
    measure_sum: float = constants.MEASURE_SUM_TOL
    invariant: float = constants.INVARIANT_TOL
    adjoint_invariance: float = constants.ADJOINT_INVARIANCE_TOL
    family_invariance: float = constants.FAMILY_INVARIANCE_TOL
    symmetry: float = constants.SYMMETRY_TOL
    balance: float = constants.BALANCE_TOL
    kernel_row_sum: float = constants.KERNEL_ROW_SUM_TOL
    metropolis_tie: float = constants.METROPOLIS_TIE_TOL
    fdt: float = constants.FDT_TOL
    static: float = constants.STATIC_TOL
    mode_agreement: float = constants.MODE_AGREEMENT_TOL
    numerical_diff: float = constants.NUMERICAL_DIFF_TOL
    richardson_step: float = constants.RICHARDSON_STEP
    simpson_agreement: float = constants.SIMPSON_AGREEMENT_TOL
    green_kubo_rel: float = constants.GREEN_KUBO_REL_TOL
    green_kubo_identity: float = constants.GREEN_KUBO_IDENTITY_TOL
    b_symmetry: float = constants.B_SYMMETRY_TOL
    homogeneity: float = constants.HOMOGENEITY_TOL
    roundoff_floor: float = constants.ROUNDOFF_FLOOR
    gap_rate_rel: float = constants.GAP_RATE_REL_TOL
    limit_extra: float = constants.LIMIT_EXTRA_TOL
    slope_min_smooth: float = constants.SLOPE_MIN_SMOOTH
    slope_min_langevin: float = constants.SLOPE_MIN_LANGEVIN
    kernel_slope_band: float = constants.KERNEL_SLOPE_BAND
    eta_final_rel: float = constants.ETA_FINAL_REL_TOL
    monotone_jitter: float = constants.MONOTONE_JITTER
    stability_guard: float = constants.STABILITY_GUARD
    mc_sigma: float = constants.MC_SIGMA

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    def with_overrides(self, overrides: Mapping[str, Any] | None) -> "Tolerances":
        """Return a copy with the named fields replaced.

        Raises:
            ConfigError: unknown name or a value that is not a nonnegative number
        """
        if not overrides:
            return self
        known = set(self.field_names())
        clean: Dict[str, float] = {}
        for name, value in overrides.items():
            if name not in known:
                raise ConfigError(
                    f"unknown tolerance '{name}'",
                    details={"name": name, "known": sorted(known)},
                )
            try:
                number = float(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"tolerance '{name}' is not a number: {value!r}") from exc
            if number < 0:
                raise ConfigError(f"tolerance '{name}' must be nonnegative, got {number}")
            clean[name] = number
        return dataclasses.replace(self, **clean)

    @classmethod
    def from_config(cls, cfg: Mapping[str, Any] | None) -> "Tolerances":
        """Build from the ``tolerances`` section of a merged config."""
        section = (cfg or {}).get("tolerances") or {}
        return DEFAULT_TOLERANCES.with_overrides(section)

    def to_dict(self) -> Dict[str, float]:
        return dataclasses.asdict(self)


DEFAULT_TOLERANCES = Tolerances()
