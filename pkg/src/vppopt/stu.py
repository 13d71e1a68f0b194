"""Solar thermal unit constraints: field, storage, power block.

The unit couples a solar field (thermal availability series), a thermal
storage loop with charge/discharge efficiencies, and a power block whose
thermal-to-electric conversion steepens with load. The conversion is the
continuous interpolant through five (input, output) breakpoints encoded
with SOS-2 weights; :func:`eval_pb_oracle` is the reference evaluation of
that map, used to cross-check solved models.

Builders take an explicit period window plus the storage energy and power
block status just before it, so the same code serves the day-ahead stage
(full horizon, scenario initial state) and intraday sessions (receding
window, ledger state).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from vppopt.milp import MilpModel
from vppopt.registry import VariableRegistry
from vppopt.scenario import StuAsset

# registry roles
PSF = "stu_psf"        # solar field thermal output [MW_th]
CHG = "stu_chg"        # storage charging [MW_th]
DIS = "stu_dis"        # storage discharging [MW_th]
UPLUS = "stu_uplus"    # 1 while charging (excludes discharging)
ENERGY = "stu_e"       # stored energy [MWh_th]
PPB = "stu_ppb_th"     # power block thermal input [MW_th]
PB_ON = "stu_u"        # power block committed
PB_START = "stu_v1"    # power block startup indicator
POWER = "stu_p"        # electrical output [MW]
WEIGHT = "stu_w"       # SOS-2 weights, roles stu_w0..stu_w4


@dataclass(frozen=True)
class PbCurve:
    """Piecewise-linear thermal-to-electric map of the power block."""

    breakpoints: tuple[float, ...]  # MW_th
    values: tuple[float, ...]       # MW

    def __post_init__(self):
        if len(self.breakpoints) != len(self.values):
            raise ValueError("breakpoints and values must align")
        if self.values[0] != 0 or self.breakpoints[0] != 0:
            raise ValueError("curve must pass through the origin")
        if any(b2 < b1 for b1, b2 in zip(self.breakpoints, self.breakpoints[1:])):
            raise ValueError("breakpoints must be non-decreasing")
        if any(v2 < v1 for v1, v2 in zip(self.values, self.values[1:])):
            raise ValueError("values must be non-decreasing")


def pb_curve(asset: StuAsset) -> PbCurve:
    """Conversion curve of an asset's power block.

    Each interior breakpoint carries the conversion factor of the segment
    it closes, so output rises continuously and the per-segment factors
    are met exactly at the grid points.
    """
    b = (0.0, asset.pb_min, asset.pb_break1, asset.pb_break2, asset.pb_max)
    eta = (asset.eta1, asset.eta2, asset.eta3, asset.eta4)
    v = (0.0,) + tuple(e * x for e, x in zip(eta, b[1:]))
    return PbCurve(breakpoints=b, values=v)


def eval_pb_oracle(curve: PbCurve, thermal_input: float) -> float:
    """Electrical output for a thermal input, by direct interpolation."""
    if not 0 <= thermal_input <= curve.breakpoints[-1] + 1e-9:
        raise ValueError(
            f"thermal input {thermal_input} outside [0, {curve.breakpoints[-1]}]")
    return float(np.interp(thermal_input, curve.breakpoints, curve.values))


def register_stu_variables(model: MilpModel, reg: VariableRegistry, asset: StuAsset,
                           periods: Sequence[int]) -> None:
    """Declare the unit's variable block over a period window."""
    for t in periods:
        reg.new(model, PSF, asset.id, t, lb=0.0, ub=np.inf)  # capped per session below
        reg.new(model, CHG, asset.id, t, lb=0.0, ub=asset.charge_max)
        reg.new(model, DIS, asset.id, t, lb=0.0, ub=asset.discharge_max)
        reg.new(model, UPLUS, asset.id, t, kind="binary")
        reg.new(model, ENERGY, asset.id, t,
                lb=asset.storage_floor[t - 1], ub=asset.storage_cap[t - 1])
        reg.new(model, PPB, asset.id, t, lb=0.0, ub=asset.pb_max)
        reg.new(model, PB_ON, asset.id, t, kind="binary")
        # the three startup inequalities pin this to u_t(1 - u_{t-1})
        # whenever the on/off statuses are binary, so it can stay continuous
        reg.new(model, PB_START, asset.id, t, lb=0.0, ub=1.0)
        reg.new(model, POWER, asset.id, t, lb=0.0, ub=np.inf)
        for i in range(5):
            reg.new(model, f"{WEIGHT}{i}", asset.id, t, lb=0.0, ub=1.0)


def build_stu_constraints(model: MilpModel, reg: VariableRegistry, asset: StuAsset,
                          periods: Sequence[int], avail: Mapping[int, float],
                          dt: float, initial_energy: float, initial_pb_on: bool) -> None:
    """Field, storage and power block coupling over a period window.

    ``avail`` maps each period to the solar field's thermal availability;
    ``initial_energy`` and ``initial_pb_on`` describe the state one period
    before the window starts.
    """
    a = asset
    last = periods[-1]
    for idx, t in enumerate(periods):
        psf = reg.id(PSF, a.id, t)
        chg = reg.id(CHG, a.id, t)
        dis = reg.id(DIS, a.id, t)
        up = reg.id(UPLUS, a.id, t)
        e = reg.id(ENERGY, a.id, t)
        ppb = reg.id(PPB, a.id, t)
        u = reg.id(PB_ON, a.id, t)
        v1 = reg.id(PB_START, a.id, t)

        model.set_bounds(psf, ub=avail[t])

        # storage charges from the solar field only: availability and the
        # loop rating both cap it, and charging excludes discharging
        model.add_constraint({chg: 1.0, up: -avail[t]}, "<=", 0.0, f"stu_chg_avail.{a.id}.t{t}")
        model.add_constraint({chg: 1.0, up: -a.charge_max}, "<=", 0.0, f"stu_chg_cap.{a.id}.t{t}")
        model.add_constraint({chg: 1.0, up: -a.charge_min}, ">=", 0.0, f"stu_chg_min.{a.id}.t{t}")
        model.add_constraint({dis: 1.0, up: a.discharge_max}, "<=", a.discharge_max,
                             f"stu_dis_cap.{a.id}.t{t}")
        model.add_constraint({dis: 1.0, up: a.discharge_min}, ">=", a.discharge_min,
                             f"stu_dis_min.{a.id}.t{t}")

        # thermal input: field plus discharge, minus charge and startup loss
        model.add_constraint(
            {ppb: 1.0, psf: -1.0, dis: -1.0, chg: 1.0, v1: a.startup_loss * a.pb_max},
            "==", 0.0, f"stu_pb_input.{a.id}.t{t}")

        # power block operating window when committed
        model.add_constraint({ppb: 1.0, u: -a.pb_max}, "<=", 0.0, f"stu_pb_hi.{a.id}.t{t}")
        model.add_constraint({ppb: 1.0, u: -a.pb_min}, ">=", 0.0, f"stu_pb_lo.{a.id}.t{t}")

        # storage balance against the previous period (or the initial fill)
        balance = {e: 1.0, chg: -a.charge_eff * dt, dis: dt / a.discharge_eff}
        if idx == 0:
            model.add_constraint(balance, "==", initial_energy, f"stu_ebal.{a.id}.t{t}")
        else:
            balance[reg.id(ENERGY, a.id, periods[idx - 1])] = -1.0
            model.add_constraint(balance, "==", 0.0, f"stu_ebal.{a.id}.t{t}")

        # startup indicator: v1 = 1 exactly on off-to-on transitions
        if idx == 0:
            u_prev_const = 1.0 if initial_pb_on else 0.0
            model.add_constraint({v1: 1.0, u: -1.0}, ">=", -u_prev_const,
                                 f"stu_start_lo.{a.id}.t{t}")
            model.add_constraint({v1: 1.0}, "<=", 1.0 - u_prev_const,
                                 f"stu_start_prev.{a.id}.t{t}")
        else:
            u_prev = reg.id(PB_ON, a.id, periods[idx - 1])
            model.add_constraint({v1: 1.0, u: -1.0, u_prev: 1.0}, ">=", 0.0,
                                 f"stu_start_lo.{a.id}.t{t}")
            model.add_constraint({v1: 1.0, u_prev: 1.0}, "<=", 1.0,
                                 f"stu_start_prev.{a.id}.t{t}")
        model.add_constraint({v1: 1.0, u: -1.0}, "<=", 0.0, f"stu_start_on.{a.id}.t{t}")

    # end-of-window fill, reserved for the next operating day
    cap_end = a.storage_cap[last - 1]
    e_last = reg.id(ENERGY, a.id, last)
    model.add_constraint({e_last: 1.0}, ">=", a.end_alpha_lo * cap_end, f"stu_end_lo.{a.id}")
    model.add_constraint({e_last: 1.0}, "<=", a.end_alpha_hi * cap_end, f"stu_end_hi.{a.id}")


def build_pb_conversion(model: MilpModel, reg: VariableRegistry, asset: StuAsset,
                        periods: Sequence[int]) -> None:
    """Tie thermal input to electrical output through SOS-2 weights.

    Weights sum to the commitment state, so an off block forces both the
    input and the output to zero.
    """
    curve = pb_curve(asset)
    for t in periods:
        w = [reg.id(f"{WEIGHT}{i}", asset.id, t) for i in range(5)]
        ppb = reg.id(PPB, asset.id, t)
        p = reg.id(POWER, asset.id, t)
        u = reg.id(PB_ON, asset.id, t)

        coeffs = {wi: b for wi, b in zip(w, curve.breakpoints)}
        coeffs[ppb] = -1.0
        model.add_constraint(coeffs, "==", 0.0, f"stu_conv_in.{asset.id}.t{t}")

        coeffs = {wi: v for wi, v in zip(w, curve.values)}
        coeffs[p] = -1.0
        model.add_constraint(coeffs, "==", 0.0, f"stu_conv_out.{asset.id}.t{t}")

        coeffs = {wi: 1.0 for wi in w}
        coeffs[u] = -1.0
        model.add_constraint(coeffs, "==", 0.0, f"stu_conv_sum.{asset.id}.t{t}")

        # implied by the minimum-load bound plus adjacency (a committed
        # block cannot mix the origin point into its interpolation), but
        # stating it keeps the relaxation from pricing partial load at
        # full-load efficiency
        model.add_constraint({w[0]: 1.0, u: 1.0}, "<=", 1.0,
                             f"stu_conv_origin.{asset.id}.t{t}")

        model.add_sos2(w, f"stu_sos2.{asset.id}.t{t}")
