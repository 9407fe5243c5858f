"""Executable case studies: emergency braking and water-tank flow control."""
from .aebs import (AebsParams, BrakingRule, DetectionModel, aebs_control,
                   aebs_desk_model, aebs_desk_params, aebs_orders, aebs_step,
                   build_aebs_model)
from .tanks import (ErrorModel, TankParams, build_tank_model, tank_control,
                    tank_desk_model, tank_desk_params, tank_order,
                    tank_sampling_model, tank_sampling_params, tank_step)
from .counterexamples import (ce1_model, ce2_model, ce3_model,
                              counterexample_distance, counterexample_speed,
                              counterexample_tank)

__all__ = [
    "AebsParams", "BrakingRule", "DetectionModel", "aebs_control",
    "aebs_desk_model", "aebs_desk_params", "aebs_orders", "aebs_step",
    "build_aebs_model",
    "ErrorModel", "TankParams", "build_tank_model", "tank_control",
    "tank_desk_model", "tank_desk_params", "tank_order",
    "tank_sampling_model", "tank_sampling_params", "tank_step",
    "ce1_model", "ce2_model", "ce3_model", "counterexample_distance",
    "counterexample_speed", "counterexample_tank",
]
