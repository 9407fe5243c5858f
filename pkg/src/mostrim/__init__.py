"""mostrim: probabilistic model checking with monotonic-safety trimming.

A toolkit for finite probabilistic automata built from interval
abstractions of controller/plant loops composed with probabilistic
perception models.  It provides exact min/max safety checking, lightweight
scheduler sampling, monotonic-safety orders with conservative transition
trimming, and empirical validation of the orders by scheduler enumeration.
"""
from .pa import (PA, ActionLabel, CapExceeded, Distribution, Dtmc, INTERNAL,
                 ModelError, PERCEPTION, REACHABILITY, apply_scheduler, compose,
                 count_schedulers, enabled_actions, enumerate_schedulers,
                 sample_path, validate)
from .pmc import (CheckResult, SafetyProperty, decomposition_check,
                  make_bad_absorbing, max_safety_prob, min_safety_prob,
                  min_schedulers, prob_under_scheduler, scheduler_value_vector)
from .mos import (MosValidationReport, PartialOrder, Relation, TrimReport,
                  component_order, extensional_order, negate, product_order,
                  scheduler_reduction_factor, toward_middle_order, trim_lss,
                  trim_lss_state, trim_pmc, trim_pmc_state, validate_mos)
from .lss import (FsdResult, LssConfig, LssResult, coupled_lss, estimate_prob,
                  fsd_check, lss_min, sample_scheduler, sample_size)
from .abstraction import (AbstractCell, ControllerPlantSpec, IntervalGrid,
                          build_interval_abstraction, reachable_cells,
                          simulate_concrete)

__version__ = "0.1.0"
