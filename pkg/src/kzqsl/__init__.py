"""Quantum-speed-limit estimates of Kibble-Zurek freeze-out times."""

__version__ = "0.1.0"

from .errors import (ConfigError, DomainError, EmptySweep, InfiniteRateError,
                     InsufficientData, IntegrationFailure, KZQSLError, NoMinimum,
                     ValidityExceeded)
from .models import (EnergyConvention, LandauZener, LMGEffective, Synthetic, TFIMAggregate,
                     TFIMMode, TwoLevelState, bures_angle, cd_cost_rate, ground_energy)
from .qsl import MinimumResult, SpeedSample, find_minimum, speed_at, speed_trace
from .ramps import RampProtocol, critical_time, dgdt, g_of_t
from .dynamics import CrossingKind, CrossoverResult, crossover_time, evolve_lz, propagate_lz
from .scaling import (FitResult, LzInfidelity, NuMin, QslMinimum, ScalingPoint,
                      fit_power_law, log_grid, lz_crossover_sweep, sweep)
