"""Python front end for the job shop simulator."""

import json

from ._jobshoplab import (
    ConfigError,
    Environment,
    Instance,
    JobShopError,
    ParseError,
    SizeGuardError,
    State,
    classical_reduction,
    load_instance,
    load_instance_file,
    random_instance,
    solve_exact,
    validate_trace,
)
from . import _jobshoplab

__all__ = [
    "ConfigError",
    "Environment",
    "Instance",
    "JobShopError",
    "ParseError",
    "SizeGuardError",
    "State",
    "benchmark",
    "classical_reduction",
    "gantt",
    "load_instance",
    "load_instance_file",
    "random_instance",
    "run_episode",
    "solve_exact",
    "validate_trace",
]


def run_episode(instance, config="action multidiscrete", policy="spt", seed=0):
    """Runs one dispatch-rule episode. The trace comes back parsed."""
    result = _jobshoplab.run_episode(instance, config, policy, seed)
    result["trace"] = json.loads(result["trace"])
    return result


def benchmark(instances, policies, config="action multidiscrete", seeds=(0,), bounds=None, workers=1):
    return json.loads(_jobshoplab.benchmark(list(instances), list(policies), config, list(seeds), dict(bounds or {}), workers))


def gantt(trace):
    text = trace if isinstance(trace, str) else json.dumps(trace)
    return json.loads(_jobshoplab.gantt(text))
