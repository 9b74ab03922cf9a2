"""Coupling-condition descriptors such as ``merge_priority(0.5)`` or ``lwr_alpha(0.3)``."""

import re
from dataclasses import dataclass
from functools import partial
from typing import Callable, Tuple

from . import junction_lwr as lwr
from . import junction_relax as relax

# name -> (model, topology, solver factory taking the parameters, parameter count)
_REGISTRY = {
    "merge_flux_ratio": ("relaxation", "merge", lambda: relax.merge_flux_ratio, 0),
    "merge_priority": ("relaxation", "merge", lambda P: partial(relax.merge_priority, P=P), 1),
    "diverge_alpha": ("relaxation", "diverge", lambda a: partial(relax.diverge_preferences, alpha=a), 1),
    "diverge_adaptive": ("relaxation", "diverge", lambda: relax.diverge_adaptive, 0),
    "lwr_fair": ("lwr", "merge", lambda: lwr.merge_fair, 0),
    "lwr_priority": ("lwr", "merge", lambda: lwr.merge_priority_lwr, 0),
    "lwr_alpha": ("lwr", "diverge", lambda a: partial(lwr.diverge_alpha_lwr, alpha=a), 1),
    "lwr_adaptive": ("lwr", "diverge", lambda: lwr.diverge_adaptive_lwr, 0),
}

_PATTERN = re.compile(r"^\s*([a-z_]+)\s*(?:\(\s*([^()]*?)\s*\))?\s*$")


@dataclass(frozen=True)
class Coupling:
    name: str
    params: Tuple[float, ...]
    model: str
    topology: str
    solve: Callable

    @property
    def descriptor(self):
        if not self.params:
            return self.name
        return f"{self.name}({', '.join(repr(p) for p in self.params)})"


def parse_coupling(text):
    m = _PATTERN.match(text)
    if not m or m.group(1) not in _REGISTRY:
        raise ValueError(f"unknown coupling descriptor {text!r}; known: {sorted(_REGISTRY)}")
    name, arg = m.group(1), m.group(2)
    model, topology, factory, nparams = _REGISTRY[name]
    params = tuple(float(a) for a in arg.split(",")) if arg else ()
    if len(params) != nparams:
        raise ValueError(f"coupling {name!r} takes {nparams} parameter(s), got {len(params)}")
    if name == "merge_priority" and not 0.0 <= params[0] <= 1.0:
        raise ValueError(f"priority weight must lie in [0, 1], got {params[0]!r}")
    if name in ("diverge_alpha", "lwr_alpha") and not 0.0 < params[0] < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {params[0]!r}")
    return Coupling(name, params, model, topology, factory(*params))


def lwr_counterpart(coupling):
    """LWR condition reached in the zero-relaxation limit of a relaxation coupling."""
    if coupling.model == "lwr":
        return coupling
    if coupling.name == "merge_flux_ratio":
        return parse_coupling("lwr_fair")
    if coupling.name == "merge_priority":
        P = coupling.params[0]
        if P == 0.0:
            return parse_coupling("lwr_priority")
        if P == 0.5:
            return parse_coupling("lwr_fair")
        raise ValueError(f"no LWR counterpart known for merge_priority({P}); set lwr_coupling explicitly")
    if coupling.name == "diverge_alpha":
        return parse_coupling(f"lwr_alpha({coupling.params[0]!r})")
    return parse_coupling("lwr_adaptive")
