"""Port-based structural dynamics and structure/control co-design toolkit.

The package builds flexible multibody models as labeled state-space "port
models" whose inputs and outputs come in conjugate (acceleration twist,
wrench) pairs at named connection points.  Large truss structures are
assembled by block interconnection of double-port beam models, with channel
inversion used to switch boundary conditions.  On top of the structural
layer sit a spacecraft plant model, H-infinity performance indices and a
nested particle-swarm / pattern-search co-design loop.

Subpackage map:

- ``ss``          state-space algebra (interconnection, channel inversion,
                  modal form, reduction, gains, norms)
- ``frames``      rotations, rigid kinematic transports, rigid mass matrices
- ``beam``        Euler-Bernoulli finite-element beam and its double-port model
- ``mechanisms``  L-chain / triangle / square / cube assemblies + FE oracle
- ``truss``       the parametric T-shaped truss built from five cubes
- ``spacecraft``  hub, solar panels, SADM joints, antenna, proof-mass
                  actuators and the assembled open-loop plant
- ``control``     ACS / PMA / pointing-error filters and performance indices
- ``codesign``    nested PSO + derivative-free gain synthesis, worst-case sweep
- ``cli``         command-line front end emitting CSV reports
"""

from portdyn.ss import (
    StateSpaceModel,
    interconnect,
    invert_channels,
    modal_realization,
    reduce_model,
    dc_gain,
    freq_response,
    hinf_norm,
)
from portdyn.frames import FrameRotation
from portdyn.beam import BeamSpec, double_port_beam
from portdyn.mechanisms import (
    CubeSpec,
    MechanismGraph,
    cube,
    cube_graph,
    monolithic_fem_oracle,
)
from portdyn.truss import build_ttruss, truss_graph, truss_mass
from portdyn.spacecraft import (
    SpacecraftConfig,
    UncertainSample,
    assemble_open_loop,
    reduce_open_loop,
)
from portdyn.control import (
    ControlSpec,
    PerformanceSpec,
    assemble_closed_loop,
    closed_loop_norms,
    prepare_plant,
)
from portdyn.codesign import (
    CodesignConfig,
    pso_codesign,
    worst_case_sweep,
)

__all__ = [
    "StateSpaceModel",
    "interconnect",
    "invert_channels",
    "modal_realization",
    "reduce_model",
    "dc_gain",
    "freq_response",
    "hinf_norm",
    "FrameRotation",
    "BeamSpec",
    "double_port_beam",
    "CubeSpec",
    "MechanismGraph",
    "cube",
    "cube_graph",
    "monolithic_fem_oracle",
    "build_ttruss",
    "truss_graph",
    "truss_mass",
    "SpacecraftConfig",
    "UncertainSample",
    "assemble_open_loop",
    "reduce_open_loop",
    "ControlSpec",
    "PerformanceSpec",
    "assemble_closed_loop",
    "closed_loop_norms",
    "prepare_plant",
    "CodesignConfig",
    "pso_codesign",
    "worst_case_sweep",
]

__version__ = "0.1.0"
