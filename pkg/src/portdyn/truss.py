"""Parametric T-shaped truss built from five cube cells.

Three cubes (C1..C3) stack along z on a unit-square footprint; two more
(C4, C5) are the same cell rotated by -pi/2 / +pi/2 about x and mounted
on the -y and +y faces of the top level, giving the T shape.  All 65
beams share one square cross section of side h, the single structural
design variable: S = h^2, I_y = I_z = h^4/12, with the material
constants fixed (aluminium, rho = 2700 kg/m^3, E = 70 GPa, nu = 0.35,
modal damping 0.001).

Node numbering (full coordinate table in TRUSS_NODES, truss frame,
meters): N1..N4 base square at z=0, N5..N8 at z=1, N9..N12 at z=2,
N13..N16 at z=3; lateral cube outer corners N17, N18 (top, y=-1) and
N21, N22 (y=-1, z=2) on the -y side, N19, N20 (top, y=+2) and N23, N24
(z=2) on the +y side.  The exposed six-port model takes imposed
acceleration twists at N1..N4 (wrench reactions out) and wrenches at
the two instrument corners N17 and N20 (acceleration twists out); every
other node is internally force-free.

Each of the 45 independent kinematic loops (65 edges, 24 nodes, base
merged to ground) leaves 12 near-zero poles in the assembled model,
540 in total, removed later by the low-frequency reduction step.
"""

from __future__ import annotations

import numpy as np

from portdyn.beam import BeamSpec
from portdyn.frames import FrameRotation
from portdyn.mechanisms import CubeSpec, MechanismGraph, cube, cube_graph
from portdyn.ss import (
    StateSpaceModel,
    interconnect,
    relabel_ports,
    rotate_ports,
)

__all__ = [
    "H_RANGE",
    "TRUSS_NODES",
    "truss_beam_spec",
    "build_ttruss",
    "truss_graph",
    "truss_mass",
    "loop_count",
]

H_RANGE = (0.015, 0.03)

_RHO = 2700.0
_E = 70e9
_NU = 0.35
_XI = 0.001
_SIDE = 1.0

# node -> truss-frame coordinates; levels bottom to top, then the outer
# corners of the lateral cubes (-y side first)
TRUSS_NODES = {
    "N1": (0.0, 0.0, 0.0), "N2": (0.0, 1.0, 0.0), "N3": (1.0, 1.0, 0.0), "N4": (1.0, 0.0, 0.0),
    "N5": (0.0, 0.0, 1.0), "N6": (0.0, 1.0, 1.0), "N7": (1.0, 1.0, 1.0), "N8": (1.0, 0.0, 1.0),
    "N9": (0.0, 0.0, 2.0), "N10": (0.0, 1.0, 2.0), "N11": (1.0, 1.0, 2.0), "N12": (1.0, 0.0, 2.0),
    "N13": (0.0, 0.0, 3.0), "N14": (0.0, 1.0, 3.0), "N15": (1.0, 1.0, 3.0), "N16": (1.0, 0.0, 3.0),
    "N17": (0.0, -1.0, 3.0), "N18": (1.0, -1.0, 3.0),
    "N19": (1.0, 2.0, 3.0), "N20": (0.0, 2.0, 3.0),
    "N21": (0.0, -1.0, 2.0), "N22": (1.0, -1.0, 2.0),
    "N23": (1.0, 2.0, 2.0), "N24": (0.0, 2.0, 2.0),
}

# local cube node -> truss node, per cube; C4/C5 carry the rotation that
# maps the upright cell onto the mounted one
_CUBE_MAPS = (
    ({f"N{i}": f"N{i}" for i in range(1, 9)}, None),
    ({f"N{i}": f"N{i + 4}" for i in range(1, 9)}, None),
    ({f"N{i}": f"N{i + 8}" for i in range(1, 9)}, None),
    (
        {"N1": "N9", "N2": "N13", "N3": "N16", "N4": "N12",
         "N5": "N21", "N6": "N17", "N7": "N18", "N8": "N22"},
        FrameRotation.about_x(np.pi / 2),
    ),
    (
        {"N1": "N14", "N2": "N10", "N3": "N11", "N4": "N15",
         "N5": "N20", "N6": "N24", "N7": "N23", "N8": "N19"},
        FrameRotation.about_x(-np.pi / 2),
    ),
)


def _check_h(h: float) -> None:
    lo, hi = H_RANGE
    if not (lo <= h <= hi):
        raise ValueError(f"h = {h} outside the design range [{lo}, {hi}] m")


def truss_beam_spec(h: float, n_elem: int = 5) -> BeamSpec:
    """Unit-length beam of square section h, truss material constants."""
    _check_h(h)
    return BeamSpec(
        l=_SIDE,
        S=h * h,
        rho=_RHO,
        E=_E,
        nu=_NU,
        I_y=h**4 / 12.0,
        I_z=h**4 / 12.0,
        xi=_XI,
        n_elem=n_elem,
    )


def truss_mass(h: float) -> float:
    """Structural mass rho*h^2*(total edge length), five cube cells."""
    _check_h(h)
    total_length = 5.0 * (8.0 * _SIDE + 5.0 * np.sqrt(2.0) * _SIDE)
    return _RHO * h * h * total_length


def loop_count(graph: MechanismGraph) -> int:
    """Independent kinematic cycles with the base node set merged to ground."""
    names = set(graph.nodes)
    seen = {next(iter(names))}
    frontier = set(seen)
    adj: dict = {n: set() for n in names}
    for na, nb, _ in graph.edges:
        adj[na].add(nb)
        adj[nb].add(na)
    while frontier:
        frontier = {m for n in frontier for m in adj[n]} - seen
        seen |= frontier
    if seen != names:
        raise ValueError("disconnected mechanism graph")
    return graph.loop_count


def truss_graph(h: float, n_elem: int = 5) -> MechanismGraph:
    """All 65 beams of the truss as one connectivity graph, base clamped."""
    spec = truss_beam_spec(h, n_elem)
    cell = cube_graph(CubeSpec(_SIDE, _SIDE, _SIDE, spec))
    nodes = {k: np.asarray(v, dtype=float) for k, v in TRUSS_NODES.items()}
    edges = []
    for mapping, _rot in _CUBE_MAPS:
        for na, nb, sp in cell.edges:
            edges.append((mapping[na], mapping[nb], sp))
    return MechanismGraph(nodes=nodes, edges=tuple(edges), clamped=("N1", "N2", "N3", "N4"))


def build_ttruss(h: float, n_elem: int = 5) -> StateSpaceModel:
    """Six-port truss model: N1..N4 acceleration-in, N17/N20 wrench-in.

    The five cube cells are kept at full modal content here; truncating
    cell modes before closing the inter-cell loops scatters the near-zero
    loop-closure poles and is numerically unsafe.  For cheaper models
    lower ``n_elem`` instead (the coarse mesh changes the six-port
    response by about 1e-5 in relative terms over 0.01..500 rad/s).

    Mind that the transfer from differential base accelerations to base
    reactions genuinely grows like 1/omega^2 toward DC (diverging base
    motion strains the structure without bound); that content lives in
    the near-zero loop poles, which therefore carry large residues in
    those channels.  Only uniform base motion and the instrument-corner
    channels are insensitive to their removal.
    """
    spec = truss_beam_spec(h, n_elem)
    cell = cube(CubeSpec(_SIDE, _SIDE, _SIDE, spec))

    models = []
    for mapping, rot in _CUBE_MAPS:
        mdl = cell if rot is None else rotate_ports(cell, rot.R6)
        ren = {}
        for loc, glob in mapping.items():
            ren[f"a:{loc}"] = f"a:{glob}"
            ren[f"W:{loc}"] = f"W:{glob}"
        models.append(relabel_ports(mdl, ren))

    links = []

    def stack(parent: int, child: int, nodes) -> None:
        # parent's top corners drive the child's base; the child pushes back
        for n in nodes:
            links.append(((parent, f"a:{n}"), (child, f"a:{n}"), 1.0))
            links.append(((child, f"W:{n}"), (parent, f"W:{n}"), 1.0))

    stack(0, 1, ("N5", "N6", "N7", "N8"))
    stack(1, 2, ("N9", "N10", "N11", "N12"))
    stack(1, 3, ("N9", "N12"))
    stack(2, 3, ("N13", "N16"))
    stack(1, 4, ("N10", "N11"))
    stack(2, 4, ("N14", "N15"))

    inputs = [(f"a:{n}", [((0, f"a:{n}"), 1.0)]) for n in ("N1", "N2", "N3", "N4")]
    inputs += [("W:N17", [((3, "W:N17"), 1.0)]), ("W:N20", [((4, "W:N20"), 1.0)])]
    outputs = [(f"W:{n}", [((0, f"W:{n}"), 1.0)]) for n in ("N1", "N2", "N3", "N4")]
    outputs += [("a:N17", [((3, "a:N17"), 1.0)]), ("a:N20", [((4, "a:N20"), 1.0)])]
    return interconnect(models, links, inputs, outputs)
