"""Planar and 3D beam mechanisms assembled from double-port beam models.

Every mechanism is built the same way: each beam is a clamped/free
double-port block expressed directly in the parent frame, kinematic
loops are closed by feedback links that equate accelerations at shared
nodes and balance the wrenches there, and boundary conditions are
switched afterwards by channel inversion.  The same connectivity can be
assembled monolithically (one global mass/stiffness pair over all
element DOFs) which serves as an independent cross-check: frequencies
and clamped-node reaction maps from both routes must coincide.

Sign conventions at a shared node:

- a ``W:<node>`` *output* of a sub-model is the wrench that sub-model
  applies on whatever imposes its motion there (base-reaction style), so
  it enters the wrench inputs of the other sub-models with gain +1;
- when such a port has been produced by channel inversion the roles are
  swapped: the output is the wrench that must be applied *on* the
  sub-model, and its reaction enters the neighbours with gain -1.

Each independent cycle in the beam-connectivity graph leaves 12
near-zero poles in the assembled model (the loop-closure constraint
makes one rigid relative motion unobservable); they carry no residue and
are stripped later by ``reduce_model``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from portdyn.beam import BeamSpec, double_port_beam
from portdyn.frames import FrameRotation, rigid_mass_matrix, rod_mass_matrix, transport
from portdyn.ss import (
    StateSpaceModel,
    interconnect,
    invert_channels,
    port_labels,
)

__all__ = [
    "MechanismGraph",
    "CubeSpec",
    "OracleResult",
    "l_chain",
    "triangle",
    "square",
    "cube",
    "l_chain_graph",
    "triangle_graph",
    "square_graph",
    "cube_graph",
    "monolithic_fem_oracle",
    "rigid_mass_oracle",
    "port_modal_data",
    "oracle_base_frf",
]


# ---------------------------------------------------------------------------
# connectivity graph (shared by the port route and the monolithic oracle)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MechanismGraph:
    """Nodes, beam edges and boundary tags of an assembled structure."""

    nodes: dict
    edges: tuple
    clamped: tuple

    def __post_init__(self):
        nodes = {k: np.asarray(v, dtype=float) for k, v in self.nodes.items()}
        for na, nb, spec in self.edges:
            d = np.linalg.norm(nodes[nb] - nodes[na])
            if abs(d - spec.l) > 1e-12 * max(1.0, d):
                raise ValueError(
                    f"edge {na}-{nb}: beam length {spec.l} != node distance {d}"
                )
        for name in self.clamped:
            if name not in nodes:
                raise ValueError(f"unknown clamped node {name!r}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "clamped", tuple(self.clamped))

    @property
    def loop_count(self) -> int:
        """Independent kinematic cycles with all clamped nodes merged to ground.

        Cycle rank of the connected beam graph after identifying the
        clamped node set with a single ground node: edges - nodes +
        max(n_clamped, 1).
        """
        return len(self.edges) - len(self.nodes) + max(len(self.clamped), 1)

    def total_mass(self) -> float:
        return float(sum(spec.mass for _, _, spec in self.edges))


def _beam_block(spec: BeamSpec, base: str, tip: str, p_base, p_tip) -> StateSpaceModel:
    p_base = np.asarray(p_base, dtype=float)
    p_tip = np.asarray(p_tip, dtype=float)
    d = p_tip - p_base
    sp = spec.with_length(float(np.linalg.norm(d)))
    return double_port_beam(sp, FrameRotation.align_x(d), base, tip)


# ---------------------------------------------------------------------------
# point-parameterized assemblies
# ---------------------------------------------------------------------------


def _l_chain_model(nA, nB, nC, pA, pB, pC, spec1, spec2) -> StateSpaceModel:
    """Two beams A-B and C-B sharing the free vertex B; A and C clamped.

    Port order (A, B, C): inputs [a:A, W:B, a:C], outputs [W:A, a:B, W:C].
    """
    m1 = _beam_block(spec1, nA, nB, pA, pB)
    m2 = _beam_block(spec2, nC, nB, pC, pB)
    # clamp the second beam at both ends: its tip wrench/acc pair swaps role
    m2 = invert_channels(m2, range(6))
    links = [
        ((0, f"a:{nB}"), (1, f"a:{nB}"), 1.0),
        ((1, f"W:{nB}"), (0, f"W:{nB}"), -1.0),
    ]
    inputs = [
        (f"a:{nA}", [((0, f"a:{nA}"), 1.0)]),
        (f"W:{nB}", [((0, f"W:{nB}"), 1.0)]),
        (f"a:{nC}", [((1, f"a:{nC}"), 1.0)]),
    ]
    outputs = [
        (f"W:{nA}", [((0, f"W:{nA}"), 1.0)]),
        (f"a:{nB}", [((0, f"a:{nB}"), 1.0)]),
        (f"W:{nC}", [((1, f"W:{nC}"), 1.0)]),
    ]
    return interconnect([m1, m2], links, inputs, outputs)


def _triangle_model(nA, nB, nC, pA, pB, pC, specs) -> StateSpaceModel:
    """Closed three-beam loop, clamped at A, free at B and C.

    Beams: A-B, C-B (through the two-beam chain) and A-C closing the
    loop.  Inputs [a:A, W:B, W:C], outputs [W:A, a:B, a:C].
    """
    s1, s2, s3 = specs
    chain = _l_chain_model(nA, nB, nC, pA, pB, pC, s1, s2)
    base = _beam_block(s3, nA, nC, pA, pC)
    links = [
        ((1, f"a:{nC}"), (0, f"a:{nC}"), 1.0),
        ((0, f"W:{nC}"), (1, f"W:{nC}"), 1.0),
    ]
    inputs = [
        (f"a:{nA}", [((0, f"a:{nA}"), 1.0), ((1, f"a:{nA}"), 1.0)]),
        (f"W:{nB}", [((0, f"W:{nB}"), 1.0)]),
        (f"W:{nC}", [((1, f"W:{nC}"), 1.0)]),
    ]
    outputs = [
        (f"W:{nA}", [((0, f"W:{nA}"), 1.0), ((1, f"W:{nA}"), 1.0)]),
        (f"a:{nB}", [((0, f"a:{nB}"), 1.0)]),
        (f"a:{nC}", [((1, f"a:{nC}"), 1.0)]),
    ]
    return interconnect([chain, base], links, inputs, outputs)


def _square_model(nA, nB, nC, nD, pA, pB, pC, pD, specs) -> StateSpaceModel:
    """Four-node frame: perimeter A-B, A-C, B-D, C-D plus diagonal B-C.

    Clamped at A, free elsewhere.  Inputs [a:A, W:B, W:C, W:D], outputs
    [W:A, a:B, a:C, a:D].  ``specs`` order: (A-B, diagonal B-C, A-C,
    B-D, C-D).
    """
    s_ab, s_bc, s_ac, s_bd, s_cd = specs
    tri = _triangle_model(nA, nB, nC, pA, pB, pC, (s_ab, s_bc, s_ac))
    top = _l_chain_model(nB, nD, nC, pB, pD, pC, s_bd, s_cd)
    links = [
        ((0, f"a:{nB}"), (1, f"a:{nB}"), 1.0),
        ((1, f"W:{nB}"), (0, f"W:{nB}"), 1.0),
        ((0, f"a:{nC}"), (1, f"a:{nC}"), 1.0),
        ((1, f"W:{nC}"), (0, f"W:{nC}"), 1.0),
    ]
    inputs = [
        (f"a:{nA}", [((0, f"a:{nA}"), 1.0)]),
        (f"W:{nB}", [((0, f"W:{nB}"), 1.0)]),
        (f"W:{nC}", [((0, f"W:{nC}"), 1.0)]),
        (f"W:{nD}", [((1, f"W:{nD}"), 1.0)]),
    ]
    outputs = [
        (f"W:{nA}", [((0, f"W:{nA}"), 1.0)]),
        (f"a:{nB}", [((0, f"a:{nB}"), 1.0)]),
        (f"a:{nC}", [((0, f"a:{nC}"), 1.0)]),
        (f"a:{nD}", [((1, f"a:{nD}"), 1.0)]),
    ]
    return interconnect([tri, top], links, inputs, outputs)


# ---------------------------------------------------------------------------
# canonical 2D layouts
# ---------------------------------------------------------------------------


def _l_chain_points(spec1: BeamSpec, spec2: BeamSpec, alpha: float):
    pA = np.zeros(3)
    pB = np.array([spec1.l, 0.0, 0.0])
    pC = pB + spec2.l * np.array([-np.cos(alpha), np.sin(alpha), 0.0])
    return pA, pB, pC


def l_chain(beam1: BeamSpec, beam2: BeamSpec, alpha: float) -> StateSpaceModel:
    """Two-beam chain with interior angle ``alpha`` at the shared vertex B.

    Beam 1 runs A->B along +x, beam 2 from C to B; A and C are clamped
    (acceleration inputs), B is free (wrench input).
    """
    if not (0.0 < alpha < np.pi):
        raise ValueError("alpha must lie in (0, pi)")
    pA, pB, pC = _l_chain_points(beam1, beam2, alpha)
    return _l_chain_model("A", "B", "C", pA, pB, pC, beam1, beam2)


def l_chain_graph(beam1: BeamSpec, beam2: BeamSpec, alpha: float,
                  clamped=("A", "C")) -> MechanismGraph:
    pA, pB, pC = _l_chain_points(beam1, beam2, alpha)
    return MechanismGraph(
        nodes={"A": pA, "B": pB, "C": pC},
        edges=((("A", "B", beam1)), ("C", "B", beam2)),
        clamped=clamped,
    )


def _triangle_points(beams):
    s1, s2, s3 = beams
    pA = np.zeros(3)
    pB = np.array([s1.l, 0.0, 0.0])
    pC = np.array([0.0, s3.l, 0.0])
    if abs(np.linalg.norm(pB - pC) - s2.l) > 1e-9 * s2.l:
        raise ValueError("beams are not consistent with a right-triangle layout")
    return pA, pB, pC


def triangle(beams) -> StateSpaceModel:
    """Right-triangle loop: legs A-B and A-C plus hypotenuse C-B.

    Clamped at A; wrench inputs at the free corners B and C.
    """
    pA, pB, pC = _triangle_points(beams)
    return _triangle_model("A", "B", "C", pA, pB, pC, beams)


def triangle_graph(beams, clamped=("A",)) -> MechanismGraph:
    s1, s2, s3 = beams
    pA, pB, pC = _triangle_points(beams)
    return MechanismGraph(
        nodes={"A": pA, "B": pB, "C": pC},
        edges=(("A", "B", s1), ("C", "B", s2), ("A", "C", s3)),
        clamped=clamped,
    )


def _square_points(beams):
    s_ab, s_bc, s_ac, s_bd, s_cd = beams
    side = s_ab.l
    pA = np.zeros(3)
    pB = np.array([side, 0.0, 0.0])
    pC = np.array([0.0, s_ac.l, 0.0])
    pD = pB + np.array([0.0, s_bd.l, 0.0])
    for ln, want in ((s_bc.l, np.linalg.norm(pC - pB)), (s_cd.l, np.linalg.norm(pD - pC))):
        if abs(ln - want) > 1e-9 * want:
            raise ValueError("beams are not consistent with a square layout")
    return pA, pB, pC, pD


def square(beams, all_clamped: bool = False) -> StateSpaceModel:
    """Square frame with one diagonal; beams (A-B, diag B-C, A-C, B-D, C-D).

    Default variant is clamped at A with wrench inputs at B, C, D; with
    ``all_clamped`` the three free corners are switched to imposed
    accelerations by channel inversion.
    """
    pA, pB, pC, pD = _square_points(beams)
    mdl = _square_model("A", "B", "C", "D", pA, pB, pC, pD, beams)
    if all_clamped:
        mdl = invert_channels(mdl, range(6, 24))
    return mdl


def square_graph(beams, clamped=("A",)) -> MechanismGraph:
    s_ab, s_bc, s_ac, s_bd, s_cd = beams
    pA, pB, pC, pD = _square_points(beams)
    return MechanismGraph(
        nodes={"A": pA, "B": pB, "C": pC, "D": pD},
        edges=(
            ("A", "B", s_ab),
            ("B", "C", s_bc),
            ("A", "C", s_ac),
            ("B", "D", s_bd),
            ("C", "D", s_cd),
        ),
        clamped=clamped,
    )


# ---------------------------------------------------------------------------
# the cube
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CubeSpec:
    """Rectangular cube cell: edge lengths and the common beam section."""

    l_x: float
    l_y: float
    l_z: float
    beam: BeamSpec
    top_diagonal: str = "N6-N8"

    def __post_init__(self):
        if min(self.l_x, self.l_y, self.l_z) <= 0.0:
            raise ValueError("cube edge lengths must be strictly positive")
        if self.top_diagonal not in ("N6-N8", "N5-N7"):
            raise ValueError("top_diagonal must be 'N6-N8' or 'N5-N7'")


def _cube_points(spec: CubeSpec) -> dict:
    lx, ly, lz = spec.l_x, spec.l_y, spec.l_z
    bottom = [
        np.array([0.0, 0.0, 0.0]),
        np.array([0.0, ly, 0.0]),
        np.array([lx, ly, 0.0]),
        np.array([lx, 0.0, 0.0]),
    ]
    pts = {}
    for i, p in enumerate(bottom):
        pts[f"N{i + 1}"] = p
        pts[f"N{i + 5}"] = p + np.array([0.0, 0.0, lz])
    return pts


def _cube_square_mapping(spec: CubeSpec):
    """Map the generic square corners (A, B, C, D) onto top nodes N5..N8."""
    if spec.top_diagonal == "N6-N8":
        return {"A": "N5", "B": "N6", "C": "N8", "D": "N7"}
    return {"A": "N6", "B": "N7", "C": "N5", "D": "N8"}


def cube(spec: CubeSpec) -> StateSpaceModel:
    """Thirteen-beam cube cell as a 48x48 eight-port model.

    Bottom nodes N1..N4 carry imposed accelerations (wrench outputs),
    top nodes N5..N8 wrench inputs (acceleration outputs).  Each side
    face contributes a vertical edge and one diagonal forming a two-beam
    chain clamped at two adjacent bottom nodes; the top face is a square
    frame with all four corners switched to imposed accelerations.
    """
    pts = _cube_points(spec)
    bs = spec.beam
    chains = []
    for i in range(4):
        nA = f"N{i + 1}"
        nC = f"N{(i + 1) % 4 + 1}"
        nB = f"N{i + 5}"
        chains.append(
            _l_chain_model(nA, nB, nC, pts[nA], pts[nB], pts[nC], bs, bs)
        )
    m = _cube_square_mapping(spec)
    sq = _square_model(
        m["A"], m["B"], m["C"], m["D"],
        pts[m["A"]], pts[m["B"]], pts[m["C"]], pts[m["D"]],
        (bs, bs, bs, bs, bs),
    )
    # switch the square's three free corners to imposed accelerations
    sq = invert_channels(sq, range(6, 24))
    inverted_top = {m["B"], m["C"], m["D"]}

    models = chains + [sq]
    links = []
    for i in range(4):
        top = f"N{i + 5}"
        links.append(((i, f"a:{top}"), (4, f"a:{top}"), 1.0))
        sign = -1.0 if top in inverted_top else 1.0
        links.append(((4, f"W:{top}"), (i, f"W:{top}"), sign))
    inputs = []
    outputs = []
    for i in range(4):
        bot = f"N{i + 1}"
        prev = (i - 1) % 4
        inputs.append((f"a:{bot}", [((i, f"a:{bot}"), 1.0), ((prev, f"a:{bot}"), 1.0)]))
        outputs.append((f"W:{bot}", [((i, f"W:{bot}"), 1.0), ((prev, f"W:{bot}"), 1.0)]))
    for i in range(4):
        top = f"N{i + 5}"
        inputs.append((f"W:{top}", [((i, f"W:{top}"), 1.0)]))
        outputs.append((f"a:{top}", [((i, f"a:{top}"), 1.0)]))
    # keep N1..N8 port order: bottom acc inputs first, then top wrench inputs
    order_in = inputs[:4] + inputs[4:]
    order_out = outputs[:4] + outputs[4:]
    return interconnect(models, links, order_in, order_out)


def cube_graph(spec: CubeSpec, clamped=("N1", "N2", "N3", "N4")) -> MechanismGraph:
    pts = _cube_points(spec)
    bs = spec.beam
    edges = []
    for i in range(4):
        nA = f"N{i + 1}"
        nC = f"N{(i + 1) % 4 + 1}"
        nB = f"N{i + 5}"
        edges.append((nA, nB, bs.with_length(float(np.linalg.norm(pts[nB] - pts[nA])))))
        edges.append((nC, nB, bs.with_length(float(np.linalg.norm(pts[nB] - pts[nC])))))
    m = _cube_square_mapping(spec)
    for na, nb in (("A", "B"), ("B", "C"), ("A", "C"), ("B", "D"), ("C", "D")):
        pa, pb = pts[m[na]], pts[m[nb]]
        edges.append((m[na], m[nb], bs.with_length(float(np.linalg.norm(pb - pa)))))
    return MechanismGraph(nodes=pts, edges=tuple(edges), clamped=clamped)


# ---------------------------------------------------------------------------
# monolithic oracle
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class OracleResult:
    """Global-assembly modal data at the clamped node set."""

    omega: np.ndarray        # ascending natural frequencies, rad/s
    participation: np.ndarray  # (n_modes, 6*n_clamped) toward rigid base motion
    dc_map: np.ndarray       # acceleration -> reaction-wrench DC at clamped DOFs
    rigid_mass: np.ndarray   # 6k x 6k rigid mass matrix at the clamped DOFs


def _oracle_assembly(graph: MechanismGraph):
    from portdyn.beam import _element_matrices

    coords: list[np.ndarray] = []
    index: dict[str, int] = {}
    for name, p in graph.nodes.items():
        index[name] = len(coords)
        coords.append(p)

    blocks = []
    for na, nb, spec in graph.edges:
        pa, pb = graph.nodes[na], graph.nodes[nb]
        ne = spec.n_elem
        ids = [index[na]]
        for k in range(1, ne):
            ids.append(len(coords))
            coords.append(pa + (pb - pa) * k / ne)
        ids.append(index[nb])
        R = FrameRotation.align_x(pb - pa).R
        T12 = sla.block_diag(R, R, R, R)
        blocks.append((ids, T12, spec, float(np.linalg.norm(pb - pa))))

    ndof = 6 * len(coords)
    M = np.zeros((ndof, ndof))
    K = np.zeros((ndof, ndof))
    for ids, T12, spec, length in blocks:
        ne = spec.n_elem
        Me, Ke = _element_matrices(spec.with_length(length), length / ne)
        Meg = T12 @ Me @ T12.T
        Keg = T12 @ Ke @ T12.T
        for e in range(ne):
            dofs = np.concatenate(
                [6 * ids[e] + np.arange(6), 6 * ids[e + 1] + np.arange(6)]
            )
            M[np.ix_(dofs, dofs)] += Meg
            K[np.ix_(dofs, dofs)] += Keg
    return M, K, index


def monolithic_fem_oracle(graph: MechanismGraph) -> OracleResult:
    """Single global mass/stiffness assembly of a mechanism graph.

    Shared node DOFs are merged, the clamped nodes are removed from the
    eigenproblem, and the acceleration-to-reaction DC map at the clamped
    DOFs is the (negated) rigid mass matrix transported there.
    """
    if not graph.clamped:
        raise ValueError("mechanism insufficiently constrained: no clamped node")
    M, K, index = _oracle_assembly(graph)
    ndof = M.shape[0]
    base = np.concatenate([6 * index[n] + np.arange(6) for n in graph.clamped])
    free = np.setdiff1d(np.arange(ndof), base)
    K_ff = K[np.ix_(free, free)]
    K_fP = K[np.ix_(free, base)]
    M_ff = M[np.ix_(free, free)]
    M_fP = M[np.ix_(free, base)]
    M_PP = M[np.ix_(base, base)]
    try:
        cf = sla.cho_factor(K_ff)
    except sla.LinAlgError as exc:
        raise ValueError("mechanism insufficiently constrained") from exc
    T = -sla.cho_solve(cf, K_fP)
    w2, Phi = sla.eigh(K_ff, M_ff)
    omega = np.sqrt(np.maximum(w2, 0.0))
    L = Phi.T @ (M_ff @ T + M_fP)
    M0 = M_PP + M[np.ix_(base, free)] @ T + T.T @ M_fP + T.T @ M_ff @ T
    M0 = 0.5 * (M0 + M0.T)
    return OracleResult(omega=omega, participation=L, dc_map=-M0, rigid_mass=M0)


def rigid_mass_oracle(graph: MechanismGraph, at: str) -> np.ndarray:
    """6x6 rigid mass of the whole mechanism, transported to node ``at``.

    Treats each beam as a rigid slender rod; independent of the FE mesh.
    """
    p0 = graph.nodes[at]
    M0 = np.zeros((6, 6))
    for na, nb, spec in graph.edges:
        M0 += rod_mass_matrix(graph.nodes[na], graph.nodes[nb], spec.mass, at=p0)
    return M0


def port_modal_data(
    model: StateSpaceModel,
    acc_port: str = "a:N1",
    wrench_port: str = "W:N1",
    n_modes: int = 8,
    omega_min: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Natural frequencies and base participation from a port model.

    Diagonalizes the model once and reads the rank-one residue matrix of
    the collocated acceleration-to-reaction transfer at each flexible
    pole pair: for mode k the residue at s = lambda_k equals
    -lambda_k^2 l_k l_k^T / (lambda_k - conj(lambda_k)), which recovers
    the participation vector l_k up to a global sign.  Poles below
    ``omega_min`` (loop-closure artifacts) are skipped.  Returns
    (omega, L) with L of shape (n_modes, port width), directly
    comparable to ``OracleResult.participation`` rows.
    """
    ia = model.input_port(acc_port)
    iw = model.output_port(wrench_port)
    lam, V = np.linalg.eig(model.A)
    Bv = np.linalg.solve(V, model.B[:, ia])
    Cv = model.C[iw] @ V
    pairs = sorted(
        (k for k in range(lam.size) if lam[k].imag > omega_min),
        key=lambda k: lam[k].imag,
    )
    if len(pairs) < n_modes:
        raise ValueError("fewer flexible modes than requested")
    omega = np.empty(n_modes)
    L = np.empty((n_modes, Cv.shape[0]))
    for idx, k in enumerate(pairs[:n_modes]):
        lk = lam[k]
        omega[idx] = abs(lk)
        res = np.outer(Cv[:, k], Bv[k])
        llT = np.real(-res * (lk - lk.conjugate()) / lk**2)
        llT = 0.5 * (llT + llT.T)
        mu, U = np.linalg.eigh(llT)
        j = int(np.argmax(np.abs(mu)))
        L[idx] = np.sqrt(abs(mu[j])) * U[:, j]
    return omega, L


def oracle_base_frf(
    graph: MechanismGraph,
    omega: np.ndarray,
    xi: float = 0.0,
) -> np.ndarray:
    """Exact damped base-acceleration-to-reaction FRF of the assembly.

    Craig-Bampton expansion about the clamped node set: with the static
    modes T and mass-normalized fixed-base modes Phi, the reaction per
    unit imposed acceleration is

        G(jw) = -(M_PP + M_Pf T)
                + sum_k (s^2 c_k - w_k^2 d_k) l_k^T / (s^2 + 2 xi w_k s + w_k^2)

    with c_k = M_Pf phi_k, d_k = T^T M_ff phi_k and l_k the rows of the
    participation matrix (note c_k + d_k = l_k; the naive l l^T residue
    form is exact only at the poles).  Sign convention matches the port
    models: DC value is the negated rigid mass matrix.  Returns an array
    of shape (len(omega), 6k, 6k).
    """
    M, K, index = _oracle_assembly(graph)
    ndof = M.shape[0]
    base = np.concatenate([6 * index[n] + np.arange(6) for n in graph.clamped])
    free = np.setdiff1d(np.arange(ndof), base)
    K_ff = K[np.ix_(free, free)]
    K_fP = K[np.ix_(free, base)]
    M_ff = M[np.ix_(free, free)]
    M_fP = M[np.ix_(free, base)]
    M_Pf = M[np.ix_(base, free)]
    M_PP = M[np.ix_(base, base)]
    T = -sla.cho_solve(sla.cho_factor(K_ff), K_fP)
    w2, Phi = sla.eigh(K_ff, M_ff)
    om = np.sqrt(np.maximum(w2, 0.0))
    L = Phi.T @ (M_ff @ T + M_fP)
    Cm = M_Pf @ Phi
    Dm = T.T @ (M_ff @ Phi)
    M_st = M_PP + M_Pf @ T
    out = np.empty((len(omega), M_st.shape[0], M_st.shape[1]), dtype=complex)
    for i, w in enumerate(np.asarray(omega, dtype=float)):
        s2 = -w * w
        denom = s2 + 2j * xi * om * w + om**2
        num = (s2 * Cm - om**2 * Dm) / denom
        out[i] = -(M_st - num @ L)
    return out
