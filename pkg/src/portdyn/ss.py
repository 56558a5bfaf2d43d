"""State-space algebra for labeled port models.

A :class:`StateSpaceModel` is a continuous-time LTI system (A, B, C, D)
whose input and output channels carry names.  Channels are grouped into
ports: a port ``"W:B"`` of width 6 owns the channel labels ``"W:B[0]"``
... ``"W:B[5]"``.  For port models, input port k and output port k refer
to the same connection point and carry the complementary physical pair
(acceleration twist in / wrench out, or the converse).

The module provides the algebra used to assemble multibody systems:

- :func:`interconnect`   feedback interconnection of several blocks,
- :func:`invert_channels` exact exchange of input/output roles on a
  channel subset (boundary-condition switching),
- :func:`modal_realization` real 2x2-block modal form,
- :func:`reduce_model`   truncation of near-zero and high-frequency modes,
- :func:`dc_gain`, :func:`freq_response`, :func:`hinf_norm`.

Models are immutable after construction; every operation returns a new
model and is safe to call concurrently.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

__all__ = [
    "StateSpaceModel",
    "FrequencyResponse",
    "PortMismatchError",
    "IllPosedInterconnectionError",
    "ChannelInversionError",
    "ModalFormError",
    "interconnect",
    "invert_channels",
    "modal_realization",
    "reduce_model",
    "ReductionReport",
    "dc_gain",
    "freq_response",
    "hinf_norm",
    "rotate_ports",
    "relabel_ports",
    "static_model",
    "port_labels",
]


class PortMismatchError(ValueError):
    """A named port does not exist or its width does not match."""


class IllPosedInterconnectionError(ValueError):
    """The algebraic (feedthrough) loop of an interconnection is singular."""


class ChannelInversionError(ValueError):
    """The selected channels are not invertible under these boundary conditions."""


class ModalFormError(ValueError):
    """The state matrix is too close to defective for a modal form."""


def port_labels(name: str, width: int) -> list[str]:
    return [f"{name}[{k}]" for k in range(width)]


def _labels_for_ports(ports) -> list[str]:
    out: list[str] = []
    for name, width in ports:
        out.extend(port_labels(name, width))
    return out


@dataclass(frozen=True)
class StateSpaceModel:
    """Labeled continuous-time LTI model  xdot = Ax + Bu,  y = Cx + Du."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    input_labels: tuple[str, ...]
    output_labels: tuple[str, ...]

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.atleast_2d(np.asarray(self.B, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        D = np.atleast_2d(np.asarray(self.D, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise ValueError("A must be square")
        m = D.shape[1]
        p = D.shape[0]
        if B.shape != (n, m) or C.shape != (p, n):
            # allow empty-state models written with 0-size arrays
            B = B.reshape(n, m)
            C = C.reshape(p, n)
        for mat in (A, B, C, D):
            if mat.size and not np.all(np.isfinite(mat)):
                raise ValueError("non-finite entries in state-space data")
        if len(self.input_labels) != m or len(self.output_labels) != p:
            raise ValueError("label counts must match input/output dimensions")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "input_labels", tuple(self.input_labels))
        object.__setattr__(self, "output_labels", tuple(self.output_labels))

    # -- dimensions ----------------------------------------------------
    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.D.shape[1]

    @property
    def p(self) -> int:
        return self.D.shape[0]

    # -- port helpers --------------------------------------------------
    def _port_slice(self, labels, name) -> slice:
        prefix = f"{name}["
        idx = [i for i, lab in enumerate(labels) if lab == name or lab.startswith(prefix)]
        if not idx:
            raise PortMismatchError(f"port mismatch: no channel named {name!r}")
        if idx != list(range(idx[0], idx[-1] + 1)):
            raise PortMismatchError(f"port mismatch: port {name!r} is not contiguous")
        return slice(idx[0], idx[-1] + 1)

    def input_port(self, name: str) -> slice:
        return self._port_slice(self.input_labels, name)

    def output_port(self, name: str) -> slice:
        return self._port_slice(self.output_labels, name)

    # -- basic queries -------------------------------------------------
    def poles(self) -> np.ndarray:
        if self.n == 0:
            return np.zeros(0, dtype=complex)
        return np.linalg.eigvals(self.A)

    def transfer_at(self, s: complex) -> np.ndarray:
        if self.n == 0:
            return self.D.astype(complex)
        x = np.linalg.solve(s * np.eye(self.n) - self.A, self.B)
        return self.C @ x + self.D

    def is_stable(self, margin: float = 0.0) -> bool:
        if self.n == 0:
            return True
        return float(np.max(self.poles().real)) < -margin


def static_model(D, input_labels, output_labels) -> StateSpaceModel:
    """Purely algebraic (D-only) model."""
    D = np.atleast_2d(np.asarray(D, dtype=float))
    p, m = D.shape
    return StateSpaceModel(
        A=np.zeros((0, 0)),
        B=np.zeros((0, m)),
        C=np.zeros((p, 0)),
        D=D,
        input_labels=tuple(input_labels),
        output_labels=tuple(output_labels),
    )


# ---------------------------------------------------------------------------
# interconnection
# ---------------------------------------------------------------------------


def _as_gain(gain, rows: int, cols: int) -> np.ndarray:
    if np.isscalar(gain):
        if rows != cols:
            raise PortMismatchError("scalar gain between ports of unequal width")
        return float(gain) * np.eye(rows)
    gain = np.atleast_2d(np.asarray(gain, dtype=float))
    if gain.shape != (rows, cols):
        raise PortMismatchError(
            f"gain shape {gain.shape} does not match ports ({rows}, {cols})"
        )
    return gain


def interconnect(models, links, inputs, outputs, cond_limit: float = 1e12) -> StateSpaceModel:
    """Feedback interconnection of several labeled blocks.

    Parameters
    ----------
    models : list of StateSpaceModel
    links : list of ((src_model, src_port), (dst_model, dst_port), gain)
        Internal couplings ``u[dst] += gain @ y[src]``.  ``gain`` may be a
        scalar (times identity) or a matrix; several links may target the
        same input port (contributions add up).
    inputs : list of (name, [((dst_model, dst_port), gain), ...])
        External input channels, in declaration order.  A single external
        port may fan out to several destinations; a destination may also
        receive link contributions.
    outputs : list of (name, [((src_model, src_port), gain), ...])
        External output channels, as weighted sums of block outputs.

    Raises
    ------
    IllPosedInterconnectionError
        if the algebraic loop matrix I - D L is singular or nearly so.
    PortMismatchError
        on unknown port names or dimension mismatches.
    """
    models = list(models)
    in_off = np.cumsum([0] + [mdl.m for mdl in models])
    out_off = np.cumsum([0] + [mdl.p for mdl in models])
    n_in, n_out = int(in_off[-1]), int(out_off[-1])

    def in_idx(ref):
        mi, port = ref
        sl = models[mi].input_port(port)
        return np.arange(in_off[mi] + sl.start, in_off[mi] + sl.stop)

    def out_idx(ref):
        mi, port = ref
        sl = models[mi].output_port(port)
        return np.arange(out_off[mi] + sl.start, out_off[mi] + sl.stop)

    L = np.zeros((n_in, n_out))
    for src, dst, gain in links:
        si = out_idx(src)
        di = in_idx(dst)
        L[np.ix_(di, si)] += _as_gain(gain, di.size, si.size)

    ext_in_labels: list[str] = []
    cols: list[np.ndarray] = []
    for name, dests in inputs:
        width = None
        for ref, gain in dests:
            di = in_idx(ref)
            g = np.atleast_2d(np.asarray(gain, dtype=float)) if not np.isscalar(gain) else None
            w = g.shape[1] if g is not None else di.size
            if width is None:
                width = w
            elif width != w:
                raise PortMismatchError(f"inconsistent width for external input {name!r}")
        assert width is not None
        block = np.zeros((n_in, width))
        for ref, gain in dests:
            di = in_idx(ref)
            block[di, :] += _as_gain(gain, di.size, width)
        cols.append(block)
        ext_in_labels.extend(port_labels(name, width))
    E = np.hstack(cols) if cols else np.zeros((n_in, 0))

    ext_out_labels: list[str] = []
    rows: list[np.ndarray] = []
    for name, srcs in outputs:
        width = None
        for ref, gain in srcs:
            si = out_idx(ref)
            g = np.atleast_2d(np.asarray(gain, dtype=float)) if not np.isscalar(gain) else None
            w = g.shape[0] if g is not None else si.size
            if width is None:
                width = w
            elif width != w:
                raise PortMismatchError(f"inconsistent width for external output {name!r}")
        assert width is not None
        block = np.zeros((width, n_out))
        for ref, gain in srcs:
            si = out_idx(ref)
            block[:, si] += _as_gain(gain, width, si.size)
        rows.append(block)
        ext_out_labels.extend(port_labels(name, width))
    F = np.vstack(rows) if rows else np.zeros((0, n_out))

    A = sla.block_diag(*[mdl.A for mdl in models]) if models else np.zeros((0, 0))
    B = sla.block_diag(*[mdl.B for mdl in models])
    C = sla.block_diag(*[mdl.C for mdl in models])
    D = sla.block_diag(*[mdl.D for mdl in models])

    loop = np.eye(n_out) - D @ L
    cond = np.linalg.cond(loop)
    if not np.isfinite(cond) or cond > cond_limit:
        raise IllPosedInterconnectionError(
            f"ill-posed interconnection: algebraic loop condition {cond:.3e}"
        )
    lam = np.linalg.inv(loop)

    BL = B @ L
    A_cl = A + BL @ lam @ C
    B_cl = (B + BL @ lam @ D) @ E
    C_cl = F @ lam @ C
    D_cl = F @ lam @ D @ E
    return StateSpaceModel(A_cl, B_cl, C_cl, D_cl, tuple(ext_in_labels), tuple(ext_out_labels))


# ---------------------------------------------------------------------------
# channel inversion
# ---------------------------------------------------------------------------


def invert_channels(model: StateSpaceModel, idx, cond_limit: float = 1e12) -> StateSpaceModel:
    """Exchange the input/output roles of the channels in ``idx``.

    The new inputs on those channels are the former outputs and vice
    versa; the remaining channels keep their roles.  Requires the
    feedthrough sub-block D[idx, idx] to be invertible.
    """
    idx = np.asarray(sorted(int(i) for i in idx), dtype=int)
    if idx.size == 0:
        return model
    if idx.size != np.unique(idx).size:
        raise ValueError("duplicate channel indices")
    if idx.min() < 0 or idx.max() >= min(model.m, model.p):
        raise ValueError("channel index out of range")
    jdx_in = np.setdiff1d(np.arange(model.m), idx)
    jdx_out = np.setdiff1d(np.arange(model.p), idx)

    A, B, C, D = model.A, model.B, model.C, model.D
    D_ii = D[np.ix_(idx, idx)]
    cond = np.linalg.cond(D_ii) if D_ii.size else 1.0
    if not np.isfinite(cond) or cond > cond_limit:
        raise ChannelInversionError(
            "channels not invertible under these boundary conditions "
            f"(feedthrough condition {cond:.3e})"
        )
    Dinv = np.linalg.inv(D_ii)

    B_i, B_j = B[:, idx], B[:, jdx_in]
    C_i, C_j = C[idx, :], C[jdx_out, :]
    D_ij = D[np.ix_(idx, jdx_in)]
    D_ji = D[np.ix_(jdx_out, idx)]
    D_jj = D[np.ix_(jdx_out, jdx_in)]

    A2 = A - B_i @ Dinv @ C_i
    B2 = np.zeros_like(B)
    B2[:, idx] = B_i @ Dinv
    B2[:, jdx_in] = B_j - B_i @ Dinv @ D_ij
    C2 = np.zeros_like(C)
    C2[idx, :] = -Dinv @ C_i
    C2[jdx_out, :] = C_j - D_ji @ Dinv @ C_i
    D2 = np.zeros_like(D)
    D2[np.ix_(idx, idx)] = Dinv
    D2[np.ix_(idx, jdx_in)] = -Dinv @ D_ij
    D2[np.ix_(jdx_out, idx)] = D_ji @ Dinv
    D2[np.ix_(jdx_out, jdx_in)] = D_jj - D_ji @ Dinv @ D_ij

    in_labels = list(model.input_labels)
    out_labels = list(model.output_labels)
    for i in idx:
        in_labels[i], out_labels[i] = out_labels[i], in_labels[i]
    return StateSpaceModel(A2, B2, C2, D2, tuple(in_labels), tuple(out_labels))


def invert_port(model: StateSpaceModel, name: str, cond_limit: float = 1e12) -> StateSpaceModel:
    """Invert all channels of a conjugate port (same slice on both sides)."""
    sl_in = model.input_port(name)
    sl_out = model.output_port(name)
    if (sl_in.start, sl_in.stop) != (sl_out.start, sl_out.stop):
        raise PortMismatchError(f"port {name!r} is not conjugate-aligned")
    return invert_channels(model, range(sl_in.start, sl_in.stop), cond_limit)


# ---------------------------------------------------------------------------
# modal realization and reduction
# ---------------------------------------------------------------------------


def modal_realization(model: StateSpaceModel, defect_cond: float = 1e10) -> StateSpaceModel:
    """Similarity transform to real modal form.

    Complex pole pairs become 2x2 blocks [[re, im], [-im, re]], real poles
    1x1 blocks; blocks are ordered by ascending pole magnitude.  The
    transfer function is preserved exactly (up to round-off).
    """
    n = model.n
    if n == 0:
        return model
    lam, V = np.linalg.eig(model.A)
    order = np.argsort(np.abs(lam), kind="stable")
    lam = lam[order]
    V = V[:, order]

    cols: list[np.ndarray] = []
    blocks: list[np.ndarray] = []
    used = np.zeros(n, dtype=bool)
    tol_imag = 1e-12 * max(1.0, float(np.max(np.abs(lam))))
    for k in range(n):
        if used[k]:
            continue
        lk = lam[k]
        if abs(lk.imag) <= tol_imag:
            v = V[:, k]
            # rotate the eigenvector phase so it is (numerically) real
            j = int(np.argmax(np.abs(v)))
            v = (v * np.exp(-1j * np.angle(v[j]))).real
            cols.append(v[:, None])
            blocks.append(np.array([[lk.real]]))
            used[k] = True
        else:
            # find the conjugate partner among unused eigenvalues
            cand = [
                j
                for j in range(k + 1, n)
                if not used[j] and abs(lam[j] - lk.conjugate()) <= 1e-6 * max(1.0, abs(lk))
            ]
            if not cand:
                raise ModalFormError("non-diagonalizable; modal form unavailable")
            j = cand[0]
            v = V[:, k] if lk.imag > 0 else V[:, j]
            lp = lk if lk.imag > 0 else lam[j]
            cols.append(np.column_stack([v.real, v.imag]))
            blocks.append(np.array([[lp.real, lp.imag], [-lp.imag, lp.real]]))
            used[k] = True
            used[j] = True

    T = np.hstack(cols)
    cond = np.linalg.cond(T)
    if not np.isfinite(cond) or cond > defect_cond:
        raise ModalFormError(
            f"non-diagonalizable; modal form unavailable (transform condition {cond:.3e})"
        )
    A2 = sla.block_diag(*blocks)
    B2 = np.linalg.solve(T, model.B)
    C2 = model.C @ T
    return StateSpaceModel(A2, B2, C2, model.D, model.input_labels, model.output_labels)


@dataclass(frozen=True)
class ReductionReport:
    """Counts of truncated poles per category."""

    n_states: int
    n_kept: int
    n_low_removed: int
    n_high_removed: int


def reduce_model(
    model: StateSpaceModel,
    omega_low: float = 0.0,
    omega_high: float = np.inf,
    residualize: bool = False,
) -> tuple[StateSpaceModel, ReductionReport]:
    """Truncate near-zero and high-frequency modes.

    Removes every mode with pole magnitude below ``omega_low`` (spurious
    loop-closure poles) or above ``omega_high`` (flexible content outside
    the control band).  The kept invariant subspace is decoupled exactly
    through a Sylvester solve, so this matches modal truncation without
    requiring a (possibly ill-conditioned) full diagonalization.

    With ``residualize`` the removed subsystem's static contribution is
    folded into the feedthrough (singular perturbation approximation),
    which preserves the DC gain; only meaningful when the removed modes
    are the high-frequency ones.

    The state matrix is diagonally balanced first: modal rate states
    scale with their frequency, and on wide-band models the resulting
    norm spread would otherwise leak through the Sylvester solve into
    the retained residues (observed as errors peaking at the kept
    resonances).
    """
    n = model.n
    if n == 0:
        return model, ReductionReport(0, 0, 0, 0)

    def keep(re, im):
        mag = np.hypot(re, im)
        return (mag >= omega_low) & (mag <= omega_high)

    Ab, S = sla.matrix_balance(model.A)
    # S is a permuted diagonal matrix; invert it entrywise
    Sinv = np.zeros_like(S)
    nz = S != 0.0
    Sinv.T[nz] = 1.0 / S[nz]
    Bb = Sinv @ model.B
    Cb = model.C @ S
    T, Z, sdim = sla.schur(Ab, output="real", sort=keep)
    k = int(sdim)
    ev = np.linalg.eigvals(Ab)
    mags = np.abs(ev)
    n_low = int(np.count_nonzero(mags < omega_low))
    n_high = int(np.count_nonzero(mags > omega_high))
    if k == n:
        return model, ReductionReport(n, n, n_low, n_high)

    T11, T12, T22 = T[:k, :k], T[:k, k:], T[k:, k:]
    Bt = Z.T @ Bb
    Ct = Cb @ Z
    D = model.D
    if k == 0:
        if residualize:
            D = D - Ct @ np.linalg.solve(T, Bt)
        red = static_model(D, model.input_labels, model.output_labels)
        return red, ReductionReport(n, 0, n_low, n_high)
    # decouple the kept block: T11 X - X T22 = -T12
    X = sla.solve_sylvester(T11, -T22, -T12)
    B1 = Bt[:k, :] - X @ Bt[k:, :]
    C1 = Ct[:, :k]
    if residualize:
        C2 = Ct[:, k:] + C1 @ X
        D = D - C2 @ np.linalg.solve(T22, Bt[k:, :])
    red = StateSpaceModel(T11, B1, C1, D, model.input_labels, model.output_labels)
    return red, ReductionReport(n, k, n_low, n_high)


# ---------------------------------------------------------------------------
# gains and frequency response
# ---------------------------------------------------------------------------


def dc_gain(model: StateSpaceModel, cond_limit: float = 1e12) -> np.ndarray:
    """Steady-state gain D - C A^-1 B.  Raises if A is singular."""
    if model.n == 0:
        return model.D.copy()
    cond = np.linalg.cond(model.A)
    if not np.isfinite(cond) or cond > cond_limit:
        raise ValueError("DC undefined: state matrix is singular (integrator present)")
    return model.D - model.C @ np.linalg.solve(model.A, model.B)


@dataclass(frozen=True)
class FrequencyResponse:
    """Complex response values on an ascending angular-frequency grid."""

    grid: np.ndarray
    values: np.ndarray  # shape (n_freq, p, m)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
            raise ValueError("frequency grid must be strictly increasing")
        if values.shape[0] != grid.size:
            raise ValueError("values/grid length mismatch")
        if not np.all(np.isfinite(values)):
            raise ValueError("non-finite response values")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def sigma_max(self) -> np.ndarray:
        return np.linalg.svd(self.values, compute_uv=False)[:, 0]


def freq_response(
    model: StateSpaceModel, grid, method: str = "auto"
) -> FrequencyResponse:
    """Evaluate C (jwI - A)^-1 B + D over a frequency grid.

    ``method="eig"`` diagonalizes A once and evaluates each point in
    O(n*(m+p)); it is used automatically when the eigenvector basis is
    well conditioned.  ``method="direct"`` factorizes (jwI - A) at every
    grid point (robust for defective or badly clustered spectra).
    """
    grid = np.asarray(grid, dtype=float)
    p, m, n = model.p, model.m, model.n
    vals = np.empty((grid.size, p, m), dtype=complex)
    if n == 0:
        vals[:] = model.D
        return FrequencyResponse(grid, vals)

    if method not in ("auto", "eig", "direct"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "eig"):
        lam, V = np.linalg.eig(model.A)
        cond = np.linalg.cond(V)
        if method == "eig" or cond < 1e8:
            Bv = np.linalg.solve(V, model.B.astype(complex))
            Cv = model.C @ V
            for i, w in enumerate(grid):
                vals[i] = (Cv / (1j * w - lam)) @ Bv + model.D
            return FrequencyResponse(grid, vals)

    H, Q = sla.hessenberg(model.A, calc_q=True)
    Bh = Q.T @ model.B
    Ch = model.C @ Q
    eye = np.eye(n)
    for i, w in enumerate(grid):
        x = sla.solve(1j * w * eye - H, Bh)
        vals[i] = Ch @ x + model.D
    return FrequencyResponse(grid, vals)


# ---------------------------------------------------------------------------
# H-infinity norm
# ---------------------------------------------------------------------------


def _sigma_max_at(model, w) -> float:
    return float(np.linalg.svd(model.transfer_at(1j * w), compute_uv=False)[0])


def _candidate_grid(model: StateSpaceModel, n_base: int = 200) -> np.ndarray:
    """Log grid spanning the pole frequencies plus resonance candidates."""
    pts = [0.0]
    poles = model.poles()
    mags = np.abs(poles)
    mags = mags[mags > 0]
    lo = max(min(mags.min() / 10.0 if mags.size else 1e-2, 1e-2), 1e-8)
    hi = max(mags.max() * 10.0 if mags.size else 1e2, 1e2)
    pts.extend(np.logspace(np.log10(lo), np.log10(hi), n_base))
    # lightly damped poles produce sharp peaks near |Im(pole)|
    for lam in poles:
        if lam.imag > 0:
            pts.append(abs(lam.imag))
    return np.unique(np.asarray(pts))


def _grid_norm(model: StateSpaceModel, n_refine: int = 3) -> tuple[float, float]:
    """Adaptive frequency-grid estimate of the H-infinity norm.

    Returns (norm estimate, peak frequency).
    """
    grid = _candidate_grid(model)
    fr = freq_response(model, np.maximum(grid, 0.0) + np.where(grid == 0, 0.0, 0.0))
    sig = fr.sigma_max()
    best_i = int(np.argmax(sig))
    best_w = float(grid[best_i])
    best = float(sig[best_i])
    for _ in range(n_refine):
        lo = grid[max(best_i - 1, 0)]
        hi = grid[min(best_i + 1, grid.size - 1)]
        if hi <= lo:
            break
        local = np.linspace(lo, hi, 41)
        fr = freq_response(model, np.unique(local))
        sigl = fr.sigma_max()
        j = int(np.argmax(sigl))
        if sigl[j] > best:
            best = float(sigl[j])
            best_w = float(np.unique(local)[j])
        grid = np.unique(local)
        best_i = j
    return best, best_w


def _hamiltonian_crossings(model: StateSpaceModel, gamma: float) -> np.ndarray:
    """Frequencies where sigma_max crosses ``gamma`` (imaginary-axis eigs)."""
    A, B, C, D = model.A, model.B, model.C, model.D
    m, p = model.m, model.p
    R = gamma**2 * np.eye(m) - D.T @ D
    Rinv = np.linalg.inv(R)
    H11 = A + B @ Rinv @ D.T @ C
    H12 = B @ Rinv @ B.T
    H21 = -C.T @ (np.eye(p) + D @ Rinv @ D.T) @ C
    H = np.block([[H11, H12], [H21, -H11.T]])
    ev = np.linalg.eigvals(H)
    scale = max(1.0, float(np.max(np.abs(ev))))
    on_axis = ev[np.abs(ev.real) < 1e-8 * scale]
    w = np.unique(np.round(np.abs(on_axis.imag), 12))
    return w[w >= 0]


def hinf_norm(
    model: StateSpaceModel,
    tol: float = 1e-4,
    method: str = "bisection",
) -> float:
    """H-infinity norm of a stable model.

    ``method="bisection"`` bisects on gamma using imaginary-axis
    eigenvalues of the associated Hamiltonian matrix, terminating at
    relative width ``tol``; ``method="grid"`` returns an adaptive
    frequency-grid maximum.  Raises ``ValueError`` for unstable models.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if model.n == 0:
        return float(np.linalg.svd(model.D, compute_uv=False)[0]) if model.D.size else 0.0
    abscissa = float(np.max(model.poles().real))
    if abscissa >= 0.0:
        raise ValueError("norm infinite: model is not stable")

    lb, peak_w = _grid_norm(model, n_refine=2 if method == "bisection" else 3)
    d_norm = float(np.linalg.svd(model.D, compute_uv=False)[0]) if model.D.size else 0.0
    lb = max(lb, d_norm)
    if method == "grid":
        return lb
    if method != "bisection":
        raise ValueError(f"unknown method {method!r}")
    if lb == 0.0:
        return 0.0

    try:
        # grow an upper bound: gamma with no imaginary-axis crossings
        ub = lb * (1.0 + 1e-3)
        for _ in range(60):
            if _hamiltonian_crossings(model, ub).size == 0:
                break
            # crossings exist: true norm exceeds ub; also refine lb via midpoints
            ws = _hamiltonian_crossings(model, ub)
            if ws.size >= 1:
                mids = 0.5 * (ws[:-1] + ws[1:]) if ws.size > 1 else ws
                for w in np.concatenate([ws, mids]):
                    lb = max(lb, _sigma_max_at(model, w))
            ub = max(ub * 2.0, lb * (1.0 + 1e-3))
        else:
            raise FloatingPointError("no upper bound found")
        while (ub - lb) > tol * lb:
            gamma = 0.5 * (lb + ub)
            if _hamiltonian_crossings(model, gamma).size:
                lb = gamma
            else:
                ub = gamma
        return 0.5 * (lb + ub)
    except (np.linalg.LinAlgError, FloatingPointError):
        import warnings

        warnings.warn("Hamiltonian eigen-failure; falling back to grid maximum")
        return _grid_norm(model)[0]


# ---------------------------------------------------------------------------
# port rotations
# ---------------------------------------------------------------------------


def relabel_ports(model: StateSpaceModel, mapping: dict) -> StateSpaceModel:
    """Rename ports; ``mapping`` is {old port name: new port name}."""

    def conv(lab: str) -> str:
        if "[" in lab:
            name, idx = lab.rsplit("[", 1)
            return f"{mapping.get(name, name)}[{idx}"
        return mapping.get(lab, lab)

    return StateSpaceModel(
        model.A,
        model.B,
        model.C,
        model.D,
        tuple(conv(lab) for lab in model.input_labels),
        tuple(conv(lab) for lab in model.output_labels),
    )


def rotate_ports(model: StateSpaceModel, R6: np.ndarray) -> StateSpaceModel:
    """Express every 6-wide port of a model in a rotated frame.

    ``R6`` takes current-frame components to new-frame ones.  All input
    and output ports must have width 6 (or a multiple handled per-6).
    """
    m, p = model.m, model.p
    if m % 6 or p % 6:
        raise PortMismatchError("rotate_ports expects 6-wide port channels")
    Rin = sla.block_diag(*([R6.T] * (m // 6)))
    Rout = sla.block_diag(*([R6] * (p // 6)))
    return StateSpaceModel(
        model.A,
        model.B @ Rin,
        Rout @ model.C,
        Rout @ model.D @ Rin,
        model.input_labels,
        model.output_labels,
    )
