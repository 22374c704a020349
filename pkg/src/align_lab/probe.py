"""Channel-space probing: which channels admit a given random (U, V)?

The alignment equations are linear in the channel coefficients once (U, V)
is frozen. Stacking the free cross-channel entries into a vector h turns
them into P h = 0; every nullspace vector of P is a structured channel set
aligned by that (U, V). Drawing many random (U, V), collecting nullspace
bases and measuring the dimension they span gives a numerical hint as to
whether such solutions fill the whole structured channel space. The hint is
only a hint: linear combinations of solutions for different (U, V) are not
themselves solutions, so a full span proves nothing by itself, and reports
expose the raw evidence rather than a feasibility claim.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .counting import dim_channel_space, equation_count
from .errors import DimensionMismatch
from .model import (ChannelSet, IaSolution, StructureKind, SystemConfig,
                    complex_normal, iter_free_entries, substream, validate_config)
from .subspaces import nullspace_basis, numerical_rank, orthonormal_columns

__all__ = [
    "ProbeReport",
    "build_p_matrix",
    "nullspace",
    "draw_random_solution",
    "run_probe",
    "assemble_channels",
    "report_to_json",
]

_DRAW_SALT = 104729  # keeps probe substreams clear of channel substreams


@dataclass(frozen=True)
class ProbeReport:
    """Evidence collected from one probing run.

    ``filled`` records span_rank = dim_target, the heuristic "solutions fill
    the space" indicator; it is an experimental output, not a feasibility
    verdict. ``sd_upper_bound`` is dim_target - 1, the ceiling on the
    dimension of any proper algebraic subset of solution channels.
    """

    draws: int
    nontrivial_draws: int
    per_draw_nullity: tuple[int, ...]
    span_rank: int
    dim_target: int
    sd_upper_bound: int
    filled: bool


def _check_solution(cfg: SystemConfig, sol: IaSolution) -> None:
    if sol.K != cfg.K:
        raise DimensionMismatch(f"solution has {sol.K} users, config has {cfg.K}")
    if sol.N != cfg.N:
        raise DimensionMismatch(f"solution dimensions {sol.N} do not match "
                                f"config dimensions {cfg.N}")
    if sol.d != cfg.d:
        raise DimensionMismatch(f"solution streams {sol.d} do not match "
                                f"config streams {cfg.d}")


def _pair_block(cfg: SystemConfig, u: np.ndarray, v: np.ndarray,
                j: int, k: int) -> np.ndarray:
    """Coefficients of pair (j, k)'s free entries in its own equations.

    Rows are stream pairs (m, n) with n fastest; columns follow the canonical
    free-entry order of the structure.
    """
    kind = cfg.structure.kind
    if kind is StructureKind.GENERIC:
        return np.kron(u.conj().T, v.T)
    if kind is StructureKind.DIAGONAL:
        d_j, d_k = u.shape[1], v.shape[1]
        return np.einsum("tm,tn->mnt", u.conj(), v).reshape(d_j * d_k, cfg.N[j])
    n_c = cfg.structure.subcarriers
    m_j, m_k = cfg.M[j], cfg.M[k]
    d_j, d_k = u.shape[1], v.shape[1]
    ub = u.reshape(n_c, m_j, d_j)
    vb = v.reshape(n_c, m_k, d_k)
    return np.einsum("bpm,bqn->mnbpq", ub.conj(), vb).reshape(d_j * d_k,
                                                              n_c * m_j * m_k)


def build_p_matrix(cfg: SystemConfig, sol: IaSolution) -> np.ndarray:
    """Coefficient matrix of the free channel entries in the cross equations.

    Row ((j,k), (m,n)) holds the expansion of entry (m, n) of
    (U^[j])^H H[j][k] V^[k]; its only nonzero columns are pair (j, k)'s own,
    with value conj(U^[j][t, m]) * V^[k][r, n] in the column of entry (t, r).
    The matrix is therefore block-diagonal across ordered pairs, both pairs
    and in-pair entries in canonical lexicographic order.
    """
    validate_config(cfg)
    _check_solution(cfg, sol)
    n_rows = equation_count(cfg.d)
    n_cols = dim_channel_space(cfg)
    p = np.zeros((n_rows, n_cols), dtype=complex)
    row = col = 0
    for j in range(cfg.K):
        for k in range(cfg.K):
            if j == k:
                continue
            block = _pair_block(cfg, sol.U[j], sol.V[k], j, k)
            p[row:row + block.shape[0], col:col + block.shape[1]] = block
            row += block.shape[0]
            col += block.shape[1]
    return p


def nullspace(p: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the right nullspace; zero columns when trivial."""
    return nullspace_basis(p)


def draw_random_solution(cfg: SystemConfig, rng: np.random.Generator) -> IaSolution:
    """Independent complex-normal (U, V); all precoders first, then decoders."""
    vs = tuple(complex_normal(rng, cfg.N[k], cfg.d[k]) for k in range(cfg.K))
    us = tuple(complex_normal(rng, cfg.N[k], cfg.d[k]) for k in range(cfg.K))
    return IaSolution(V=vs, U=us)


class _SpanAccumulator:
    """Running column space of all accumulated nullspace vectors.

    Columns are compressed to an orthonormal basis whenever they exceed four
    times the ambient target, bounding memory for long runs without changing
    the measured rank.
    """

    def __init__(self, dim: int, cap: int):
        self._cols = np.zeros((dim, 0), dtype=complex)
        self._cap = max(cap, 1)

    def add(self, basis: np.ndarray) -> None:
        if basis.shape[1] == 0:
            return
        self._cols = np.hstack([self._cols, basis])
        if self._cols.shape[1] > self._cap:
            self._cols, _ = orthonormal_columns(self._cols)

    def rank(self) -> int:
        return numerical_rank(self._cols)


def run_probe(cfg: SystemConfig, draws: int, seed: int = 0) -> ProbeReport:
    """Draw (U, V) pairs, collect aligned-channel nullspaces, measure their span.

    Deterministic given (cfg, draws, seed): draw i uses its own substream, and
    accumulation is a sequential reduction over draw index.
    """
    validate_config(cfg)
    if draws < 1:
        raise ValueError(f"need at least one draw, got {draws}")
    dim_target = dim_channel_space(cfg)
    acc = _SpanAccumulator(dim_target, cap=4 * dim_target)
    nullities = []
    for i in range(draws):
        sol = draw_random_solution(cfg, substream(seed, _DRAW_SALT, i))
        basis = nullspace(build_p_matrix(cfg, sol))
        nullities.append(basis.shape[1])
        acc.add(basis)
    span_rank = acc.rank()
    return ProbeReport(draws=draws,
                       nontrivial_draws=sum(1 for x in nullities if x >= 1),
                       per_draw_nullity=tuple(nullities),
                       span_rank=span_rank,
                       dim_target=dim_target,
                       sd_upper_bound=dim_target - 1,
                       filled=span_rank == dim_target)


def assemble_channels(cfg: SystemConfig, h: np.ndarray) -> ChannelSet:
    """Spread a free-entry vector back into a structured channel set.

    Inverse of the canonical flattening: entry i of ``h`` lands at the i-th
    position of ``iter_free_entries(cfg)``. Direct channels, which never
    appear in the cross equations, are set to zero.
    """
    validate_config(cfg)
    h = np.asarray(h, dtype=complex).reshape(-1)
    expected = dim_channel_space(cfg)
    if h.shape[0] != expected:
        raise DimensionMismatch(f"free-entry vector has length {h.shape[0]}, "
                                f"structure has {expected} free cross entries")
    mats = [[np.zeros((cfg.N[j], cfg.N[k]), dtype=complex) for k in range(cfg.K)]
            for j in range(cfg.K)]
    for value, (j, k, t, r) in zip(h, iter_free_entries(cfg)):
        mats[j][k][t, r] = value
    return ChannelSet(tuple(tuple(row) for row in mats))


def report_to_json(report: ProbeReport) -> dict:
    return {
        "draws": report.draws,
        "nontrivial_draws": report.nontrivial_draws,
        "per_draw_nullity": list(report.per_draw_nullity),
        "span_rank": report.span_rank,
        "dim_target": report.dim_target,
        "sd_upper_bound": report.sd_upper_bound,
        "filled": report.filled,
    }
