"""Fixed-effects linear models: sequential ANOVA, elimination, contrasts.

Terms are categorical factors (plus ':' interactions), dummy-coded against
the first sorted level with an intercept.  Sums of squares are sequential:
each term is charged the drop in residual SS when it joins the model after
everything listed before it.  Rank deficiencies (e.g. a between-student
factor followed by student dummies) are detected by column-pivoted QR and
surface as aliased columns and reduced term df, never as silent drops.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import qr, solve_triangular

from .errors import (
    DimensionMismatchError,
    EmptyDataError,
    NotEstimableError,
)
from .special import f_sf, t_ppf

_RANK_RTOL = 1e-10
_SS_CLAMP = 1e-10

DEFAULT_TERMS = ("treatment", "math", "treatment:math", "exam", "student")


@dataclass(frozen=True)
class TrialRecord:
    student: str
    treatment: str
    math: str
    exam: int
    score: float


@dataclass(frozen=True)
class ModelSpec:
    terms: tuple[str, ...] = DEFAULT_TERMS

    def __post_init__(self) -> None:
        seen: list[str] = []
        for term in self.terms:
            for parent in term.split(":"):
                if ":" in term and parent not in seen:
                    raise ValueError(
                        f"interaction {term!r} listed before its "
                        f"main effect {parent!r}"
                    )
            seen.append(term)

    def without(self, term: str) -> "ModelSpec":
        return ModelSpec(tuple(t for t in self.terms if t != term))


@dataclass
class Design:
    matrix: np.ndarray
    column_names: list[str]
    column_terms: list[str]  # owning term per column; "(Intercept)" first
    notes: list[str] = field(default_factory=list)

    def columns_for(self, terms: tuple[str, ...]) -> np.ndarray:
        keep = ["(Intercept)", *terms]
        idx = [i for i, t in enumerate(self.column_terms) if t in keep]
        return self.matrix[:, idx]


@dataclass
class FitResult:
    coefficients: np.ndarray  # NaN where aliased
    aliased: np.ndarray  # bool per column
    residuals: np.ndarray
    rss: float
    rank: int
    df_residual: int
    sigma2: float | None
    cov_unscaled: np.ndarray | None  # NaN rows/cols where aliased


@dataclass
class TermRow:
    term: str
    df: int
    ss: float
    f: float | None
    p: float | None
    note: str = ""


@dataclass
class AnovaTable:
    rows: list[TermRow]
    residual_df: int
    residual_ss: float
    total_ss: float
    notes: list[str] = field(default_factory=list)

    def row(self, term: str) -> TermRow:
        for r in self.rows:
            if r.term == term:
                return r
        raise KeyError(term)


def _factor_value(record: TrialRecord, name: str) -> str:
    value = getattr(record, name)
    return str(value)


def encode_design(records: list[TrialRecord], spec: ModelSpec) -> Design:
    if not records:
        raise EmptyDataError("no records to encode")
    n = len(records)
    factors = sorted({p for term in spec.terms for p in term.split(":")})
    levels: dict[str, list[str]] = {}
    indicators: dict[str, dict[str, np.ndarray]] = {}
    notes: list[str] = []
    for name in factors:
        values = [_factor_value(r, name) for r in records]
        levels[name] = sorted(set(values))
        if len(levels[name]) < 2:
            notes.append(f"factor {name!r} has a single level (0 df)")
        indicators[name] = {
            lvl: np.fromiter(
                (1.0 if v == lvl else 0.0 for v in values), float, count=n
            )
            for lvl in levels[name][1:]  # first level is the reference
        }

    columns = [np.ones(n)]
    names = ["(Intercept)"]
    terms = ["(Intercept)"]
    for term in spec.terms:
        parents = term.split(":")
        if len(parents) == 1:
            for lvl, col in indicators[term].items():
                columns.append(col)
                names.append(f"{term}[{lvl}]")
                terms.append(term)
        else:
            parts = [list(indicators[p].items()) for p in parents]
            combos = [[]]
            for options in parts:
                combos = [c + [o] for c in combos for o in options]
            for combo in combos:
                col = np.ones(n)
                for _, ind in combo:
                    col = col * ind
                label = ":".join(
                    f"{p}[{lvl}]" for p, (lvl, _) in zip(parents, combo)
                )
                columns.append(col)
                names.append(label)
                terms.append(term)
    return Design(np.column_stack(columns), names, terms, notes)


def fit_ls(matrix: np.ndarray, responses: np.ndarray) -> FitResult:
    matrix = np.asarray(matrix, float)
    y = np.asarray(responses, float)
    if matrix.ndim != 2 or y.ndim != 1 or matrix.shape[0] != y.shape[0]:
        raise DimensionMismatchError(
            f"design {matrix.shape} against {y.shape[0]} responses"
        )
    n, p = matrix.shape
    if n < 1:
        raise EmptyDataError("empty design")
    q_mat, r_mat, piv = qr(matrix, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r_mat))
    rank = int(np.sum(diag > _RANK_RTOL * diag[0])) if diag.size else 0

    coef = np.full(p, np.nan)
    aliased = np.ones(p, dtype=bool)
    cov = None
    if rank > 0:
        qty = q_mat.T @ y
        r1 = r_mat[:rank, :rank]
        solved = solve_triangular(r1, qty[:rank])
        used = piv[:rank]
        coef[used] = solved
        aliased[used] = False
        r_inv = solve_triangular(r1, np.eye(rank))
        cov_used = r_inv @ r_inv.T
        cov = np.full((p, p), np.nan)
        cov[np.ix_(used, used)] = cov_used

    fitted = matrix[:, piv[:rank]] @ coef[piv[:rank]] if rank else np.zeros(n)
    residuals = y - fitted
    rss = float(residuals @ residuals)
    df_residual = n - rank
    sigma2 = rss / df_residual if df_residual > 0 else None
    return FitResult(
        coefficients=coef,
        aliased=aliased,
        residuals=residuals,
        rss=rss,
        rank=rank,
        df_residual=df_residual,
        sigma2=sigma2,
        cov_unscaled=cov,
    )


def _rss_and_rank(matrix: np.ndarray, y: np.ndarray) -> tuple[float, int]:
    fit = fit_ls(matrix, y)
    return fit.rss, fit.rank


def sequential_anova(
    records: list[TrialRecord], spec: ModelSpec | None = None
) -> AnovaTable:
    spec = spec or ModelSpec()
    if len(records) < 2:
        raise EmptyDataError("need at least two records")
    design = encode_design(records, spec)
    y = np.array([r.score for r in records], float)
    total_ss = float(np.sum((y - y.mean()) ** 2))

    rss_prev, rank_prev = _rss_and_rank(design.columns_for(()), y)
    rows: list[TermRow] = []
    for i, term in enumerate(spec.terms):
        rss_i, rank_i = _rss_and_rank(
            design.columns_for(spec.terms[: i + 1]), y
        )
        ss = rss_prev - rss_i
        if ss < 0:
            ss = 0.0 if ss > -_SS_CLAMP else ss  # tiny negatives are noise
        rows.append(TermRow(term, rank_i - rank_prev, ss, None, None))
        rss_prev, rank_prev = rss_i, rank_i

    residual_ss = rss_prev
    full_rank = rank_prev
    residual_df = len(records) - full_rank
    notes = list(design.notes)

    full_fit = fit_ls(design.matrix, y)
    n_aliased = int(np.sum(full_fit.aliased))
    if n_aliased:
        notes.append(f"{n_aliased} aliased column(s) in the full design")

    ms_res = residual_ss / residual_df if residual_df > 0 else None
    zero_var = ms_res is not None and ms_res <= _SS_CLAMP
    if zero_var and any(r.ss > _SS_CLAMP for r in rows):
        notes.append("zero residual variance; F undefined")
    for r in rows:
        if r.df == 0:
            r.note = "0 df (aliased with earlier terms)"
            continue
        if ms_res is None or zero_var:
            r.note = "F undefined (no residual variance)"
            continue
        r.f = (r.ss / r.df) / ms_res
        r.p = f_sf(r.f, r.df, residual_df)
        if r.p == 0.0:
            r.note = "underflow"
    return AnovaTable(rows, residual_df, residual_ss, total_ss, notes)


def _removable(spec: ModelSpec, term: str) -> bool:
    """Main effects stay until every interaction mentioning them is gone."""
    if ":" in term:
        return True
    return not any(
        ":" in other and term in other.split(":") for other in spec.terms
    )


def backward_eliminate(
    records: list[TrialRecord],
    spec: ModelSpec | None = None,
    alpha: float = 0.05,
) -> tuple[list[tuple[str, float]], AnovaTable]:
    spec = spec or ModelSpec()
    trace: list[tuple[str, float]] = []
    while True:
        table = sequential_anova(records, spec)
        candidates: list[tuple[float, str]] = []
        for row in table.rows:
            if not _removable(spec, row.term):
                continue
            p = 1.0 if row.df == 0 else row.p
            if p is not None and p > alpha:
                candidates.append((p, row.term))
        if not candidates:
            return trace, table
        p, term = max(candidates)
        trace.append((term, p))
        spec = spec.without(term)


def treatment_confint(
    records: list[TrialRecord],
    spec: ModelSpec | None = None,
    level: float = 0.95,
    term: str = "treatment",
) -> tuple[float, float]:
    """Interval for the non-reference-level contrast of a two-level factor."""
    spec = spec or ModelSpec()
    if term not in spec.terms:
        raise NotEstimableError(f"{term!r} is not in the model")
    design = encode_design(records, spec)
    y = np.array([r.score for r in records], float)
    cols = [i for i, t in enumerate(design.column_terms) if t == term]
    if len(cols) != 1:
        raise NotEstimableError(
            f"{term!r} has {len(cols)} contrast columns; need exactly one"
        )
    fit = fit_ls(design.matrix, y)
    (j,) = cols
    if fit.aliased[j]:
        raise NotEstimableError(f"{term!r} contrast is aliased")
    estimate = float(fit.coefficients[j])
    if fit.df_residual == 0 or fit.sigma2 is None:
        raise NotEstimableError("no residual degrees of freedom")
    se = math.sqrt(fit.sigma2 * float(fit.cov_unscaled[j, j]))
    half = t_ppf(0.5 + level / 2.0, fit.df_residual) * se
    return (estimate - half, estimate + half)
