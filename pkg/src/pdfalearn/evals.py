"""Merge evaluation functions: consistency checks and scores.

Four built-in evaluations are provided, all driven by the occurrence
counts kept on the APTA:

- ``alergia``      per-pair Hoeffding-bound test on symbol/final
                   proportions, with two-pool frequency pooling;
- ``likelihoodratio``  a single chi-squared likelihood-ratio test over
                   the whole merge cascade;
- ``mdi``          count-weighted divergence per removed parameter;
- ``aic``          accept exactly the merges that lower the model's AIC.

Each evaluation is a small object implementing ``begin`` / ``pair`` /
``finish``; the merge engine calls ``pair`` once for every pair of states
combined during determinization.  New evaluations are added by
registering one such object, nothing else.

The module-level pure functions (``pool_counts``, ``alergia_pair_test``,
``ll_delta``, ...) hold all the arithmetic; the built-in objects and the
pure-Python cascade kernel are thin wrappers over them.  The compiled
kernel reimplements the same formulas, accumulating in the same order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaincc

# Kernel ids understood by the compiled cascade.
KERNEL_ALERGIA = 0
KERNEL_LIKELIHOODRATIO = 1
KERNEL_AIC = 2
KERNEL_MDI = 3

DF_ZERO_TOLERANCE = 1e-12


# ---------------------------------------------------------------------------
# pooling
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PooledCounts:
    """Two-pool aggregation of two count vectors.

    pool1 collects, in both rows, the counts of symbols infrequent
    (count < threshold) in the second state; pool2 those infrequent in the
    first.  Symbols infrequent in both contribute to both pools.  Symbols
    frequent in both survive individually.
    """

    pool1_q: int
    pool1_qp: int
    pool2_q: int
    pool2_qp: int
    survivors: tuple[tuple[int, int, int], ...]  # (symbol, count_q, count_qp)


def pool_counts(counts_q, counts_qp, symbol_count: int) -> PooledCounts:
    """Pool two count vectors at the given frequency threshold.

    A threshold of 0 disables pooling: no count is below 0, so the pools
    stay empty and every symbol survives.
    """
    p1q = p1p = p2q = p2p = 0
    survivors = []
    for a in range(len(counts_q)):
        cq = int(counts_q[a])
        cp = int(counts_qp[a])
        infreq_qp = cp < symbol_count
        infreq_q = cq < symbol_count
        if infreq_qp:
            p1q += cq
            p1p += cp
        if infreq_q:
            p2q += cq
            p2p += cp
        if not infreq_q and not infreq_qp:
            survivors.append((a, cq, cp))
    return PooledCounts(p1q, p1p, p2q, p2p, tuple(survivors))


# ---------------------------------------------------------------------------
# Alergia
# ---------------------------------------------------------------------------

def hoeffding_bound(total_q: int, total_qp: int, alpha: float) -> float:
    """The Hoeffding-style proportion bound for two sample sizes."""
    return math.sqrt(0.5 * math.log(2.0 / alpha)) * (
        1.0 / math.sqrt(total_q) + 1.0 / math.sqrt(total_qp)
    )


def alergia_pair_test(
    counts_q,
    counts_qp,
    fin_q: int,
    fin_qp: int,
    alpha: float,
    *,
    state_count: int = 0,
    symbol_count: int = 0,
    correction: float = 0.0,
    finalprob: bool = True,
) -> tuple[bool, float]:
    """Hoeffding-bound proportion test between two states.

    Compares, bin by bin, the outgoing distributions of the two states:
    individually for symbols frequent in both, aggregated through the two
    pools otherwise, plus the final-probability bin when enabled.  A pool
    is only tested when it received observed mass.  ``correction`` is
    added to every tested count; the matching total is inflated by one
    correction per tested bin so each row stays a proportion.

    States below ``state_count`` occurrences are not tested at all: the
    pair is vacuously consistent with margin 0.

    Returns (consistent, margin) where margin is the summed slack
    (bound - difference) over the performed checks; the margin of a
    failed test is meaningless and reported as 0.
    """
    total_q = int(np.sum(counts_q)) + int(fin_q)
    total_qp = int(np.sum(counts_qp)) + int(fin_qp)
    if total_q < state_count or total_qp < state_count:
        return True, 0.0
    if total_q == 0 or total_qp == 0:
        return True, 0.0

    pooled = pool_counts(counts_q, counts_qp, symbol_count)
    bins = [(cq, cp) for (a, cq, cp) in pooled.survivors if cq > 0 or cp > 0]
    if pooled.pool1_q > 0 or pooled.pool1_qp > 0:
        bins.append((pooled.pool1_q, pooled.pool1_qp))
    if pooled.pool2_q > 0 or pooled.pool2_qp > 0:
        bins.append((pooled.pool2_q, pooled.pool2_qp))
    if finalprob:
        bins.append((int(fin_q), int(fin_qp)))

    denom_q = total_q + correction * len(bins)
    denom_qp = total_qp + correction * len(bins)
    bound = hoeffding_bound(total_q, total_qp, alpha)

    margin = 0.0
    for cq, cp in bins:
        diff = abs((cq + correction) / denom_q - (cp + correction) / denom_qp)
        if diff >= bound:
            return False, 0.0
        margin += bound - diff
    return True, margin


# ---------------------------------------------------------------------------
# log-likelihood machinery (shared by likelihood-ratio and AIC)
# ---------------------------------------------------------------------------

def ll_contribution(counts, fin: int, finalprob: bool) -> float:
    """Log-likelihood mass of one state: sum of C(q,a)*ln(S(q,a)) terms.

    Terms with zero count contribute zero.  Natural logarithm throughout.
    """
    total = int(np.sum(counts)) + int(fin)
    if total == 0:
        return 0.0
    out = 0.0
    for a in np.flatnonzero(np.asarray(counts)):
        c = int(counts[a])
        out += c * math.log(c / total)
    if finalprob and fin > 0:
        out += fin * math.log(fin / total)
    return out


def ll_delta(
    counts_q,
    counts_qp,
    fin_q: int,
    fin_qp: int,
    *,
    finalprob: bool = True,
    state_count: int = 0,
) -> tuple[float, int]:
    """Likelihood decrease and parameter reduction of merging two states.

    Returns (delta_loglik, delta_params) where delta_loglik is the
    combined states' log-likelihood before the merge minus the merged
    state's afterwards (non-negative), and delta_params counts one removed
    transition parameter per symbol (plus final slot when enabled) with
    non-zero counts in both states.  Pairs where either state falls below
    ``state_count`` contribute (0, 0).
    """
    total_q = int(np.sum(counts_q)) + int(fin_q)
    total_qp = int(np.sum(counts_qp)) + int(fin_qp)
    if total_q < state_count or total_qp < state_count:
        return 0.0, 0

    cq = np.asarray(counts_q)
    cp = np.asarray(counts_qp)
    total_m = total_q + total_qp
    dll = 0.0
    dparams = 0
    for a in np.flatnonzero(cq | cp):
        x = int(cq[a])
        y = int(cp[a])
        if x > 0:
            dll += x * math.log(x / total_q)
        if y > 0:
            dll += y * math.log(y / total_qp)
        dll -= (x + y) * math.log((x + y) / total_m)
        if x > 0 and y > 0:
            dparams += 1
    if finalprob:
        if fin_q > 0:
            dll += fin_q * math.log(fin_q / total_q)
        if fin_qp > 0:
            dll += fin_qp * math.log(fin_qp / total_qp)
        if fin_q + fin_qp > 0:
            dll -= (fin_q + fin_qp) * math.log((fin_q + fin_qp) / total_m)
        if fin_q > 0 and fin_qp > 0:
            dparams += 1
    return dll, dparams


def chi2_sf(v: float, df: int) -> float:
    """Chi-squared survival function via the regularized incomplete gamma."""
    if df < 1:
        raise ValueError(f"degrees of freedom must be >= 1, got {df}")
    if v < 0:
        raise ValueError(f"statistic must be non-negative, got {v}")
    return float(gammaincc(df / 2.0, v / 2.0))


def likelihood_ratio_test(
    dll_sum: float, dparams_sum: int, alpha: float
) -> tuple[bool, float]:
    """Single likelihood-ratio verdict for a whole merge cascade.

    The statistic is twice the accumulated likelihood decrease; the
    degrees of freedom are the removed parameters.  Consistent when the
    p-value exceeds alpha; the score is 1 - p.  With no removed parameter
    the chi-squared test is undefined: the merge is accepted only when it
    lost no likelihood either.
    """
    v = 2.0 * dll_sum
    if dparams_sum == 0:
        return (v <= DF_ZERO_TOLERANCE), 0.0
    p = chi2_sf(max(v, 0.0), dparams_sum)
    return p > alpha, 1.0 - p


def aic_test(dll_sum: float, dparams_sum: int) -> tuple[bool, float]:
    """Accept a merge iff it strictly decreases the model's AIC.

    The returned score is the AIC decrease 2*dparams - 2*dll.
    """
    score = 2.0 * dparams_sum - 2.0 * dll_sum
    return score > 0.0, score


# ---------------------------------------------------------------------------
# MDI
# ---------------------------------------------------------------------------

def mdi_pair_delta(
    counts_q,
    counts_qp,
    fin_q: int,
    fin_qp: int,
    weight_q,
    weight_qp,
    wfin_q: float,
    wfin_qp: float,
    *,
    finalprob: bool = True,
    state_count: int = 0,
) -> float:
    """Divergence increase contributed by merging one pair of states.

    ``weight_*`` rows carry the frozen prefix-tree reference mass
    C_p(q,a)*S_p(q,a) accumulated over every prefix-tree node the state
    represents; they merge additively exactly like the counts.  The
    returned value is reference-mass-weighted log-probability before the
    pair merges minus after, so summing over a cascade telescopes to the
    divergence difference between the models before and after the merge.
    """
    total_q = int(np.sum(counts_q)) + int(fin_q)
    total_qp = int(np.sum(counts_qp)) + int(fin_qp)
    if total_q < state_count or total_qp < state_count:
        return 0.0

    cq = np.asarray(counts_q)
    cp = np.asarray(counts_qp)
    total_m = total_q + total_qp
    out = 0.0
    for a in np.flatnonzero(cq | cp):
        x = int(cq[a])
        y = int(cp[a])
        wx = float(weight_q[a])
        wy = float(weight_qp[a])
        if x > 0 and wx != 0.0:
            out += wx * math.log(x / total_q)
        if y > 0 and wy != 0.0:
            out += wy * math.log(y / total_qp)
        if x + y > 0 and wx + wy != 0.0:
            out -= (wx + wy) * math.log((x + y) / total_m)
    if finalprob:
        if fin_q > 0 and wfin_q != 0.0:
            out += wfin_q * math.log(fin_q / total_q)
        if fin_qp > 0 and wfin_qp != 0.0:
            out += wfin_qp * math.log(fin_qp / total_qp)
        if fin_q + fin_qp > 0 and wfin_q + wfin_qp != 0.0:
            out -= (wfin_q + wfin_qp) * math.log((fin_q + fin_qp) / total_m)
    return out


def mdi_test(numerator: float, dparams_sum: int, alpha: float) -> tuple[bool, float]:
    """Divergence-per-removed-parameter verdict.

    A cascade that removes no parameter offers no size reduction to
    justify any divergence and is inconsistent.
    """
    if dparams_sum < 1:
        return False, 0.0
    value = numerator / dparams_sum
    return value < alpha, alpha - value


# ---------------------------------------------------------------------------
# whole-model measures
# ---------------------------------------------------------------------------

def model_size(apta, finalprob: bool = False) -> int:
    """Number of transitions of the merged automaton.

    Counted at representative level; with final probabilities enabled,
    each state with ending traces adds one final parameter.
    """
    reps = apta.representatives()
    size = int(np.count_nonzero(apta.children[reps] != -1))
    if finalprob:
        size += int(np.count_nonzero(apta.final_count[reps] > 0))
    return size


def log_likelihood(apta, finalprob: bool = True) -> float:
    """Log-likelihood the merged automaton assigns to its training data."""
    reps = apta.representatives()
    totals = apta.path_count[reps].astype(np.float64)
    live = totals > 0
    counts = apta.symbol_counts[reps][live].astype(np.float64)
    totals = totals[live]
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(counts > 0, counts * np.log(counts / totals[:, None]), 0.0)
    out = float(terms.sum())
    if finalprob:
        fins = apta.final_count[reps][live].astype(np.float64)
        with np.errstate(divide="ignore", invalid="ignore"):
            fterms = np.where(fins > 0, fins * np.log(fins / totals), 0.0)
        out += float(fterms.sum())
    return out


def aic_of(apta, finalprob: bool = True) -> float:
    """Akaike information criterion: 2*size - 2*loglikelihood."""
    return 2.0 * model_size(apta, finalprob) - 2.0 * log_likelihood(apta, finalprob)


# ---------------------------------------------------------------------------
# evaluation objects
# ---------------------------------------------------------------------------

class EvalFunction:
    """Interface the merge engine drives.

    ``pair`` is called once per pair of states combined during a merge
    cascade, before that pair's counts are folded together; returning
    False aborts and rolls back the merge.  ``finish`` delivers the final
    verdict and the score used to rank consistent merges.  State lives in
    the object returned by ``begin``, so evaluating then undoing a
    candidate leaves no residue.
    """

    name: str = ""
    kernel_id: int | None = None
    needs_prefix_weights: bool = False

    def begin(self, apta, params):
        raise NotImplementedError

    def pair(self, apta, params, st, q: int, qp: int, depth: int) -> bool:
        raise NotImplementedError

    def finish(self, apta, params, st) -> tuple[bool, float]:
        raise NotImplementedError


class AlergiaEval(EvalFunction):
    name = "alergia"
    kernel_id = KERNEL_ALERGIA

    def begin(self, apta, params):
        return [0.0]

    def pair(self, apta, params, st, q, qp, depth):
        ok, margin = alergia_pair_test(
            apta.symbol_counts[q],
            apta.symbol_counts[qp],
            int(apta.final_count[q]),
            int(apta.final_count[qp]),
            params.confidence_bound,
            state_count=params.state_count,
            symbol_count=params.symbol_count,
            correction=params.correction,
            finalprob=params.finalprob,
        )
        if ok:
            st[0] += margin
        return ok

    def finish(self, apta, params, st):
        return True, st[0]


class _LikelihoodBasedEval(EvalFunction):
    """Shared pair bookkeeping: accumulate (delta_loglik, delta_params)."""

    def begin(self, apta, params):
        return [0.0, 0]

    def pair(self, apta, params, st, q, qp, depth):
        dll, dparams = ll_delta(
            apta.symbol_counts[q],
            apta.symbol_counts[qp],
            int(apta.final_count[q]),
            int(apta.final_count[qp]),
            finalprob=params.finalprob,
            state_count=params.state_count,
        )
        st[0] += dll
        st[1] += dparams
        return True


class LikelihoodRatioEval(_LikelihoodBasedEval):
    name = "likelihoodratio"
    kernel_id = KERNEL_LIKELIHOODRATIO

    def finish(self, apta, params, st):
        return likelihood_ratio_test(st[0], st[1], params.confidence_bound)


class AicEval(_LikelihoodBasedEval):
    name = "aic"
    kernel_id = KERNEL_AIC

    def finish(self, apta, params, st):
        return aic_test(st[0], st[1])


class MdiEval(EvalFunction):
    name = "mdi"
    kernel_id = KERNEL_MDI
    needs_prefix_weights = True

    def begin(self, apta, params):
        return [0.0, 0]

    def pair(self, apta, params, st, q, qp, depth):
        w = apta.aux_weight
        fcol = apta.alphabet_size
        st[0] += mdi_pair_delta(
            apta.symbol_counts[q],
            apta.symbol_counts[qp],
            int(apta.final_count[q]),
            int(apta.final_count[qp]),
            w[q, :fcol],
            w[qp, :fcol],
            float(w[q, fcol]),
            float(w[qp, fcol]),
            finalprob=params.finalprob,
            state_count=params.state_count,
        )
        _, dparams = ll_delta(
            apta.symbol_counts[q],
            apta.symbol_counts[qp],
            int(apta.final_count[q]),
            int(apta.final_count[qp]),
            finalprob=params.finalprob,
            state_count=params.state_count,
        )
        st[1] += dparams
        return True

    def finish(self, apta, params, st):
        return mdi_test(st[0], st[1], params.confidence_bound)


def init_prefix_weights(apta, finalprob: bool) -> None:
    """Allocate and fill the additive reference-mass rows for MDI.

    For every prefix-tree node the mass is C_p(q,a)*S_p(q,a), i.e. the
    squared symbol count over the node total; the extra column holds the
    final-probability analogue.  Must be called on the unmerged tree.
    """
    n = apta.n_nodes
    a = apta.alphabet_size
    w = np.zeros((n, a + 1), dtype=np.float64)
    totals = apta.path_count.astype(np.float64)
    nz = totals > 0
    w[nz, :a] = apta.symbol_counts[nz].astype(np.float64) ** 2 / totals[nz, None]
    if finalprob:
        w[nz, a] = apta.final_count[nz].astype(np.float64) ** 2 / totals[nz]
    apta.aux_weight = w


# ---------------------------------------------------------------------------
# registry
# ---------------------------------------------------------------------------

_REGISTRY: dict[str, EvalFunction] = {}


def register(ev: EvalFunction) -> EvalFunction:
    if not ev.name:
        raise ValueError("evaluation function needs a name")
    _REGISTRY[ev.name] = ev
    return ev


def get_eval(name: str) -> EvalFunction:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(
            f"unknown evaluation function {name!r}; known: {sorted(_REGISTRY)}"
        ) from None


def available_evals() -> list[str]:
    return sorted(_REGISTRY)


register(AlergiaEval())
register(LikelihoodRatioEval())
register(AicEval())
register(MdiEval())
