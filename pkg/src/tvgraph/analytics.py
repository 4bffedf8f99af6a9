"""Exact latency and location distributions on dynamic random lines.

Everything here is closed-form or a numerically evaluated recurrence for
a message crossing an n-node line whose edges churn per slot.  Two
forwarding disciplines are covered: store-or-advance (one hop consumes
one slot; a successful hop consumes the slot in which its edge is seen
up) and cut-through (the whole currently-connected stretch is crossed
for free; only waiting costs slots).

Latency PMFs are truncated at an explicit horizon and carry the leftover
tail as `truncation_mass`; with no horizon given, the support is extended
until the tail drops below 1e-13.  The convention 0**0 = 1 is used
throughout so the p=1 and q=1 boundaries are well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

__all__ = [
    "LatencyPmf",
    "LocationPmf",
    "pmf_moments",
    "er_soa_location_pmf",
    "er_soa_latency_pmf",
    "er_cut_latency_pmf",
    "er_soa_latency_masses_exact",
    "er_cut_latency_masses_exact",
    "mc_cut_latency_pmf",
    "mc_soa_latency_pmf",
    "stacked_reach_cdf",
    "smashed_reach_cdf",
    "m_smashed_reach_cdf",
    "mc_smashed_reach_cdf",
]

TAIL_TARGET = 1e-13
MAX_SUPPORT = 2_000_000
NORMALIZATION_TOL = 1e-9


@dataclass(frozen=True)
class LatencyPmf:
    """Distribution of a slot-count latency: masses for offset, offset+1, ..."""

    offset: int
    masses: tuple
    truncation_mass: float

    def __post_init__(self):
        if self.offset < 0:
            raise ValueError("latency support cannot be negative")
        for m in self.masses:
            if not -1e-12 <= m <= 1.0 + 1e-12:
                raise ValueError(f"mass {m} outside [0, 1]")
        total = math.fsum(self.masses) + self.truncation_mass
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"masses plus truncation sum to {total}, not 1")

    def support(self):
        return range(self.offset, self.offset + len(self.masses))

    def mass(self, latency):
        i = latency - self.offset
        if 0 <= i < len(self.masses):
            return self.masses[i]
        return 0.0

    def mean(self):
        return pmf_moments(self)[0]

    def variance(self):
        return pmf_moments(self)[1]


@dataclass(frozen=True)
class LocationPmf:
    """Distribution of the message position (1..n along the path) at one slot."""

    time: int
    masses: tuple

    def __post_init__(self):
        total = math.fsum(self.masses)
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"position masses sum to {total}, not 1")

    def mass(self, position):
        if not 1 <= position <= len(self.masses):
            raise ValueError(f"position {position} outside 1..{len(self.masses)}")
        return self.masses[position - 1]

    def mean_position(self):
        return math.fsum((i + 1) * m for i, m in enumerate(self.masses))


def pmf_moments(pmf):
    """(mean, variance, truncation_mass), moments normalized over the support."""
    total = math.fsum(pmf.masses)
    if total <= 0.0:
        raise ValueError("cannot take moments of an all-zero pmf")
    mean = math.fsum((pmf.offset + i) * m for i, m in enumerate(pmf.masses)) / total
    var = math.fsum((pmf.offset + i - mean) ** 2 * m for i, m in enumerate(pmf.masses)) / total
    return mean, var, pmf.truncation_mass


def _validate_line(n, p, allow_p_zero=False):
    if n < 2:
        raise ValueError("need at least two nodes")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if p == 0.0 and not allow_p_zero:
        raise ValueError("p = 0 never delivers")


def _collect(mass_at, offset, max_latency):
    """Masses from `offset` up to `max_latency` (or auto-extended)."""
    masses = []
    cum = 0.0
    if max_latency is not None:
        for latency in range(offset, max_latency + 1):
            m = mass_at(latency)
            masses.append(m)
            cum += m
    else:
        latency = offset
        while len(masses) < MAX_SUPPORT:
            m = mass_at(latency)
            masses.append(m)
            cum += m
            if 1.0 - cum < TAIL_TARGET:
                break
            latency += 1
    return tuple(masses), max(0.0, 1.0 - cum)


def _negbin_masses(hops, p, count):
    """C(hops-1+j, j) (1-p)^j p^hops for j = 0.. (count terms, or auto)."""
    masses = []
    cum = 0.0
    a = p ** hops
    j = 0
    while True:
        if count is not None:
            if j >= count:
                break
        elif j >= MAX_SUPPORT:
            break
        masses.append(a)
        cum += a
        if count is None and 1.0 - cum < TAIL_TARGET:
            break
        a *= (1.0 - p) * (hops + j) / (j + 1)
        j += 1
    return tuple(masses), max(0.0, 1.0 - cum)


def er_soa_latency_pmf(n, p, max_latency=None):
    """Latency of store-or-advance on an n-node independent-churn line.

    P(T = n-1+j) = C(n+j-2, j) (1-p)^j p^(n-1); the full-distribution mean
    is (n-1)/p.  Support starts at n-1 hops.
    """
    _validate_line(n, p)
    offset = n - 1
    count = None if max_latency is None else max(0, max_latency - offset + 1)
    masses, trunc = _negbin_masses(n - 1, p, count)
    return LatencyPmf(offset, masses, trunc)


def er_cut_latency_pmf(n, p, max_latency=None):
    """Waiting-slot latency of cut-through on the independent-churn line.

    P(T = k) = C(n+k-2, k) (1-p)^k p^(n-1); mean (n-1)(1-p)/p and variance
    (n-1)(1-p)/p^2.
    """
    _validate_line(n, p)
    count = None if max_latency is None else max(0, max_latency + 1)
    masses, trunc = _negbin_masses(n - 1, p, count)
    return LatencyPmf(0, masses, trunc)


def er_soa_latency_masses_exact(n, p, max_latency):
    """Exact rational store-or-advance masses for latencies n-1..max_latency."""
    return _negbin_masses_exact(n - 1, Fraction(p), max_latency - (n - 1) + 1)


def er_cut_latency_masses_exact(n, p, max_latency):
    """Exact rational cut-through masses for latencies 0..max_latency."""
    return _negbin_masses_exact(n - 1, Fraction(p), max_latency + 1)


def _negbin_masses_exact(hops, p, count):
    masses = []
    a = p ** hops
    for j in range(max(0, count)):
        masses.append(a)
        a *= (1 - p) * Fraction(hops + j, j + 1)
    return masses


def er_soa_location_pmf(n, p, t):
    """Position distribution after t slots of store-or-advance on the line.

    Evaluates the one-step recurrence P(pos=k at t) = P(k-1) p + P(k)(1-p)
    from P(pos=1 at 0) = 1, with the destination absorbing.
    """
    _validate_line(n, p, allow_p_zero=True)
    if t < 0:
        raise ValueError("t must be >= 0")
    cur = [1.0] + [0.0] * (n - 1)
    for _ in range(t):
        nxt = [0.0] * n
        nxt[0] = cur[0] * (1.0 - p)
        for k in range(1, n - 1):
            nxt[k] = cur[k - 1] * p + cur[k] * (1.0 - p)
        nxt[n - 1] = cur[n - 2] * p + cur[n - 1]
        cur = nxt
    return LocationPmf(t, tuple(cur))


# --- two-state chain latencies (stationary start) ----------------------------


def _validate_markov(n, params):
    if n < 2:
        raise ValueError("need at least two nodes")
    if params.p <= 0.0 or params.q <= 0.0:
        raise ValueError("the chain latency formulas need p > 0 and q > 0")
    if not params.is_stationary_start():
        raise ValueError("these closed forms assume the stationary start p0 = p/(p+q)")


def mc_cut_latency_pmf(n, params, max_latency=None):
    """Cut-through latency on a line of independent two-state edge chains.

    The zero-wait atom is pi_on^(n-1) (every edge up in slot 1); a latency
    of ell >= 1 splits into m blocked edges and ell total waiting slots:

        P(T = ell) = sum_m C(n-1, m) C(ell-1, m-1) p^(n-1) q^m (1-p)^(ell-m)
                     / (p+q)^(n-1)

    Mean (n-1) q / (p (p+q)).
    """
    _validate_markov(n, params)
    p, q = params.p, params.q
    pi_on = p / (p + q)
    denom = (p + q) ** (n - 1)
    base = p ** (n - 1)

    def mass_at(latency):
        if latency == 0:
            return pi_on ** (n - 1)
        total = 0.0
        for m in range(1, min(n - 1, latency) + 1):
            total += (
                math.comb(n - 1, m)
                * math.comb(latency - 1, m - 1)
                * base
                * q ** m
                * (1.0 - p) ** (latency - m)
                / denom
            )
        return total

    count = None if max_latency is None else max_latency
    masses, trunc = _collect(mass_at, 0, count)
    return LatencyPmf(0, masses, trunc)


def mc_soa_latency_pmf(n, params, max_latency=None):
    """Store-or-advance latency on a line of two-state edge chains.

    The minimum n-1 slots are hit exactly when every hop finds its edge up
    on arrival, probability pi_on^(n-1) under a stationary start; j >= 1
    extra waiting slots split over m blocked hops:

        P(T = n-1+j) = sum_m C(n-1, m) C(j-1, m-1) p^(n-1) q^m (1-p)^(j-m)
                       / (p+q)^(n-1)

    Mean n-1 + (n-1) q / (p (p+q)).
    """
    _validate_markov(n, params)
    p, q = params.p, params.q
    pi_on = p / (p + q)
    denom = (p + q) ** (n - 1)
    base = p ** (n - 1)
    offset = n - 1

    def mass_at(latency):
        if latency == offset:
            return pi_on ** (n - 1)
        j = latency - offset
        total = 0.0
        for m in range(1, min(n - 1, j) + 1):
            total += (
                math.comb(n - 1, m)
                * math.comb(j - 1, m - 1)
                * base
                * q ** m
                * (1.0 - p) ** (j - m)
                / denom
            )
        return total

    masses, trunc = _collect(mass_at, offset, max_latency)
    return LatencyPmf(offset, masses, trunc)


# --- reachability CDFs of the stacked / smashed representations --------------


def stacked_reach_cdf(n, p, t):
    """P(first node reaches last within t slots) on the time-expanded line."""
    _validate_line(n, p)
    if t < 0:
        raise ValueError("t must be >= 0")
    cum = 0.0
    a = p ** (n - 1)
    for tau in range(t):
        cum += a
        a *= (1.0 - p) * (n - 1 + tau) / (tau + 1)
    return cum


def smashed_reach_cdf(n, p, t):
    """P(the union of t slots connects the line ends) = (1-(1-p)^t)^(n-1)."""
    _validate_line(n, p, allow_p_zero=True)
    if t < 0:
        raise ValueError("t must be >= 0")
    q_union = (1.0 - p) ** t
    return (1.0 - q_union) ** (n - 1)


def m_smashed_reach_cdf(n, p, t, m):
    """Reach CDF after coarsening every m slots into one; floor(t/m) full blocks.

    The coarse sequence is itself an independent-churn line with per-block
    presence 1 - (1-p)^m, so this interpolates between the stacked curve
    (m=1, exact equality) and the fully smashed one (m=t).
    """
    _validate_line(n, p)
    if not isinstance(m, int) or isinstance(m, bool) or m < 1:
        raise ValueError("block size m must be a positive integer")
    if m == 1:
        return stacked_reach_cdf(n, p, t)
    blocks = t // m
    q_block = (1.0 - p) ** m
    p_block = 1.0 - q_block
    cum = 0.0
    a = p_block ** (n - 1)
    for tau in range(blocks):
        cum += a
        a *= q_block * (n - 1 + tau) / (tau + 1)
    return cum


def mc_smashed_reach_cdf(n, params, t):
    """Smashed-union reach CDF for two-state edge chains with stationary start."""
    if n < 2:
        raise ValueError("need at least two nodes")
    if t < 1:
        raise ValueError("t must be >= 1")
    p, q = params.p, params.q
    if p + q <= 0.0:
        raise ValueError("p + q must be positive")
    if not params.is_stationary_start():
        raise ValueError("this closed form assumes the stationary start p0 = p/(p+q)")
    absent = (q / (p + q)) * (1.0 - p) ** (t - 1)
    return (1.0 - absent) ** (n - 1)
