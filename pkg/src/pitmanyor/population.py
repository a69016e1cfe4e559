"""True sampling distributions and their counting functions.

A Population wraps a discrete distribution (p_j), sorted descending, together
with the counting function alpha0(u) = #{j : p_j >= 1/u} and the regular
variation descriptors (sigma0, L0, beta0) that drive all asymptotics.
Populations are immutable after construction; the prefix-sum cache is grown
lazily but append-only, so shared concurrent reads are safe.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .numerics import adaptive_integrate


@dataclass(frozen=True)
class RegularVariation:
    """Descriptors of alpha0(u) ~ u^sigma0 L0(u): L0(u) = L0_const * (log u)^log_power_r."""

    sigma0: float
    L0_const: float
    log_power_r: float = 0.0
    beta0: float = 0.0
    C: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.sigma0 < 1.0:
            raise ValueError("sigma0 must lie in (0, 1)")
        if self.beta0 >= self.sigma0:
            raise ValueError("beta0 must be < sigma0")


class Population:
    """Base class; concrete families implement the atom-level queries."""

    rv: RegularVariation
    kind: str

    def atom_probs(self, count):
        """First `count` atom probabilities, descending."""
        raise NotImplementedError

    def alpha0(self, u):
        """Exact count of atoms with p_j >= 1/u."""
        raise NotImplementedError

    def tail_power_sum(self, after, k):
        """sum_{j > after} p_j^k."""
        raise NotImplementedError

    def n_atoms(self):
        """Number of atoms, or None if infinite."""
        return None

    # ---- sampling support -------------------------------------------------
    _CACHE_START = 1 << 16
    _CACHE_MAX = 1 << 22

    def _ensure_cumulative(self, count):
        cache = getattr(self, "_cum", None)
        if cache is None or cache.size < count:
            size = self._CACHE_START
            while size < count:
                size *= 2
            limit = self.n_atoms()
            if limit is not None:
                size = min(size, limit)
            self._cum = np.cumsum(self.atom_probs(size))
        return self._cum

    def inverse_cdf(self, uniforms):
        """Map U(0,1) draws to atom indices (0-based) by inverse CDF."""
        u = np.asarray(uniforms, dtype=float)
        cum = self._ensure_cumulative(self._CACHE_START)
        while cum[-1] < 1.0 - 1e-9 and np.any(u >= cum[-1]) \
                and cum.size < self._CACHE_MAX \
                and (self.n_atoms() is None or cum.size < self.n_atoms()):
            cum = self._ensure_cumulative(cum.size * 2)
        idx = np.searchsorted(cum, u, side="right")
        overflow = idx >= cum.size
        if np.any(overflow):
            idx[overflow] = self._tail_indices(u[overflow], cum.size, cum[-1])
        return idx

    def _tail_indices(self, u, cached, cum_last):
        # Tail draws are effectively always-new species at the scales this
        # library targets (residual mass below ~1e-9 per draw); concrete
        # families may override with an exact inversion.
        return cached + np.arange(u.size)

    # ---- serialization ----------------------------------------------------
    def spec_dict(self):
        raise NotImplementedError

    def to_json(self):
        return json.dumps(self.spec_dict(), sort_keys=True)


class PowerLawPopulation(Population):
    """p_j = c / j^alpha with c = 1/zeta(alpha); alpha0(u) = floor((cu)^(1/alpha))."""

    kind = "power_law"

    def __init__(self, alpha):
        if not alpha > 1.0:
            raise ValueError("power law requires alpha > 1")
        self.alpha = float(alpha)
        self.c = 1.0 / float(special.zeta(self.alpha, 1))
        sigma0 = 1.0 / self.alpha
        self.rv = RegularVariation(sigma0=sigma0, L0_const=self.c ** sigma0,
                                   log_power_r=0.0, beta0=0.0, C=1.0)

    def atom_probs(self, count):
        j = np.arange(1, count + 1, dtype=float)
        return self.c * j ** (-self.alpha)

    def alpha0(self, u):
        if u <= 1.0:
            return 0
        k = int(math.floor((self.c * u) ** (1.0 / self.alpha) + 1e-12))
        # repair any floating-point boundary slip against the exact criterion
        while k >= 1 and self.c * float(k) ** (-self.alpha) < 1.0 / u:
            k -= 1
        while self.c * float(k + 1) ** (-self.alpha) >= 1.0 / u:
            k += 1
        return k

    def tail_power_sum(self, after, k):
        return self.c ** k * float(special.zeta(k * self.alpha, after + 1))

    def _tail_indices(self, u, cached, cum_last):
        # exact inversion via the Hurwitz zeta tail mass
        out = np.empty(u.size, dtype=np.int64)
        total = 1.0
        for i, ui in enumerate(u):
            lo, hi = cached, max(2 * cached, 1 << 40)
            target = ui
            while total - self.c * float(special.zeta(self.alpha, hi + 1)) < target:
                hi *= 2
            while lo + 1 < hi:
                mid = (lo + hi) // 2
                if total - self.c * float(special.zeta(self.alpha, mid + 1)) >= target:
                    hi = mid
                else:
                    lo = mid
            out[i] = hi - 1
        return out

    def spec_dict(self):
        return {"kind": self.kind, "alpha": self.alpha}


class SyntheticPopulation(Population):
    """Population whose counting function tracks u^gamma (log u)^r.

    Atoms are defined by 1/p~_j = inverse of f(u) = u^gamma (log(e^c u))^r at
    j, then renormalized to sum to one.  The shift constant c keeps f strictly
    increasing on u >= 1 when r < 0; it changes L0 only by lower-order terms.
    Renormalization rescales u by S = sum p~_j, so the effective constant in
    L0 is S^{-gamma}, which is recorded in `rv`.
    """

    kind = "synthetic"
    _TAIL_ANCHOR = 100_000

    def __init__(self, gamma, r):
        if not 0.0 < gamma < 1.0:
            raise ValueError("gamma must lie in (0, 1)")
        if not -2.0 <= r <= 2.0:
            raise ValueError("r must lie in [-2, 2]")
        self.gamma = float(gamma)
        self.r = float(r)
        self.shift = 1.0 if r >= 0 else 1.0 - r / gamma
        head = 1.0 / self._u_of(np.arange(1, self._TAIL_ANCHOR + 1))
        self.norm = float(np.sum(head)) + self._raw_tail_integral(
            self._TAIL_ANCHOR + 0.5, 1)
        self.rv = RegularVariation(sigma0=self.gamma,
                                   L0_const=self.norm ** (-self.gamma),
                                   log_power_r=self.r, beta0=0.0, C=1.0)

    # f and its inverse ------------------------------------------------------
    def _f(self, u):
        return u ** self.gamma * (self.shift + np.log(u)) ** self.r

    def _u_of(self, j):
        """Inverse of f at j (vectorized Newton in x = log u)."""
        j = np.asarray(j, dtype=float)
        target = np.log(j)
        x = np.maximum(target / self.gamma, 0.0)
        for _ in range(100):
            g = self.gamma * x + self.r * np.log(self.shift + x) - target
            step = g / (self.gamma + self.r / (self.shift + x))
            x = x - step
            x = np.maximum(x, 0.0)
            if np.max(np.abs(step)) < 1e-14:
                break
        return np.exp(x)

    def _raw_tail_integral(self, after, k):
        """integral_{after}^inf (1/u(j))^k dj by substitution t = 1/u."""
        upper = 1.0 / float(self._u_of(np.array([after]))[0])
        gamma, r, c = self.gamma, self.r, self.shift

        def integrand(t):
            ll = c - math.log(t)
            return t ** (k - 1 - gamma) * ll ** (r - 1.0) * (gamma * ll + r)

        return adaptive_integrate(integrand, 0.0, upper, rel_tol=1e-11)

    # Population API ---------------------------------------------------------
    def atom_probs(self, count):
        return 1.0 / self._u_of(np.arange(1, count + 1)) / self.norm

    def alpha0(self, u):
        if u <= 0:
            return 0
        v = u / self.norm
        u1 = float(self._u_of(np.array([1.0]))[0])
        if v < u1:
            return 0
        return int(math.floor(float(self._f(v)) + 1e-12))

    def tail_power_sum(self, after, k):
        # midpoint Euler-Maclaurin: sum_{j>J} h(j) ~ integral_{J+1/2} h
        return self._raw_tail_integral(after + 0.5, k) / self.norm ** k

    def spec_dict(self):
        return {"kind": self.kind, "gamma": self.gamma, "r": self.r}


class ExplicitPopulation(Population):
    """Finite list of atom probabilities; for ingestion and robustness tests.

    Not a valid asymptotic target (sigma0 undefined); `rv` is None.
    """

    kind = "explicit"
    rv = None

    def __init__(self, probs):
        p = np.sort(np.asarray(probs, dtype=float))[::-1]
        if p.size == 0 or np.any(p <= 0) or np.any(p >= 1) and p.size > 1:
            if not (p.size == 1 and p[0] == 1.0):
                if np.any(p <= 0) or np.any(p > 1):
                    raise ValueError("probabilities must lie in (0, 1]")
        if abs(float(np.sum(p)) - 1.0) > 1e-9:
            raise ValueError("probabilities must sum to 1")
        self.probs = p

    def n_atoms(self):
        return int(self.probs.size)

    def atom_probs(self, count):
        return self.probs[:count]

    def alpha0(self, u):
        if u <= 1.0:
            return 0
        return int(np.count_nonzero(self.probs >= 1.0 / u))

    def tail_power_sum(self, after, k):
        return float(np.sum(self.probs[after:] ** k))

    def spec_dict(self):
        return {"kind": self.kind, "probs": [float(x) for x in self.probs]}


def make_power_law(alpha):
    """Population with p_j = c/j^alpha (sigma0 = 1/alpha)."""
    return PowerLawPopulation(alpha)


def make_synthetic(gamma, r):
    """Population whose alpha0 tracks u^gamma (log u)^r (sigma0 = gamma)."""
    return SyntheticPopulation(gamma, r)


def make_explicit(probs):
    return ExplicitPopulation(probs)


def population_from_json(text):
    spec = json.loads(text) if isinstance(text, str) else text
    kind = spec.get("kind")
    if kind == "power_law":
        return make_power_law(spec["alpha"])
    if kind == "synthetic":
        return make_synthetic(spec["gamma"], spec["r"])
    if kind == "explicit":
        return make_explicit(spec["probs"])
    raise ValueError(f"unknown population kind: {kind!r}")
