"""Constants of the excellent-partition construction and its piece-count bounds."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor

from .excellence import WitnessFamily
from .witness import DEFAULT_BUDGET


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class SizeSequence:
    sizes: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.sizes)

    def __getitem__(self, i: int) -> int:
        return self.sizes[i]

    @property
    def base(self) -> int:
        return self.sizes[-1]

    def violations(self, eps: Fraction, t: int) -> list[str]:
        """Broken size-sequence conditions for threshold ``eps`` (empty if valid)."""
        s = self.sizes
        out = []
        if len(s) != t:
            out.append(f"length {len(s)} != t={t}")
        for i in range(len(s) - 1):
            if eps * s[i] < s[i + 1]:
                out.append(f"eps*s_{i} = {eps * s[i]} < s_{i + 1} = {s[i + 1]}")
        if any(x % s[-1] for x in s):
            out.append(f"s_{t - 1} = {s[-1]} does not divide every size")
        if s[-1] <= t:
            out.append(f"s_{t - 1} = {s[-1]} <= t = {t}")
        return out


@dataclass(frozen=True)
class PipelineParams:
    eps: Fraction
    t: int
    n: int
    alpha: Fraction
    beta: Fraction
    q: int
    c: int
    seed: int = 0
    max_retries: int = 20
    budget: int = DEFAULT_BUDGET
    family: WitnessFamily = field(default_factory=WitnessFamily)

    def to_json(self) -> dict:
        return {"eps": str(self.eps), "t": self.t, "n": self.n, "alpha": str(self.alpha),
                "beta": str(self.beta), "q": self.q, "c": self.c, "seed": self.seed,
                "max_retries": self.max_retries, "budget": self.budget,
                "family": self.family.to_json()}


def size_constants(n: int, eps, t: int) -> tuple[int, int, SizeSequence]:
    """``(q, c, sizes)`` for ``alpha = eps/4``, with no admissibility checks.

    ``c`` is the largest integer with ``q^(t-1) c <= alpha n / 2``, which
    also puts ``q^(t-1) c`` above ``alpha n / 2 - q^(t-1)``.
    """
    alpha = Fraction(eps) / 4
    q = ceil(1 / alpha)
    Q = q ** (t - 1)
    c = floor(alpha * n / 2 / Q)
    assert alpha * n / 2 - Q < Q * c <= alpha * n / 2
    return q, c, SizeSequence(tuple(q ** (t - 1 - i) * c for i in range(t)))


def make_params(n: int, eps, t: int, seed: int = 0, max_retries: int = 20,
                budget: int = DEFAULT_BUDGET,
                family: WitnessFamily | None = None) -> tuple[PipelineParams, SizeSequence]:
    """Derive alpha, beta, q, c and the size sequence ``s_l = q^(t-1-l) c``."""
    eps = Fraction(eps)
    if t < 1:
        raise ParameterError("tree bound t must be >= 1")
    if not 0 < eps < Fraction(1, 2**t):
        raise ParameterError(f"epsilon too large for tree bound: need eps < 1/2^{t}, got {eps}")
    alpha, beta = eps / 4, eps / 3
    lhs = alpha * alpha * n / 4 - 1
    rhs = max(Fraction(t), 3 / eps)
    if not lhs > rhs:
        raise ParameterError(
            f"insufficient n: alpha^2 n/4 - 1 = {float(lhs):.4g} must exceed "
            f"max(t, 3/eps) = {float(rhs):.4g} (n={n}, eps={eps}, t={t})")
    q, c, sizes = size_constants(n, eps, t)
    bad = sizes.violations(alpha, t)
    if bad:
        raise ParameterError("size sequence invalid: " + "; ".join(bad))
    params = PipelineParams(eps, t, n, alpha, beta, q, c, seed, max_retries, budget,
                            family or WitnessFamily())
    return params, sizes


def theorem_bound(eps, t: int) -> tuple[Fraction, Fraction]:
    """``(4 q^(t-1) / alpha, 4 (8/eps)^(t-2))`` with ``alpha = eps/4``, ``q = ceil(1/alpha)``.

    The first value bounds ``n / c`` and hence the piece count; the second is
    the simplified form usually quoted, reported alongside for comparison.
    """
    eps = Fraction(eps)
    if not 0 < eps < Fraction(1, 2**t):
        raise ParameterError(f"epsilon too large for tree bound: need eps < 1/2^{t}, got {eps}")
    alpha = eps / 4
    q = ceil(1 / alpha)
    return 4 * Fraction(q) ** (t - 1) / alpha, 4 * (8 / eps) ** (t - 2)


def stable_regularity_bound(eps, k: int) -> Fraction:
    """``(4/eps)^(2^(k+3) - 7)``, the piece bound in terms of edge stability."""
    return (4 / Fraction(eps)) ** (2 ** (k + 3) - 7)
