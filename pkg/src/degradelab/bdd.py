"""Reduced ordered BDDs over ECU status variables.

Nodes live in a hash-consed table inside :class:`BddManager`; a reference is
the integer index of a node. ``0`` and ``1`` are the terminals. Variables are
ordered by ascending index, which is the ECU id. There are no complement
edges.
"""

from __future__ import annotations

from fractions import Fraction

from .errors import MissingVariable, OutOfRange

FALSE = 0
TRUE = 1


class BddManager:
    def __init__(self):
        # terminals carry an infinite level so they sort below every variable
        self._var = [None, None]
        self._low = [None, None]
        self._high = [None, None]
        self._unique = {}
        self._ite_cache = {}

    # -- node table ----------------------------------------------------------

    def _level(self, u):
        v = self._var[u]
        return float("inf") if v is None else v

    def mk(self, var, low, high):
        """Return the canonical node ``(var, low, high)``."""
        if low == high:
            return low
        key = (var, low, high)
        u = self._unique.get(key)
        if u is None:
            u = len(self._var)
            self._var.append(var)
            self._low.append(low)
            self._high.append(high)
            self._unique[key] = u
        return u

    def node(self, u):
        """``(var, low, high)`` of a decision node, ``None`` for terminals."""
        if u in (FALSE, TRUE):
            return None
        return self._var[u], self._low[u], self._high[u]

    def __len__(self):
        return len(self._var)

    # -- construction --------------------------------------------------------

    def var(self, i: int) -> int:
        return self.mk(int(i), FALSE, TRUE)

    def ite(self, f, g, h):
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        key = (f, g, h)
        r = self._ite_cache.get(key)
        if r is not None:
            return r
        top = min(self._level(f), self._level(g), self._level(h))
        f0, f1 = self._cof(f, top)
        g0, g1 = self._cof(g, top)
        h0, h1 = self._cof(h, top)
        r = self.mk(top, self.ite(f0, g0, h0), self.ite(f1, g1, h1))
        self._ite_cache[key] = r
        return r

    def _cof(self, u, var):
        if self._var[u] == var:
            return self._low[u], self._high[u]
        return u, u

    def and_(self, a, b):
        return self.ite(a, b, FALSE)

    def or_(self, a, b):
        return self.ite(a, TRUE, b)

    def not_(self, a):
        return self.ite(a, FALSE, TRUE)

    def conjoin(self, refs):
        r = TRUE
        for x in refs:
            r = self.and_(r, x)
        return r

    def disjoin(self, refs):
        r = FALSE
        for x in refs:
            r = self.or_(r, x)
        return r

    # -- queries -------------------------------------------------------------

    def support(self, u) -> set:
        seen, out, stack = set(), set(), [u]
        while stack:
            n = stack.pop()
            if n in seen or n in (FALSE, TRUE):
                continue
            seen.add(n)
            out.add(self._var[n])
            stack += [self._low[n], self._high[n]]
        return out

    def size(self, u) -> int:
        """Number of decision nodes reachable from ``u``."""
        seen, stack = set(), [u]
        while stack:
            n = stack.pop()
            if n in seen or n in (FALSE, TRUE):
                continue
            seen.add(n)
            stack += [self._low[n], self._high[n]]
        return len(seen)

    def eval(self, u, assignment) -> int:
        while u not in (FALSE, TRUE):
            v = self._var[u]
            try:
                bit = assignment[v]
            except (KeyError, IndexError):
                raise MissingVariable(f"no value for variable {v}") from None
            u = self._high[u] if bit else self._low[u]
        return u

    def restrict(self, u, var, value):
        memo = {}

        def go(n):
            if n in (FALSE, TRUE) or self._var[n] > var:
                return n
            if n in memo:
                return memo[n]
            if self._var[n] == var:
                r = self._high[n] if value else self._low[n]
            else:
                r = self.mk(self._var[n], go(self._low[n]), go(self._high[n]))
            memo[n] = r
            return r

        return go(u)

    def probability(self, u, r):
        """Probability that ``u`` is true when variable ``v`` is true with ``r[v]``.

        ``r`` is a mapping or sequence indexed by variable, or one number for
        all variables. One pass over the nodes: P(n) = r*P(high) + (1-r)*P(low).
        """
        uniform = not hasattr(r, "__getitem__")
        if uniform:
            _check_prob(r)
        memo = {FALSE: 0.0, TRUE: 1.0}

        def go(n):
            if n in memo:
                return memo[n]
            v = self._var[n]
            if uniform:
                p = r
            else:
                try:
                    p = r[v]
                except (KeyError, IndexError):
                    raise MissingVariable(f"no probability for variable {v}") from None
                _check_prob(p)
            val = p * go(self._high[n]) + (1 - p) * go(self._low[n])
            memo[n] = val
            return val

        return go(u)

    def reliability_polynomial(self, u):
        """Integer coefficients ``c`` with P(u) = sum c[k] * r**k for uniform r."""
        memo = {FALSE: [0], TRUE: [1]}

        def go(n):
            if n in memo:
                return memo[n]
            hi, lo = go(self._high[n]), go(self._low[n])
            # r*hi + (1-r)*lo = lo + r*(hi - lo)
            out = list(lo) + [0] * (max(len(hi), len(lo)) + 1 - len(lo))
            for k in range(len(out) - 1):
                d = (hi[k] if k < len(hi) else 0) - (lo[k] if k < len(lo) else 0)
                out[k + 1] += d
            while len(out) > 1 and out[-1] == 0:
                out.pop()
            memo[n] = out
            return out

        return ReliabilityPolynomial(tuple(go(u)))

    def to_text(self, u) -> str:
        """Line-per-node dump: ``node var low high``, root first."""
        order, seen, stack = [], set(), [u]
        while stack:
            n = stack.pop()
            if n in seen or n in (FALSE, TRUE):
                continue
            seen.add(n)
            order.append(n)
            stack += [self._high[n], self._low[n]]
        lines = [f"root {u}"]
        lines += [f"{n} y{self._var[n]} {self._low[n]} {self._high[n]}" for n in order]
        return "\n".join(lines) + "\n"


def _check_prob(p):
    if not 0.0 <= p <= 1.0:
        raise OutOfRange(f"probability {p} outside [0, 1]")


class ReliabilityPolynomial:
    """Coefficients ``c_0 .. c_n`` of sum c_k r**k."""

    def __init__(self, coefficients):
        self.coefficients = tuple(int(c) for c in coefficients)

    def __call__(self, r):
        # Horner
        acc = 0.0
        for c in reversed(self.coefficients):
            acc = acc * r + c
        return acc

    def __eq__(self, other):
        return isinstance(other, ReliabilityPolynomial) and self.coefficients == other.coefficients

    def __hash__(self):
        return hash(self.coefficients)

    def __repr__(self):
        return f"ReliabilityPolynomial({list(self.coefficients)})"

    @property
    def degree(self):
        return len(self.coefficients) - 1

    def mttf(self, failure_rate) -> float:
        """Integral of sum c_k exp(-k*lam*t) over [0, inf): sum_{k>=1} c_k / (k*lam)."""
        total = sum(Fraction(c, k) for k, c in enumerate(self.coefficients) if k)
        return float(total / Fraction(failure_rate))
