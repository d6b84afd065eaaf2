"""Configuration LP for winner determination, solved exactly.

    max  sum_{i,S} v_i(S) z_{i,S}
    s.t. sum_S z_{i,S} <= 1                 for every buyer i
         sum_{i, S containing j} z_{i,S} <= 1  for every available item j
         z >= 0

Every right-hand side is 1 and every coefficient is 0/1, so the all-slack
basis is feasible and a primal simplex over ``Fraction`` with Bland's rule
needs no phase one and cannot cycle.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .valuation import Valuation, items_of, submasks

MAX_VARIABLES = 50_000


class LPError(RuntimeError):
    pass


@dataclass(frozen=True)
class ConfigLP:
    variables: tuple[tuple[int, int], ...]       # (buyer, bundle)
    objective: tuple[Fraction, ...]
    rows: tuple[tuple[int, ...], ...]            # variable indices with coefficient 1
    row_labels: tuple[str, ...]

    def dump(self) -> str:
        """Plain-text inequality listing, one constraint per line."""
        def term(k):
            i, s = self.variables[k]
            return f"z[{i},{s:#b}]"

        lines = ["max " + " + ".join(f"{c} {term(k)}" for k, c in enumerate(self.objective) if c)
                 if any(self.objective) else "max 0"]
        for label, row in zip(self.row_labels, self.rows):
            lhs = " + ".join(term(k) for k in row) if row else "0"
            lines.append(f"{label}: {lhs} <= 1")
        lines.append("bounds: all z >= 0")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LPSolution:
    optimum: Fraction
    values: tuple[Fraction, ...]
    duals: tuple[Fraction, ...]

    def is_primal_feasible(self, lp: ConfigLP) -> bool:
        if any(z < 0 for z in self.values):
            return False
        return all(sum(self.values[k] for k in row) <= 1 for row in lp.rows)

    def is_dual_certificate(self, lp: ConfigLP) -> bool:
        """Dual feasible with objective equal to the optimum (strong duality)."""
        if any(y < 0 for y in self.duals):
            return False
        cover = [Fraction(0)] * len(lp.variables)
        for r, row in enumerate(lp.rows):
            for k in row:
                cover[k] += self.duals[r]
        if any(cover[k] < lp.objective[k] for k in range(len(lp.variables))):
            return False
        return sum(self.duals) == self.optimum


def build_config_lp(avail: int, valuations: Mapping[int, Valuation],
                    max_variables: int = MAX_VARIABLES) -> ConfigLP:
    buyers = sorted(valuations)
    bundles = [s for s in submasks(avail) if s]
    if len(buyers) * len(bundles) > max_variables:
        raise LPError(f"configuration LP with {len(buyers) * len(bundles)} variables "
                      f"exceeds the bound of {max_variables}")
    variables, objective = [], []
    buyer_rows: dict[int, list[int]] = {i: [] for i in buyers}
    item_rows: dict[int, list[int]] = {j: [] for j in items_of(avail)}
    for i in buyers:
        v = valuations[i]
        for s in bundles:
            k = len(variables)
            variables.append((i, s))
            objective.append(Fraction(v(s)))
            buyer_rows[i].append(k)
            for j in items_of(s):
                item_rows[j].append(k)
    rows = [tuple(buyer_rows[i]) for i in buyers] + [tuple(item_rows[j]) for j in sorted(item_rows)]
    labels = [f"buyer {i}" for i in buyers] + [f"item {j}" for j in sorted(item_rows)]
    return ConfigLP(tuple(variables), tuple(objective), tuple(rows), tuple(labels))


def simplex_max(c: Sequence, rows: Sequence[Sequence[int]], max_pivots: int = 100_000):
    """Maximise ``c.z`` subject to 0/1 packing rows ``<= 1`` and ``z >= 0``.

    Returns ``(optimum, z, y)`` with ``y`` the optimal dual prices.
    """
    n = len(c)
    r = len(rows)
    width = n + r
    zero, one = Fraction(0), Fraction(1)
    tab = []
    for i, row in enumerate(rows):
        line = [zero] * width
        for k in row:
            line[k] = one
        line[n + i] = one
        tab.append(line)
    rhs = [one] * r
    basis = [n + i for i in range(r)]
    # reduced costs d_j = c_j - c_B B^-1 A_j; slack basis has c_B = 0
    d = [Fraction(x) for x in c] + [zero] * r
    obj = zero

    for _ in range(max_pivots):
        enter = next((j for j in range(width) if d[j] > 0), None)
        if enter is None:
            break
        leave, best = None, None
        for i in range(r):
            a = tab[i][enter]
            if a > 0:
                ratio = rhs[i] / a
                if best is None or ratio < best or (ratio == best and basis[i] < basis[leave]):
                    leave, best = i, ratio
        if leave is None:
            raise LPError("LP is unbounded")
        piv_row = tab[leave]
        piv = piv_row[enter]
        if piv != 1:
            piv_row = [a / piv for a in piv_row]
            tab[leave] = piv_row
            rhs[leave] /= piv
        nz = [j for j in range(width) if piv_row[j]]
        for i in range(r):
            if i == leave:
                continue
            f = tab[i][enter]
            if f:
                line = tab[i]
                for j in nz:
                    line[j] -= f * piv_row[j]
                rhs[i] -= f * rhs[leave]
        f = d[enter]
        for j in nz:
            d[j] -= f * piv_row[j]
        obj += f * rhs[leave]
        basis[leave] = enter
    else:
        raise LPError(f"simplex did not converge in {max_pivots} pivots")

    z = [zero] * n
    for i, b in enumerate(basis):
        if b < n:
            z[b] = rhs[i]
    y = [-d[n + i] for i in range(r)]
    if any(v < 0 for v in rhs):
        raise LPError("simplex produced an infeasible basis")
    return obj, z, y


def solve(lp: ConfigLP) -> LPSolution:
    if not lp.variables:
        return LPSolution(Fraction(0), (), tuple(Fraction(0) for _ in lp.rows))
    obj, z, y = simplex_max(lp.objective, lp.rows)
    sol = LPSolution(obj, tuple(z), tuple(y))
    if not sol.is_dual_certificate(lp):
        raise LPError("optimum failed its dual certificate")
    return sol


def fractional_optimum(avail: int, valuations: Mapping[int, Valuation]) -> Fraction:
    if not valuations or not avail:
        return Fraction(0)
    return solve(build_config_lp(avail, valuations)).optimum
