"""Certification of subequations and closed forms.

The exact checks are authoritative: a closed form is substituted into the
ODE symbolically and reduced by its chart relation, and a subequation is
re-expanded on every enforced Laurent series. The numeric check evaluates
the closed form with mpmath at 50 digits as an independent smoke test.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field as dc_field
from typing import Mapping, Sequence

import mpmath

from .arith import ParamField, rat, render
from .closed_forms import EllipticForm, TrigForm
from .errors import AllPointsSingular, DivisionByZeroDenominator, PrecisionLoss
from .ode import AutonomousODE
from .subeq import SubeqBranch, SubeqTemplate, verify_branch

WORKING_DPS = 50
LAURENT_TERMS = 10          # wp Laurent series through chi^18
NUMERIC_TOL = mpmath.mpf("1e-9")


@dataclass
class VerificationReport:
    exact_ok: bool | None = None
    exact_remainder: str = ""
    numeric_max_residual: float | None = None
    sample_points: list = dc_field(default_factory=list)
    sample_params: dict = dc_field(default_factory=dict)
    seed: int | None = None
    series_terms: int | None = None
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        checks = [self.exact_ok]
        if self.numeric_max_residual is not None:
            checks.append(self.numeric_max_residual < float(NUMERIC_TOL))
        return all(c is not False for c in checks) and any(c is not None for c in checks)

    def to_dict(self) -> dict:
        out = {"exact_ok": self.exact_ok, "exact_remainder": self.exact_remainder}
        if self.series_terms is not None:
            out["series_terms"] = self.series_terms
        if self.first_failure is not None:
            out["first_failure"] = self.first_failure
        if self.numeric_max_residual is not None:
            out["numeric_max_residual"] = mpmath.nstr(self.numeric_max_residual, 3)
            out["seed"] = self.seed
            out["sample_params"] = self.sample_params
            out["sample_points"] = self.sample_points
        return out


# ---------------------------------------------------------------------------
# symbolic derivatives of closed forms
# ---------------------------------------------------------------------------

def _riccati_field(form):
    fld = form.params
    if "tau" in fld.names:
        raise ValueError("parameter name 'tau' is reserved for the Riccati chart")
    big = fld.extend(["tau"])
    tau = big.gens["tau"]
    num = sum((big.convert(c) * tau ** i for (i,), c in form.numerator.terms()), big.zero)
    den = sum((big.convert(c) * tau ** i for (i,), c in form.denominator.terms()), big.zero)
    k2 = big.convert(form.k2) if isinstance(form, TrigForm) else big.zero
    return big, tau, num / den, k2


def derivative_chain(form, n: int):
    """``[u, u', ..., u^(n)]`` in the form's chart, plus the chart object."""
    if isinstance(form, EllipticForm):
        alg = form.algebra()
        out = [form.as_poly(alg)]
        for _ in range(n):
            out.append(alg.d(out[-1]))
        return out, alg
    big, tau, u, k2 = _riccati_field(form)
    rhs = k2 / 4 - tau ** 2
    out = [u]
    for _ in range(n):
        out.append(out[-1].diff(tau) * rhs)
    return out, big


def _ode_on(ode: AutonomousODE, params: ParamField, subst: Mapping | None):
    """Move the ODE coefficients onto ``params`` (applying eliminations)."""
    vals = {k: v for k, v in (subst or {}).items() if k in ode.params.names}
    return ode.over(params, vals)


def residual_of(form, ode: AutonomousODE):
    """The ODE evaluated on the closed form, reduced in the chart (zero iff it solves)."""
    ode = _ode_on(ode, form.params, form.substitution)
    n = ode.poly.ring.ngens - 1
    chain, chart = derivative_chain(form, n)
    if isinstance(form, EllipticForm):
        return chart.apply(ode.poly, chain[0])
    total = chart.zero
    for mon, c in ode.poly.terms():
        t = chart.convert(c)
        for k, e in enumerate(mon):
            if e:
                t = t * chain[k] ** e
        total += t
    return total


def verify_exact(form, ode: AutonomousODE) -> VerificationReport:
    """Substitute ``form`` into ``ode``; the reduced remainder must vanish identically.

    ``ode`` may carry parameters the form has eliminated (its branch
    constraints); they are replaced by the form's substitution first.
    """
    rem = residual_of(form, ode)
    ok = not rem
    text = "0" if ok else _short(_render_remainder(rem))
    return VerificationReport(exact_ok=ok, exact_remainder=text)


def _render_remainder(rem) -> str:
    if hasattr(rem, "numer"):
        return render(rem.numer)
    names = [str(g) for g in rem.ring.symbols]
    parts = []
    for mon, c in rem.terms():
        m = "*".join(f"{n}^{e}" if e > 1 else n for n, e in zip(names, mon) if e)
        parts.append(f"({render(c)})" + (f"*{m}" if m else ""))
    return " + ".join(parts)


def _short(s: str, limit: int = 400) -> str:
    return s if len(s) <= limit else s[:limit] + " ..."


def verify_subeq_consequence(branch: SubeqBranch, template: SubeqTemplate, families: Sequence,
                             terms: int | None = None) -> VerificationReport:
    """Re-expand the branch subequation on each enforced series; every row must vanish."""
    ok, n, fail = verify_branch(branch, template, families, terms)
    rep = VerificationReport(exact_ok=ok, series_terms=n)
    if not ok:
        fi, j, v = fail
        rep.first_failure = f"family {fi + 1}: F_{j} = {_short(render(v))}"
        rep.exact_remainder = _short(render(v))
    else:
        rep.exact_remainder = "0"
    return rep


# ---------------------------------------------------------------------------
# Weierstrass p, numerically
# ---------------------------------------------------------------------------

def _wp_laurent(g2, g3, n: int):
    """c_k in wp = z^-2 + sum_{k>=2} c_k z^(2k-2)."""
    c = [mpmath.mpf(0)] * (n + 2)
    c[2] = g2 / 20
    if n >= 3:
        c[3] = g3 / 28
    for k in range(4, n + 1):
        s = sum(c[m] * c[k - m] for m in range(2, k - 1))
        c[k] = 3 * s / ((2 * k + 1) * (k - 3))
    return c


def _lattice_radius(c, n: int):
    """Root-test estimate of the distance from 0 to the nearest lattice point."""
    ests = []
    for k in range(max(4, n - 6), n + 1):
        if c[k] != 0:
            ests.append(abs(c[k]) ** (mpmath.mpf(-1) / (2 * k - 2)))
    if not ests:
        return mpmath.inf
    return min(ests)


def wp_eval(g2, g3, xi, dps: int = WORKING_DPS):
    """``(wp(xi), wp'(xi))`` for invariants ``g2, g3``.

    The Laurent series at 0 (through chi^18) is evaluated after halving
    ``xi`` into a small disc, then the duplication formula is applied back.
    Raises :class:`PrecisionLoss` when the Weierstrass relation fails to
    1e-20 (relative) at the result.
    """
    with mpmath.workdps(dps + 10):
        g2 = mpmath.mpmathify(g2)
        g3 = mpmath.mpmathify(g3)
        xi = mpmath.mpmathify(xi)
        c = _wp_laurent(g2, g3, 30)
        rho = _lattice_radius(c, 30) * mpmath.mpf("0.04")
        if rho == mpmath.inf or rho > 1:
            rho = mpmath.mpf("0.04")
        steps = 0
        z = xi
        while abs(z) > rho:
            z /= 2
            steps += 1
        z2 = z * z
        p = 1 / z2
        dp = -2 / (z2 * z)
        for k in range(2, LAURENT_TERMS + 1):
            p += c[k] * z ** (2 * k - 2)
            dp += (2 * k - 2) * c[k] * z ** (2 * k - 3)
        for _ in range(steps):
            lam = (6 * p * p - g2 / 2) / dp
            p2 = lam * lam / 4 - 2 * p
            dp = -lam * (p2 - p) - dp
            p = p2
        rel = abs(dp * dp - (4 * p ** 3 - g2 * p - g3)) / max(abs(dp) ** 2, abs(p) ** 3, 1)
        if rel > mpmath.mpf("1e-20"):
            raise PrecisionLoss(f"Weierstrass relation residual {mpmath.nstr(rel, 3)} at xi={xi}")
    return +p, +dp


# ---------------------------------------------------------------------------
# numeric verification
# ---------------------------------------------------------------------------

def _mp(c):
    c = rat(c)
    return mpmath.mpf(int(c.numerator)) / int(c.denominator)


def _numeric_value(x, point: Mapping[str, object]):
    """Evaluate a FracElem/PolyElement of a ParamField at numeric parameter values."""
    names = [str(s) for s in x.field.symbols] if hasattr(x, "field") else [str(s) for s in x.ring.symbols]
    vals = [point[n] for n in names]
    if hasattr(x, "numer"):
        return _eval_num(x.numer, vals) / _eval_num(x.denom, vals)
    return _eval_num(x, vals)


def _eval_num(p, vals):
    total = mpmath.mpf(0)
    for mon, c in p.terms():
        t = _mp(c)
        for v, e in zip(vals, mon):
            if e:
                t *= v ** e
        total += t
    return total


def sample_parameters(params: ParamField, rng: random.Random, fixed: Mapping | None = None) -> dict:
    """Random small nonzero rationals for the free symbols (``fixed`` overrides)."""
    out = {}
    for n in params.names:
        if fixed and n in fixed:
            out[n] = rat(fixed[n])
        else:
            num = rng.choice([i for i in range(-9, 10) if i])
            out[n] = rat(num) / rng.randint(1, 7)
    return out


def verify_numeric(form, ode: AutonomousODE, n_points: int = 20, seed: int = 0,
                   params: Mapping | None = None, dps: int = WORKING_DPS,
                   max_attempts: int | None = None) -> VerificationReport:
    """Evaluate the ODE residual of ``form`` at ``n_points`` random complex points.

    Parameters free in the form get seeded random rational values unless
    given in ``params``. The reported residual is relative to the largest
    term of the ODE at the point.
    """
    rng = random.Random(seed)
    ode_b = _ode_on(ode, form.params, form.substitution)
    n = ode_b.poly.ring.ngens - 1
    chain, chart = derivative_chain(form, n)
    max_attempts = max_attempts or 10 * n_points
    for _ in range(20):
        pvals = sample_parameters(form.params, rng, params)
        try:
            with mpmath.workdps(dps):
                point = {k: _mp(v) for k, v in pvals.items()}
                ev = _Evaluator(form, chain, chart, point)
                coeffs = [(mon, _numeric_value(c, point)) for mon, c in ode_b.poly.terms()]
        except (ZeroDivisionError, DivisionByZeroDenominator, _Degenerate):
            if params:
                raise
            continue
        break
    else:
        raise AllPointsSingular("no admissible parameter sample", seed)
    worst = mpmath.mpf(0)
    pts = []
    attempts = 0
    with mpmath.workdps(dps):
        while len(pts) < n_points:
            attempts += 1
            if attempts > max_attempts:
                raise AllPointsSingular(f"sampling hit poles {attempts - len(pts)} times", seed)
            xi = mpmath.mpc(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
            try:
                derivs = ev(xi)
            except (ZeroDivisionError, PrecisionLoss, _Degenerate):
                continue
            if any(abs(d) > mpmath.mpf(10) ** 12 for d in derivs):
                continue
            total, scale = mpmath.mpc(0), mpmath.mpf(0)
            for mon, c in coeffs:
                t = c
                for k, e in enumerate(mon):
                    if e:
                        t *= derivs[k] ** e
                total += t
                scale = max(scale, abs(t))
            res = abs(total) / scale if scale else abs(total)
            worst = max(worst, res)
            pts.append(mpmath.nstr(xi, 12))
    return VerificationReport(numeric_max_residual=float(worst), sample_points=pts,
                              sample_params={k: f"{v.numerator}/{v.denominator}"
                                             if v.denominator != 1 else str(v.numerator)
                                             for k, v in pvals.items()},
                              seed=seed)


class _Degenerate(Exception):
    pass


class _Evaluator:
    """Numeric ``[u, u', ...]`` at a point, from the exact derivative chain."""

    def __init__(self, form, chain, chart, point):
        self.form = form
        self.point = point
        if isinstance(form, EllipticForm):
            self.g2 = _numeric_value(form.g2, point)
            self.g3 = _numeric_value(form.g3, point)
            if abs(self.g2 ** 3 - 27 * self.g3 ** 2) < mpmath.mpf(10) ** (-30):
                raise _Degenerate()
            self.polys = [[(mon, _numeric_value(c, point)) for mon, c in p.terms()] for p in chain]
        else:
            self.chain = chain
            k2 = _numeric_value(form.k2, point) if isinstance(form, TrigForm) else mpmath.mpf(0)
            self.k = mpmath.sqrt(k2)

    def __call__(self, xi):
        if isinstance(self.form, EllipticForm):
            p, dp = wp_eval(self.g2, self.g3, xi)
            out = []
            for terms in self.polys:
                s = mpmath.mpc(0)
                for (i, j), c in terms:
                    s += c * p ** i * dp ** j
                out.append(s)
            return out
        if isinstance(self.form, TrigForm):
            tau = self.k / 2 * mpmath.tanh(self.k * xi / 2)
        else:
            tau = 1 / xi
        pt = dict(self.point)
        pt["tau"] = tau
        return [_numeric_value(x, pt) for x in self.chain]
