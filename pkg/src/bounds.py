"""
Bounds - Log-domain evaluation of concentration bounds with validity reporting

Every evaluator returns a BoundResult holding the natural log of the bound
and the individual precondition checks. Soft precondition failures are
reported, never raised; only arithmetic impossibilities raise.
"""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.config import Config
from src.influence import InfluenceFunction

logger = logging.getLogger(__name__)

LN2 = math.log(2.0)
RATIO_ONE_TOL = 1e-12
EXPONENT_TOL = 1e-12


class BoundDomainError(ValueError):
    """Arithmetic domain violation (e.g. the gamma-bar pole)"""


class BoundPreconditionError(ValueError):
    """Hard precondition under which a bound is undefined"""


class BoundKind(str, Enum):
    THEOREM_BOUNDED = "theorem_bounded"
    THEOREM_SG = "theorem_sg"
    THEOREM_BISTAR = "theorem_bistar"
    PROP_SG = "prop_sg"
    PROP_BOUNDED = "prop_bounded"
    PROP_BISTAR = "prop_bistar"
    PROP_OPPOSING = "prop_opposing"
    ENVELOPE_A = "envelope_a"
    ENVELOPE_B = "envelope_b"
    SIMPLIFIED = "simplified"


class EnvelopeEvent(str, Enum):
    """A: |Y(tau)| <= D tau^(1/2+beta') from h(t); B: |Y(tau)| <= D tau^(1/2-beta) from l(t)"""

    A = "A"
    B = "B"


class ScheduleParams(BaseModel):
    """
    Threshold, envelope and existence constants.

    Optional entries fall back to derived defaults: c to D/sqrt(3), epsilon
    to the maximal admissible exponent, c_prime to D^2/(2 sigma^2), lam to
    the prescribed Chernoff parameter.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    c: Optional[float] = Field(None, gt=0.0)
    beta: float = Field(0.125, gt=0.0)
    beta_tilde: Optional[float] = Field(None, gt=0.0)
    beta_prime: float = Field(0.1, gt=0.0)
    zeta: float = Field(0.5, gt=0.0, lt=1.0)
    xi: float = Field(0.5, gt=0.0, lt=1.0)
    epsilon: Optional[float] = Field(None, gt=0.0)
    theta: float = Field(1.0, gt=0.0)
    c_prime: Optional[float] = Field(None, gt=0.0)
    c1: float = Field(1.0, gt=0.0)
    c2: float = Field(0.5, gt=0.0)
    lam: Optional[float] = Field(None, ge=0.0)

    def scale_c(self, D: float) -> float:
        return self.c if self.c is not None else D / math.sqrt(3.0)

    def threshold(self, t: float, D: float, follower: bool = False) -> float:
        """k = c t^(1/2 - beta), with beta_tilde for follower processes"""
        beta = self.beta_tilde if follower and self.beta_tilde is not None else self.beta
        return self.scale_c(D) * t ** (0.5 - beta)


@dataclass(frozen=True)
class ValidityCheck:
    name: str
    satisfied: bool
    severity: Literal["error", "warning"] = "error"
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "satisfied": self.satisfied, "severity": self.severity, "detail": self.detail}


@dataclass
class BoundResult:
    """Natural log of an upper bound on a probability, plus its precondition checks"""

    theorem: str
    log_value: float
    validity: List[ValidityCheck] = field(default_factory=list)
    terms: Dict[str, float] = field(default_factory=dict)
    # Infinite because an influence probability reached 1; dominates any probability
    pole: bool = False

    @property
    def value(self) -> float:
        if self.log_value > 709.0:
            return math.inf
        return math.exp(self.log_value)

    @property
    def clamped_value(self) -> float:
        if math.isnan(self.log_value):
            return 1.0
        return math.exp(min(self.log_value, 0.0))

    @property
    def vacuous(self) -> bool:
        return not self.log_value < 0.0

    @property
    def applicable(self) -> bool:
        return all(c.satisfied for c in self.validity if c.severity == "error")

    @property
    def failed_checks(self) -> List[ValidityCheck]:
        return [c for c in self.validity if not c.satisfied]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "theorem": self.theorem,
            "log_value": self.log_value,
            "value": self.value,
            "clamped": self.clamped_value,
            "vacuous": self.vacuous,
            "applicable": self.applicable,
            "pole": self.pole,
            "validity": [c.to_dict() for c in self.validity],
        }


@dataclass
class ExponentReport:
    kind: BoundKind
    exponent: float
    epsilon: float
    constraints: List[ValidityCheck] = field(default_factory=list)

    @property
    def positive(self) -> bool:
        return self.exponent > EXPONENT_TOL

    @property
    def vacuous(self) -> bool:
        return not self.positive


def _log(x: float) -> float:
    return math.log(x) if x > 0.0 else -math.inf


def _power(t: float, e: float) -> float:
    """t^e with 0^e = 0 for every e"""
    return t ** e if t > 0 else 0.0


def warmup_index(t: float, exponent: float) -> int:
    """floor(t^exponent), robust to t^exponent landing one ulp below an integer"""
    if t <= 0:
        return 0
    x = t ** exponent
    return int(math.floor(x * (1.0 + 1e-12)))


def d_tau(tau: float, D: float, beta_prime: float) -> float:
    return D * tau ** (0.5 + beta_prime)


def d_bar_tau(tau: float, D: float, beta: float) -> float:
    return D * tau ** (0.5 - beta)


def d_tilde(t: float, D: float) -> float:
    return 2.0 * D * t ** 1.5


def bistar_drift_cap(t: float, D: float) -> float:
    """Deterministic cap 2 D t^(3/2) on Y_f1(t) given the leader envelope (needs xi <= 3/4)"""
    return d_tilde(t, D)


def natural_c_prime(D: float, sigma: float) -> float:
    """Envelope-violation rate D^2/(2 sigma^2) of a sigma-sub-Gaussian walk"""
    return D * D / (2.0 * sigma * sigma)


def influence_delta(G: InfluenceFunction, power: float) -> float:
    """delta in G(x) >~ 1/x^(power - delta)"""
    return G.margin(power)


def gamma_bar(lam: float, s: float) -> float:
    """
    1 / (1 - lam^2 s^2 / 2)

    Raises:
        BoundDomainError: If lam^2 s^2 >= 2
    """
    x = 0.5 * lam * lam * s * s
    if x >= 1.0:
        raise BoundDomainError(f"gamma_bar pole: lambda^2 s^2 = {2 * x} >= 2")
    return 1.0 / (1.0 - x)


def log_gamma_bar(lam: float, s: float) -> float:
    gamma_bar(lam, s)
    return -math.log1p(-0.5 * lam * lam * s * s)


def lambda_star(
    variant: BoundKind,
    t: float,
    G: InfluenceFunction,
    scale: float,
    params: Optional[ScheduleParams] = None,
    D: Optional[float] = None,
) -> float:
    """
    Prescribed Chernoff parameter of a theorem

    Args:
        variant: THEOREM_BOUNDED, THEOREM_SG or THEOREM_BISTAR
        t: Time, >= 1
        G: Leader influence function
        scale: D for the bounded variants, sigma for THEOREM_SG
        params: Schedule (beta' for SG, beta for bistar)
        D: Envelope scale of THEOREM_SG (defaults to sigma)

    Returns:
        float: sqrt(2 G(Dt))/D, sqrt(2 G(d_t))/sigma or 2 ln2 / d_bar_t
    """
    if t < 1:
        raise ValueError(f"lambda_star needs t >= 1, got {t}")
    params = params or ScheduleParams()
    variant = BoundKind(variant)
    if variant == BoundKind.THEOREM_BOUNDED:
        return math.sqrt(2.0 * G.evaluate(scale * t)) / scale
    if variant == BoundKind.THEOREM_SG:
        envelope = D if D is not None else scale
        return math.sqrt(2.0 * G.evaluate(d_tau(t, envelope, params.beta_prime))) / scale
    if variant == BoundKind.THEOREM_BISTAR:
        return 2.0 * LN2 / d_bar_tau(t, scale, params.beta)
    raise ValueError(f"no prescribed Chernoff parameter for {variant.value}")


def c1_cap(kind: BoundKind, g0: float, g0_tilde: Optional[float] = None) -> float:
    """Largest c1 allowed by the statement of a result (inf when G0 = 1)"""

    def ratio(numerator: float, g: float) -> float:
        return math.inf if g >= 1.0 else numerator / (1.0 - g)

    kind = BoundKind(kind)
    if kind == BoundKind.PROP_SG:
        return ratio(2.0 * (3.0 - 2.0 * g0), g0)
    if kind in (BoundKind.PROP_BOUNDED, BoundKind.THEOREM_BISTAR, BoundKind.ENVELOPE_B):
        return ratio(4.0 - 2.0 * g0, g0)
    base = ratio(4.0 - 2.0 * g0, g0)
    if g0_tilde is not None:
        base = max(base, ratio(4.0 - 2.0 * g0_tilde, g0_tilde))
    if kind == BoundKind.PROP_BISTAR:
        return 2.0 * base
    if kind == BoundKind.PROP_OPPOSING:
        return 5.0 * base
    raise ValueError(f"{kind.value} has no c1 cap")


def minimal_horizon(kind: BoundKind, theta: float, exponent: float) -> float:
    """Smallest t for the c1 exp(-c2 t^e) form: (1/(theta e))^(1/e), or (2/(theta e))^(1/e) for bistar"""
    if exponent <= EXPONENT_TOL:
        return math.inf
    numerator = 2.0 if BoundKind(kind) in (BoundKind.PROP_BISTAR, BoundKind.PROP_OPPOSING) else 1.0
    log_t = math.log(numerator / (theta * exponent)) / exponent
    return math.inf if log_t > 709.0 else math.exp(log_t)


def admissible_exponents(
    kind: BoundKind,
    delta: float,
    beta: float,
    delta_tilde: Optional[float] = None,
    beta_tilde: Optional[float] = None,
    xi: Optional[float] = None,
) -> ExponentReport:
    """
    Maximal decay exponent of a simplified bound and its constraints

    Args:
        kind: PROP_BOUNDED (delta/2 - beta), PROP_SG (delta/6 - 2 beta/3),
            PROP_BISTAR or PROP_OPPOSING (min(eps xi, beta - beta_tilde))
        delta: Margin of G against its reference power
        beta: Threshold exponent
        delta_tilde: Margin of G_tilde against 1/x^(2/3) (bistar kinds)
        beta_tilde: Follower threshold exponent (bistar kinds)
        xi: Bistar warm-up exponent

    Returns:
        ExponentReport: Exponent (possibly non-positive) with constraint checks
    """
    kind = BoundKind(kind)
    checks = [
        ValidityCheck("delta > 0", delta > 0.0, detail=f"delta={delta:g}"),
        ValidityCheck("beta > 0", beta > 0.0, detail=f"beta={beta:g}"),
    ]
    if kind == BoundKind.PROP_SG:
        eps = delta / 6.0 - 2.0 * beta / 3.0
        exponent = eps
    elif kind == BoundKind.PROP_BOUNDED:
        eps = delta / 2.0 - beta
        exponent = eps
    elif kind in (BoundKind.PROP_BISTAR, BoundKind.PROP_OPPOSING):
        if beta_tilde is None or xi is None:
            raise ValueError(f"{kind.value} needs beta_tilde and xi")
        eps = delta / 2.0 - beta
        exponent = min(eps * xi, beta - beta_tilde)
        checks.append(ValidityCheck("0 < xi < 1 - 2 beta", 0.0 < xi < 1.0 - 2.0 * beta, detail=f"xi={xi:g}"))
        checks.append(ValidityCheck("xi <= 3/4", xi <= 0.75, "warning", detail="follower drift cap 2D t^(3/2)"))
        checks.append(ValidityCheck("beta_tilde < beta", beta_tilde < beta, detail=f"beta_tilde={beta_tilde:g}"))
        if delta_tilde is not None:
            checks.append(ValidityCheck("delta_tilde > 0", delta_tilde > 0.0, detail=f"delta_tilde={delta_tilde:g}"))
    else:
        raise ValueError(f"{kind.value} has no admissible exponent")
    checks.append(ValidityCheck("exponent > 0", exponent > EXPONENT_TOL, detail=f"exponent={exponent:.6g}"))
    return ExponentReport(kind=kind, exponent=exponent, epsilon=eps, constraints=checks)


def _decay_check(G: InfluenceFunction, power: float, label: str) -> ValidityCheck:
    return ValidityCheck(
        f"{label} decays slower than 1/x^{power:g}",
        G.decays_slower_than(power),
        detail=f"{label}={G.describe()}, tail exponent {G.decay_exponent:g}",
    )


def _c1_check(kind: BoundKind, c1: float, g0: float, g0_tilde: Optional[float] = None) -> ValidityCheck:
    cap = c1_cap(kind, g0, g0_tilde)
    return ValidityCheck("c1 within cap", c1 <= cap, "warning", detail=f"c1={c1:g}, cap={cap:g}")


def _horizon_checks(kind: BoundKind, t: float, theta: float, exponent: float) -> List[ValidityCheck]:
    t_min = minimal_horizon(kind, theta, exponent)
    return [
        ValidityCheck("t above minimal horizon", t > t_min, detail=f"t={t:g}, minimal t={t_min:.6g}"),
        ValidityCheck(
            "minimal horizon at desk scale",
            t_min <= Config.DESK_SCALE_MAX_T,
            "warning",
            detail=f"minimal t={t_min:.6g}, desk scale {Config.DESK_SCALE_MAX_T:g}",
        ),
    ]


def _epsilon(params: ScheduleParams, default: float) -> float:
    return params.epsilon if params.epsilon is not None else default


def validity_report(
    theorem: BoundKind,
    t: float,
    G: InfluenceFunction,
    D: float,
    params: Optional[ScheduleParams] = None,
    sigma: Optional[float] = None,
    G_tilde: Optional[InfluenceFunction] = None,
) -> List[ValidityCheck]:
    """
    Check every precondition of a named result individually.

    Args:
        theorem: Result identifier
        t: Time
        G: Leader influence function
        D: Noise half-width, or envelope scale for the sub-Gaussian results
        params: Schedule and constants
        sigma: Sub-Gaussian parameter (sub-Gaussian results, defaults to D)
        G_tilde: Follower influence function (bistar results)

    Returns:
        List[ValidityCheck]: One entry per precondition
    """
    theorem = BoundKind(theorem)
    params = params or ScheduleParams()
    sigma = sigma if sigma is not None else D
    c = params.scale_c(D)
    checks: List[ValidityCheck] = [ValidityCheck("t >= 0", t >= 0, detail=f"t={t:g}")]

    if theorem == BoundKind.THEOREM_BOUNDED:
        g = G.evaluate(D * t)
        checks.append(_decay_check(G, 1.0, "G"))
        checks.append(ValidityCheck("G(Dt) < 1", g < 1.0, detail=f"G(Dt)={g:.6g}"))
        checks.append(ValidityCheck("G(Dt) > 0", g > 0.0, "warning", detail="zero Chernoff parameter"))

    elif theorem in (BoundKind.THEOREM_SG, BoundKind.ENVELOPE_A):
        h = warmup_index(t, params.zeta)
        g = G.evaluate(d_tau(t, D, params.beta_prime))
        checks.append(ValidityCheck("h(t) < t", h < t, detail=f"h(t)={h}"))
        if theorem == BoundKind.THEOREM_SG:
            checks.append(_decay_check(G, 2.0, "G"))
            delta = influence_delta(G, 2.0)
            checks.append(ValidityCheck("G(d_t) < 1", g < 1.0, detail=f"G(d_t)={g:.6g}"))
            checks.append(ValidityCheck("G(d_t) > 0", g > 0.0, "warning", detail="zero Chernoff parameter"))
            checks.append(ValidityCheck(
                "zeta <= 1 - delta/2", params.zeta <= 1.0 - delta / 2.0, "warning",
                detail=f"zeta={params.zeta:g}, delta={delta:g}",
            ))

    elif theorem in (BoundKind.THEOREM_BISTAR, BoundKind.ENVELOPE_B):
        delta = influence_delta(G, 1.0)
        eps = _epsilon(params, delta / 2.0 - params.beta)
        l_t = warmup_index(t, params.xi)
        d_bar = d_bar_tau(t, D, params.beta)
        lhs = math.sqrt(2.0 * G.evaluate(D * t)) / D * d_bar
        checks.append(_decay_check(G, 1.0, "G"))
        checks.append(ValidityCheck("l(t) < t", l_t < t, detail=f"l(t)={l_t}"))
        checks.append(ValidityCheck("epsilon > 0", eps > 0.0, detail=f"epsilon={eps:.6g}"))
        checks.append(ValidityCheck(
            "epsilon <= delta/2 - beta", eps <= delta / 2.0 - params.beta + EXPONENT_TOL,
            detail=f"epsilon={eps:.6g}, delta={delta:g}",
        ))
        rhs = params.theta * _power(t, eps)
        checks.append(ValidityCheck(
            "leader envelope condition", lhs >= rhs,
            detail=f"sqrt(2G(Dt))/D d_bar_t={lhs:.6g}, theta t^eps={rhs:.6g}",
        ))
        checks.append(_c1_check(BoundKind.ENVELOPE_B, params.c1, G.g0))
        if theorem == BoundKind.THEOREM_BISTAR:
            checks.append(ValidityCheck(
                "G is rational with exponent <= 1",
                G.family == "rational" and G.alpha <= 1.0,
                detail=G.describe(),
            ))
            if G_tilde is None:
                raise ValueError("theorem_bistar needs G_tilde")
            checks.append(_decay_check(G_tilde, 2.0 / 3.0, "G_tilde"))
            checks.append(ValidityCheck("xi <= 3/4", params.xi <= 0.75, "warning", detail=f"xi={params.xi:g}"))
            g_bar = G.evaluate(d_bar)
            gt = G_tilde.evaluate(d_tilde(t, D))
            lam = params.lam if params.lam is not None else 2.0 * LN2 / d_bar
            checks.append(ValidityCheck("G_tilde(d_tilde_t) < 1", gt < 1.0, detail=f"G_tilde(d_tilde)={gt:.6g}"))
            checks.append(ValidityCheck(
                "G(d_bar_t) <= G_tilde(d_tilde_t)", g_bar <= gt, "warning",
                detail=f"G(d_bar)={g_bar:.6g}, G_tilde(d_tilde)={gt:.6g}",
            ))
            try:
                collapse = gamma_bar(lam, D) * (1.0 + g_bar) * (1.0 - gt)
                checks.append(ValidityCheck(
                    "geometric ratio <= 1", collapse <= 1.0, "warning", detail=f"ratio={collapse:.6g}",
                ))
            except BoundDomainError as e:
                checks.append(ValidityCheck("geometric ratio <= 1", False, "warning", detail=str(e)))

    elif theorem in (BoundKind.PROP_SG, BoundKind.PROP_BOUNDED):
        power = 2.0 if theorem == BoundKind.PROP_SG else 1.0
        report = admissible_exponents(theorem, influence_delta(G, power), params.beta)
        eps = _epsilon(params, report.exponent)
        scale = sigma if theorem == BoundKind.PROP_SG else D
        g = G.evaluate(d_tau(t, D, params.beta_prime) if theorem == BoundKind.PROP_SG else D * t)
        lhs = math.sqrt(_power(t, 1.0 - 2.0 * params.beta - 2.0 * eps) * g)
        rhs = params.theta * scale / (math.sqrt(2.0) * c)
        checks.append(_decay_check(G, power, "G"))
        checks.extend(report.constraints)
        checks.append(ValidityCheck(
            "epsilon admissible", eps <= report.exponent + EXPONENT_TOL,
            detail=f"epsilon={eps:.6g}, max={report.exponent:.6g}",
        ))
        checks.append(ValidityCheck("tail condition", lhs >= rhs, detail=f"lhs={lhs:.6g}, rhs={rhs:.6g}"))
        checks.append(_c1_check(theorem, params.c1, G.g0))
        checks.extend(_horizon_checks(theorem, t, params.theta, eps))

    elif theorem in (BoundKind.PROP_BISTAR, BoundKind.PROP_OPPOSING):
        if G_tilde is None:
            raise ValueError(f"{theorem.value} needs G_tilde")
        beta_tilde = params.beta_tilde if params.beta_tilde is not None else params.beta
        report = admissible_exponents(
            theorem, influence_delta(G, 1.0), params.beta,
            delta_tilde=influence_delta(G_tilde, 2.0 / 3.0), beta_tilde=beta_tilde, xi=params.xi,
        )
        checks.append(ValidityCheck(
            "G is rational with exponent < 1",
            G.family == "rational" and G.alpha < 1.0,
            detail=G.describe(),
        ))
        checks.append(_decay_check(G_tilde, 2.0 / 3.0, "G_tilde"))
        checks.extend(report.constraints)
        checks.append(_c1_check(theorem, params.c1, G.g0, G_tilde.g0))
        checks.extend(_horizon_checks(theorem, t, params.theta, report.exponent))

    else:
        raise ValueError(f"no validity report for {theorem.value}")
    return checks


def _log_geometric_sum(log_r: float, m: int) -> float:
    """log of sum_{i=0}^{m-1} r^i"""
    if m <= 0:
        return -math.inf
    if log_r == -math.inf:
        return 0.0
    if abs(math.expm1(log_r)) < RATIO_ONE_TOL:
        return math.log(m)
    x = m * log_r
    if log_r > 0.0:
        # (r^m - 1)/(r - 1)
        log_num = x + math.log1p(-math.exp(-x)) if x > 30.0 else math.log(math.expm1(x))
        return log_num - math.log(math.expm1(log_r))
    return math.log(-math.expm1(x)) - math.log(-math.expm1(log_r))


def mgf_chain_log_bound(
    variant: Literal["bounded", "sg"],
    lam: float,
    t: int,
    scale: float,
    G: InfluenceFunction,
    D: Optional[float] = None,
    params: Optional[ScheduleParams] = None,
) -> float:
    """
    Log of the collapsed geometric-sum bound on E_0[exp(lam Y(t))]

    Args:
        variant: "bounded" (scale = D) or "sg" (scale = sigma, conditioned on the envelope event A)
        lam: Chernoff parameter
        t: Time
        scale: Noise half-width or sub-Gaussian parameter
        G: Influence function
        D: Envelope scale for "sg" (defaults to scale)
        params: Schedule (zeta, beta') for "sg"

    Raises:
        BoundDomainError: At the gamma-bar pole
    """
    log_gb = log_gamma_bar(lam, scale)
    if t <= 0:
        return 0.0
    if variant == "bounded":
        g = G.evaluate(scale * t)
        log_r = log_gb + _log(1.0 - g)
        head = log_gb + _log_geometric_sum(log_r, t)
        tail = t * log_r
    elif variant == "sg":
        params = params or ScheduleParams()
        envelope = D if D is not None else scale
        h = warmup_index(t, params.zeta)
        if h >= t:
            raise BoundPreconditionError(f"h(t)={h} >= t={t}")
        g = G.evaluate(d_tau(t, envelope, params.beta_prime))
        log_r = log_gb + _log(1.0 - g)
        head = log_gb + _log_geometric_sum(log_r, t - h)
        tail = 0.5 * lam * lam * scale * scale * h + (t - h) * log_r
    else:
        raise ValueError(f"unknown MGF chain variant {variant!r}")
    return float(np.logaddexp(head, tail))


def mgf_chain_bound(
    variant: Literal["bounded", "sg"],
    lam: float,
    t: int,
    scale: float,
    G: InfluenceFunction,
    D: Optional[float] = None,
    params: Optional[ScheduleParams] = None,
) -> float:
    """Geometric-sum upper bound on E_0[exp(lam Y(t))] (inf on overflow)"""
    log_value = mgf_chain_log_bound(variant, lam, t, scale, G, D, params)
    return math.inf if log_value > 709.0 else math.exp(log_value)


def _invalid(theorem: BoundKind, checks: List[ValidityCheck]) -> BoundResult:
    logger.warning(f"{theorem.value}: undefined, failed checks {[c.name for c in checks if not c.satisfied]}")
    return BoundResult(theorem=theorem.value, log_value=math.inf, validity=checks, pole=True)


def _warn_failures(result: BoundResult) -> BoundResult:
    failed = [c.name for c in result.failed_checks if c.severity == "error"]
    if failed:
        logger.warning(f"{result.theorem}: preconditions not met: {failed}")
    return result


def bound_theorem_bounded(t: float, k: float, D: float, G: InfluenceFunction) -> BoundResult:
    """
    2 (t/(1-G(Dt)) + 1) exp(-sqrt(2 G(Dt))/D k) for bounded noise on [-D, D]

    Args:
        t: Time
        k: Threshold
        D: Noise half-width
        G: Influence function

    Returns:
        BoundResult: Log-domain bound; log_value = inf when G(Dt) = 1
    """
    kind = BoundKind.THEOREM_BOUNDED
    checks = validity_report(kind, t, G, D)
    checks.append(ValidityCheck("k >= 0", k >= 0.0, detail=f"k={k:g}"))
    g = G.evaluate(D * t)
    if g >= 1.0:
        return _invalid(kind, checks)
    lam = math.sqrt(2.0 * g) / D
    log_prefactor = float(np.logaddexp(_log(t) - math.log1p(-g), 0.0))
    log_value = LN2 + log_prefactor - lam * k
    return _warn_failures(BoundResult(kind.value, log_value, checks, {"lambda": lam}))


def bound_theorem_sg(
    t: float,
    k: float,
    sigma: float,
    params: ScheduleParams,
    G: InfluenceFunction,
    D: Optional[float] = None,
) -> BoundResult:
    """
    Envelope term plus conditional Chernoff term for sigma-sub-Gaussian noise

    Args:
        t: Time
        k: Threshold
        sigma: Sub-Gaussian parameter
        params: zeta (h(t) = floor(t^zeta)), beta', c'
        G: Influence function
        D: Envelope scale in d_t = D t^(1/2+beta') (defaults to sigma)

    Raises:
        BoundPreconditionError: If h(t) >= t
    """
    kind = BoundKind.THEOREM_SG
    D = D if D is not None else sigma
    h = warmup_index(t, params.zeta)
    if h >= t:
        raise BoundPreconditionError(f"h(t)={h} must be below t={t}")
    checks = validity_report(kind, t, G, D, params, sigma=sigma)
    checks.append(ValidityCheck("k >= 0", k >= 0.0, detail=f"k={k:g}"))
    g = G.evaluate(d_tau(t, D, params.beta_prime))
    if g >= 1.0:
        return _invalid(kind, checks)
    c_prime = params.c_prime if params.c_prime is not None else natural_c_prime(D, sigma)
    envelope = LN2 + math.log(t - h) - c_prime * h ** (2.0 * params.beta_prime)
    bracket = float(np.logaddexp(math.log(t - h) - math.log1p(-g), g * h))
    conditional = LN2 + bracket - math.sqrt(2.0 * g) / sigma * k
    log_value = float(np.logaddexp(envelope, conditional))
    terms = {"log_envelope": envelope, "log_conditional": conditional, "c_prime": c_prime}
    return _warn_failures(BoundResult(kind.value, log_value, checks, terms))


def simplified_bound(
    t: float, c1: float, rate: float, exponent: float, with_t_prefactor: bool = False
) -> BoundResult:
    """
    c1 exp(-rate t^e), or c1 t exp(-rate t^e) with the t-prefactor form

    Returns:
        BoundResult: Log-domain closed form
    """
    checks = [
        ValidityCheck("c1 > 0", c1 > 0.0, detail=f"c1={c1:g}"),
        ValidityCheck("rate > 0", rate > 0.0, detail=f"rate={rate:g}"),
        ValidityCheck("exponent > 0", exponent > EXPONENT_TOL, detail=f"exponent={exponent:.6g}"),
    ]
    power = t ** exponent if t > 0 else 0.0
    log_value = _log(c1) - rate * power
    if with_t_prefactor:
        log_value += _log(t)
    return BoundResult(BoundKind.SIMPLIFIED.value, log_value, checks)


def bound_envelope_violation(
    variant: EnvelopeEvent,
    t: float,
    params: ScheduleParams,
    G: InfluenceFunction,
    D: float,
    sigma: Optional[float] = None,
) -> BoundResult:
    """
    Upper bound on the probability that the leader leaves its envelope

    A: 2 (t - h(t)) exp(-c' h(t)^(2 beta'))
    B: c1 t^2 exp(-theta l(t)^eps)

    An empty range of envelope times gives probability 0 (log -inf).
    """
    variant = EnvelopeEvent(variant)
    if variant == EnvelopeEvent.A:
        kind = BoundKind.ENVELOPE_A
        sigma = sigma if sigma is not None else D
        checks = validity_report(kind, t, G, D, params, sigma=sigma)
        h = warmup_index(t, params.zeta)
        if h >= t:
            return BoundResult(kind.value, -math.inf, checks)
        c_prime = params.c_prime if params.c_prime is not None else natural_c_prime(D, sigma)
        log_value = LN2 + math.log(t - h) - c_prime * h ** (2.0 * params.beta_prime)
        return BoundResult(kind.value, log_value, checks, {"c_prime": c_prime})

    kind = BoundKind.ENVELOPE_B
    checks = validity_report(kind, t, G, D, params)
    l_t = warmup_index(t, params.xi)
    if l_t >= t:
        return BoundResult(kind.value, -math.inf, checks)
    eps = _epsilon(params, influence_delta(G, 1.0) / 2.0 - params.beta)
    log_value = math.log(params.c1) + 2.0 * _log(t) - params.theta * l_t ** eps
    return _warn_failures(BoundResult(kind.value, log_value, checks, {"epsilon": eps}))


def bound_theorem_bistar(
    t: float,
    k_tilde: float,
    D: float,
    G: InfluenceFunction,
    G_tilde: InfluenceFunction,
    params: ScheduleParams,
) -> BoundResult:
    """
    Leader-envelope term plus conditional follower Chernoff term for |Y_f1(t)|

    Args:
        t: Time
        k_tilde: Follower threshold
        D: Noise half-width
        G: Leader influence function (rational, exponent <= 1)
        G_tilde: Leader-to-follower influence function
        params: beta, xi, theta, c1 and optional epsilon and lam

    Raises:
        BoundPreconditionError: If l(t) >= t
    """
    kind = BoundKind.THEOREM_BISTAR
    l_t = warmup_index(t, params.xi)
    if l_t >= t:
        raise BoundPreconditionError(f"l(t)={l_t} must be below t={t}")
    checks = validity_report(kind, t, G, D, params, G_tilde=G_tilde)
    checks.append(ValidityCheck("k_tilde >= 0", k_tilde >= 0.0, detail=f"k_tilde={k_tilde:g}"))
    gt = G_tilde.evaluate(d_tilde(t, D))
    if gt >= 1.0:
        return _invalid(kind, checks)
    d_bar = d_bar_tau(t, D, params.beta)
    lam = params.lam if params.lam is not None else 2.0 * LN2 / d_bar
    eps = _epsilon(params, influence_delta(G, 1.0) / 2.0 - params.beta)
    envelope = math.log(params.c1) + 2.0 * math.log(t) - params.theta * l_t ** eps
    bracket = float(np.logaddexp(math.log(t - l_t) - math.log1p(-gt), 0.625 * lam * lam * D * D * l_t))
    conditional = LN2 + bracket - lam * k_tilde
    log_value = float(np.logaddexp(envelope, conditional))
    terms = {"log_envelope": envelope, "log_conditional": conditional, "lambda": lam, "epsilon": eps}
    return _warn_failures(BoundResult(kind.value, log_value, checks, terms))


def star_convexity_check(
    G: InfluenceFunction, t: float, D: float, beta: float, grid_points: int = 10_000
) -> ValidityCheck:
    """
    Monotonicity of x -> (exp(lam x / 2) - 1) G(x) on [0, d_bar_t] with lam = 2 ln2 / d_bar_t

    Returns:
        ValidityCheck: Satisfied when the map is non-decreasing on the grid
    """
    d_bar = d_bar_tau(t, D, beta)
    lam = 2.0 * LN2 / d_bar
    x = np.linspace(0.0, d_bar, grid_points)
    values = np.expm1(0.5 * lam * x) * G.evaluate(x)
    steps = np.diff(values)
    worst = float(steps.min()) if steps.size else 0.0
    tol = 1e-14 * float(np.abs(values).max() or 1.0)
    return ValidityCheck("star convexity", worst >= -tol, detail=f"smallest increment {worst:.3g}")
