"""
Special Function Kernel

Núcleo de funções especiais usado pelos teoremas de PDF e outage:
Gamma, função erro, Bessel modificada de segunda espécie e os dois casos
particulares da Meijer G que aparecem nas expressões fechadas.

Features:
    - Wrappers de scipy.special com checagem explícita de domínio/overflow
    - Meijer G por soma de resíduos (Mellin-Barnes) em precisão estendida
    - Precisão de trabalho adaptativa ao cancelamento medido na série
    - Tratamento de colisão de polos por perturbação simétrica
    - Quadratura sobre o erro de apontamento para argumentos grandes

Os dois padrões suportados são
    G^{3,0}_{1,3}[x | z; z-1, a-1, b-1]      (PDF do ganho h')
    G^{3,1}_{2,4}[x | 1, z+1; z, a, b, 0]    (CDF do ganho h')
com a = alpha, b = beta, z = zeta^2.

Author: UAV-FSO Relay Team
Version: 1.0.0
"""

import math
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import mpmath
from scipy import integrate, special, stats

from ..errors import ConvergenceError, DomainError

logger = logging.getLogger(__name__)

# Limites numéricos
GAMMA_MAX_ARG = 171.6243769563027
COLLISION_TOL = 1e-6
PERTURBATION = 1e-5
SERIES_TOL = 1e-16
SERIES_RUN = 3
MAX_TERMS = 500
BASE_DPS = 30
GUARD_DIGITS = 20
MAX_DPS = 400
LARGE_ARGUMENT = 1e4
TAIL_NEGLIGIBLE = 1e-16
QUAD_RTOL = 1e-10
QUAD_LIMIT = 200


@dataclass(frozen=True)
class MeijerPdfArgs:
    """Argumentos de G^{3,0}_{1,3}[x | zeta2; zeta2-1, alpha-1, beta-1]"""
    x: float
    alpha: float
    beta: float
    zeta2: float

    def __post_init__(self):
        _validate_meijer_args(self.x, self.alpha, self.beta, self.zeta2)


@dataclass(frozen=True)
class MeijerCdfArgs:
    """Argumentos de G^{3,1}_{2,4}[x | 1, zeta2+1; zeta2, alpha, beta, 0]"""
    x: float
    alpha: float
    beta: float
    zeta2: float

    def __post_init__(self):
        _validate_meijer_args(self.x, self.alpha, self.beta, self.zeta2)


def _validate_meijer_args(x: float, alpha: float, beta: float, zeta2: float) -> None:
    for name, value in (('alpha', alpha), ('beta', beta), ('zeta2', zeta2)):
        if not (value > 0 and math.isfinite(value)):
            raise DomainError(f"{name} deve ser positivo e finito (recebido {value})")
    if not (x >= 0 and math.isfinite(x)):
        raise DomainError(f"x deve ser >= 0 e finito (recebido {x})")


# ---------------------------------------------------------------------------
# Funções elementares
# ---------------------------------------------------------------------------

def gamma(x: float) -> float:
    """Função Gamma com erro de domínio nos polos e overflow explícito"""
    x = float(x)
    if x <= 0 and x == math.floor(x):
        raise DomainError(f"Gamma tem polo em x={x}")
    if x > GAMMA_MAX_ARG:
        raise OverflowError(f"Gamma({x}) excede o maior double representável")
    return float(special.gamma(x))


def erf(x: float) -> float:
    """Função erro"""
    return float(special.erf(x))


def bessel_k(nu: float, x: float) -> float:
    """Bessel modificada de segunda espécie K_nu(x), x > 0"""
    if not x > 0:
        raise DomainError(f"K_nu exige x > 0 (recebido {x})")
    value = float(special.kv(abs(nu), x))
    if not math.isfinite(value):
        raise OverflowError(f"K_{nu}({x}) fora da faixa representável")
    return value


# ---------------------------------------------------------------------------
# Soma de resíduos
# ---------------------------------------------------------------------------

# Cada série é descrita por (expoente p, c = diferença de parâmetros, peso):
# termo_k = (-1)^k/k! * Gamma(c - k) * x^(p + k) * peso(k)
Series = Tuple[mpmath.mpf, mpmath.mpf, Callable[[int], mpmath.mpf]]


def _sum_series(x: mpmath.mpf, lead: Optional[mpmath.mpf],
                series: List[Series]) -> Tuple[mpmath.mpf, mpmath.mpf, int]:
    """Soma os resíduos; retorna (soma, maior termo em módulo, termos usados)"""
    total = mpmath.mpf(0) if lead is None else lead
    peak = abs(total)
    terms = [mpmath.gamma(c) * mpmath.power(x, p) for p, c, _ in series]
    min_terms = int(math.sqrt(float(x))) + 1
    small_run = 0

    for k in range(MAX_TERMS):
        contribution = mpmath.mpf(0)
        for j, (p, c, weight) in enumerate(series):
            if k > 0:
                terms[j] *= x / (k * (k - c))
            term = terms[j] * weight(k)
            contribution += term
            if abs(term) > peak:
                peak = abs(term)
        total += contribution

        if abs(contribution) <= SERIES_TOL * abs(total):
            small_run += 1
        else:
            small_run = 0
        if small_run >= SERIES_RUN and k + 1 >= min_terms:
            return total, peak, k + 1

    raise ConvergenceError(
        f"Série de resíduos não convergiu em {MAX_TERMS} termos "
        f"(x={float(x):.6g}, último termo={float(abs(contribution)):.3g}, "
        f"soma parcial={float(total):.6g})"
    )


def _adaptive_sum(build: Callable[[], Tuple[mpmath.mpf, Optional[mpmath.mpf], List[Series]]],
                  label: str) -> float:
    """Avalia a série subindo a precisão até sobrar GUARD_DIGITS dígitos"""
    dps = BASE_DPS
    while True:
        with mpmath.workdps(dps):
            x, lead, series = build()
            total, peak, used = _sum_series(x, lead, series)
            if total == 0 or peak == 0:
                lost = 0.0 if peak == 0 else float(dps)
            else:
                lost = max(0.0, float(mpmath.log10(peak / abs(total))))

        if dps - lost >= GUARD_DIGITS:
            logger.debug(f"{label}: {used} termos, {dps} dígitos, cancelamento {lost:.1f}")
            return float(total)
        if dps >= MAX_DPS:
            raise ConvergenceError(f"{label}: cancelamento de {lost:.0f} dígitos excede {MAX_DPS}")
        dps = min(MAX_DPS, int(lost) + GUARD_DIGITS + 5)


def _near_integer(value: float, nonnegative: bool = False) -> bool:
    nearest = round(value)
    if nonnegative and nearest < 0:
        return False
    return abs(value - nearest) < COLLISION_TOL


def _collision(alpha: float, beta: float, zeta2: float) -> Optional[str]:
    """Identifica o parâmetro a perturbar quando dois polos coincidem"""
    if _near_integer(alpha - beta) or _near_integer(zeta2 - beta, nonnegative=True):
        return 'beta'
    if _near_integer(zeta2 - alpha, nonnegative=True):
        return 'alpha'
    return None


def _with_pole_guard(evaluate: Callable[[float, float, float, float], float],
                     x: float, alpha: float, beta: float, zeta2: float,
                     depth: int = 0) -> float:
    """Média de avaliações +/- PERTURBATION no parâmetro em colisão"""
    target = _collision(alpha, beta, zeta2)
    if target is None:
        return evaluate(x, alpha, beta, zeta2)
    if depth >= 2:
        raise ConvergenceError(
            f"Colisão de polos persistente (alpha={alpha}, beta={beta}, zeta2={zeta2})"
        )

    logger.debug(f"Colisão de polos - perturbando {target} em +/-{PERTURBATION}")
    values = []
    for sign in (1.0, -1.0):
        a, b = alpha, beta
        if target == 'beta':
            b = beta + sign * PERTURBATION
        else:
            a = alpha + sign * PERTURBATION
        values.append(_with_pole_guard(evaluate, x, a, b, zeta2, depth + 1))
    return 0.5 * (values[0] + values[1])


# ---------------------------------------------------------------------------
# Meijer G: PDF
# ---------------------------------------------------------------------------

def _pdf_series(x: float, alpha: float, beta: float, zeta2: float) -> float:
    def build():
        X, a, b, z = (mpmath.mpf(v) for v in (x, alpha, beta, zeta2))
        # polo simples de 1/(zeta2 - 1 - s)
        lead = mpmath.gamma(a - z) * mpmath.gamma(b - z) * mpmath.power(X, z - 1)
        series = [
            (a - 1, b - a, lambda k: 1 / (z - a - k)),
            (b - 1, a - b, lambda k: 1 / (z - b - k)),
        ]
        return X, lead, series

    return _adaptive_sum(build, 'G30_13')


def _pdf_at_origin(alpha: float, beta: float, zeta2: float) -> float:
    exponent = min(zeta2, alpha, beta) - 1.0
    if exponent > 0:
        return 0.0
    if exponent < 0:
        return math.inf
    # expoente nulo: o termo dominante é constante
    if zeta2 <= min(alpha, beta):
        return gamma(alpha - zeta2) * gamma(beta - zeta2)
    if beta <= alpha:
        return gamma(alpha - beta) / (zeta2 - beta)
    return gamma(beta - alpha) / (zeta2 - alpha)


def meijer_g_pdf(args: MeijerPdfArgs) -> float:
    """
    G^{3,0}_{1,3}[x | zeta2; zeta2-1, alpha-1, beta-1]

    Args:
        args: argumento escalado e parâmetros do canal

    Returns:
        Valor da Meijer G (>= 0 para x > 0)

    Raises:
        ConvergenceError: série não convergiu após a perturbação de polos
    """
    x, alpha, beta, zeta2 = args.x, args.alpha, args.beta, args.zeta2
    if x == 0:
        return _pdf_at_origin(alpha, beta, zeta2)
    if x > LARGE_ARGUMENT:
        return pdf_by_quadrature(args)
    value = _with_pole_guard(_pdf_series, x, alpha, beta, zeta2)
    return max(value, 0.0)


# ---------------------------------------------------------------------------
# Meijer G: CDF
# ---------------------------------------------------------------------------

def _cdf_series(x: float, alpha: float, beta: float, zeta2: float) -> float:
    def build():
        X, a, b, z = (mpmath.mpf(v) for v in (x, alpha, beta, zeta2))
        # polo simples de 1/(zeta2 - s)
        lead = mpmath.gamma(a - z) * mpmath.gamma(b - z) * mpmath.power(X, z) / z
        series = [
            (a, b - a, lambda k: 1 / ((a + k) * (z - a - k))),
            (b, a - b, lambda k: 1 / ((b + k) * (z - b - k))),
        ]
        return X, lead, series

    return _adaptive_sum(build, 'G31_24')


def cdf_limit(alpha: float, beta: float, zeta2: float) -> float:
    """Valor de G^{3,1}_{2,4} quando x -> infinito: Gamma(a)Gamma(b)/zeta2"""
    return math.exp(math.lgamma(alpha) + math.lgamma(beta)) / zeta2


def meijer_g_cdf(args: MeijerCdfArgs) -> float:
    """
    G^{3,1}_{2,4}[x | 1, zeta2+1; zeta2, alpha, beta, 0]

    zeta2/(Gamma(alpha)Gamma(beta)) * G é a CDF de h' no argumento escalado.
    """
    x, alpha, beta, zeta2 = args.x, args.alpha, args.beta, args.zeta2
    limit = cdf_limit(alpha, beta, zeta2)
    if x == 0:
        return 0.0
    if x > LARGE_ARGUMENT:
        return cdf_by_quadrature(args)
    value = _with_pole_guard(_cdf_series, x, alpha, beta, zeta2)
    return min(max(value, 0.0), limit)


def composed_cdf(x: float, alpha: float, beta: float, zeta2: float) -> float:
    """CDF de h' no argumento escalado x = alpha*beta*h/(A*h_l)"""
    g = meijer_g_cdf(MeijerCdfArgs(x, alpha, beta, zeta2))
    return g / cdf_limit(alpha, beta, zeta2)


# ---------------------------------------------------------------------------
# G^{2,0}_{0,2}: usado para conferir bessel_k
# ---------------------------------------------------------------------------

def meijer_g_bessel(x: float, a: float, b: float) -> float:
    """G^{2,0}_{0,2}[x | -; a, b] = 2 x^{(a+b)/2} K_{a-b}(2 sqrt(x))"""
    if not x > 0:
        raise DomainError(f"G20_02 exige x > 0 (recebido {x})")

    def evaluate(x_, a_, b_, _unused):
        def build():
            X, pa, pb = (mpmath.mpf(v) for v in (x_, a_, b_))
            series = [
                (pa, pb - pa, lambda k: mpmath.mpf(1)),
                (pb, pa - pb, lambda k: mpmath.mpf(1)),
            ]
            return X, None, series

        return _adaptive_sum(build, 'G20_02')

    if _near_integer(a - b):
        return 0.5 * (evaluate(x, a, b + PERTURBATION, None) + evaluate(x, a, b - PERTURBATION, None))
    return evaluate(x, a, b, None)


# ---------------------------------------------------------------------------
# Argumento grande: quadratura sobre o erro de apontamento
# ---------------------------------------------------------------------------

# G30_13(x) = int_0^1 g^(zeta2-2) G20_02(x/g | alpha-1, beta-1) dg, e G20_02
# é Gamma(alpha)Gamma(beta) vezes a densidade do produto de Gamma(alpha, 1)
# por Gamma(beta, 1).

def _log_bessel_kernel(u: float, alpha: float, beta: float) -> float:
    """log G^{2,0}_{0,2}[u | alpha-1, beta-1] via K_nu escalada"""
    z = 2.0 * math.sqrt(u)
    scaled = float(special.kve(alpha - beta, z))
    if not (scaled > 0 and math.isfinite(scaled)):
        return -math.inf
    return math.log(2.0) + (0.5 * (alpha + beta) - 1.0) * math.log(u) + math.log(scaled) - z


def _product_survival(u: float, alpha: float, beta: float) -> float:
    """P(U*V > u) com U ~ Gamma(alpha, 1) e V ~ Gamma(beta, 1)"""
    shape = stats.gamma(alpha)

    def integrand(t: float) -> float:
        if t <= 0:
            return 0.0
        return float(shape.pdf(t) * special.gammaincc(beta, u / t))

    value, _ = integrate.quad(integrand, 0.0, math.inf, epsabs=0.0, epsrel=QUAD_RTOL, limit=QUAD_LIMIT)
    return min(max(value, 0.0), 1.0)


def product_tail_bound(u: float, alpha: float, beta: float) -> float:
    """Cota P(U*V > u) <= P(U > sqrt(u)) + P(V > sqrt(u))"""
    root = math.sqrt(u)
    return float(special.gammaincc(alpha, root) + special.gammaincc(beta, root))


def pdf_by_quadrature(args: MeijerPdfArgs) -> float:
    """
    G^{3,0}_{1,3} por quadratura em g = h_pe/A

    Não há cancelamento: o integrando é positivo e avaliado em escala log,
    então vale para qualquer x > 0, inclusive onde a série de resíduos
    perderia todos os dígitos.
    """
    x, alpha, beta, zeta2 = args.x, args.alpha, args.beta, args.zeta2
    if x == 0:
        return _pdf_at_origin(alpha, beta, zeta2)

    def integrand(g: float) -> float:
        if g <= 0:
            return 0.0
        log_value = (zeta2 - 2.0) * math.log(g) + _log_bessel_kernel(x / g, alpha, beta)
        return math.exp(log_value) if log_value > -745.0 else 0.0

    value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_RTOL, limit=QUAD_LIMIT)
    return max(value, 0.0)


def cdf_by_quadrature(args: MeijerCdfArgs) -> float:
    """
    G^{3,1}_{2,4} como limite menos a massa acima de x

    A massa relativa acima de x é menor que P(U*V > x); quando essa cota
    fica abaixo de TAIL_NEGLIGIBLE o limite já é exato em dupla precisão.
    """
    x, alpha, beta, zeta2 = args.x, args.alpha, args.beta, args.zeta2
    limit = cdf_limit(alpha, beta, zeta2)
    if x == 0:
        return 0.0
    if product_tail_bound(x, alpha, beta) <= TAIL_NEGLIGIBLE:
        return limit

    def integrand(g: float) -> float:
        if g <= 0:
            return 0.0
        return zeta2 * g ** (zeta2 - 1.0) * _product_survival(x / g, alpha, beta)

    tail, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=QUAD_RTOL, limit=QUAD_LIMIT)
    logger.debug(f"G31_24 por quadratura: massa acima de x={x:.6g} é {tail:.3g}")
    return min(max(limit * (1.0 - tail), 0.0), limit)
