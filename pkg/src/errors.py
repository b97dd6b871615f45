"""
Hierarquia de exceções do UAV-FSO Relay Toolkit.

Todas as exceções do pacote derivam de FsoError, o que permite ao CLI
mapear cada família para um código de saída distinto.

Author: UAV-FSO Relay Team
Version: 1.0.0
"""


class FsoError(Exception):
    """Erro base do pacote"""


class DomainError(FsoError, ValueError):
    """Entrada numérica fora do domínio (polos, x <= 0, distância negativa)"""


class ConvergenceError(FsoError, ArithmeticError):
    """Série, raiz ou otimizador que não convergiu"""


class DegenerateCaseError(ConvergenceError):
    """Caso degenerado (ex.: zeta^2 == beta na aproximação perto da origem)"""


class InfeasibleGeometryError(ConvergenceError):
    """Nenhuma posição viável de relays após esgotar os multi-starts"""


class ScenarioError(FsoError, ValueError):
    """Arquivo de cenário malformado ou inválido"""

    def __init__(self, message: str, field: str = None, line: int = None):
        self.field = field
        self.line = line
        location = []
        if field:
            location.append(f"campo '{field}'")
        if line:
            location.append(f"linha {line}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
