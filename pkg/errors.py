# errors.py
# Exceções do toolkit de contextualidade / certificação de aleatoriedade


class ContextualityError(Exception):
    """Base de todos os erros levantados pelo toolkit."""


class InvalidParameterError(ContextualityError, ValueError):
    """Parâmetro fora do contrato da operação."""


class InvalidDimensionError(InvalidParameterError):
    pass


class DomainError(InvalidParameterError):
    """Argumento fora do domínio matemático da função."""


class InvalidArrangementError(InvalidParameterError):
    """Arranjo sinalizado, realização ou embedding mal formados."""


class NotPsdError(ContextualityError):
    pass


class NumericError(ContextualityError):
    """Solver não convergiu onde a chamada exigia um ótimo."""


class InfeasibleError(NumericError):
    pass


class RecoveryError(ContextualityError):
    """Falha ao recuperar vetores / comportamento a partir de uma solução SDP."""
