from typing import Any, Dict, Optional


class RadarkitError(Exception):
    """Erro base: mensagem legível mais detalhes estruturados"""

    exit_status = 1
    kind = "error"

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)

    def to_dict(self) -> Dict[str, Any]:
        return {"error": self.kind, "message": self.message, "details": self.details}


class ConfigurationError(RadarkitError):
    exit_status = 2
    kind = "configuration_error"


class ValidationError(RadarkitError):
    exit_status = 2
    kind = "validation_error"


class NumericalError(RadarkitError):
    exit_status = 3
    kind = "numerical_error"


class DivergenceError(NumericalError):
    kind = "divergence_error"


class DegeneracyError(NumericalError):
    kind = "degeneracy_error"


class IndeterminateError(NumericalError):
    kind = "indeterminate_error"
