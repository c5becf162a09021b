class ZkPermError(Exception):
    """Base error; ``code`` is the machine-readable token printed by the CLI."""

    code = "ERROR"

    def to_json(self) -> dict:
        return {"code": self.code, "message": str(self)}


class RegistryError(ZkPermError):
    code = "REGISTRY"


class DuplicateRecordError(RegistryError):
    code = "DUPLICATE_RECORD"


class RecordNotFoundError(RegistryError):
    code = "RECORD_NOT_FOUND"


class SchemaError(ZkPermError):
    code = "SCHEMA_MISMATCH"


class PolicyError(ZkPermError):
    code = "POLICY"


class CircuitError(ZkPermError):
    code = "CIRCUIT"


class ProofError(ZkPermError):
    code = "PROOF"


class UnsatisfiedWitnessError(ProofError):
    code = "UNSATISFIED_WITNESS"


class KeyMismatchError(ProofError):
    code = "KEY_MISMATCH"


class PresentationRefused(ZkPermError):
    code = "NON_COMPLIANT"

    def __init__(self, message: str, condition_index: int | None = None):
        super().__init__(message)
        self.condition_index = condition_index

    def to_json(self) -> dict:
        out = super().to_json()
        out["condition_index"] = self.condition_index
        return out
