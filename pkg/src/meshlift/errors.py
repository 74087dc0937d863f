"""Exception hierarchy shared by all engine modules.

CLI exit codes map onto this hierarchy: InputError and subclasses exit
with 2, DivergedError with 3, ContractError with 4.
"""


class EngineError(Exception):
    """Base class for all errors raised by the engine."""


class InputError(EngineError):
    """Unusable user input: unreadable files, malformed manifests, bad meshes."""


class MeshStructureError(InputError):
    """Mesh violates structural invariants (index range, repeated indices)."""


class EmptyTargetError(InputError):
    """Reconstruction targets contain no foreground at all."""


class ContractError(EngineError):
    """Caller violated an API contract (mismatched resolutions, rigs, ...)."""


class DivergedError(EngineError):
    """Optimization produced a non-finite loss and could not recover.

    Carries the last valid mesh so callers can salvage partial progress.
    """

    def __init__(self, message, mesh=None):
        super().__init__(message)
        self.mesh = mesh
