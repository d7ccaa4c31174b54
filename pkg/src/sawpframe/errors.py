# Copyright 2026 Rosalind Franklin Institute
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
# either express or implied. See the License for the specific
# language governing permissions and limitations under the License.

"""Exception hierarchy shared by every sawpframe module"""


class SawpError(Exception):
    """Base class for all sawpframe errors"""


# frame model
class ModelError(SawpError):
    pass


class SchemaError(ModelError):
    """A frame model document is malformed, mistyped or has unknown keys"""


class DanglingReferenceError(ModelError, ReferenceError):
    """A record refers to a node or element id that is not defined"""


class DuplicateIdError(ModelError):
    pass


class EmptySelectionError(ModelError):
    pass


# finite element kernel
class KernelError(SawpError):
    pass


class ZeroLengthError(KernelError):
    pass


class SingularSystemError(KernelError):
    """The reduced stiffness matrix cannot be factorized (mechanism or
    insufficient supports)"""


class DomainError(KernelError, ValueError):
    pass


class ConditionWarning(UserWarning):
    """The reduced stiffness matrix is solvable but badly conditioned"""


# benchmark
class BenchmarkError(SawpError):
    pass


class AssetCorruptionError(BenchmarkError):
    pass


class UnknownCaseError(BenchmarkError):
    pass


class InapplicableMutationError(BenchmarkError):
    pass


# prompts
class PromptError(SawpError):
    pass


class SelfExemplarError(PromptError):
    pass


# llm gateway
class GatewayError(SawpError):
    pass


class AuthError(GatewayError):
    pass


class GatewayTimeoutError(GatewayError, TimeoutError):
    pass


class RateLimitError(GatewayError):
    pass


class ReplayMissError(GatewayError):
    def __init__(self, digest: str, directory: str = ""):
        self.digest = digest
        self.directory = directory
        where = f" in {directory}" if directory else ""
        super().__init__(f"No transcript for digest {digest}{where}")


class DuplicateDigestError(GatewayError):
    pass


# grading
class GradingError(SawpError):
    pass


class ShapeMismatchError(GradingError):
    pass


# reports
class ReportError(SawpError):
    pass


class DiagramRequestError(ReportError, ValueError):
    pass
