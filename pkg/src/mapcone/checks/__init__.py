"""Verification checks behind ``mapcone verify-paper``.

Each check pairs a ``<Name>CheckConfig`` section of :class:`mapcone.config.VerifyConfig`
with a ``<Name>Check`` class exported here.
"""

from typing import Any

from mapcone.checks.check import Check, CheckResult
from mapcone.checks.choi_calculus_check import ChoiCalculusCheck
from mapcone.checks.coefficient_identity_check import CoefficientIdentityCheck
from mapcone.checks.determinant_calculus_check import DeterminantCalculusCheck
from mapcone.checks.local_inequivalence_check import LocalInequivalenceCheck
from mapcone.checks.moduli_classification_check import ModuliClassificationCheck
from mapcone.checks.ppt_baseline_check import PptBaselineCheck
from mapcone.checks.singular_structure_check import SingularStructureCheck
from mapcone.checks.witness_sanity_check import WitnessSanityCheck

_SUFFIX = "CheckConfig"


def create_check(config: Any) -> Check:  # noqa: ANN401
    """Instantiate the check named after the config class.

    ``FooCheckConfig`` builds ``FooCheck(config)``; the check class has to be
    imported in this module.

    Raises
    ------
    ValueError
        If the class name lacks the ``CheckConfig`` suffix or no matching check exists.

    """
    config_name = type(config).__name__
    if not config_name.endswith(_SUFFIX):
        raise ValueError(f"Config class name must end with '{_SUFFIX}': {config_name}")

    check_name = config_name.removesuffix("Config")
    check_class = globals().get(check_name)
    if not isinstance(check_class, type) or not issubclass(check_class, Check):
        raise ValueError(f"No check class '{check_name}' for config type {config_name}")
    return check_class(config)


__all__ = [
    "Check",
    "CheckResult",
    "ChoiCalculusCheck",
    "CoefficientIdentityCheck",
    "DeterminantCalculusCheck",
    "LocalInequivalenceCheck",
    "ModuliClassificationCheck",
    "PptBaselineCheck",
    "SingularStructureCheck",
    "WitnessSanityCheck",
    "create_check",
]
