"""
End-to-end wiring of backbone, representation bank and fusion for every
ablation variant.

    res             classify from X1 alone
    res_attention   classify from X1 + X2
    res_lms         classify from X1 + X3
    res_cacpr       classify from X1 + X4
    res_irb         classify each of X1..X4 separately, average the distributions
    res_irb_sf      classify from X1 + X2 + X3 + X4
    res_irb_sf_ssa  as res_irb_sf, with the alignment term in the objective
"""
import logging
from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np

from src.exceptions.training import ConfigurationError, UnknownVariantError
from src.lib.autodiff import Tensor, log_mean_exp
from src.models.backbone import ParameterSet, backbone_forward, init_parameters
from src.models.descriptors import (
    InstanceRepresentation,
    RepresentationBank,
    build_bank,
    cacpr,
    init_descriptor_parameters,
    instance_transition,
    local_max_select,
    spatial_attention,
)
from src.models.fusion import (
    BagDistribution,
    alignment_objective,
    bag_distribution,
    cross_entropy,
    log_bag_distribution,
)
from src.schemas.model import (
    AblationVariant,
    AlignmentMode,
    BackboneConfig,
    DescriptorConfig,
    InstanceRole,
    Mode,
)

logger = logging.getLogger(__name__)

BANK_ORDER = (
    InstanceRole.BASE,
    InstanceRole.ATTENTION,
    InstanceRole.LOCAL_MAX,
    InstanceRole.CACPR,
)

VARIANT_ROLES: dict[AblationVariant, tuple[InstanceRole, ...]] = {
    AblationVariant.RES: (InstanceRole.BASE,),
    AblationVariant.RES_ATTENTION: (InstanceRole.BASE, InstanceRole.ATTENTION),
    AblationVariant.RES_LMS: (InstanceRole.BASE, InstanceRole.LOCAL_MAX),
    AblationVariant.RES_CACPR: (InstanceRole.BASE, InstanceRole.CACPR),
    AblationVariant.RES_IRB: BANK_ORDER,
    AblationVariant.RES_IRB_SF: BANK_ORDER,
    AblationVariant.RES_IRB_SF_SSA: BANK_ORDER,
}


def parse_variant(variant: str | AblationVariant) -> AblationVariant:
    try:
        return AblationVariant(variant)
    except ValueError as exc:
        raise UnknownVariantError(str(variant)) from exc


@dataclass
class ForwardResult:
    variant: AblationVariant
    features: Tensor
    elements: dict[InstanceRole, InstanceRepresentation]
    final: InstanceRepresentation
    probabilities: BagDistribution
    log_probabilities: Tensor
    bank: RepresentationBank | None

    @property
    def logits(self) -> Tensor | None:
        """Channel sums fed to the softmax; None when distributions are averaged."""
        if self.variant == AblationVariant.RES_IRB:
            return None
        return self.final.tensor.sum(axis=(-2, -1))


ForwardFn = Callable[..., ForwardResult]


def init_network_parameters(
    variant: str | AblationVariant,
    backbone_config: BackboneConfig,
    num_classes: int,
    seed: int,
) -> ParameterSet:
    """Backbone, transition and (when the variant uses it) attention parameters."""
    variant = parse_variant(variant)
    params = init_parameters(backbone_config, seed)
    params.update(
        init_descriptor_parameters(
            backbone_config.feature_channels,
            num_classes,
            seed,
            with_attention=InstanceRole.ATTENTION in VARIANT_ROLES[variant],
            positions=backbone_config.feature_size**2,
        )
    )
    return params


def build_variant(
    variant: str | AblationVariant,
    params: ParameterSet,
    backbone_config: BackboneConfig,
    descriptor_config: DescriptorConfig,
) -> ForwardFn:
    """
    Forward function for one ablation variant.

    Descriptors a variant does not use are never evaluated.

    Raises:
        UnknownVariantError: For an id outside the seven ablation rows.
        ConfigurationError: When a parameter the variant needs is missing.
    """
    variant = parse_variant(variant)
    roles = VARIANT_ROLES[variant]
    required = ["transition.weight", "transition.bias"]
    if InstanceRole.ATTENTION in roles:
        required += ["attention.weight", "attention.bias"]
    missing = [name for name in required if name not in params]
    if missing:
        raise ConfigurationError(f"variant {variant} is missing parameters {missing}")

    def forward(
        images: Tensor,
        mode: Mode = Mode.EVAL,
        rng: np.random.Generator | int | None = None,
    ) -> ForwardResult:
        features = backbone_forward(images, params, backbone_config, mode, rng)
        x1 = instance_transition(
            features, params["transition.weight"], params["transition.bias"]
        )
        elements: dict[InstanceRole, InstanceRepresentation] = {InstanceRole.BASE: x1}
        if InstanceRole.ATTENTION in roles:
            elements[InstanceRole.ATTENTION] = spatial_attention(
                x1,
                params["attention.weight"],
                params["attention.bias"],
                descriptor_config.attention_activation,
            )
        if InstanceRole.LOCAL_MAX in roles:
            elements[InstanceRole.LOCAL_MAX] = local_max_select(
                x1, descriptor_config.lms_window
            )
        if InstanceRole.CACPR in roles:
            elements[InstanceRole.CACPR] = cacpr(
                x1,
                descriptor_config.cacpr_peak_window,
                descriptor_config.cacpr_context_window,
            )

        summed = x1.tensor
        for role in roles[1:]:
            summed = summed + elements[role].tensor
        final = InstanceRepresentation(summed, InstanceRole.FINAL)

        if variant == AblationVariant.RES_IRB:
            probabilities = bag_distribution(elements[roles[0]])
            for role in roles[1:]:
                probabilities = probabilities + bag_distribution(elements[role])
            probabilities = probabilities * (1.0 / len(roles))
            log_probabilities = log_mean_exp(
                *(log_bag_distribution(elements[role]) for role in roles)
            )
        else:
            probabilities = bag_distribution(final)
            log_probabilities = log_bag_distribution(final)

        bank = build_bank(*(elements[r] for r in BANK_ORDER)) if roles == BANK_ORDER else None
        return ForwardResult(
            variant, features, elements, final, probabilities, log_probabilities, bank
        )

    return forward


def loss_terms(
    result: ForwardResult,
    labels: int | Sequence[int] | np.ndarray,
    alignment_mode: AlignmentMode = AlignmentMode.ENTROPY,
) -> tuple[Tensor, Tensor | None]:
    """(L_cls, L_sealig); the alignment term is None when there is no full bank."""
    l_cls = cross_entropy(result.log_probabilities, labels)
    if result.bank is None:
        return l_cls, None
    return l_cls, alignment_objective(result.bank, alignment_mode)


def effective_alpha(variant: AblationVariant, alpha: float) -> float:
    """Only the full model puts the alignment term into the objective."""
    return alpha if variant == AblationVariant.RES_IRB_SF_SSA else 0.0


class IRBNetwork:
    """A variant's parameters together with its forward function."""

    def __init__(
        self,
        variant: str | AblationVariant,
        class_names: Sequence[str],
        backbone_config: BackboneConfig,
        descriptor_config: DescriptorConfig,
        params: ParameterSet | None = None,
        seed: int = 0,
    ):
        self.variant = parse_variant(variant)
        self.class_names = list(class_names)
        self.backbone_config = backbone_config
        self.descriptor_config = descriptor_config
        self.params = (
            params
            if params is not None
            else init_network_parameters(
                self.variant, backbone_config, self.num_classes, seed
            )
        )
        self._forward = build_variant(
            self.variant, self.params, backbone_config, descriptor_config
        )

    @property
    def num_classes(self) -> int:
        return len(self.class_names)

    @property
    def parameter_count(self) -> int:
        return sum(t.size for t in self.params.values())

    def forward(
        self,
        images: np.ndarray | Tensor,
        mode: Mode = Mode.EVAL,
        rng: np.random.Generator | int | None = None,
    ) -> ForwardResult:
        tensor = images if isinstance(images, Tensor) else Tensor(images)
        return self._forward(tensor, mode, rng)

    def predict_proba(self, images: np.ndarray) -> np.ndarray:
        return self.forward(images, Mode.EVAL).probabilities.data

    def zero_grad(self) -> None:
        for tensor in self.params.values():
            tensor.zero_grad()
