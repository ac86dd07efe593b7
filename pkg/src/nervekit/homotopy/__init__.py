"""Partition of unity, mapping cylinder, retractions, extension and transfer maps."""

from .cylinder import (
    ConePoint,
    CylinderPoint,
    DPoint,
    F_value,
    H_value,
    apex,
    cone_distance,
    cone_metric,
    cone_point,
    cylinder_metric,
    d_metric,
    homotopy_F,
    homotopy_H,
    in_psi_image,
    in_tau_image,
    iota,
    psi_embed,
    tau,
)
from .extension import (
    PolyhedralExtension,
    homotopy_from_closeness,
    lipschitz_extension,
    prism_point,
    transfer_map,
)
from .partition import PartitionOfUnity, partition_of_unity, theta_map, xi_map
from .retraction import (
    IntersectionFamily,
    NestedFamily,
    compose_retraction,
    domination_homotopy,
    nested_family,
    phi_sigma,
    phi_sigma_eval,
    phi_sigma_target,
    retraction_family,
    zeta_map,
    zeta_point,
)
