from kinematics.canonical import (CanonicalDeformation, CanonicalKind, canonical_curves,
                                  canonical_deformation)
from kinematics.tensors import (DeformationState, cofactor, deformation_gradient, embed_plane_strain,
                                invariants, isochoric_invariants, principal_stretches)
