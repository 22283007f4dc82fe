from fem.assembly import assemble_residual, assemble_tangent, assembler, potential_energy
from fem.bc import (BcProgram, DirichletNormal, DirichletVector, FollowerPressure, Free, NormalSpring,
                    Traction)
from fem.interpolation import PointLocator, interpolate_displacement, interpolation_matrix
from fem.reactions import reaction_force, reaction_gradients, reaction_vector
from fem.solver import EquilibriumSolution, continuation_solve, newton_solve
from fem.space import FeSpace
