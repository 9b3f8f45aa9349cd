"""
# a simulator for the G2 Hamiltonian flow on left-invariant data

Primary entry points: flow.integrate, g2.torsion_residual, reduced.integrate_reduced
Install with pip: "pip3 install ." from the repository root, then run `g2flow --help`.

The library evolves a pair (E, S) made of a solder matrix E (the coframe
e^i = E_ij λ^j over the Maurer-Cartan coframe λ of a 3-dimensional Lie group)
and a symmetric momentum matrix S.  Orbits of the Hamiltonian H = -½H1 + H2
that satisfy the divergence constraint S_{iα;α} = 0 give torsion-free
G2-structures φ = (det S)^½ ω∧dt + ψ on P×I, where P = G×SO(3).

modules:

- mat3 - 3×3 algebra: adjugate, Levi-Civita symbol, so(3) action
- liealg - structure constants of 3-dimensional Lie algebras and presets
- frame - Levi-Civita connection, torsion, Einstein tensor, covariant derivatives
- forms - exterior algebra over {e1,e2,e3,a1,a2,a3,dt}, d, Hodge star, metric of a 3-form
- flow - Hamiltonian densities, flow field, RK4 integration, scaling map
- g2 - SU(3)- and G2-structures, half-flat and torsion residuals
- reduced - the isotropic (a, b) and (x, y) reductions
- adm - bridge to the ADM variables (γ, π) and their constraints

# Published PubSub topics

- g2flow.integration.stopped(reason, t) - published when integrate halts before t_end
- g2flow.definiteness.changed(t, previous, current) - published when the sign
pattern of S changes between two recorded samples

# Example Usage
```
import numpy as np
from g2flow import flow, g2, liealg

c = liealg.preset("su2")
traj = flow.integrate(flow.FlowState(np.eye(3), np.eye(3), 0.0), c,
                      flow.IntegrationConfig(dt=1e-3, tEnd=1.0))
print(traj.samples[-1].E[0, 0])
print(g2.torsion_residual(traj.samples[-1], c, (0.5, 1.0)))
```

"""

DEFAULT_COEFFS = (0.5, 1.0)
"""Coefficients (a, b) of -a·H1 + b·H2 giving the Hamiltonian H"""

MIN_DET_E = 1e-9
"""Integration stops once det E falls below this floor"""

MAX_NORM = 1e9
"""Integration stops once any entry of E or S exceeds this ceiling"""

SYMMETRY_TOL = 1e-12
"""Tolerance on the symmetry of momentum and velocity matrices"""

TORSION_TOL = 1e-10
"""Largest torsion tolerated for a connection claimed to be Levi-Civita"""
