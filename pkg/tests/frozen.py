"""Reference values produced by the routines in ``oracles.py`` and frozen here.

``test_oracles.py`` recomputes each one, so a drift in either the oracle
or the literal shows up as a failure there rather than silently in the
module tests.
"""

import numpy as np

# phi_z(w) for z = (1/2, 0), w = (0, 1/2): 50-digit evaluation
MOEBIUS_EXAMPLE = (0.5 + 0j, -0.43301270189221932338)

# real Jacobian of phi_z at 0 for z = (1/2, 0), n = 2: central differences
JACOBIAN_EXAMPLE = 0.421875  # 27/64

# holomorphic gradient of |phi_z|^2 at 0 for z = (1/2, 0): central differences
GRAD_EXAMPLE = (-0.375 + 0j, 0j)

# ellipsoid data for z = (1/2, 0) and s = tanh r = 1/2
BALL_CENTER_EXAMPLE = 0.4
BALL_RHO_EXAMPLE = 0.8

# <K_lam, K_eta> for n = 1, lam = eta = 1/2
KERNEL_INNER_EXAMPLE = 16.0 / 9.0

# squared norms of z_1 in B_2 and z^2 in B_1: Monte Carlo at 1e6 samples
MONOMIAL_NORMS = {(1, 0): 1.0 / 3.0, (2,): 1.0 / 3.0}

# ||Q2 Q1 Q2 - Q3|| on polynomials of degree <= 8 for lines at angle theta
LINE_PAIR_NORM_121 = {
    np.pi / 6: 0.75,
    np.pi / 4: 0.5,
    np.pi / 3: 0.25,
    np.pi / 2: 0.0,
}

# 2-planes in C^3 sharing span{e1}, free directions at psi = pi/3; degree <= 6
PLANE_PAIR_NORM_121 = 0.25

# |<k_{r e1}, k_{w_r}>|^2 and rho(r e1, w_r) for slope 1: 50-digit evaluation
WITNESS_OVERLAP_SQ = {0.9: 0.85026971861787, 0.99: 0.98500025188441, 0.999: 0.99850000025019}
WITNESS_RHO = {0.9: 0.22941573387056, 0.99: 0.07088812050083, 0.999: 0.02236627204213}

# normalizing constant of the equivalent measure for n = 2, d = 1
EQUIVALENT_MEASURE_C = 2.0
