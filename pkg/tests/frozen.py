"""Reference values shared by the tests.

Each constant is recomputed by an independent route in test_oracles.py;
the other test modules only compare against these numbers.
"""
import math

SQRT2 = math.sqrt(2.0)

# light-cone distance of (3, 4, 2) and (0, 0, 5)
DIST_342 = 3 / SQRT2
DIST_005 = 5 / SQRT2

# Lorentzian catenoid g = z, f = 1/z, X(1) = 0
CATENOID_X_HALF = (0.0, 0.75, -0.6931471805599453)
CATENOID_LAMBDA_SQ_HALF = 2.25
CATENOID_N0_HALF = (0.0, 4 / 3, -5 / 3)
CATENOID_XN_HALF = -0.15524530093324218  # <X, N0> at z = 1/2
CATENOID_XX_HALF = 0.08204698608179861  # <X, X> at z = 1/2
CATENOID_LAPLACIAN_HALF = -32.22212454400764
CATENOID_EPSILON_DELTA1 = 0.08388154104631701  # (1 - arcsinh 1) / sqrt 2

# harmonic measure, 1 < |z| < R, probe |z| = 2
OMEGA_PLANE = [math.log(2) / math.log(R) for R in (10, 100, 1000, 1e4)]
DISC_LIMIT = math.log(5) / math.log(10)

# Enneper (minimal, g = z, f = z): conjugate of Y3 at (1 + i)/2
ENNEPER_X3 = 0.25
