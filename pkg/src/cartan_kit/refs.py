"""Reference labels attached to every report record.

Each label names the axiom or identity a check verifies, so a failing record
in a report can be traced to the exact defining property it violates.
"""

PRINCIPAL_ACTION = "Sec 1: free right action, pi(p.h) = pi(p)"
COCYCLE = "Sec 1: principal bundle transition cocycle g_ij g_jk = g_ik"
ORBIT = "Eq (1): orbit p.xi = {(ph, h^-1 xi)}"
FIBER_MAP = "Eq (3): (ph)xi = p(h xi)"
LEMMA_1_1 = "Lemma 1.1: sections of E <-> equivariant maps f(ph) = h^-1 f(p)"
REDUCTION = "Def 1.2: K-reduction Q of P"
SYMMETRY_BREAKING = "Def 1.3: K-symmetry breaking P -> H/K"
THEOREM_1_4 = "Theorem 1.4: reduction <-> section of P/K <-> symmetry breaking"
METRIC_PD = "Theorem 1.4(ii): metric section of P/K must be positive definite"
H_STRUCTURE = "Def 1.5: H-structure (reduction of the frame bundle)"
PSEUDOTENSORIAL = "Def 1.6: pseudotensorial R_h* phi = rho(h^-1) phi"
HORIZONTAL = "Def 1.6: tensorial (horizontal) phi(X1..Xr) = 0 for vertical Xi"
FACTORIZATION = "Eq (4): tensorial forms factor over pi_*"
LEMMA_1_8 = "Lemma 1.8 / Eq (5): bundle-valued forms <-> tensorial forms"
EHRESMANN_EQUIV = "Def 2.1(i): R_h* gamma = Ad(h^-1) gamma"
EHRESMANN_REPRO = "Def 2.1(ii): gamma(X^dagger) = X"
SOLDERING = "Def 2.2: soldering form is a surjective tensorial R^n-valued 1-form"
FUNDAMENTAL_FORM = "Example 2.3: fundamental form theta_u(X) = u^-1 pi_*(X)"
GEOMETRIZABLE = "Def 2.4 / Eq (6): soldering condition P x_H R^n = TM"
OBSTRUCTION = "Example 2.5: trivial bundle S^2 x SO(2) is not geometrizable"
CARTAN_ISO = "Def 3.1(i): omega_p : T_pP -> g is an isomorphism"
CARTAN_EQUIV = "Def 3.1(ii): R_h* omega = Ad(h^-1) omega"
CARTAN_REPRO = "Def 3.1(iii): omega(X^dagger) = X"
CARTAN_DIM = "Def 3.1: dim g = dim P"
REDUCTIVE = "Def 3.1: reductive split g = h (+)_H p"
THM_3_2_V_IV = "Theorem 3.2 (v)=>(iv): identity section gives a soldering form"
THM_3_2_IV_III = "Theorem 3.2 (iv)=>(iii): omega = gamma + theta, g = h x R^n"
THM_3_2_III_II = "Theorem 3.2 (iii)=>(ii): [p, p] = 0 reductive connection is reductive"
THM_3_2_II_I = "Theorem 3.2 (ii)=>(i): reductive Cartan connection is a Cartan connection"
THM_3_2_I_IV = "Sec 3 remark: omega_g/h is a soldering form identified with id in End TM"
CURVATURE = "Sec 3: curvature Omega = d omega + 1/2 [omega, omega] (structure equation)"
