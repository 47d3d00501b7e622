"""Follow the separation variables s1, s2 along a trajectory.

At each sample, s1 and s2 are the two roots of F(x1, x2, s) = 0 in s.  Along a
trajectory on the invariant set, their velocities are governed by P(s), and
the resulting differential relations integrate to the quadratures.  The
residuals of the discrete relations fall off with the square of the sample
spacing.
"""

from kowtype import SystemId, SystemParams, integrate, sample_initial_state
from kowtype.verifier import kowch_residuals, quadrature_residuals, separation_roots, velocity_identity, viete_residuals

state, params = sample_initial_state(SystemId.S1_COMPLEX, SystemParams(g2=0.3), seed=0, on_invariant_set=True)
traj = integrate(SystemId.S1_COMPLEX, params, state, 5.0, sample_dt=1e-3)
track = separation_roots(traj)
print(f"tracked {len(traj)} samples; largest jump relative to the root gap {track.continuity:.3f}")
print(f"s1(0) = {track.s1[0]:.6f}, s2(0) = {track.s2[0]:.6f}")

vi = viete_residuals(track, traj)
print(f"sum and difference identities: {vi.max_sum:.1e}, {vi.max_diff:.1e}")
r1, r2 = velocity_identity(traj)
print(f"velocity identity: {max(r1.max(), r2.max()):.1e}")

q = quadrature_residuals(track, traj)
print(f"quadrature residuals {q.max1:.1e}, {q.max2:.1e}; orders {q.order1:.2f}, {q.order2:.2f}")
kw = kowch_residuals(track, traj)
print(f"differential relations: orders {kw.order1:.2f}, {kw.order2:.2f}")
