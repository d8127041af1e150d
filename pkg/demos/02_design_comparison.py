"""Three ways to pick a waveform and filter under strong spot jamming.

CAN only shapes the sequence's sidelobes; the two CREW variants alternate
between the sequence and the filter, one with exact statistics and one
from normalized (one-bit) statistics plus the covariance fit.
"""

import numpy as np

from onebit_crew import crew, radar
from onebit_crew.scenario import jamming_scenario

sc = jamming_scenario(25, "spot")
G = radar.interference_covariance(sc)
print("interference power per cell:", G[0, 0].real)

s0 = radar.golomb(sc.N)
R0 = radar.true_covariance(s0, sc.beta, G)
print("Golomb + matched filter MSE:", radar.mse(s0, s0, R0))
print("Golomb + mismatched filter MSE:", radar.mse(radar.mmf(R0, s0), s0, R0))

results = {alg: crew.design(alg, sc) for alg in ("can_mmf", "crew_cyclic", "crew_onebit")}
for alg, out in results.items():
    print(f"{alg:12s} final MSE {out.final_mse:.6f}  iterations {out.iterations:2d}  "
          f"ISL {radar.isl(out.s):8.1f}")

# the cyclic trajectory never goes up
traj = np.array(results["crew_cyclic"].mse_trajectory)
print("cyclic trajectory (every 10th):", np.round(traj[::10], 5))

# oracle mode hands the one-bit variant the exact normalized covariance, so
# the two CREW variants end up within round-off plus the moment loading
ob, cy = results["crew_onebit"].final_mse, results["crew_cyclic"].final_mse
print("relative one-bit gap:", (ob - cy) / cy)

# with 10^4 sampled snapshots per measurement the gap becomes real
est = crew.crew_onebit(sc.replace(oracle_mode=False, snapshots=10_000, outer_cap=20))
print("one-bit from sampled snapshots:", est.final_mse,
      "relative gap", (est.final_mse - cy) / cy)

# the receive filters suppress the jammer tone; gain at f0 relative to the
# filter's gain on the transmitted sequence (the tone sits on the 2N-1 grid)
L = 2 * sc.N - 1
f0 = np.rint(sc.jamming.f0 * L) / L
tone = np.exp(2j * np.pi * f0 * np.arange(sc.N))
for alg, out in results.items():
    g = abs(np.vdot(out.w, tone)) ** 2 / abs(np.vdot(out.w, out.s)) ** 2
    print(f"{alg:12s} filter gain at the jammer frequency {10 * np.log10(g):7.1f} dB")
