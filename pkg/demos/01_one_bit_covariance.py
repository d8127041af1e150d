"""What a one-bit receiver can and cannot see.

Sign-quantized snapshots keep only the quadrant of each sample, yet their
covariance still pins down the *normalized* covariance through the arcsine
law. The per-channel power is lost.
"""

import numpy as np

from onebit_crew import onebit

rng = np.random.default_rng(0)

# a random covariance with very unequal channel powers
A = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
R = A @ A.conj().T + np.diag([0.1, 1.0, 10.0, 100.0])
print("channel powers:", np.round(R.diagonal().real, 2))

truth = onebit.normalize(R)
print("normalized covariance |Rbar|:")
print(np.round(np.abs(truth.matrix), 3))

# quantize 10^5 snapshots and look at them
batch = onebit.draw_snapshots(R, 100_000, seed=1)
signs = onebit.csign(batch.samples)
print("first quantized snapshot:", np.round(signs[0], 3))

C = onebit.sign_covariance(batch)
est = onebit.arcsine_recover(C).matrix
print("max error of the arcsine estimate:", np.max(np.abs(est - truth.matrix)))

# scaling the input changes nothing downstream of the quantizer
batch2 = onebit.draw_snapshots(7.0 * R, 100_000, seed=1)
print("same signs after scaling R by 7:", np.array_equal(onebit.csign(batch2.samples), signs))

# error shrinks like 1/sqrt(M)
for M in (10**3, 10**4, 10**5, 10**6):
    e = np.max(np.abs(onebit.estimate_normalized(R, M, seed=M).matrix - truth.matrix))
    print(f"M = {M:>7d}   max error {e:.4f}   sqrt(M) * error {np.sqrt(M) * e:.2f}")

# the lost scale comes back only through side information (here the true d)
back = onebit.denormalize(est, truth.scale)
print("relative error after restoring the scale:", np.linalg.norm(back - R) / np.linalg.norm(R))
