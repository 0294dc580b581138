"""
Numeric kernels: pooling, cosine similarity, softmax
====================================================

The four small float64 kernels everything else is built on.
"""

import numpy as np

from abductrank import cosine, linear_forward, mean_pool, softmax

# Token matrices come in as (n_tokens, dim) float32; mean_pool collapses
# them to a single vector, accumulating in float64.
tokens = np.array([[1.0, 3.0], [3.0, 1.0], [2.0, 2.0]], dtype=np.float32)
pooled = mean_pool(tokens)
print("pooled vector:", pooled, pooled.dtype)

# Cosine similarity is scale-invariant and clamped to [-1, 1].
u = np.array([3.0, 4.0])
v = np.array([4.0, 3.0])
print("cos(u, v)      =", cosine(u, v))
print("cos(10u, 0.1v) =", cosine(10 * u, 0.1 * v))
print("cos(u, -u)     =", cosine(u, -u))

# Softmax subtracts the max first, so huge logits stay finite.
print("softmax([0, 0])     =", softmax(np.zeros(2)))
print("softmax([1000, 0])  =", softmax(np.array([1000.0, 0.0])))

# The linear map behind the classification head: z = W x + b.
W = np.array([[1.0, -1.0], [0.5, 0.5]])
b = np.array([0.0, 1.0])
x = np.array([2.0, 1.0])
print("W x + b =", linear_forward(W, b, x))
