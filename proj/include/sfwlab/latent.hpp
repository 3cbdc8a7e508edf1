// Linear autoencoder giving the latent <-> ambient maps. Guidance gradients
// computed through the decoder stay in span(D), which is the testable form of
// the tangent-space property the corrected sampler relies on.
#pragma once

#include "sfwlab/harm.hpp"
#include "sfwlab/types.hpp"

namespace sfwlab {

struct LinearAE {
    Matrix encoder;  // E: (N, k); z = E^T (x - mean)
    Matrix decoder;  // D: (N, k); x_hat = D z + mean
    Vector mean;

    int ambient_dim() const { return static_cast<int>(decoder.rows()); }
    int latent_dim() const { return static_cast<int>(decoder.cols()); }

    Vector encode(const Vector& x) const { return encoder.transpose() * (x - mean); }
    Vector decode(const Vector& z) const { return decoder * z + mean; }
    Matrix encode_rows(const Matrix& x) const;
    Matrix decode_rows(const Matrix& z) const;
};

// Principal-subspace fit: E == D == top-k eigenvectors of the data
// covariance, mean == column means. Throws if the data cannot be
// reconstructed from a k-dimensional affine subspace (RMS >= 1e-6).
LinearAE fit_linear_ae(const Matrix& data, int k);

// E == D == I, mean == 0; used when the diffusion runs in ambient space.
LinearAE identity_ae(int n);

// Chain rule through the decoder: grad_z log p_h(D z + mean) = D^T grad_x.
// The clipped flag of the underlying density propagates (zero gradient).
GradLogResult decoded_log_grad(const LinearAE& ae, const HarmDensity& harm, const Vector& z);

}  // namespace sfwlab
