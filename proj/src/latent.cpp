#include "sfwlab/latent.hpp"

#include <cmath>

namespace sfwlab {

Matrix LinearAE::encode_rows(const Matrix& x) const {
    return (x.rowwise() - mean.transpose()) * encoder;
}

Matrix LinearAE::decode_rows(const Matrix& z) const {
    return (z * decoder.transpose()).rowwise() + mean.transpose();
}

LinearAE fit_linear_ae(const Matrix& data, int k) {
    require(data.rows() >= 1, "fit_linear_ae: empty dataset");
    require(k >= 1 && k <= data.cols(), "fit_linear_ae: need 1 <= k <= ambient dim");

    LinearAE ae;
    ae.mean = data.colwise().mean().transpose();
    const Matrix centered = data.rowwise() - ae.mean.transpose();
    const Matrix cov = centered.transpose() * centered / std::max<double>(1.0, data.rows() - 1.0);

    Eigen::SelfAdjointEigenSolver<Matrix> eig(cov);
    require(eig.info() == Eigen::Success, "fit_linear_ae: eigendecomposition failed");
    // Eigen returns eigenvalues ascending; take the trailing k columns.
    const Matrix basis = eig.eigenvectors().rightCols(k).rowwise().reverse();
    ae.encoder = basis;
    ae.decoder = basis;

    const Matrix recon = ae.decode_rows(ae.encode_rows(data));
    const double rms = std::sqrt((recon - data).squaredNorm() / static_cast<double>(data.size()));
    if (rms >= 1e-6) {
        throw ComputeError("fit_linear_ae: data does not lie on a " + std::to_string(k) +
                           "-dimensional affine subspace (reconstruction RMS " +
                           std::to_string(rms) + ")");
    }
    return ae;
}

LinearAE identity_ae(int n) {
    require(n >= 1, "identity_ae: dimension must be positive");
    LinearAE ae;
    ae.encoder = Matrix::Identity(n, n);
    ae.decoder = Matrix::Identity(n, n);
    ae.mean = Vector::Zero(n);
    return ae;
}

GradLogResult decoded_log_grad(const LinearAE& ae, const HarmDensity& harm, const Vector& z) {
    require(z.size() == ae.latent_dim(), "decoded_log_grad: latent dimension mismatch");
    GradLogResult ambient = harm.grad_log(ae.decode(z));
    GradLogResult out;
    out.clipped = ambient.clipped;
    out.grad = ae.decoder.transpose() * ambient.grad;
    return out;
}

}  // namespace sfwlab
