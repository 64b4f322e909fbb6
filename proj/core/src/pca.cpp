#include "vqnnf/error.hpp"
#include "vqnnf/features.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numeric>
#include <string>

namespace vqnnf {

PcaProjection fit_pca(const FeatureMap& samples, int output_dim) {
    validate(samples);
    const int C = samples.channels;
    const auto n = static_cast<Eigen::Index>(samples.pixels());
    if (output_dim < 1) throw InvalidInput("fit_pca: output_dim must be >= 1");
    if (output_dim > C)
        throw InvalidInput("fit_pca: output_dim " + std::to_string(output_dim) + " exceeds input dimension " +
                           std::to_string(C));
    if (n < output_dim) throw InvalidInput("fit_pca: need at least output_dim samples");

    const Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> raw(
        samples.data.data(), n, C);
    const Eigen::MatrixXd X = raw.cast<double>();
    const Eigen::RowVectorXd mean = X.colwise().mean();
    const Eigen::MatrixXd centered = X.rowwise() - mean;
    const Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) throw InvalidInput("fit_pca: eigendecomposition failed");

    // Eigen returns ascending eigenvalues; walk from the top.
    PcaProjection proj;
    proj.input_dim = C;
    proj.output_dim = output_dim;
    proj.mean.assign(mean.data(), mean.data() + C);
    proj.components.resize(static_cast<std::size_t>(output_dim) * C);
    proj.explained_variance.resize(output_dim);
    for (int i = 0; i < output_dim; ++i) {
        const Eigen::Index col = C - 1 - i;
        Eigen::VectorXd v = solver.eigenvectors().col(col);
        Eigen::Index arg = 0;
        v.cwiseAbs().maxCoeff(&arg);
        if (v[arg] < 0) v = -v;
        std::copy(v.data(), v.data() + C, proj.components.begin() + static_cast<std::ptrdiff_t>(i) * C);
        proj.explained_variance[i] = std::max(0.0, solver.eigenvalues()[col]);
    }
    return proj;
}

FeatureMap apply_pca(const PcaProjection& proj, const FeatureMap& map) {
    if (map.channels != proj.input_dim)
        throw InvalidInput("apply_pca: map has " + std::to_string(map.channels) + " channels, projection expects " +
                           std::to_string(proj.input_dim));
    const int C = proj.input_dim;
    const int D = proj.output_dim;
    FeatureMap out(map.height, map.width, D);
    std::vector<double> centered(C);
    for (std::size_t p = 0; p < map.pixels(); ++p) {
        const float* v = map.data.data() + p * C;
        for (int c = 0; c < C; ++c) centered[c] = static_cast<double>(v[c]) - proj.mean[c];
        float* dst = out.data.data() + p * D;
        for (int d = 0; d < D; ++d) {
            const double* row = proj.components.data() + static_cast<std::size_t>(d) * C;
            double acc = 0.0;
            for (int c = 0; c < C; ++c) acc += row[c] * centered[c];
            dst[d] = static_cast<float>(acc);
        }
    }
    return out;
}

} // namespace vqnnf
