#include "levy/triplet.hpp"

#include <Eigen/Eigenvalues>

namespace levy {

void LevyTriplet::validate() const {
    if (dim < 1) throw SchemaError("market dimension must be at least 1");
    if (b.size() != dim) throw SchemaError("drift vector has wrong dimension");
    if (c.rows() != dim || c.cols() != dim)
        throw SchemaError("covariance matrix has wrong shape");
    for (int i = 0; i < dim; ++i) {
        if (!std::isfinite(b(i))) throw SchemaError("drift entries must be finite");
        for (int j = 0; j < dim; ++j)
            if (!std::isfinite(c(i, j)))
                throw SchemaError("covariance entries must be finite");
    }
    const double scale = std::max(c.cwiseAbs().maxCoeff(), 1.0);
    if ((c - c.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
        throw SchemaError("covariance matrix must be symmetric");
    Eigen::SelfAdjointEigenSolver<Mat> es(c);
    if (es.eigenvalues().minCoeff() < -1e-10 * scale)
        throw SchemaError("covariance matrix must be positive semidefinite");
    if (nu.dim != dim)
        throw SchemaError("jump measure dimension disagrees with market dimension");
    nu.validate();
}

}  // namespace levy
