#include "levy/constraints.hpp"

#include <Eigen/LU>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "levy/lp.hpp"

namespace levy {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

// Dykstra's alternating projections with correction terms; exact for the
// intersection of closed convex sets, run to a fixed-point tolerance.
Vec dykstra(const std::vector<std::function<Vec(const Vec&)>>& projs,
            const Vec& p, double tol, int cap) {
    const size_t m = projs.size();
    Vec x = p;
    std::vector<Vec> q(m, Vec::Zero(p.size()));
    for (int it = 0; it < cap; ++it) {
        double moved = 0.0;
        for (size_t i = 0; i < m; ++i) {
            const Vec y = projs[i](x + q[i]);
            const Vec qNew = x + q[i] - y;
            moved = std::max(moved, (y - x).norm());
            moved = std::max(moved, (qNew - q[i]).norm());
            q[i] = qNew;
            x = y;
        }
        if (moved <= tol * (1.0 + x.norm())) return x;
    }
    throw ConvergenceFailure("alternating projection did not reach tolerance");
}

Vec project_halfspace(const Vec& a, double b, const Vec& x) {
    const double slack = a.dot(x) - b;
    if (slack <= 0) return x;
    return x - (slack / a.squaredNorm()) * a;
}

// Real roots of x^3 + p x + q = 0.
std::vector<double> depressed_cubic_roots(double p, double q) {
    std::vector<double> roots;
    const double disc = -4.0 * p * p * p - 27.0 * q * q;
    if (disc > 0) {
        const double m = 2.0 * std::sqrt(-p / 3.0);
        const double arg = std::clamp(-4.0 * q / (m * m * m), -1.0, 1.0);
        const double theta = std::acos(arg) / 3.0;
        for (int k = 0; k < 3; ++k)
            roots.push_back(m * std::cos(theta - 2.0 * M_PI * k / 3.0));
    } else {
        const double A = std::sqrt(std::max(q * q / 4.0 + p * p * p / 27.0, 0.0));
        roots.push_back(std::cbrt(-q / 2.0 + A) + std::cbrt(-q / 2.0 - A));
    }
    // One Newton polish per root.
    for (double& r : roots)
        for (int i = 0; i < 3; ++i) {
            const double f = r * r * r + p * r + q;
            const double df = 3.0 * r * r + p;
            if (std::abs(df) > 1e-14) r -= f / df;
        }
    return roots;
}

Vec project_parabola(const Vec& pt) {
    const double u = pt(0), v = pt(1);
    if (v >= u * u) return pt;
    // Stationary points of the squared distance to the graph y = x^2 solve
    // 2x^3 + (1 - 2v)x - u = 0.
    const double cp = (1.0 - 2.0 * v) / 2.0;
    const double cq = -u / 2.0;
    double bestX = 0.0, bestD = kInf;
    for (double x : depressed_cubic_roots(cp, cq)) {
        const double d = (x - u) * (x - u) + (x * x - v) * (x * x - v);
        if (d < bestD) {
            bestD = d;
            bestX = x;
        }
    }
    Vec out(2);
    out << bestX, bestX * bestX;
    return out;
}

void push_unique_dir(std::vector<Vec>& dirs, Vec d) {
    const double n = d.norm();
    if (n < 1e-12) return;
    d /= n;
    for (const Vec& e : dirs)
        if (e.dot(d) > 1.0 - 1e-9) return;
    dirs.push_back(d);
}

// Spanning rays of the halfspace cone {A x <= 0}: candidate directions come
// from kernels of row subsets of size < dim, filtered by feasibility.
std::vector<Vec> halfspace_cone_rays(const Mat& A, int dim) {
    if (dim > 3)
        throw UnsupportedVariant(
            "ray enumeration for halfspace cones is provided up to dimension 3");
    std::vector<Vec> dirs;
    const int m = static_cast<int>(A.rows());
    auto feasibleDir = [&](const Vec& d) {
        return m == 0 || (A * d).maxCoeff() <= 1e-10 * (1.0 + d.norm());
    };
    const int maxMask = 1 << std::min(m, 16);
    for (int mask = 0; mask < maxMask; ++mask) {
        const int k = __builtin_popcount(static_cast<unsigned>(mask));
        if (k >= dim) continue;
        Mat S(k, dim);
        int r = 0;
        for (int i = 0; i < m; ++i)
            if (mask & (1 << i)) S.row(r++) = A.row(i);
        Mat kernel;
        if (k == 0) {
            kernel = Mat::Identity(dim, dim);
        } else {
            Eigen::FullPivLU<Mat> lu(S);
            lu.setThreshold(1e-10);
            kernel = lu.kernel();
        }
        for (int j = 0; j < kernel.cols(); ++j) {
            for (double s : {1.0, -1.0}) {
                const Vec d = s * kernel.col(j);
                if (feasibleDir(d)) push_unique_dir(dirs, d);
            }
        }
    }
    return dirs;
}

}  // namespace

// ===========================================================================
// Factories
// ===========================================================================

ConstraintSet ConstraintSet::full_space(int dim) {
    if (dim < 1) throw SchemaError("constraint set dimension must be >= 1");
    ConstraintSet c;
    c.kind_ = Kind::FullSpace;
    c.dim_ = dim;
    return c;
}

ConstraintSet ConstraintSet::orthant(Vec signs) {
    ConstraintSet c;
    c.kind_ = Kind::Orthant;
    c.dim_ = static_cast<int>(signs.size());
    if (c.dim_ < 1) throw SchemaError("orthant needs at least one coordinate");
    for (int i = 0; i < c.dim_; ++i)
        if (signs(i) != 1.0 && signs(i) != -1.0 && signs(i) != 0.0)
            throw SchemaError("orthant signs must be -1, 0, or +1");
    c.signs_ = std::move(signs);
    return c;
}

ConstraintSet ConstraintSet::box(Vec lo, Vec hi) {
    ConstraintSet c;
    c.kind_ = Kind::Box;
    c.dim_ = static_cast<int>(lo.size());
    if (c.dim_ < 1 || hi.size() != lo.size())
        throw SchemaError("box bounds must be same-length and nonempty");
    for (int i = 0; i < c.dim_; ++i) {
        if (std::isnan(lo(i)) || std::isnan(hi(i)))
            throw SchemaError("box bounds must not be NaN");
        if (!(lo(i) <= 0.0 && 0.0 <= hi(i)))
            throw SchemaError("constraint sets must contain the zero portfolio");
    }
    c.lo_ = std::move(lo);
    c.hi_ = std::move(hi);
    return c;
}

ConstraintSet ConstraintSet::polyhedron(Mat A, Vec b) {
    ConstraintSet c;
    c.kind_ = Kind::Polyhedron;
    c.dim_ = static_cast<int>(A.cols());
    if (c.dim_ < 1 || A.rows() != b.size())
        throw SchemaError("polyhedron needs A and b with matching rows");
    for (int i = 0; i < A.rows(); ++i) {
        if (A.row(i).norm() < 1e-14)
            throw SchemaError("polyhedron rows must be nonzero");
        if (b(i) < -1e-12)
            throw SchemaError("constraint sets must contain the zero portfolio");
    }
    c.A_ = std::move(A);
    c.b_ = std::move(b);
    return c;
}

ConstraintSet ConstraintSet::polyhedral_cone(Mat rays) {
    ConstraintSet c;
    c.kind_ = Kind::PolyhedralCone;
    c.dim_ = static_cast<int>(rays.rows());
    if (c.dim_ < 1 || rays.cols() < 1)
        throw SchemaError("polyhedral cone needs at least one ray");
    for (int j = 0; j < rays.cols(); ++j)
        if (rays.col(j).norm() < 1e-14)
            throw SchemaError("cone rays must be nonzero");
    c.R_ = std::move(rays);
    return c;
}

ConstraintSet ConstraintSet::parabola() {
    ConstraintSet c;
    c.kind_ = Kind::Parabola;
    c.dim_ = 2;
    return c;
}

ConstraintSet ConstraintSet::intersection(std::vector<ConstraintSet> parts) {
    if (parts.empty()) throw SchemaError("intersection needs at least one part");
    ConstraintSet c;
    c.kind_ = Kind::Intersection;
    c.dim_ = parts[0].dim();
    for (const ConstraintSet& p : parts)
        if (p.dim() != c.dim_)
            throw SchemaError("intersection parts must share a dimension");
    c.parts_ = std::move(parts);
    return c;
}

// ===========================================================================
// Predicates
// ===========================================================================

bool ConstraintSet::is_cone(double tol) const {
    switch (kind_) {
        case Kind::FullSpace:
        case Kind::Orthant:
        case Kind::PolyhedralCone:
            return true;
        case Kind::Box:
            for (int i = 0; i < dim_; ++i) {
                if (!(lo_(i) == -kInf || std::abs(lo_(i)) <= tol)) return false;
                if (!(hi_(i) == kInf || std::abs(hi_(i)) <= tol)) return false;
            }
            return true;
        case Kind::Polyhedron:
            return b_.size() == 0 || b_.cwiseAbs().maxCoeff() <= tol;
        case Kind::Parabola:
            return false;
        case Kind::Intersection:
            for (const ConstraintSet& p : parts_)
                if (!p.is_cone(tol)) return false;
            return true;
    }
    return false;
}

bool ConstraintSet::contains(const Vec& p, double tol) const {
    if (p.size() != dim_) throw LevyError("membership query dimension mismatch");
    const double scale = tol * (1.0 + p.norm());
    switch (kind_) {
        case Kind::FullSpace:
            return true;
        case Kind::Orthant:
            for (int i = 0; i < dim_; ++i) {
                if (signs_(i) > 0 && p(i) < -scale) return false;
                if (signs_(i) < 0 && p(i) > scale) return false;
            }
            return true;
        case Kind::Box:
            for (int i = 0; i < dim_; ++i)
                if (p(i) < lo_(i) - scale || p(i) > hi_(i) + scale) return false;
            return true;
        case Kind::Polyhedron:
            return A_.rows() == 0 || ((A_ * p) - b_).maxCoeff() <= scale;
        case Kind::PolyhedralCone: {
            const Vec lam = lp::nnls(R_, p);
            return (R_ * lam - p).norm() <= scale;
        }
        case Kind::Parabola:
            return p(1) >= p(0) * p(0) - tol * (1.0 + p(0) * p(0) + std::abs(p(1)));
        case Kind::Intersection:
            for (const ConstraintSet& c : parts_)
                if (!c.contains(p, tol)) return false;
            return true;
    }
    return false;
}

// ===========================================================================
// Projection
// ===========================================================================

Vec ConstraintSet::project(const Vec& p, double tol) const {
    if (p.size() != dim_) throw LevyError("projection query dimension mismatch");
    switch (kind_) {
        case Kind::FullSpace:
            return p;
        case Kind::Orthant: {
            Vec x = p;
            for (int i = 0; i < dim_; ++i) {
                if (signs_(i) > 0) x(i) = std::max(x(i), 0.0);
                if (signs_(i) < 0) x(i) = std::min(x(i), 0.0);
            }
            return x;
        }
        case Kind::Box: {
            Vec x = p;
            for (int i = 0; i < dim_; ++i)
                x(i) = std::min(std::max(x(i), lo_(i)), hi_(i));
            return x;
        }
        case Kind::Polyhedron: {
            if (contains(p, 1e-13)) return p;
            std::vector<std::function<Vec(const Vec&)>> projs;
            for (int i = 0; i < A_.rows(); ++i) {
                const Vec a = A_.row(i).transpose();
                const double bi = b_(i);
                projs.push_back([a, bi](const Vec& x) {
                    return project_halfspace(a, bi, x);
                });
            }
            return dykstra(projs, p, tol, 10000);
        }
        case Kind::PolyhedralCone: {
            const Vec lam = lp::nnls(R_, p);
            return R_ * lam;
        }
        case Kind::Parabola:
            return project_parabola(p);
        case Kind::Intersection: {
            std::vector<std::function<Vec(const Vec&)>> projs;
            for (const ConstraintSet& c : parts_)
                projs.push_back([&c, tol](const Vec& x) { return c.project(x, tol); });
            return dykstra(projs, p, tol, 10000);
        }
    }
    return p;
}

// ===========================================================================
// Cone calculus
// ===========================================================================

ConstraintSet ConstraintSet::recession_cone() const {
    switch (kind_) {
        case Kind::FullSpace:
        case Kind::Orthant:
        case Kind::PolyhedralCone:
            return *this;
        case Kind::Box: {
            Vec lo(dim_), hi(dim_);
            for (int i = 0; i < dim_; ++i) {
                lo(i) = (lo_(i) == -kInf) ? -kInf : 0.0;
                hi(i) = (hi_(i) == kInf) ? kInf : 0.0;
            }
            return box(lo, hi);
        }
        case Kind::Polyhedron:
            return polyhedron(A_, Vec::Zero(A_.rows()));
        case Kind::Parabola: {
            Mat R(2, 1);
            R << 0.0, 1.0;
            return polyhedral_cone(R);
        }
        case Kind::Intersection: {
            std::vector<ConstraintSet> parts;
            for (const ConstraintSet& c : parts_) parts.push_back(c.recession_cone());
            return intersection(std::move(parts));
        }
    }
    return *this;
}

ConstraintSet ConstraintSet::closed_conic_hull() const {
    if (is_cone()) return *this;
    switch (kind_) {
        case Kind::Box: {
            Vec lo(dim_), hi(dim_);
            for (int i = 0; i < dim_; ++i) {
                lo(i) = (lo_(i) < 0.0) ? -kInf : 0.0;
                hi(i) = (hi_(i) > 0.0) ? kInf : 0.0;
            }
            return box(lo, hi);
        }
        case Kind::Polyhedron: {
            // Scaling a member by lambda relaxes rows with positive slack at
            // the origin; only rows tight at 0 survive in the hull.
            std::vector<int> tight;
            for (int i = 0; i < A_.rows(); ++i)
                if (std::abs(b_(i)) <= 1e-12) tight.push_back(i);
            if (tight.empty()) return full_space(dim_);
            Mat A(static_cast<int>(tight.size()), dim_);
            for (size_t r = 0; r < tight.size(); ++r) A.row(r) = A_.row(tight[r]);
            return polyhedron(A, Vec::Zero(A.rows()));
        }
        case Kind::Parabola: {
            Mat R(2, 3);
            R << 1.0, -1.0, 0.0, 0.0, 0.0, 1.0;
            return polyhedral_cone(R);
        }
        case Kind::Intersection:
            throw UnsupportedVariant(
                "closed conic hull of a general intersection is not provided");
        default:
            return *this;
    }
}

std::vector<Vec> ConstraintSet::cone_generators() const {
    if (!is_cone())
        throw InvariantViolation("cone generators requested for a non-cone set");
    std::vector<Vec> dirs;
    switch (kind_) {
        case Kind::FullSpace:
            for (int i = 0; i < dim_; ++i) {
                push_unique_dir(dirs, Vec::Unit(dim_, i));
                push_unique_dir(dirs, -Vec::Unit(dim_, i));
            }
            break;
        case Kind::Orthant:
            for (int i = 0; i < dim_; ++i) {
                if (signs_(i) >= 0) push_unique_dir(dirs, Vec::Unit(dim_, i));
                if (signs_(i) <= 0) push_unique_dir(dirs, -Vec::Unit(dim_, i));
            }
            break;
        case Kind::Box:
            for (int i = 0; i < dim_; ++i) {
                if (hi_(i) == kInf) push_unique_dir(dirs, Vec::Unit(dim_, i));
                if (lo_(i) == -kInf) push_unique_dir(dirs, -Vec::Unit(dim_, i));
            }
            break;
        case Kind::Polyhedron:
            dirs = halfspace_cone_rays(A_, dim_);
            break;
        case Kind::PolyhedralCone:
            for (int j = 0; j < R_.cols(); ++j) push_unique_dir(dirs, R_.col(j));
            break;
        case Kind::Parabola:
            break;  // unreachable: not a cone
        case Kind::Intersection:
            throw UnsupportedVariant(
                "cone generators of a general intersection are not provided");
    }
    return dirs;
}

std::vector<Vec> ConstraintSet::probe_points() const {
    std::vector<Vec> pts;
    pts.push_back(Vec::Zero(dim_));
    switch (kind_) {
        case Kind::FullSpace:
        case Kind::Orthant:
        case Kind::PolyhedralCone: {
            for (const Vec& d : cone_generators())
                for (double s : {0.5, 1.0, 2.0}) pts.push_back(s * d);
            break;
        }
        case Kind::Box: {
            const int d = dim_;
            const int corners = d <= 6 ? (1 << d) : 0;
            for (int mask = 0; mask < corners; ++mask) {
                Vec v(d);
                for (int i = 0; i < d; ++i) {
                    const double lo = (lo_(i) == -kInf) ? -1.0 : lo_(i);
                    const double hi = (hi_(i) == kInf) ? 1.0 : hi_(i);
                    v(i) = (mask & (1 << i)) ? hi : lo;
                }
                pts.push_back(v);
            }
            break;
        }
        case Kind::Polyhedron: {
            for (int i = 0; i < dim_; ++i) {
                for (double s : {1.0, -1.0, 3.0, -3.0})
                    pts.push_back(project(s * Vec::Unit(dim_, i)));
            }
            break;
        }
        case Kind::Parabola: {
            for (double t : {-2.0, -1.0, -0.5, 0.5, 1.0, 2.0}) {
                Vec v(2);
                v << t, t * t;
                pts.push_back(v);
            }
            Vec up(2);
            up << 0.0, 1.0;
            pts.push_back(up);
            break;
        }
        case Kind::Intersection: {
            for (const ConstraintSet& c : parts_)
                for (const Vec& p : c.probe_points())
                    if (contains(p)) pts.push_back(p);
            break;
        }
    }
    return pts;
}

std::string ConstraintSet::describe() const {
    std::ostringstream os;
    switch (kind_) {
        case Kind::FullSpace: os << "fullSpace(d=" << dim_ << ")"; break;
        case Kind::Orthant: os << "orthant(d=" << dim_ << ")"; break;
        case Kind::Box: os << "box(d=" << dim_ << ")"; break;
        case Kind::Polyhedron:
            os << "polyhedron(d=" << dim_ << ", rows=" << A_.rows() << ")";
            break;
        case Kind::PolyhedralCone:
            os << "polyhedralCone(d=" << dim_ << ", rays=" << R_.cols() << ")";
            break;
        case Kind::Parabola: os << "parabola"; break;
        case Kind::Intersection:
            os << "intersection(" << parts_.size() << " parts)";
            break;
    }
    return os.str();
}

// ===========================================================================
// Null investments and natural constraints
// ===========================================================================

Mat null_investments(const LevyTriplet& trip, double tol) {
    std::vector<Vec> rows;
    for (int i = 0; i < trip.dim; ++i) rows.push_back(trip.c.row(i).transpose());
    for (const Atom& a : trip.nu.atoms) rows.push_back(a.x);
    for (const DensitySegment& seg : trip.nu.segments)
        for (const Vec& x : seg.support().span_points()) rows.push_back(x);
    rows.push_back(trip.b);

    Mat M(static_cast<int>(rows.size()), trip.dim);
    for (size_t i = 0; i < rows.size(); ++i) M.row(static_cast<int>(i)) = rows[i];

    Eigen::JacobiSVD<Mat> svd(M, Eigen::ComputeFullV);
    const Vec sv = svd.singularValues();
    const double cutoff = tol * std::max(sv.size() > 0 ? sv(0) : 0.0, 1.0);
    int rank = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) ++rank;
    return svd.matrixV().rightCols(trip.dim - rank);
}

void require_null_compatible(const ConstraintSet& C, const Mat& nullBasis) {
    for (int j = 0; j < nullBasis.cols(); ++j) {
        for (double s : {1.0, -1.0}) {
            for (double scale : {1.0, 1e3}) {
                if (!C.contains(s * scale * nullBasis.col(j), 1e-6))
                    throw InvariantViolation(
                        "constraint set must contain every null investment direction");
            }
        }
    }
}

bool natural_constraints_contains(const JumpMeasure& nu, const Vec& p,
                                  double tol) {
    for (const Atom& a : nu.atoms)
        if (p.dot(a.x) < -1.0 - tol) return false;
    for (const DensitySegment& seg : nu.segments) {
        const ExtReal lo = seg.support().inf_dot(p);
        if (lo.is_neg_inf()) return false;
        if (lo.value() < -1.0 - tol) return false;
    }
    return true;
}

}  // namespace levy
