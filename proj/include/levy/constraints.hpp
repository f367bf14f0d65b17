#pragma once

#include <string>
#include <vector>

#include "levy/triplet.hpp"

namespace levy {

// Closed convex constraint sets containing the origin. The catalog covers
// the shapes the analyzers know how to search exactly; everything supports
// membership, Euclidean projection, recession cones, and closed conic hulls.
class ConstraintSet {
  public:
    enum class Kind {
        FullSpace,
        Orthant,         // per-coordinate sign restrictions (+1 / -1 / free)
        Box,             // [lo, hi] with possibly infinite ends
        Polyhedron,      // {x : A x <= b}, b >= 0 so that 0 is a member
        PolyhedralCone,  // nonnegative combinations of given rays
        Parabola,        // {(u, v) in R^2 : v >= u^2}
        Intersection
    };

    static ConstraintSet full_space(int dim);
    static ConstraintSet orthant(Vec signs);
    static ConstraintSet box(Vec lo, Vec hi);
    static ConstraintSet polyhedron(Mat A, Vec b);
    static ConstraintSet polyhedral_cone(Mat rays);
    static ConstraintSet parabola();
    static ConstraintSet intersection(std::vector<ConstraintSet> parts);

    Kind kind() const { return kind_; }
    int dim() const { return dim_; }

    bool is_cone(double tol = 1e-12) const;
    bool contains(const Vec& p, double tol = 1e-9) const;
    Vec project(const Vec& p, double tol = 1e-12) const;

    ConstraintSet recession_cone() const;
    ConstraintSet closed_conic_hull() const;

    // Spanning rays of a cone (throws for non-cones and for intersections,
    // whose generators are not derivable from the parts in general).
    std::vector<Vec> cone_generators() const;

    // Finite representative points (vertices, scaled rays, curve samples)
    // used to seed verification sweeps.
    std::vector<Vec> probe_points() const;

    std::string describe() const;

    // Catalog internals, exposed for serialization.
    const Vec& signs() const { return signs_; }
    const Vec& lower() const { return lo_; }
    const Vec& upper() const { return hi_; }
    const Mat& ineq_matrix() const { return A_; }
    const Vec& ineq_rhs() const { return b_; }
    const Mat& rays() const { return R_; }
    const std::vector<ConstraintSet>& parts() const { return parts_; }

  private:
    Kind kind_ = Kind::FullSpace;
    int dim_ = 0;
    Vec signs_, lo_, hi_, b_;
    Mat A_, R_;
    std::vector<ConstraintSet> parts_;
};

// Orthonormal basis (as columns) of the null investments of a market: the
// directions zeta with c zeta = 0, zeta'x = 0 across the jump support, and
// zeta'b = 0. Wealth is insensitive to positions along these.
Mat null_investments(const LevyTriplet& trip, double tol = 1e-10);

// Throws InvariantViolation unless C contains the span of the null
// investments (checked on +-basis vectors at two scales).
void require_null_compatible(const ConstraintSet& C, const Mat& nullBasis);

// Membership in the natural constraints {p : nu[p'x < -1] = 0}, i.e. no
// jump can wipe out more than the full wealth of the position.
bool natural_constraints_contains(const JumpMeasure& nu, const Vec& p,
                                  double tol = 1e-9);

}  // namespace levy
