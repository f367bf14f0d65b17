#pragma once
// Shared basics: dense linear algebra aliases, the tagged extended-real
// value type, and the error taxonomy used across the library.

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>

namespace levy {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ===========================================================================
// Errors
// ===========================================================================

struct LevyError : std::runtime_error {
    explicit LevyError(const std::string& what) : std::runtime_error(what) {}
};

struct QuadratureDivergence : LevyError { using LevyError::LevyError; };
struct UnsupportedVariant   : LevyError { using LevyError::LevyError; };
struct ConvergenceFailure   : LevyError { using LevyError::LevyError; };
struct InvariantViolation   : LevyError { using LevyError::LevyError; };
struct IaoPresent           : LevyError { using LevyError::LevyError; };
struct TiltNotIntegrable    : LevyError { using LevyError::LevyError; };
struct CholeskyFailure      : LevyError { using LevyError::LevyError; };
struct NonPositiveWealth    : LevyError { using LevyError::LevyError; };
struct MonotonicityViolation: LevyError { using LevyError::LevyError; };
struct HorizonCapReached    : LevyError { using LevyError::LevyError; };
struct ConstrainedMarket    : LevyError { using LevyError::LevyError; };
struct SchemaError          : LevyError { using LevyError::LevyError; };
struct NotImmediateArbitrage: LevyError { using LevyError::LevyError; };

// ===========================================================================
// Extended reals: {finite(x), +inf, -inf} with explicit tags; no sentinel
// floats travel through results. inf - inf is a hard error.
// ===========================================================================

class ExtReal {
  public:
    enum class Kind { Finite, PosInf, NegInf };

    ExtReal() : kind_(Kind::Finite), value_(0.0) {}
    static ExtReal finite(double v) {
        if (!std::isfinite(v)) throw LevyError("ExtReal::finite got non-finite value");
        ExtReal r; r.kind_ = Kind::Finite; r.value_ = v; return r;
    }
    static ExtReal pos_inf() { ExtReal r; r.kind_ = Kind::PosInf; return r; }
    static ExtReal neg_inf() { ExtReal r; r.kind_ = Kind::NegInf; return r; }

    Kind kind() const { return kind_; }
    bool is_finite() const { return kind_ == Kind::Finite; }
    bool is_pos_inf() const { return kind_ == Kind::PosInf; }
    bool is_neg_inf() const { return kind_ == Kind::NegInf; }

    double value() const {
        if (!is_finite()) throw LevyError("ExtReal: value() on infinite tag " + str());
        return value_;
    }
    // value() with a caller-supplied explanation when the quantity diverged.
    double expect_finite(const std::string& what) const {
        if (!is_finite()) throw QuadratureDivergence(what + " (" + str() + ")");
        return value_;
    }
    // Collapse to double for comparisons/plots; infinities map to HUGE_VAL.
    double as_double_unsafe() const {
        switch (kind_) {
            case Kind::PosInf: return HUGE_VAL;
            case Kind::NegInf: return -HUGE_VAL;
            default: return value_;
        }
    }

    ExtReal operator-() const {
        switch (kind_) {
            case Kind::PosInf: return neg_inf();
            case Kind::NegInf: return pos_inf();
            default: return finite(-value_);
        }
    }

    friend ExtReal operator+(const ExtReal& a, const ExtReal& b) {
        if (a.is_finite() && b.is_finite()) return finite(a.value_ + b.value_);
        if (a.is_pos_inf() && b.is_neg_inf()) throw LevyError("ExtReal: +inf + -inf");
        if (a.is_neg_inf() && b.is_pos_inf()) throw LevyError("ExtReal: -inf + +inf");
        if (a.is_pos_inf() || b.is_pos_inf()) return pos_inf();
        return neg_inf();
    }
    friend ExtReal operator-(const ExtReal& a, const ExtReal& b) { return a + (-b); }

    friend bool operator==(const ExtReal& a, const ExtReal& b) {
        if (a.kind_ != b.kind_) return false;
        return !a.is_finite() || a.value_ == b.value_;
    }
    friend bool operator<(const ExtReal& a, const ExtReal& b) {
        return a.as_double_unsafe() < b.as_double_unsafe();
    }
    friend bool operator<=(const ExtReal& a, const ExtReal& b) {
        return a == b || a < b;
    }

    std::string str() const {
        switch (kind_) {
            case Kind::PosInf: return "+inf";
            case Kind::NegInf: return "-inf";
            default: return std::to_string(value_);
        }
    }

  private:
    Kind kind_;
    double value_;
};

// Convergence classification of one-sided improper integrals of the form
//   int t^{-alpha} (log(1+t))^{-beta} exp(-gamma t - delta t^2) * t^k dt
// over an unbounded tail. `decide(k)` answers "is the k-th absolute moment
// of this tail finite?"; log_moment handles the log(1+t) weight.
struct TailLaw {
    bool bounded = true;   // no unbounded tail at all
    double alpha = 0.0;    // polynomial decay exponent of the density
    double beta = 0.0;     // log decay exponent
    double gamma = 0.0;    // exponential rate (>0 decay, <0 growth)
    double delta = 0.0;    // Gaussian rate (>0 decay)

    enum class Verdict { Converges, Diverges };

    Verdict moment(double k) const {
        if (bounded) return Verdict::Converges;
        if (delta > 0) return Verdict::Converges;
        if (gamma > 0) return Verdict::Converges;
        if (gamma < 0) return Verdict::Diverges;
        double a = alpha - k;
        if (a > 1.0) return Verdict::Converges;
        if (a < 1.0) return Verdict::Diverges;
        return beta > 1.0 ? Verdict::Converges : Verdict::Diverges;
    }
    Verdict log_moment() const {
        if (bounded) return Verdict::Converges;
        if (delta > 0 || gamma > 0) return Verdict::Converges;
        if (gamma < 0) return Verdict::Diverges;
        if (alpha > 1.0) return Verdict::Converges;
        if (alpha < 1.0) return Verdict::Diverges;
        return beta > 2.0 ? Verdict::Converges : Verdict::Diverges;
    }
    // k-th moment against exp(a t): exp-tilted convergence test.
    Verdict exp_moment(double a, double k = 0.0) const {
        if (bounded) return Verdict::Converges;
        if (delta > 0) return Verdict::Converges;
        double g = gamma - a;
        if (g > 0) return Verdict::Converges;
        if (g < 0) return Verdict::Diverges;
        TailLaw flat{bounded, alpha, beta, 0.0, 0.0};
        return flat.moment(k);
    }
};

}  // namespace levy
