#pragma once

#include "levy/common.hpp"

namespace levy::lp {

// Dense two-phase simplex for the small programs used by the arbitrage
// search and cone handling. Variables are free; minimize c'x subject to
// A x <= b and Aeq x = beq (either block may be empty).
struct Result {
    enum class Status { Optimal, Infeasible, Unbounded };
    Status status = Status::Infeasible;
    Vec x;
    double objective = 0.0;
};

Result solve(const Vec& c, const Mat& A, const Vec& b, const Mat& Aeq,
             const Vec& beq, double tol = 1e-9);

// Convenience: pure feasibility of {A x <= b, Aeq x = beq}.
bool feasible(const Mat& A, const Vec& b, const Mat& Aeq, const Vec& beq,
              double tol = 1e-9);

// Lawson-Hanson nonnegative least squares: argmin ||A x - y||_2 over x >= 0.
Vec nnls(const Mat& A, const Vec& y, double tol = 1e-10, int maxIter = 0);

}  // namespace levy::lp
