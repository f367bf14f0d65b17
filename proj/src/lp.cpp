#include "levy/lp.hpp"

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <vector>

namespace levy::lp {

namespace {

// Tableau simplex with Bland's rule on min c'z, W z = h, z >= 0 where the
// initial basis (identity columns at `basis`) is feasible. Returns false on
// unboundedness.
bool run_simplex(Mat& T, std::vector<int>& basis, int nCols, double tol) {
    const Eigen::Index m = T.rows() - 1;
    for (int iter = 0; iter < 20000; ++iter) {
        Eigen::Index enter = -1;
        for (Eigen::Index j = 0; j < nCols; ++j) {
            if (T(m, j) < -tol) {  // Bland: first improving column
                enter = j;
                break;
            }
        }
        if (enter < 0) return true;
        Eigen::Index leave = -1;
        double bestRatio = 0.0;
        for (Eigen::Index i = 0; i < m; ++i) {
            if (T(i, enter) > tol) {
                const double ratio = T(i, nCols) / T(i, enter);
                if (leave < 0 || ratio < bestRatio - 1e-15 ||
                    (std::abs(ratio - bestRatio) <= 1e-15 &&
                     basis[i] < basis[leave])) {
                    leave = i;
                    bestRatio = ratio;
                }
            }
        }
        if (leave < 0) return false;
        const double piv = T(leave, enter);
        T.row(leave) /= piv;
        for (Eigen::Index i = 0; i <= m; ++i) {
            if (i == leave) continue;
            const double f = T(i, enter);
            if (f != 0.0) T.row(i) -= f * T.row(leave);
        }
        basis[leave] = static_cast<int>(enter);
    }
    throw ConvergenceFailure("simplex exceeded its iteration budget");
}

}  // namespace

Result solve(const Vec& c, const Mat& A, const Vec& b, const Mat& Aeq,
             const Vec& beq, double tol) {
    const int n = static_cast<int>(c.size());
    const int mi = static_cast<int>(A.rows());
    const int me = static_cast<int>(Aeq.rows());
    const int m = mi + me;

    // Standard form variables: [x+, x-, slacks]; artificials appended later.
    const int nStruct = 2 * n + mi;
    Mat W = Mat::Zero(m, nStruct);
    Vec h(m);
    for (int i = 0; i < mi; ++i) {
        W.block(i, 0, 1, n) = A.row(i);
        W.block(i, n, 1, n) = -A.row(i);
        W(i, 2 * n + i) = 1.0;
        h(i) = b(i);
    }
    for (int i = 0; i < me; ++i) {
        W.block(mi + i, 0, 1, n) = Aeq.row(i);
        W.block(mi + i, n, 1, n) = -Aeq.row(i);
        h(mi + i) = beq(i);
    }
    for (int i = 0; i < m; ++i) {
        if (h(i) < 0) {
            W.row(i) *= -1.0;
            h(i) = -h(i);
        }
    }

    // Phase 1 tableau: [W | I_art | h]; cost = sum of artificials.
    const int total = nStruct + m;
    Mat T = Mat::Zero(m + 1, total + 1);
    T.block(0, 0, m, nStruct) = W;
    std::vector<int> basis(m);
    for (int i = 0; i < m; ++i) {
        T(i, nStruct + i) = 1.0;
        basis[i] = nStruct + i;
    }
    T.col(total).head(m) = h;
    for (int j = 0; j < total + 1; ++j) {
        double s = 0.0;
        for (int i = 0; i < m; ++i) s += T(i, j);
        T(m, j) = (j >= nStruct && j < total) ? 1.0 - s : -s;
    }

    Result out;
    if (!run_simplex(T, basis, total, tol))
        throw ConvergenceFailure("phase-1 simplex reported an unbounded program");
    if (T(m, total) < -10 * tol) {
        out.status = Result::Status::Infeasible;
        return out;
    }

    // Drive any artificial still basic at level ~0 out of the basis.
    for (int i = 0; i < m; ++i) {
        if (basis[i] < nStruct) continue;
        int enter = -1;
        for (int j = 0; j < nStruct; ++j) {
            if (std::abs(T(i, j)) > tol) {
                enter = j;
                break;
            }
        }
        if (enter < 0) continue;  // redundant row
        const double piv = T(i, enter);
        T.row(i) /= piv;
        for (int r = 0; r <= m; ++r) {
            if (r == i) continue;
            const double f = T(r, enter);
            if (f != 0.0) T.row(r) -= f * T.row(i);
        }
        basis[i] = enter;
    }

    // Phase 2: rebuild the cost row for c over structural columns only.
    Mat T2 = Mat::Zero(m + 1, nStruct + 1);
    T2.block(0, 0, m, nStruct) = T.block(0, 0, m, nStruct);
    T2.col(nStruct).head(m) = T.col(total).head(m);
    Vec cost = Vec::Zero(nStruct);
    cost.head(n) = c;
    cost.segment(n, n) = -c;
    for (int j = 0; j <= nStruct; ++j) T2(m, j) = (j < nStruct) ? cost(j) : 0.0;
    for (int i = 0; i < m; ++i) {
        if (basis[i] >= nStruct) continue;  // zeroed artificial on redundant row
        const double f = T2(m, basis[i]);
        if (f != 0.0) T2.row(m) -= f * T2.row(i);
    }

    if (!run_simplex(T2, basis, nStruct, tol)) {
        out.status = Result::Status::Unbounded;
        return out;
    }

    Vec z = Vec::Zero(nStruct);
    for (int i = 0; i < m; ++i)
        if (basis[i] < nStruct) z(basis[i]) = T2(i, nStruct);
    out.status = Result::Status::Optimal;
    out.x = z.head(n) - z.segment(n, n);
    out.objective = c.dot(out.x);
    return out;
}

bool feasible(const Mat& A, const Vec& b, const Mat& Aeq, const Vec& beq,
              double tol) {
    const int n = static_cast<int>(std::max(A.cols(), Aeq.cols()));
    const Result r = solve(Vec::Zero(n), A, b, Aeq, beq, tol);
    return r.status == Result::Status::Optimal;
}

Vec nnls(const Mat& A, const Vec& y, double tol, int maxIter) {
    const int n = static_cast<int>(A.cols());
    if (maxIter <= 0) maxIter = 3 * n + 30;
    Vec x = Vec::Zero(n);
    std::vector<bool> passive(n, false);
    Vec w = A.transpose() * (y - A * x);

    for (int outer = 0; outer < maxIter; ++outer) {
        int t = -1;
        double best = tol;
        for (int j = 0; j < n; ++j) {
            if (!passive[j] && w(j) > best) {
                best = w(j);
                t = j;
            }
        }
        if (t < 0) break;
        passive[t] = true;

        for (int inner = 0; inner < maxIter; ++inner) {
            std::vector<int> P;
            for (int j = 0; j < n; ++j)
                if (passive[j]) P.push_back(j);
            Mat Ap(A.rows(), static_cast<int>(P.size()));
            for (size_t k = 0; k < P.size(); ++k) Ap.col(k) = A.col(P[k]);
            Vec zp = Ap.colPivHouseholderQr().solve(y);

            bool allPos = true;
            for (size_t k = 0; k < P.size(); ++k)
                if (zp(k) <= tol) allPos = false;
            if (allPos) {
                x.setZero();
                for (size_t k = 0; k < P.size(); ++k) x(P[k]) = zp(k);
                break;
            }
            double alpha = 1.0;
            for (size_t k = 0; k < P.size(); ++k) {
                if (zp(k) <= tol) {
                    const double xi = x(P[k]);
                    if (xi - zp(k) > 0)
                        alpha = std::min(alpha, xi / (xi - zp(k)));
                }
            }
            for (size_t k = 0; k < P.size(); ++k) {
                x(P[k]) += alpha * (zp(k) - x(P[k]));
                if (x(P[k]) <= tol) {
                    x(P[k]) = 0.0;
                    passive[P[k]] = false;
                }
            }
        }
        w = A.transpose() * (y - A * x);
    }
    return x;
}

}  // namespace levy::lp
