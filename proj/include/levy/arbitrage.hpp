#pragma once

#include <map>
#include <string>
#include <vector>

#include "levy/constraints.hpp"
#include "levy/levy_core.hpp"

namespace levy {

// Outcome of the immediate-arbitrage search over a cone: a direction whose
// positions never lose (no Gaussian exposure, no negative jumps, nonnegative
// compensated drift) yet are not null investments.
struct IaoSearch {
    bool found = false;
    Vec xi;              // normalized so ||P xi||_1 = 1, P = proj onto null-perp
    std::string method;  // "exact-lp" or "direction-grid"
    std::string note;    // resolution caveats for grid searches
};

// Method selection: Auto runs the exact LP over cone generators and falls
// back to the direction grid for cones without a generator description;
// the explicit choices force one path (the grid supports dimension <= 3).
enum class IaoMethod { Auto, ExactLp, DirectionGrid };

IaoSearch find_immediate_arbitrage(const LevyTriplet& trip,
                                   const ConstraintSet& cone,
                                   const quad::Options& opt = {},
                                   IaoMethod method = IaoMethod::Auto);

// Certified breakdown of why xi generates nondecreasing wealth; throws
// NotImmediateArbitrage naming the violated clause otherwise.
struct IncreasingProfit {
    Vec xi;
    double gaussianExposure = 0.0;  // xi' c xi (must vanish)
    double compensatedDrift = 0.0;  // xi'(b - int x 1_{|x|<=1} nu) (must be >= 0)
    double worstJump = 0.0;         // inf of xi'x over the jump support
    double positiveJumpRate = 0.0;  // nu-mass of {xi'x > 0}
};
IncreasingProfit increasing_profit_decomposition(const LevyTriplet& trip,
                                                 const Vec& xi,
                                                 const quad::Options& opt = {});

enum class Status { Holds, Fails, NotDecidedHere };
const char* to_string(Status s);

struct Horizon {
    bool finite = true;
    double T = 1.0;
    static Horizon finiteT(double T) {
        if (!(T > 0) || !std::isfinite(T))
            throw SchemaError("finite horizon must be a positive time");
        return Horizon{true, T};
    }
    static Horizon infinite() { return Horizon{false, 0.0}; }
};

// Drift functional ell(p) = p'b + int p'x 1_{|x|>1} nu(dx) evaluated as an
// extended real; a heavy tail the position is exposed to gives +-infinity.
ExtReal drift_functional(const LevyTriplet& trip, const Vec& p,
                         const quad::Options& opt = {});

// Verdicts for the no-free-lunch conditions. Keys: NUIP, NUPBR, NA, NFLVR,
// ESMM-exists, numeraire-exists, ESMD-exists.
struct NflReport {
    Horizon horizon;
    std::map<std::string, Status> statuses;
    IaoSearch iao;           // over C (cone case) or its recession cone
    IaoSearch hullIao;       // conic-hull search backing the ESMM entry
    bool hullSearched = false;
    bool driftChecked = false;      // infinite-horizon branch
    bool driftHolds = false;
    Vec driftWorstDirection;
    std::string driftWorstValue;    // stringified extended real
    std::vector<std::string> notes;
};

NflReport nfl_report(const LevyTriplet& trip, const ConstraintSet& C,
                     const Horizon& horizon, const quad::Options& opt = {});

}  // namespace levy
