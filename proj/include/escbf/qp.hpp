#pragma once

#include <array>
#include <stdexcept>
#include <vector>

namespace escbf {

class Infeasible : public std::runtime_error {
public:
    Infeasible() : std::runtime_error("QP has no feasible point") {}
};

class NotConverged : public std::runtime_error {
public:
    NotConverged() : std::runtime_error("oracle projection did not converge") {}
};

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;

/// min ||z - z_nom||^2  s.t.  a z >= b, three rows over z = [eta, u1, u2].
struct Qp3 {
    Mat3 a{};
    Vec3 b{};
    Vec3 z_nom{};
};

struct QpSolution {
    Vec3 z{};
    std::vector<int> active_set;  // rows at equality with non-negative multipliers
    double objective = 0.0;       // ||z - z_nom||^2
};

/// Exact solve by enumeration of the 8 active-set candidates. Each subset S
/// projects z_nom onto {a_S z = b_S}; the candidate is accepted when primal
/// feasible on all rows and dual feasible on S, and the accepted candidate
/// with least objective wins. Rank-deficient subsets fall back to the
/// minimum-norm multiplier (pivot threshold 1e-12).
QpSolution solve(const Qp3& qp);

/// Independent cross-check: Dykstra's alternating projections onto the three
/// half-spaces, which converges to the same projection of z_nom. Throws
/// NotConverged when the feasibility residual stays above 1e-7.
Vec3 oracle_solve(const Qp3& qp, int iterations = 20000);

}  // namespace escbf
