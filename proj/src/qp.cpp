#include "escbf/qp.hpp"

#include <algorithm>
#include <cmath>

namespace escbf {

namespace {

double dot3(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm3(const Vec3& a) { return std::sqrt(dot3(a, a)); }

/// Gaussian elimination with complete pivoting for k <= 3. Zero pivots get a
/// minimum-norm treatment: the free component is set to zero when the system
/// stays consistent, otherwise the subset is rejected.
bool solve_small(int k, double m[3][3], double r[3], double x[3]) {
    double scale = 1.0;
    for (int i = 0; i < k; ++i)
        for (int j = 0; j < k; ++j) scale = std::max(scale, std::abs(m[i][j]));
    const double thresh = 1e-12 * scale;

    int row[3] = {0, 1, 2};
    int col[3] = {0, 1, 2};
    int rank = k;
    for (int t = 0; t < k; ++t) {
        int pr = t, pc = t;
        double best = 0.0;
        for (int i = t; i < k; ++i)
            for (int j = t; j < k; ++j)
                if (std::abs(m[row[i]][col[j]]) > best) {
                    best = std::abs(m[row[i]][col[j]]);
                    pr = i;
                    pc = j;
                }
        if (best <= thresh) {
            rank = t;
            break;
        }
        std::swap(row[t], row[pr]);
        std::swap(col[t], col[pc]);
        const double piv = m[row[t]][col[t]];
        for (int i = t + 1; i < k; ++i) {
            const double f = m[row[i]][col[t]] / piv;
            for (int j = t; j < k; ++j) m[row[i]][col[j]] -= f * m[row[t]][col[j]];
            r[row[i]] -= f * r[row[t]];
        }
    }
    for (int i = rank; i < k; ++i)
        if (std::abs(r[row[i]]) > 1e-9 * std::max(1.0, scale)) return false;

    double y[3] = {0.0, 0.0, 0.0};  // solution in pivoted column order
    for (int t = rank - 1; t >= 0; --t) {
        double acc = r[row[t]];
        for (int j = t + 1; j < k; ++j) acc -= m[row[t]][col[j]] * y[j];
        y[t] = acc / m[row[t]][col[t]];
    }
    for (int t = 0; t < k; ++t) x[col[t]] = y[t];
    return true;
}

}  // namespace

QpSolution solve(const Qp3& qp) {
    QpSolution best;
    bool found = false;

    for (int mask = 0; mask < 8; ++mask) {
        int rows[3];
        int k = 0;
        for (int i = 0; i < 3; ++i)
            if (mask & (1 << i)) rows[k++] = i;

        double g[3][3] = {};
        double rhs[3] = {};
        for (int p = 0; p < k; ++p) {
            rhs[rows[p]] = qp.b[rows[p]] - dot3(qp.a[rows[p]], qp.z_nom);
            for (int q = 0; q < k; ++q) g[rows[p]][rows[q]] = dot3(qp.a[rows[p]], qp.a[rows[q]]);
        }
        // Compact to the leading k x k block for the solver.
        double gc[3][3] = {};
        double rc[3] = {};
        for (int p = 0; p < k; ++p) {
            rc[p] = rhs[rows[p]];
            for (int q = 0; q < k; ++q) gc[p][q] = g[rows[p]][rows[q]];
        }
        double mu[3] = {};
        if (k > 0 && !solve_small(k, gc, rc, mu)) continue;

        Vec3 z = qp.z_nom;
        for (int p = 0; p < k; ++p)
            for (int j = 0; j < 3; ++j) z[j] += mu[p] * qp.a[rows[p]][j];

        const double zn = norm3(z);
        bool dual_ok = true;
        for (int p = 0; p < k; ++p)
            if (2.0 * mu[p] < -1e-9 * std::max(1.0, zn)) dual_ok = false;
        if (!dual_ok) continue;

        bool primal_ok = true;
        for (int i = 0; i < 3; ++i) {
            const double tol =
                1e-9 * std::max({1.0, norm3(qp.a[i]) * zn, std::abs(qp.b[i])});
            if (dot3(qp.a[i], z) < qp.b[i] - tol) primal_ok = false;
        }
        if (!primal_ok) continue;

        Vec3 diff{z[0] - qp.z_nom[0], z[1] - qp.z_nom[1], z[2] - qp.z_nom[2]};
        const double obj = dot3(diff, diff);
        if (!found || obj < best.objective - 1e-15 ||
            (obj <= best.objective + 1e-15 && k < static_cast<int>(best.active_set.size()))) {
            best.z = z;
            best.objective = obj;
            best.active_set.assign(rows, rows + k);
            found = true;
        }
    }
    if (!found) throw Infeasible();
    return best;
}

Vec3 oracle_solve(const Qp3& qp, int iterations) {
    Vec3 z = qp.z_nom;
    Vec3 corr[3] = {};

    auto residual = [&](const Vec3& pt) {
        double r = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double scale =
                std::max({1.0, norm3(qp.a[i]) * norm3(pt), std::abs(qp.b[i])});
            r = std::max(r, (qp.b[i] - dot3(qp.a[i], pt)) / scale);
        }
        return r;
    };

    // Exact polish once the alternating projections have identified the rows
    // being pushed against. Projects z_nom onto the equality system of the
    // candidate active set and verifies the full KKT conditions; rows with
    // negative multipliers are dropped and violated rows added until the set
    // settles or the attempt is abandoned.
    auto polish = [&](Vec3& out) {
        bool act[3];
        for (int i = 0; i < 3; ++i)
            act[i] = norm3(corr[i]) > 1e-12 ||
                     dot3(qp.a[i], z) - qp.b[i] <
                         1e-6 * std::max({1.0, norm3(qp.a[i]) * norm3(z), std::abs(qp.b[i])});
        for (int attempt = 0; attempt < 8; ++attempt) {
            int rows[3];
            int k = 0;
            for (int i = 0; i < 3; ++i)
                if (act[i]) rows[k++] = i;

            double g[3][3] = {};
            double r[3] = {};
            for (int p = 0; p < k; ++p) {
                r[p] = qp.b[rows[p]] - dot3(qp.a[rows[p]], qp.z_nom);
                for (int q = 0; q < k; ++q) g[p][q] = dot3(qp.a[rows[p]], qp.a[rows[q]]);
            }
            double lam[3] = {};
            if (k > 0 && !solve_small(k, g, r, lam)) return false;

            Vec3 cand = qp.z_nom;
            for (int p = 0; p < k; ++p)
                for (int j = 0; j < 3; ++j) cand[j] += lam[p] * qp.a[rows[p]][j];

            const double zn = std::max(1.0, norm3(cand));
            int worst_neg = -1;
            for (int p = 0; p < k; ++p)
                if (lam[p] < -1e-10 * zn &&
                    (worst_neg < 0 || lam[p] < lam[worst_neg])) worst_neg = p;
            if (worst_neg >= 0) {
                act[rows[worst_neg]] = false;
                continue;
            }
            bool violated = false;
            for (int i = 0; i < 3; ++i) {
                const double tol =
                    1e-10 * std::max({1.0, norm3(qp.a[i]) * zn, std::abs(qp.b[i])});
                if (dot3(qp.a[i], cand) < qp.b[i] - tol && !act[i]) {
                    act[i] = true;
                    violated = true;
                }
            }
            if (violated) continue;
            if (residual(cand) > 1e-9) return false;
            out = cand;
            return true;
        }
        return false;
    };

    for (int it = 0; it < iterations; ++it) {
        for (int i = 0; i < 3; ++i) {
            Vec3 y{z[0] + corr[i][0], z[1] + corr[i][1], z[2] + corr[i][2]};
            Vec3 proj = y;
            const double nn = dot3(qp.a[i], qp.a[i]);
            if (nn > 0.0) {
                const double gap = qp.b[i] - dot3(qp.a[i], y);
                if (gap > 0.0)
                    for (int j = 0; j < 3; ++j) proj[j] += qp.a[i][j] * gap / nn;
            }
            for (int j = 0; j < 3; ++j) corr[i][j] = y[j] - proj[j];
            z = proj;
        }
        if (it % 64 == 63) {
            Vec3 polished;
            if (polish(polished)) return polished;
            if (residual(z) <= 1e-12) break;
        }
    }
    Vec3 polished;
    if (polish(polished)) return polished;
    if (residual(z) > 1e-7) throw NotConverged();
    return z;
}

}  // namespace escbf
