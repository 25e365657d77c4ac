#include "nearfar/assoc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nearfar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Equal-total slack for tie detection; IoU totals are O(10) so absolute works.
constexpr double kTieTol = 1e-10;

// O(n³) Hungarian on a square cost matrix (minimization, potentials form).
// Returns row → column.
std::vector<int> hungarian_square(const std::vector<std::vector<double>>& cost, int n) {
    std::vector<double> u(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<double> v(static_cast<std::size_t>(n) + 1, 0.0);
    std::vector<int> p(static_cast<std::size_t>(n) + 1, 0);
    std::vector<int> way(static_cast<std::size_t>(n) + 1, 0);

    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<std::size_t>(n) + 1, kInf);
        std::vector<char> used(static_cast<std::size_t>(n) + 1, 0);
        do {
            used[static_cast<std::size_t>(j0)] = 1;
            const int i0 = p[static_cast<std::size_t>(j0)];
            int j1 = 0;
            double delta = kInf;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) continue;
                const double cur = cost[static_cast<std::size_t>(i0 - 1)][static_cast<std::size_t>(j - 1)] -
                                   u[static_cast<std::size_t>(i0)] - v[static_cast<std::size_t>(j)];
                if (cur < minv[static_cast<std::size_t>(j)]) {
                    minv[static_cast<std::size_t>(j)] = cur;
                    way[static_cast<std::size_t>(j)] = j0;
                }
                if (minv[static_cast<std::size_t>(j)] < delta) {
                    delta = minv[static_cast<std::size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<std::size_t>(j)]) {
                    u[static_cast<std::size_t>(p[static_cast<std::size_t>(j)])] += delta;
                    v[static_cast<std::size_t>(j)] -= delta;
                } else {
                    minv[static_cast<std::size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (p[static_cast<std::size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<std::size_t>(j0)];
            p[static_cast<std::size_t>(j0)] = p[static_cast<std::size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }

    std::vector<int> row_to_col(static_cast<std::size_t>(n), -1);
    for (int j = 1; j <= n; ++j) {
        if (p[static_cast<std::size_t>(j)] > 0) {
            row_to_col[static_cast<std::size_t>(p[static_cast<std::size_t>(j)] - 1)] = j - 1;
        }
    }
    return row_to_col;
}

// Best achievable score total over the submatrix of free rows × free cols,
// assigning min(|rows|, |cols|) pairs. Dummy padding carries score 0.
double optimal_total(const std::vector<std::vector<double>>& scores,
                     const std::vector<int>& rows, const std::vector<int>& cols) {
    if (rows.empty() || cols.empty()) return 0.0;
    const int n = static_cast<int>(std::max(rows.size(), cols.size()));
    std::vector<std::vector<double>> cost(static_cast<std::size_t>(n),
                                          std::vector<double>(static_cast<std::size_t>(n), 1.0));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            cost[i][j] = 1.0 - scores[static_cast<std::size_t>(rows[i])][static_cast<std::size_t>(cols[j])];
        }
    }
    const std::vector<int> row_to_col = hungarian_square(cost, n);
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const int j = row_to_col[i];
        if (j >= 0 && static_cast<std::size_t>(j) < cols.size()) {
            total += scores[static_cast<std::size_t>(rows[i])][static_cast<std::size_t>(cols[j])];
        }
    }
    return total;
}

}  // namespace

std::vector<std::pair<int, int>> solve_assignment(
    const std::vector<std::vector<double>>& scores) {
    const std::size_t n_rows = scores.size();
    const std::size_t n_cols = n_rows == 0 ? 0 : scores[0].size();
    for (const auto& row : scores) {
        if (row.size() != n_cols) {
            throw std::invalid_argument("solve_assignment: ragged score matrix");
        }
        for (double x : row) {
            if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
                throw std::invalid_argument("solve_assignment: scores must lie in [0, 1]");
            }
        }
    }
    if (n_rows == 0 || n_cols == 0) return {};

    std::vector<int> all_rows(n_rows);
    std::vector<int> all_cols(n_cols);
    for (std::size_t i = 0; i < n_rows; ++i) all_rows[i] = static_cast<int>(i);
    for (std::size_t j = 0; j < n_cols; ++j) all_cols[j] = static_cast<int>(j);
    const double best = optimal_total(scores, all_rows, all_cols);

    // Fix pairs row by row, smallest column first, keeping only choices that
    // still complete to an optimal total. This yields the lexicographically
    // smallest optimal pair list.
    const std::size_t want = std::min(n_rows, n_cols);
    std::vector<std::pair<int, int>> pairs;
    std::vector<char> col_used(n_cols, 0);
    double fixed_sum = 0.0;

    for (std::size_t r = 0; r < n_rows && pairs.size() < want; ++r) {
        std::vector<int> rows_below;
        for (std::size_t i = r + 1; i < n_rows; ++i) rows_below.push_back(static_cast<int>(i));

        // A row with no optimal-preserving column stays unassigned; that can
        // only happen when rows outnumber columns.
        for (std::size_t c = 0; c < n_cols; ++c) {
            if (col_used[c]) continue;
            std::vector<int> cols_left;
            for (std::size_t j = 0; j < n_cols; ++j) {
                if (!col_used[j] && j != c) cols_left.push_back(static_cast<int>(j));
            }
            const double total =
                fixed_sum + scores[r][c] + optimal_total(scores, rows_below, cols_left);
            if (total >= best - kTieTol) {
                pairs.emplace_back(static_cast<int>(r), static_cast<int>(c));
                col_used[c] = 1;
                fixed_sum += scores[r][c];
                break;
            }
        }
    }
    return pairs;
}

MatchResult match_detections(const std::vector<CornerBox>& detections,
                             const std::vector<CornerBox>& predictions, double iou_min) {
    if (!(iou_min >= 0.0 && iou_min <= 1.0)) {
        throw std::invalid_argument("match_detections: iou_min must lie in [0, 1]");
    }

    std::vector<std::vector<double>> scores(detections.size(),
                                            std::vector<double>(predictions.size(), 0.0));
    for (std::size_t i = 0; i < detections.size(); ++i) {
        for (std::size_t j = 0; j < predictions.size(); ++j) {
            scores[i][j] = iou(detections[i], predictions[j]);
        }
    }

    MatchResult result;
    std::vector<char> det_matched(detections.size(), 0);
    std::vector<char> trk_matched(predictions.size(), 0);

    for (const auto& [d, t] : solve_assignment(scores)) {
        if (scores[static_cast<std::size_t>(d)][static_cast<std::size_t>(t)] < iou_min) {
            continue;  // demoted to unmatched on both sides
        }
        result.matched.emplace_back(d, t);
        det_matched[static_cast<std::size_t>(d)] = 1;
        trk_matched[static_cast<std::size_t>(t)] = 1;
    }
    std::sort(result.matched.begin(), result.matched.end());

    for (std::size_t i = 0; i < detections.size(); ++i) {
        if (!det_matched[i]) result.unmatched_detections.push_back(static_cast<int>(i));
    }
    for (std::size_t j = 0; j < predictions.size(); ++j) {
        if (!trk_matched[j]) result.unmatched_trackers.push_back(static_cast<int>(j));
    }
    return result;
}

}  // namespace nearfar
