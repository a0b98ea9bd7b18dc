#pragma once

// Gaussian elimination over K with valuation pivoting.  Shared by the
// determinant-based valuation, element inversion, subfield sections and the
// normal-basis rank test.  Entries that are zero to their precision are
// treated as zero; when elimination cannot complete, the transcript yields a
// dependence among the original rows together with the precision at which it
// was certified.

#include <optional>
#include <vector>

#include "ramlab/localfield.hpp"

namespace ramlab {

struct EliminationOutcome {
    bool completed = false;   // a pivot was found for every row
    i64 det_valuation = 0;    // sum of pivot valuations; determinant valuation when square
    bool have_dependence = false;
    std::vector<KElement> dependence;  // coefficients on the original rows
    i64 blocked_precision = 0;         // entry precision where progress stopped
};

inline EliminationOutcome eliminate_rows(const GroundField& F,
                                         std::vector<std::vector<KElement>> rows) {
    const std::size_t m = rows.size();
    const std::size_t k = m ? rows[0].size() : 0;
    std::vector<std::vector<KElement>> T(m);
    for (std::size_t i = 0; i < m; ++i) {
        T[i].reserve(m);
        for (std::size_t j = 0; j < m; ++j)
            T[i].push_back(i == j ? F.one() : F.structural_zero());
    }
    std::vector<bool> row_used(m, false), col_used(k, false);
    EliminationOutcome out;
    std::size_t rank = 0;
    while (rank < m) {
        std::optional<i64> best;
        std::size_t pr = 0, pc = 0;
        i64 blocked = INT64_MAX;
        for (std::size_t r = 0; r < m; ++r) {
            if (row_used[r]) continue;
            for (std::size_t c = 0; c < k; ++c) {
                if (col_used[c]) continue;
                const auto v = rows[r][c].valuation();
                if (v) {
                    if (!best || *v < *best) {
                        best = *v;
                        pr = r;
                        pc = c;
                    }
                } else {
                    blocked = std::min(blocked, rows[r][c].precision());
                }
            }
        }
        if (!best) {
            // No resolvable entry left: the remaining rows are dependent on
            // the used ones to the available precision.
            std::size_t r = 0;
            while (row_used[r]) ++r;
            out.have_dependence = true;
            out.dependence = T[r];
            out.blocked_precision = blocked == INT64_MAX ? 0 : blocked;
            return out;
        }
        row_used[pr] = true;
        col_used[pc] = true;
        ++rank;
        out.det_valuation += *best;
        const KElement& piv = rows[pr][pc];
        for (std::size_t r = 0; r < m; ++r) {
            if (r == pr || rows[r][pc].is_zero_to_precision()) continue;
            const KElement f = rows[r][pc] / piv;
            for (std::size_t c = 0; c < k; ++c)
                rows[r][c] = rows[r][c] - f * rows[pr][c];
            for (std::size_t j = 0; j < m; ++j) T[r][j] = T[r][j] - f * T[pr][j];
        }
    }
    out.completed = true;
    return out;
}

struct LinearSolveOutcome {
    bool solved = false;
    std::vector<KElement> x;
    i64 fail_precision = 0;  // precision of the inconsistent / unresolvable entry
};

// Solve A x = b where A has m rows and k <= m columns of full column rank.
inline LinearSolveOutcome solve_linear(const GroundField&,
                                       std::vector<std::vector<KElement>> A,
                                       std::vector<KElement> b) {
    const std::size_t m = A.size();
    const std::size_t k = m ? A[0].size() : 0;
    std::vector<std::optional<std::size_t>> pivot_row_of_col(k);
    std::vector<bool> row_used(m, false);
    LinearSolveOutcome out;
    for (std::size_t step = 0; step < k; ++step) {
        std::optional<i64> best;
        std::size_t pr = 0, pc = 0;
        i64 blocked = INT64_MAX;
        for (std::size_t r = 0; r < m; ++r) {
            if (row_used[r]) continue;
            for (std::size_t c = 0; c < k; ++c) {
                if (pivot_row_of_col[c]) continue;
                const auto v = A[r][c].valuation();
                if (v) {
                    if (!best || *v < *best) {
                        best = *v;
                        pr = r;
                        pc = c;
                    }
                } else {
                    blocked = std::min(blocked, A[r][c].precision());
                }
            }
        }
        if (!best) {
            out.fail_precision = blocked == INT64_MAX ? 0 : blocked;
            return out;
        }
        row_used[pr] = true;
        pivot_row_of_col[pc] = pr;
        const KElement piv = A[pr][pc];
        for (std::size_t r = 0; r < m; ++r) {
            if (r == pr || A[r][pc].is_zero_to_precision()) continue;
            const KElement f = A[r][pc] / piv;
            for (std::size_t c = 0; c < k; ++c) A[r][c] = A[r][c] - f * A[pr][c];
            b[r] = b[r] - f * b[pr];
        }
    }
    for (std::size_t r = 0; r < m; ++r) {
        if (!row_used[r] && !b[r].is_zero_to_precision()) {
            out.fail_precision = b[r].precision();
            return out;  // inconsistent
        }
    }
    out.solved = true;
    out.x.reserve(k);
    for (std::size_t c = 0; c < k; ++c) {
        const std::size_t r = *pivot_row_of_col[c];
        out.x.push_back(b[r] / A[r][c]);
    }
    return out;
}

}  // namespace ramlab
