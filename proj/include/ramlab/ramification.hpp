// Ramification filtration of a totally ramified elementary abelian
// p-extension N/K, together with the numeric invariants derived from it:
// lower breaks, group orders at each break, upper breaks, and trace
// valuation shifts.
//
// The break of a nonidentity automorphism s is v_N(s(pi_N) - pi_N) - 1.
// Everything else here is exact integer bookkeeping on top of those values.

#pragma once

#include <algorithm>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "ramlab/galois.hpp"

namespace ramlab {

// Exact rational with a reduced representation.  Upper breaks are computed
// in this form first; integrality is a theorem, so it is asserted rather
// than assumed.
struct Fraction {
    i64 num = 0;
    i64 den = 1;

    static Fraction make(i64 num, i64 den) {
        const i64 g = std::gcd(num, den);
        if (g > 1) {
            num /= g;
            den /= g;
        }
        return Fraction{num, den};
    }
    bool integral() const noexcept { return den == 1; }
    std::string str() const {
        return integral() ? std::to_string(num)
                          : std::to_string(num) + "/" + std::to_string(den);
    }
};

namespace detail {

// u_i * p^n = b_1 g_{b_1} + sum_{j=2..i} (b_j - b_{j-1}) g_{b_j}
inline std::vector<Fraction> upper_fractions(const std::vector<i64>& lower,
                                             const std::vector<i64>& orders,
                                             i64 degree) {
    std::vector<Fraction> out;
    i64 acc = 0;
    for (std::size_t i = 0; i < lower.size(); ++i) {
        acc += (i == 0 ? lower[0] : lower[i] - lower[i - 1]) * orders[i];
        out.push_back(Fraction::make(acc, degree));
    }
    return out;
}

}  // namespace detail

inline std::vector<i64> lower_to_upper(const std::vector<i64>& lower,
                                       const std::vector<i64>& orders,
                                       i64 degree) {
    if (lower.size() != orders.size() || lower.empty())
        throw InputError("lower_to_upper: breaks and orders must align");
    const auto raw = detail::upper_fractions(lower, orders, degree);
    std::vector<i64> out;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        if (!raw[i].integral())
            throw ViolationError("upper ramification break u_" +
                                 std::to_string(i + 1) + " = " + raw[i].str() +
                                 " is not an integer");
        out.push_back(raw[i].num);
    }
    return out;
}

struct RamificationData {
    i64 p = 0;
    std::size_t n = 0;  // number of independent degree-p layers
    i64 degree = 0;     // p^n
    std::size_t m = 0;  // number of distinct breaks

    std::vector<i64> lower_breaks;   // b_1 < ... < b_m
    std::vector<i64> order_at_break; // g_{b_i}, aligned with lower_breaks
    std::vector<Fraction> upper_raw; // exact values prior to the integrality check
    std::vector<i64> upper_breaks;   // u_1 < ... < u_m
    i64 t_G = 0;                     // sum of breaks over all nonidentity elements
    i64 b_max = 0;
    bool hypothesis_ok = false;      // every u_i coprime to p

    // Group enumeration in mixed-radix order; break_by_index[encode(s)] is
    // the break of s, -1 for the identity.
    std::vector<GaloisVector> group;
    std::vector<i64> break_by_index;

    std::size_t encode(const GaloisVector& g) const {
        std::size_t idx = 0, scale = 1;
        for (std::size_t i = 0; i < g.size(); ++i) {
            idx += std::size_t(g[i]) * scale;
            scale *= std::size_t(p);
        }
        return idx;
    }
    i64 break_of(const GaloisVector& g) const {
        const i64 b = break_by_index.at(encode(g));
        if (b < 0) throw InputError("break_of: identity has no break");
        return b;
    }
    // |G_b| for any integer b >= 1: the identity plus everything breaking at
    // b or later.
    i64 order_at(i64 b) const {
        for (std::size_t i = 0; i < m; ++i)
            if (lower_breaks[i] >= b) return order_at_break[i];
        return 1;
    }
};

inline RamificationData compute_filtration(
    const ExtensionField& N, std::optional<NElement> alt_uniformizer = {}) {
    RamificationData data;
    data.p = N.ground().p();
    data.n = N.layer_count();
    data.degree = static_cast<i64>(N.degree());

    NElement pi = alt_uniformizer ? *alt_uniformizer : N.uniformizer();
    {
        const auto v = N.n_valuation(pi);
        if (!v) throw PrecisionError("filtration: uniformizer valuation inconclusive");
        if (*v != 1) throw InputError("filtration: supplied element is not a uniformizer");
    }

    data.group = N.full_group().elements();
    data.break_by_index.assign(std::size_t(data.degree), -1);
    for (const auto& s : data.group) {
        if (std::all_of(s.begin(), s.end(), [](i64 c) { return c == 0; }))
            continue;
        const NElement moved = N.apply_galois(s, pi) - pi;
        const auto v = N.n_valuation(moved);
        if (!v) {
            std::string name;
            for (std::size_t i = 0; i < s.size(); ++i)
                name += (i ? "," : "(") + std::to_string(s[i]);
            throw PrecisionError("filtration: break of " + name +
                                 ") inconclusive at precision " +
                                 std::to_string(moved.precision()));
        }
        const i64 br = *v - 1;
        if (br < 1)
            throw ViolationError("filtration: automorphism with break " +
                                 std::to_string(br) +
                                 " contradicts total wild ramification");
        data.break_by_index[data.encode(s)] = br;
        data.t_G += br;
    }

    std::vector<i64> all;
    for (i64 b : data.break_by_index)
        if (b >= 0) all.push_back(b);
    std::sort(all.begin(), all.end());
    all.erase(std::unique(all.begin(), all.end()), all.end());
    data.lower_breaks = all;
    data.m = all.size();
    for (i64 b : all) {
        i64 count = 1;
        for (i64 x : data.break_by_index)
            if (x >= b) ++count;
        data.order_at_break.push_back(count);
    }
    data.b_max = all.back();

    data.upper_raw =
        detail::upper_fractions(data.lower_breaks, data.order_at_break, data.degree);
    data.upper_breaks =
        lower_to_upper(data.lower_breaks, data.order_at_break, data.degree);
    data.hypothesis_ok = true;
    for (i64 u : data.upper_breaks)
        if (u % data.p == 0) data.hypothesis_ok = false;
    return data;
}

// Filtration induced on a subgroup by intersection.  All trace bookkeeping
// for N over an intermediate field runs off these numbers.
struct SubgroupFiltration {
    std::vector<i64> lower_breaks;
    std::vector<i64> orders;
    i64 t_sum = 0;
    i64 b_max = 0;  // 0 for the trivial subgroup
};

inline SubgroupFiltration induced_filtration(const RamificationData& data,
                                             const Subgroup& H) {
    SubgroupFiltration f;
    std::vector<i64> breaks;
    for (const auto& s : H.elements()) {
        if (std::all_of(s.begin(), s.end(), [](i64 c) { return c == 0; }))
            continue;
        breaks.push_back(data.break_of(s));
        f.t_sum += breaks.back();
    }
    if (breaks.empty()) return f;
    std::sort(breaks.begin(), breaks.end());
    f.b_max = breaks.back();
    std::vector<i64> uniq = breaks;
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    f.lower_breaks = uniq;
    for (i64 b : uniq) {
        i64 count = 1;
        for (i64 x : breaks)
            if (x >= b) ++count;
        f.orders.push_back(count);
    }
    return f;
}

inline i64 t_sum(const RamificationData& data, const Subgroup& H) {
    return induced_filtration(data, H).t_sum;
}

struct HypothesisReport {
    bool ok = true;
    std::vector<i64> failing_upper;
};

inline HypothesisReport check_hypothesis(const RamificationData& data) {
    HypothesisReport rep;
    for (i64 u : data.upper_breaks)
        if (u % data.p == 0) {
            rep.ok = false;
            rep.failing_upper.push_back(u);
        }
    return rep;
}

struct StructuralCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline std::vector<StructuralCheck> structural_checks(const RamificationData& d,
                                                      const std::string& context) {
    std::vector<StructuralCheck> out;
    auto add = [&](std::string name, bool pass, std::string detail) {
        out.push_back({std::move(name), pass, context + ": " + detail});
    };

    add("orders_start_at_full_group", d.order_at_break.front() == d.degree,
        "g_{b_1} = " + std::to_string(d.order_at_break.front()) + ", degree " +
            std::to_string(d.degree));

    bool decreasing = true;
    for (std::size_t i = 1; i < d.m; ++i)
        if (d.order_at_break[i] >= d.order_at_break[i - 1]) decreasing = false;
    add("orders_strictly_decreasing", decreasing, "orders along the break list");

    add("orders_end_at_least_p", d.order_at_break.back() >= d.p,
        "g_{b_m} = " + std::to_string(d.order_at_break.back()));

    bool congruent = true;
    for (i64 b : d.lower_breaks)
        if ((b - d.lower_breaks.front()) % d.p != 0) congruent = false;
    add("lower_breaks_congruent_mod_p", congruent,
        "all b_i agree with b_1 mod " + std::to_string(d.p));

    bool integral = true;
    std::string frac;
    for (const auto& f : d.upper_raw) {
        if (!f.integral()) integral = false;
        frac += (frac.empty() ? "" : ", ") + f.str();
    }
    add("upper_breaks_integral", integral, "u = (" + frac + ")");

    add("first_upper_equals_first_lower",
        d.upper_breaks.front() == d.lower_breaks.front(),
        "u_1 = " + std::to_string(d.upper_breaks.front()) + ", b_1 = " +
            std::to_string(d.lower_breaks.front()));

    bool divis = true;
    for (std::size_t i = 1; i < d.m; ++i)
        if ((d.order_at_break[i] * (d.lower_breaks[i] - d.lower_breaks[i - 1])) %
                d.degree !=
            0)
            divis = false;
    add("order_gap_divisibility", divis,
        d.m > 1 ? "p^n divides g_{b_i}(b_i - b_{i-1}) for every i >= 2"
                : "single break, vacuous");

    add("divisible_break_forces_cyclic",
        d.b_max % d.p != 0 || d.n == 1,
        "b_m = " + std::to_string(d.b_max) +
            (d.b_max % d.p == 0 ? " divisible by p, group must be cyclic" : " coprime to p"));

    const i64 lhs = ((d.t_G + d.b_max) % d.degree + d.degree) % d.degree;
    add("trace_shift_congruence", lhs == 0,
        "t_G = " + std::to_string(d.t_G) + " and -b_m agree mod p^n");

    return out;
}

}  // namespace ramlab
