// Independent oracles the tests compare the library against.  Everything
// here is computed by a different method than the code under test: exact
// integer arithmetic for the quadratic Gaussian case, and a definition-level
// loop plus the Herbrand element-sum for filtrations.

#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ramlab/normalbasis.hpp"

namespace oracle {

using ramlab::i64;

// 2-adic valuation of a nonzero integer by trial division
inline i64 v2_int(long long x) {
    if (x == 0) throw std::invalid_argument("v2 of zero");
    if (x < 0) x = -x;
    i64 v = 0;
    while (x % 2 == 0) {
        x /= 2;
        ++v;
    }
    return v;
}

// rho = a + b*x in the field with x^2 = -1 over the 2-adics.  The conjugate
// coordinate matrix is [[a, b], [a, -b]] with determinant -2ab, so rho
// generates a normal basis over the rationals' 2-adic completion exactly
// when a and b are both nonzero, with determinant valuation 1+v2(a)+v2(b).
inline std::optional<i64> det_valuation_q2i(long long a, long long b) {
    if (a == 0 || b == 0) return std::nullopt;
    return 1 + v2_int(a) + v2_int(b);
}

// norm of a + b*x is a^2 + b^2; its 2-adic valuation is v_N(rho) because
// the extension is totally ramified of degree 2
inline std::optional<i64> norm_valuation_q2i(long long a, long long b) {
    const long long n = a * a + b * b;
    if (n == 0) return std::nullopt;
    return v2_int(n);
}

struct BruteFiltration {
    std::vector<i64> lower_breaks;
    std::vector<i64> orders;
    std::vector<i64> upper_breaks;
    i64 t_G = 0;
};

// Definition-level recomputation: i(s) = v_N(s(pi) - pi) for every group
// element, grouped by hand; the upper numbering comes from the Herbrand
// element sum phi(m) = (1/|G|) * sum_s min(i(s), m+1) - 1 rather than from
// the gap-weighted formula the library uses.
inline BruteFiltration brute_filtration(const ramlab::ExtensionField& N) {
    using namespace ramlab;
    BruteFiltration out;
    const NElement pi = N.uniformizer();
    const auto group = N.full_group().elements();
    const i64 g = static_cast<i64>(group.size());

    std::vector<i64> ivals;  // i(s) over the nonidentity elements
    for (const auto& s : group) {
        if (std::all_of(s.begin(), s.end(), [](i64 c) { return c == 0; })) continue;
        const auto v = N.n_valuation(N.apply_galois(s, pi) - pi);
        if (!v) throw PrecisionError("brute filtration: s(pi) - pi vanished");
        ivals.push_back(*v);
        out.t_G += *v - 1;
    }

    std::vector<i64> breaks = ivals;
    for (i64& b : breaks) b -= 1;
    std::sort(breaks.begin(), breaks.end());
    out.lower_breaks = breaks;
    out.lower_breaks.erase(
        std::unique(out.lower_breaks.begin(), out.lower_breaks.end()),
        out.lower_breaks.end());

    for (i64 b : out.lower_breaks) {
        i64 count = 1;  // identity sits in every ramification group
        for (i64 x : breaks)
            if (x >= b) ++count;
        out.orders.push_back(count);
    }

    for (i64 b : out.lower_breaks) {
        i64 sum = b + 1;  // identity contributes min(infinity, b+1)
        for (i64 i : ivals) sum += std::min(i, b + 1);
        if (sum % g != 0)
            throw std::logic_error("Herbrand sum not divisible by the order");
        out.upper_breaks.push_back(sum / g - 1);
    }
    return out;
}

// Conductor-discriminant consistency: each nontrivial character factors
// through one of the index-p fixed fields, whose single break b(H) gives the
// conductor exponent b(H) + 1.  Summing over the p-1 characters per line
// must reproduce the different exponent t_G + (|G| - 1) computed from the
// breaks of N itself.
inline bool conductor_discriminant_ok(const ramlab::ExtensionField& N,
                                      const ramlab::RamificationData& d) {
    using namespace ramlab;
    i64 lhs = 0;
    for (const auto& lam : detail::character_lines(d.p, d.n)) {
        std::vector<GaloisVector> gens;
        std::size_t piv = 0;
        while (lam[piv] == 0) ++piv;
        for (std::size_t j = 0; j < d.n; ++j) {
            if (j == piv) continue;
            GaloisVector v(d.n, 0);
            v[j] = 1;
            v[piv] = ((-lam[j]) % d.p + d.p) % d.p;
            gens.push_back(std::move(v));
        }
        const Subgroup H = Subgroup::from_generators(d.p, d.n, gens);
        const RamificationData dl = compute_filtration(fixed_field(N, H).field());
        if (dl.m != 1) return false;
        lhs += (d.p - 1) * (dl.lower_breaks[0] + 1);
    }
    return lhs == d.t_G + (d.degree - 1);
}

}  // namespace oracle
