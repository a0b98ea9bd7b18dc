#pragma once

// Exact finite-precision arithmetic in a local ground field K with residue
// field F_p.  Two backends share one digit representation:
//
//   * characteristic zero: K is a totally ramified finite extension of Q_p,
//     presented as an Eisenstein tower.  Digits are taken with respect to the
//     uniformizer of the top level; carries resolve through the digit
//     expansion of p in that uniformizer, which is computed once per level.
//   * characteristic p: K = F_p((t)).  No carries.
//
// Every element stores its own absolute precision: the element is known
// modulo pi^M.  Operations propagate precision pessimistically; a zero result
// is always "zero to precision M", never an asserted exact zero.

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <memory>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ramlab/prng.hpp"

namespace ramlab {

using i64 = std::int64_t;
using u64 = std::uint64_t;

class FieldError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Caller passed something outside the domain of the operation.
class InputError : public FieldError {
public:
    using FieldError::FieldError;
};

// The computation cannot be decided at the available precision.
class PrecisionError : public FieldError {
public:
    using FieldError::FieldError;
};

// A mathematical invariant that should hold was observed to fail.
class ViolationError : public FieldError {
public:
    using FieldError::FieldError;
};

// Precision assigned to zeros that are exact by construction (empty sums,
// untouched coordinates).  Large enough never to be the binding bound, small
// enough that precision arithmetic cannot overflow.
inline constexpr std::int64_t kStructuralZeroPrecision = std::int64_t(1) << 50;

// Division by an element indistinguishable from zero at its precision.
class DivisionByZeroToPrecision : public PrecisionError {
public:
    explicit DivisionByZeroToPrecision(i64 precision)
        : PrecisionError("division by an element that is zero to precision " +
                         std::to_string(precision)),
          precision_(precision) {}
    i64 precision() const noexcept { return precision_; }

private:
    i64 precision_;
};

enum class Characteristic { zero, p };

// ---------------------------------------------------------------------------
// Digit strings: the textual element literal "d0,d1,...,dk@v" denoting
// sum_j d_j * pi^(v+j).  Digits are signed integers; normalization happens
// when the literal is materialized in a field.
// ---------------------------------------------------------------------------
struct DigitString {
    std::vector<i64> digits;
    i64 valuation = 0;

    static DigitString parse(const std::string& text) {
        const auto at = text.rfind('@');
        if (at == std::string::npos)
            throw InputError("digit string '" + text + "' lacks '@valuation'");
        DigitString out;
        out.valuation = parse_int(text.substr(at + 1), text);
        std::string body = text.substr(0, at);
        if (body.empty())
            throw InputError("digit string '" + text + "' has no digits");
        std::size_t start = 0;
        while (true) {
            const auto comma = body.find(',', start);
            const std::string piece =
                body.substr(start, comma == std::string::npos ? std::string::npos
                                                              : comma - start);
            out.digits.push_back(parse_int(piece, text));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        return out;
    }

    std::string to_string() const {
        std::ostringstream os;
        for (std::size_t i = 0; i < digits.size(); ++i) {
            if (i) os << ',';
            os << digits[i];
        }
        os << '@' << valuation;
        return os.str();
    }

private:
    static i64 parse_int(std::string piece, const std::string& whole) {
        // trim
        while (!piece.empty() && (piece.front() == ' ' || piece.front() == '\t'))
            piece.erase(piece.begin());
        while (!piece.empty() && (piece.back() == ' ' || piece.back() == '\t'))
            piece.pop_back();
        if (piece.empty())
            throw InputError("empty digit in '" + whole + "'");
        std::size_t pos = 0;
        i64 value = 0;
        try {
            value = std::stoll(piece, &pos);
        } catch (const std::exception&) {
            throw InputError("bad integer '" + piece + "' in '" + whole + "'");
        }
        if (pos != piece.size())
            throw InputError("bad integer '" + piece + "' in '" + whole + "'");
        return value;
    }
};

namespace detail {

// Plain digit-window element; engine-agnostic data.
struct Dig {
    bool zero = true;
    i64 val = 0;   // position of leading digit, meaningful iff !zero
    i64 prec = 0;  // known modulo pi^prec
    std::vector<std::int32_t> digits;  // digits[i] at position val+i, in [0,p)
};

// Per-level digit arithmetic.  For characteristic zero levels, carries are
// injected through p_digits, the expansion of p starting at position p_val.
class Engine {
public:
    i64 p = 2;
    bool char_zero = true;
    i64 budget = 0;  // maximal digit window the carry table covers
    i64 p_val = 1;
    std::vector<std::int32_t> p_digits;  // expansion of p; empty in char p

    Dig zero_elem(i64 prec) const {
        Dig d;
        d.zero = true;
        d.prec = prec;
        return d;
    }

    // Reduce an accumulator window [lo, hi) to canonical digits.
    Dig normalize(i64 lo, i64 hi, std::vector<i64>& acc) const {
        const std::size_t w = static_cast<std::size_t>(hi - lo);
        for (std::size_t j = 0; j < w; ++j) {
            i64 a = acc[j];
            i64 d = a % p;
            if (d < 0) d += p;
            acc[j] = d;
            if (char_zero) {
                const i64 q = (a - d) / p;
                if (q != 0) {
                    const std::size_t base = j + static_cast<std::size_t>(p_val);
                    for (std::size_t t = 0; t < p_digits.size(); ++t) {
                        const std::size_t pos = base + t;
                        if (pos >= w) break;
                        acc[pos] += q * p_digits[t];
                    }
                }
            }
        }
        std::size_t first = 0;
        while (first < w && acc[first] == 0) ++first;
        if (first == w) return zero_elem(hi);
        Dig out;
        out.zero = false;
        out.val = lo + static_cast<i64>(first);
        out.prec = hi;
        out.digits.resize(w - first);
        for (std::size_t i = first; i < w; ++i)
            out.digits[i - first] = static_cast<std::int32_t>(acc[i]);
        return out;
    }

    Dig truncate(const Dig& a, i64 m) const {
        if (a.zero) return zero_elem(std::min(a.prec, m));
        if (m <= a.val) return zero_elem(m);
        if (m >= a.prec) return a;
        Dig out = a;
        out.prec = m;
        out.digits.resize(static_cast<std::size_t>(m - a.val));
        return out;
    }

    // Claim additional zero digits.  Only valid where an algorithm guarantees
    // them (Newton iterations); never exposed publicly.
    Dig lift_precision(const Dig& a, i64 m) const {
        if (m <= a.prec) return a;
        Dig out = a;
        out.prec = m;
        if (!a.zero) out.digits.resize(static_cast<std::size_t>(m - a.val), 0);
        return out;
    }

    Dig add(const Dig& a, const Dig& b) const { return combine(a, b, +1); }
    Dig sub(const Dig& a, const Dig& b) const { return combine(a, b, -1); }

    Dig neg(const Dig& a) const {
        if (a.zero) return a;
        std::vector<i64> acc(a.digits.size());
        for (std::size_t i = 0; i < a.digits.size(); ++i) acc[i] = -i64(a.digits[i]);
        return normalize(a.val, a.prec, acc);
    }

    Dig mul(const Dig& a, const Dig& b) const {
        if (a.zero || b.zero) {
            const i64 pa = a.zero ? a.prec : a.val;
            const i64 pb = b.zero ? b.prec : b.val;
            return zero_elem(pa + pb);
        }
        i64 rel = std::min<i64>(a.prec - a.val, b.prec - b.val);
        rel = std::min(rel, budget);
        const i64 lo = a.val + b.val;
        const std::size_t w = static_cast<std::size_t>(rel);
        std::vector<i64> acc(w, 0);
        const std::size_t na = std::min(a.digits.size(), w);
        for (std::size_t i = 0; i < na; ++i) {
            const i64 ai = a.digits[i];
            if (!ai) continue;
            const std::size_t nb = std::min(b.digits.size(), w - i);
            for (std::size_t j = 0; j < nb; ++j) acc[i + j] += ai * b.digits[j];
        }
        return normalize(lo, lo + rel, acc);
    }

    // Multiply by a small integer scalar, 0 < s < p.
    Dig small_mul(const Dig& a, i64 s) const {
        if (a.zero) return a;
        std::vector<i64> acc(a.digits.size());
        for (std::size_t i = 0; i < a.digits.size(); ++i) acc[i] = s * a.digits[i];
        return normalize(a.val, a.prec, acc);
    }

    // Multiply by pi^k (exact).
    Dig shift(const Dig& a, i64 k) const {
        Dig out = a;
        out.prec += k;
        if (!out.zero) out.val += k;
        return out;
    }

    Dig from_int(i64 n, i64 rel) const {
        std::vector<i64> acc(static_cast<std::size_t>(std::min(rel, budget)), 0);
        if (acc.empty()) acc.resize(1);
        acc[0] = n;
        return normalize(0, static_cast<i64>(acc.size()), acc);
    }

    Dig from_digit_string(const DigitString& ds, i64 rel) const {
        const i64 len = static_cast<i64>(ds.digits.size());
        i64 w = std::min(std::max(rel, len + 8), budget);
        std::vector<i64> acc(static_cast<std::size_t>(w), 0);
        for (i64 i = 0; i < len && i < w; ++i) acc[static_cast<std::size_t>(i)] = ds.digits[static_cast<std::size_t>(i)];
        return normalize(ds.valuation, ds.valuation + w, acc);
    }

    Dig one(i64 rel) const { return from_int(1, rel); }

    Dig reciprocal(const Dig& b) const {
        if (b.zero) throw DivisionByZeroToPrecision(b.prec);
        const Dig u = shift(b, -b.val);  // unit, val 0
        const i64 rel = u.prec;
        Dig w;
        w.zero = false;
        w.val = 0;
        w.prec = 1;
        w.digits = {static_cast<std::int32_t>(mod_inverse(u.digits[0]))};
        i64 known = 1;
        while (known < rel) {
            const i64 target = std::min(known * 2, rel);
            const Dig ut = truncate(u, target);
            Dig wl = lift_precision(w, target);
            const Dig t = mul(ut, wl);
            const Dig e = sub(from_int(2, target), t);
            w = lift_precision(mul(wl, e), target);
            known = target;
        }
        return shift(w, -b.val);
    }

    Dig div(const Dig& a, const Dig& b) const { return mul(a, reciprocal(b)); }

    Dig pow(const Dig& a, i64 e) const {
        if (e < 0) return reciprocal(pow(a, -e));
        if (e == 0) {
            if (a.zero) throw DivisionByZeroToPrecision(a.prec);
            return one(a.prec - a.val);
        }
        Dig base = a;
        Dig acc;
        bool have = false;
        i64 k = e;
        while (k > 0) {
            if (k & 1) {
                acc = have ? mul(acc, base) : base;
                have = true;
            }
            k >>= 1;
            if (k) base = mul(base, base);
        }
        return acc;
    }

    bool equal_to_precision(const Dig& a, const Dig& b) const {
        return sub(a, b).zero;
    }

    Dig random(i64 valuation, i64 rel, SplitMix64& rng) const {
        Dig out;
        out.zero = false;
        out.val = valuation;
        out.prec = valuation + rel;
        out.digits.resize(static_cast<std::size_t>(rel));
        out.digits[0] = static_cast<std::int32_t>(1 + rng.below(static_cast<u64>(p - 1)));
        for (std::size_t i = 1; i < out.digits.size(); ++i)
            out.digits[i] = static_cast<std::int32_t>(rng.below(static_cast<u64>(p)));
        return out;
    }

    DigitString to_digit_string(const Dig& a) const {
        DigitString ds;
        if (a.zero) {
            ds.digits = {0};
            ds.valuation = a.prec;
            return ds;
        }
        ds.valuation = a.val;
        ds.digits.assign(a.digits.begin(), a.digits.end());
        while (ds.digits.size() > 1 && ds.digits.back() == 0) ds.digits.pop_back();
        return ds;
    }

    i64 mod_inverse(i64 a) const {
        a %= p;
        if (a < 0) a += p;
        if (a == 0) throw FieldError("no inverse of 0 mod p");
        i64 t = 0, newt = 1, r = p, newr = a;
        while (newr != 0) {
            const i64 q = r / newr;
            std::swap(t -= q * newt, newt);
            std::swap(r -= q * newr, newr);
        }
        if (t < 0) t += p;
        return t;
    }

private:
    Dig combine(const Dig& a, const Dig& b, int sign_b) const {
        if (a.zero && b.zero) return zero_elem(std::min(a.prec, b.prec));
        if (a.zero) {
            const Dig t = truncate(b, std::min(a.prec, b.prec));
            return sign_b < 0 ? neg(t) : t;
        }
        if (b.zero) return truncate(a, std::min(a.prec, b.prec));
        const i64 lo = std::min(a.val, b.val);
        i64 hi = std::min(a.prec, b.prec);
        if (hi - lo > budget) hi = lo + budget;
        if (hi <= lo) return zero_elem(hi);
        std::vector<i64> acc(static_cast<std::size_t>(hi - lo), 0);
        accumulate(acc, lo, hi, a, 1);
        accumulate(acc, lo, hi, b, sign_b);
        return normalize(lo, hi, acc);
    }

    static void accumulate(std::vector<i64>& acc, i64 lo, i64 hi, const Dig& d,
                           int sign) {
        const i64 from = std::max(lo, d.val);
        const i64 to = std::min(hi, d.prec);
        for (i64 pos = from; pos < to; ++pos)
            acc[static_cast<std::size_t>(pos - lo)] +=
                sign * i64(d.digits[static_cast<std::size_t>(pos - d.val)]);
    }
};

struct EisensteinLayer {
    i64 degree = 0;
    std::vector<Dig> coeffs;  // a_0..a_{e-1} over the level below; monic
};

struct FieldCore;

}  // namespace detail

// ---------------------------------------------------------------------------
// Field specification and construction.
// ---------------------------------------------------------------------------
struct GroundFieldSpec {
    Characteristic characteristic = Characteristic::zero;
    i64 p = 2;
    // Eisenstein tower, bottom first.  Each polynomial is a full coefficient
    // vector a_0..a_e (leading coefficient must be 1) with coefficients given
    // as digit strings over the uniformizer of the level below.
    std::vector<std::vector<DigitString>> tower;
    i64 default_precision = 64;
    i64 precision_cap = 1024;
};

namespace detail {

struct FieldCore {
    GroundFieldSpec spec;
    bool char_zero = true;
    i64 p = 2;
    i64 e_K = 1;  // absolute ramification index over Q_p; 1 in char p
    i64 default_precision = 64;
    i64 precision_cap = 1024;
    std::vector<Engine> engines;  // engines.back() serves the top level K
    std::vector<EisensteinLayer> layers;
    std::optional<Dig> zeta;  // primitive p-th root of unity, top level

    const Engine& top() const { return engines.back(); }
};

// --- polynomial model over the previous level, used only while building a
// tower layer: elements of the new level as coefficient vectors in x, where x
// is the root of the Eisenstein polynomial.  Valuations read off exactly
// because e*v(c_i) + i are pairwise distinct mod e.
class LayerModel {
public:
    LayerModel(const Engine& lower, const std::vector<Dig>& coeffs, i64 degree)
        : lo_(lower), a_(coeffs), e_(degree) {
        // x^e = -a_0 * (unit), so pi_lower = x^e * lambda * (1 + O(x)) with
        // lambda = -(a_0/pi_lower)^{-1} in the residue field.  Digits of a
        // coefficient at lower valuation w convert by lambda^w.
        lam_ = (lo_.p - lo_.mod_inverse(a_[0].digits[0])) % lo_.p;
    }

    using Model = std::vector<Dig>;

    Model zero_model(i64 exact_prec) const {
        return Model(static_cast<std::size_t>(e_), lo_.zero_elem(exact_prec));
    }

    // M := M * x, reducing x^e = -sum a_t x^t.
    void mul_x(Model& m, i64 exact_prec) const {
        Dig top = m.back();
        for (std::size_t i = m.size() - 1; i > 0; --i) m[i] = std::move(m[i - 1]);
        m[0] = lo_.zero_elem(exact_prec);
        if (!top.zero) {
            for (std::size_t t = 0; t < m.size(); ++t) {
                if (a_[t].zero && a_[t].prec > top.val + lo_.budget) continue;
                m[t] = lo_.sub(m[t], lo_.mul(top, a_[t]));
            }
        }
    }

    void sub_scaled(Model& m, const Model& x, i64 d) const {
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (x[i].zero) {
                m[i] = lo_.truncate(m[i], std::min(m[i].prec, x[i].prec));
            } else {
                m[i] = lo_.sub(m[i], lo_.small_mul(x[i], d));
            }
        }
    }

    // Exact valuation in the new level if resolvable at current precision.
    std::optional<std::pair<i64, i64>> valuation(const Model& m) const {
        i64 best = 0, bound = 0;
        int best_i = -1;
        bool have_bound = false;
        for (std::size_t i = 0; i < m.size(); ++i) {
            const i64 b = e_ * m[i].prec + static_cast<i64>(i);
            if (!have_bound || b < bound) {
                bound = b;
                have_bound = true;
            }
            if (!m[i].zero) {
                const i64 v = e_ * m[i].val + static_cast<i64>(i);
                if (best_i < 0 || v < best) {
                    best = v;
                    best_i = static_cast<int>(i);
                }
            }
        }
        if (best_i < 0 || best >= bound) return std::nullopt;
        const Dig& c = m[static_cast<std::size_t>(best_i)];
        const i64 d = (i64(c.digits[0]) * pow_mod(lam_, c.val)) % lo_.p;
        return std::make_pair(best, d);
    }

private:
    i64 pow_mod(i64 base, i64 exp) const {
        const i64 order = lo_.p - 1;
        exp = ((exp % order) + order) % order;
        i64 r = 1, b = base % lo_.p;
        while (exp > 0) {
            if (exp & 1) r = r * b % lo_.p;
            b = b * b % lo_.p;
            exp >>= 1;
        }
        return r;
    }

    const Engine& lo_;
    const std::vector<Dig>& a_;
    i64 e_;
    i64 lam_ = 1;
};

// Expansion of p in the new level's uniformizer, peeled digit by digit from
// the polynomial model.
inline std::vector<std::int32_t> compute_p_expansion(const Engine& lower,
                                                     const std::vector<Dig>& coeffs,
                                                     i64 degree, i64 new_budget,
                                                     i64& peeled_length) {
    LayerModel model(lower, coeffs, degree);
    const i64 exact = 4 * lower.budget + 64;
    const i64 lo_pos = degree * lower.p_val;
    const i64 hi_pos = lo_pos + new_budget;

    auto y = model.zero_model(exact);
    {
        Dig pd;
        pd.zero = false;
        pd.val = lower.p_val;
        pd.digits = lower.p_digits;
        pd.prec = pd.val + static_cast<i64>(pd.digits.size());
        if (!lower.char_zero) throw InputError("tower over a positive characteristic base");
        y[0] = pd;
    }
    auto xw = model.zero_model(exact);
    xw[0] = lower.one(lower.budget);
    i64 w = 0;

    std::vector<std::int32_t> out(static_cast<std::size_t>(new_budget), 0);
    i64 reached = lo_pos;
    i64 last_v = lo_pos - 1;
    while (true) {
        const auto mv = model.valuation(y);
        if (!mv) {
            // Everything below the precision bound is peeled; the bound tells
            // how far the expansion is trustworthy.
            i64 bound = hi_pos;
            for (std::size_t i = 0; i < y.size(); ++i)
                bound = std::min(bound, degree * y[i].prec + static_cast<i64>(i));
            reached = std::max(reached, bound);
            break;
        }
        const auto [v, d] = *mv;
        if (v >= hi_pos) {
            reached = hi_pos;
            break;
        }
        if (v <= last_v)
            throw PrecisionError("uniformizer expansion of p stalled; coefficient precision too low");
        last_v = v;
        while (w < v) {
            model.mul_x(xw, exact);
            ++w;
        }
        model.sub_scaled(y, xw, d);
        out[static_cast<std::size_t>(v - lo_pos)] = static_cast<std::int32_t>(d);
        reached = v + 1;
    }
    peeled_length = reached - lo_pos;
    if (peeled_length <= 0 || out[0] == 0)
        throw InputError("uniformizer expansion of p lacks its leading digit; tower layer is not Eisenstein");
    out.resize(static_cast<std::size_t>(peeled_length));
    return out;
}

inline bool is_prime(i64 n) {
    if (n < 2) return false;
    for (i64 d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

inline i64 binomial_i64(i64 n, i64 k) {
    // n <= 61 keeps every intermediate inside int64.
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    i64 r = 1;
    for (i64 i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
    }
    return r;
}

inline Dig horner(const Engine& en, const std::vector<Dig>& poly, const Dig& x) {
    Dig acc = poly.back();
    for (std::size_t i = poly.size() - 1; i-- > 0;)
        acc = en.add(en.mul(acc, x), poly[i]);
    return acc;
}

// Primitive p-th root of unity in the top level if one exists.  K/Q_p is
// totally ramified with residue field F_p, so the root exists iff (p-1) | e_K
// and p / pi^{e_K} has residue -1; it is then found by Newton iteration on
// the shifted cyclotomic equation, whose reduction has only simple roots.
inline std::optional<Dig> find_zeta(const FieldCore& core) {
    const Engine& en = core.engines.back();
    const i64 p = core.p;
    const i64 rel = core.default_precision;
    if (p == 2) return en.from_int(-1, rel);
    if (core.e_K % (p - 1) != 0) return std::nullopt;
    const i64 h = core.e_K / (p - 1);

    std::vector<Dig> g(static_cast<std::size_t>(p));
    for (i64 t = 0; t < p; ++t) {
        const i64 c = binomial_i64(p, t + 1);
        g[static_cast<std::size_t>(t)] =
            en.shift(en.from_int(c, rel + core.e_K + 8), t * h - core.e_K);
    }
    const Dig& g0 = g[0];
    if (g0.zero || g0.val != 0)
        throw ViolationError("expansion of p is inconsistent with the ramification index");
    if ((g0.digits[0] + 1) % p != 0) return std::nullopt;

    std::vector<Dig> gp(static_cast<std::size_t>(p - 1));
    for (i64 t = 1; t < p; ++t)
        gp[static_cast<std::size_t>(t - 1)] = en.small_mul(g[static_cast<std::size_t>(t)], t % p);

    Dig s = en.from_int(1, rel);
    i64 last_val = -1;
    for (int round = 0; round < 200; ++round) {
        const Dig fs = horner(en, g, s);
        if (fs.zero) break;
        if (fs.val <= last_val)
            throw PrecisionError("root search for the p-th root of unity stalled");
        last_val = fs.val;
        const Dig fps = horner(en, gp, s);
        s = en.sub(s, en.div(fs, fps));
    }
    Dig zeta = en.add(en.one(rel), en.shift(s, h));
    const Dig check = en.sub(en.pow(zeta, p), en.one(rel));
    if (!check.zero)
        throw ViolationError("candidate p-th root of unity fails its defining equation");
    return zeta;
}

inline std::shared_ptr<const FieldCore> build_field_core(const GroundFieldSpec& spec) {
    if (!is_prime(spec.p)) throw InputError("p = " + std::to_string(spec.p) + " is not prime");
    if (spec.p > 61) throw InputError("p > 61 is not supported");
    if (spec.default_precision < 8) throw InputError("default_precision must be at least 8");
    if (spec.precision_cap < spec.default_precision)
        throw InputError("precision_cap below default_precision");
    auto core = std::make_shared<FieldCore>();
    core->spec = spec;
    core->char_zero = spec.characteristic == Characteristic::zero;
    core->p = spec.p;
    core->default_precision = spec.default_precision;
    core->precision_cap = spec.precision_cap;

    const i64 top_budget = 2 * spec.default_precision + 160;
    if (!core->char_zero) {
        if (!spec.tower.empty())
            throw InputError("towers are only meaningful in characteristic zero");
        Engine en;
        en.p = spec.p;
        en.char_zero = false;
        en.budget = top_budget;
        core->engines.push_back(en);
        core->e_K = 1;
        return core;
    }

    // Budgets per level, top down: each lower level needs about 1/e of the
    // window plus slack so the expansion of p can be peeled far enough.
    std::vector<i64> degrees;
    for (const auto& poly : spec.tower) {
        if (poly.size() < 3)
            throw InputError("tower polynomial must have degree at least 2");
        degrees.push_back(static_cast<i64>(poly.size()) - 1);
    }
    std::vector<i64> budgets(degrees.size() + 1);
    budgets.back() = top_budget;
    for (std::size_t i = degrees.size(); i-- > 0;)
        budgets[i] = budgets[i + 1] / degrees[i] + 48;

    Engine base;
    base.p = spec.p;
    base.char_zero = true;
    base.budget = budgets[0];
    base.p_val = 1;
    // p is exactly the uniformizer of the base level.
    base.p_digits.assign(static_cast<std::size_t>(base.budget), 0);
    base.p_digits[0] = 1;
    core->engines.push_back(base);
    core->e_K = 1;

    for (std::size_t li = 0; li < spec.tower.size(); ++li) {
        const Engine& lower = core->engines.back();
        const auto& poly = spec.tower[li];
        const i64 e = degrees[li];
        const std::string where = "tower layer " + std::to_string(li + 1);

        std::vector<Dig> coeffs;
        for (i64 ci = 0; ci < e; ++ci)
            coeffs.push_back(lower.from_digit_string(poly[static_cast<std::size_t>(ci)],
                                                     lower.budget));
        const Dig lead = lower.from_digit_string(poly.back(), lower.budget);
        if (!lower.equal_to_precision(lead, lower.one(lower.budget)))
            throw InputError(where + ": leading coefficient must be 1");
        if (coeffs[0].zero || coeffs[0].val != 1)
            throw InputError(where + ": constant coefficient must have valuation exactly 1");
        for (i64 ci = 1; ci < e; ++ci) {
            const Dig& c = coeffs[static_cast<std::size_t>(ci)];
            if (!c.zero && c.val < 1)
                throw InputError(where + ": middle coefficient " + std::to_string(ci) +
                                 " must have positive valuation");
        }

        Engine next;
        next.p = spec.p;
        next.char_zero = true;
        next.budget = budgets[li + 1];
        next.p_val = e * lower.p_val;
        i64 peeled = 0;
        next.p_digits = compute_p_expansion(lower, coeffs, e, next.budget, peeled);
        if (peeled < spec.default_precision + 32)
            throw PrecisionError(where + ": could not expand p far enough at this precision");
        next.budget = std::min(next.budget, peeled);

        EisensteinLayer layer;
        layer.degree = e;
        layer.coeffs = std::move(coeffs);
        core->layers.push_back(std::move(layer));
        core->engines.push_back(std::move(next));
        core->e_K *= e;
    }

    core->zeta = find_zeta(*core);
    return core;
}

}  // namespace detail

class GroundField;

// Element of K.  Value type; carries a handle to its field.
class KElement {
public:
    KElement() = default;
    KElement(std::shared_ptr<const detail::FieldCore> core, detail::Dig d)
        : core_(std::move(core)), d_(std::move(d)) {}

    bool is_zero_to_precision() const { return d_.zero; }
    // Zero with no meaningful precision bound (exact by construction).
    bool is_structural_zero() const {
        return d_.zero && d_.prec >= kStructuralZeroPrecision / 2;
    }
    // v_K, normalized so v_K(pi_K) = 1.  Unreadable for zero-to-precision.
    std::optional<i64> valuation() const {
        if (d_.zero) return std::nullopt;
        return d_.val;
    }
    i64 precision() const { return d_.prec; }
    i64 leading_digit() const {
        if (d_.zero) throw PrecisionError("leading digit of a zero-to-precision element");
        return d_.digits[0];
    }
    DigitString to_digit_string() const { return eng().to_digit_string(d_); }
    std::string str() const { return to_digit_string().to_string(); }

    const std::shared_ptr<const detail::FieldCore>& core() const { return core_; }
    const detail::Dig& dig() const { return d_; }

    KElement operator-() const { return wrap(eng().neg(d_)); }
    friend KElement operator+(const KElement& a, const KElement& b) {
        a.check(b);
        return a.wrap(a.eng().add(a.d_, b.d_));
    }
    friend KElement operator-(const KElement& a, const KElement& b) {
        a.check(b);
        return a.wrap(a.eng().sub(a.d_, b.d_));
    }
    friend KElement operator*(const KElement& a, const KElement& b) {
        a.check(b);
        return a.wrap(a.eng().mul(a.d_, b.d_));
    }
    friend KElement operator/(const KElement& a, const KElement& b) {
        a.check(b);
        return a.wrap(a.eng().div(a.d_, b.d_));
    }

    KElement pow(i64 e) const { return wrap(eng().pow(d_, e)); }
    // Multiply by pi_K^k.
    KElement shift(i64 k) const { return wrap(eng().shift(d_, k)); }
    KElement small_mul(i64 s) const {
        s %= core_->p;
        if (s < 0) s += core_->p;
        if (s == 0) return wrap(eng().zero_elem(d_.zero ? d_.prec : d_.prec));
        return wrap(eng().small_mul(d_, s));
    }
    KElement truncate(i64 m) const { return wrap(eng().truncate(d_, m)); }

    bool equals_to_precision(const KElement& b) const {
        check(b);
        return eng().equal_to_precision(d_, b.d_);
    }

private:
    friend class GroundField;
    const detail::Engine& eng() const { return core_->engines.back(); }
    KElement wrap(detail::Dig d) const { return KElement(core_, std::move(d)); }
    void check(const KElement& b) const {
        if (core_.get() != b.core_.get())
            throw InputError("elements belong to different field instances");
    }

    std::shared_ptr<const detail::FieldCore> core_;
    detail::Dig d_;
};

class GroundField {
public:
    GroundField() = default;
    explicit GroundField(std::shared_ptr<const detail::FieldCore> core)
        : core_(std::move(core)) {}

    Characteristic characteristic() const {
        return core_->char_zero ? Characteristic::zero : Characteristic::p;
    }
    i64 p() const { return core_->p; }
    i64 ramification_index() const { return core_->e_K; }  // e_K over Q_p; 1 in char p
    i64 default_precision() const { return core_->default_precision; }
    i64 precision_cap() const { return core_->precision_cap; }
    const GroundFieldSpec& spec() const { return core_->spec; }

    bool has_zeta() const { return core_->zeta.has_value(); }
    // Primitive p-th root of unity.
    KElement zeta() const {
        if (!core_->zeta) throw InputError("field has no primitive p-th root of unity");
        return KElement(core_, *core_->zeta);
    }

    KElement zero() const { return KElement(core_, top().zero_elem(core_->default_precision)); }
    KElement zero_to_precision(i64 m) const { return KElement(core_, top().zero_elem(m)); }
    // Additive identity for accumulators; see kStructuralZeroPrecision.
    KElement structural_zero() const {
        return KElement(core_, top().zero_elem(kStructuralZeroPrecision));
    }
    KElement one() const { return from_int(1); }
    KElement uniformizer() const {
        detail::Dig d;
        d.zero = false;
        d.val = 1;
        d.prec = 1 + core_->default_precision;
        d.digits.assign(static_cast<std::size_t>(core_->default_precision), 0);
        d.digits[0] = 1;
        return KElement(core_, std::move(d));
    }
    KElement from_int(i64 n) const {
        return KElement(core_, top().from_int(n, core_->default_precision));
    }
    KElement from_digits(const DigitString& ds) const {
        return KElement(core_, top().from_digit_string(ds, core_->default_precision));
    }
    // Residue lift: the digit d placed at position v.
    KElement lift_digit(i64 d, i64 v) const {
        return from_int(d).shift(v);
    }
    KElement random_element(i64 valuation, u64 seed) const {
        SplitMix64 rng(seed);
        return KElement(core_, top().random(valuation, core_->default_precision, rng));
    }
    KElement random_element(i64 valuation, SplitMix64& rng) const {
        return KElement(core_, top().random(valuation, core_->default_precision, rng));
    }

    // Fresh field with the same spec at a different working precision.
    GroundField with_default_precision(i64 rel) const {
        GroundFieldSpec s = core_->spec;
        s.default_precision = rel;
        s.precision_cap = std::max(s.precision_cap, rel);
        return GroundField(detail::build_field_core(s));
    }

    bool same_instance(const GroundField& other) const {
        return core_.get() == other.core_.get();
    }

    const std::shared_ptr<const detail::FieldCore>& core() const { return core_; }

private:
    const detail::Engine& top() const { return core_->engines.back(); }
    std::shared_ptr<const detail::FieldCore> core_;
};

inline GroundField make_ground_field(const GroundFieldSpec& spec) {
    return GroundField(detail::build_field_core(spec));
}

inline std::optional<i64> valuation(const KElement& a) { return a.valuation(); }

}  // namespace ramlab
