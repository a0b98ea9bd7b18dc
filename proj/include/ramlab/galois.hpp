#pragma once

// Totally ramified elementary abelian p-extensions N/K with group C_p^n.
// Layers are either Kummer (x^p = u, needs a primitive p-th root of unity in
// K) or Artin-Schreier (x^p - x = f, characteristic p).  Elements are
// coordinate vectors over the monomial basis prod x_i^{j_i}; the Galois
// action is axis-wise; valuations are read from the determinant of the
// multiplication matrix, v_N(y) = v_K(det M_y) because N/K is totally
// ramified of degree p^n.

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "ramlab/linalg.hpp"
#include "ramlab/localfield.hpp"
#include "ramlab/prng.hpp"

namespace ramlab {

enum class LayerKind { kummer, artin_schreier };

struct ExtensionLayerSpec {
    LayerKind kind;
    KElement datum;  // u for Kummer, f for Artin-Schreier
};

// Classification of a single datum (equivalently, of one character line of
// the would-be extension).
enum class DatumClass {
    ramified,    // cuts out a totally ramified degree-p extension
    unramified,  // cuts out the unramified degree-p extension
    trivial,     // p-th power (Kummer) / in the Artin-Schreier image (split)
};

struct DatumClassification {
    DatumClass cls = DatumClass::ramified;
    i64 decided_at_precision = 0;  // meaningful for trivial verdicts
};

// --- Kummer datum: peel p-th powers until the unit 1 + w has either
// v(w)(p-1) > p e_K (p-th power), an unsolvable boundary residue equation
// (unramified), or p does not divide v(w) (ramified).
inline DatumClassification classify_kummer_datum(const GroundField& F, const KElement& u) {
    if (u.is_zero_to_precision()) throw InputError("Kummer datum is zero to precision");
    const i64 p = F.p();
    const i64 eK = F.ramification_index();
    const i64 v = *u.valuation();
    if (((v % p) + p) % p != 0) return {DatumClass::ramified, 0};
    KElement work = u.shift(-v);
    {
        // kill the leading digit: every residue is a p-th power in F_p
        const i64 c0 = work.leading_digit();
        work = work / F.from_int(c0).pow(p);
    }
    const KElement one = F.one();
    for (int guard = 0; guard < 4096; ++guard) {
        const KElement w = work - one;
        if (w.is_zero_to_precision())
            return {DatumClass::trivial, w.precision()};
        const i64 s = *w.valuation();
        if (s * (p - 1) > p * eK) return {DatumClass::trivial, w.precision()};
        if (s % p != 0) return {DatumClass::ramified, 0};
        const i64 h = s / p;
        bool advanced = false;
        for (i64 d = 1; d < p; ++d) {
            const KElement cand = work / (one + F.lift_digit(d, h)).pow(p);
            const KElement cw = cand - one;
            if (cw.is_zero_to_precision() || *cw.valuation() > s) {
                work = cand;
                advanced = true;
                break;
            }
        }
        if (!advanced) {
            if (s * (p - 1) == p * eK) return {DatumClass::unramified, 0};
            throw PrecisionError("unit p-th power peeling stalled below the boundary");
        }
    }
    throw PrecisionError("Kummer datum classification did not terminate");
}

// --- Artin-Schreier datum over F_p((t)).
inline DatumClassification classify_artin_schreier_datum(const GroundField& F,
                                                         const KElement& f0) {
    if (F.characteristic() != Characteristic::p)
        throw InputError("Artin-Schreier data require positive characteristic");
    const i64 p = F.p();
    KElement f = f0;
    for (int guard = 0; guard < 4096; ++guard) {
        if (f.is_zero_to_precision()) return {DatumClass::trivial, f.precision()};
        const i64 v = *f.valuation();
        if (v > 0) return {DatumClass::trivial, f.precision()};
        if (v == 0) return {DatumClass::unramified, 0};
        if (((v % p) + p) % p != 0) return {DatumClass::ramified, 0};
        // subtract (d t^{v/p})^p - (d t^{v/p}); d^p = d in F_p
        const i64 d = f.leading_digit();
        f = f - F.lift_digit(d, v) + F.lift_digit(d, v / p);
    }
    throw PrecisionError("Artin-Schreier datum classification did not terminate");
}

inline DatumClassification classify_datum(const GroundField& F, LayerKind kind,
                                          const KElement& datum) {
    return kind == LayerKind::kummer ? classify_kummer_datum(F, datum)
                                     : classify_artin_schreier_datum(F, datum);
}

// --- validation over every character line --------------------------------

struct CharacterLineReport {
    std::vector<i64> line;  // exponent vector, first nonzero entry is 1
    DatumClass cls = DatumClass::ramified;
};

struct ValidationReport {
    bool ok = false;
    std::vector<CharacterLineReport> lines;
    std::string failure;  // empty when ok

    std::string line_to_string(std::size_t i) const {
        std::ostringstream os;
        os << '(';
        for (std::size_t j = 0; j < lines[i].line.size(); ++j) {
            if (j) os << ',';
            os << lines[i].line[j];
        }
        os << ')';
        return os.str();
    }
};

namespace detail {

// Enumerate exponent vectors in F_p^n whose first nonzero entry is 1.
inline std::vector<std::vector<i64>> character_lines(i64 p, std::size_t n) {
    std::vector<std::vector<i64>> out;
    std::vector<i64> v(n, 0);
    while (true) {
        std::size_t i = 0;
        while (i < n && v[i] == p - 1) {
            v[i] = 0;
            ++i;
        }
        if (i == n) break;
        ++v[i];
        for (std::size_t j = 0; j < n; ++j) {
            if (v[j] == 0) continue;
            if (v[j] == 1) {
                out.push_back(v);
            }
            break;
        }
    }
    return out;
}

}  // namespace detail

inline ValidationReport validate_extension(const GroundField& F,
                                           const std::vector<ExtensionLayerSpec>& layers) {
    ValidationReport rep;
    for (const auto& l : layers) {
        if (l.kind == LayerKind::kummer) {
            if (F.characteristic() != Characteristic::zero) {
                rep.failure = "Kummer layers require characteristic zero";
                return rep;
            }
            if (!F.has_zeta()) {
                rep.failure = "Kummer layers require a primitive p-th root of unity in K";
                return rep;
            }
        } else if (F.characteristic() != Characteristic::p) {
            rep.failure = "Artin-Schreier layers require characteristic p";
            return rep;
        }
        if (l.datum.is_zero_to_precision()) {
            rep.failure = "layer datum is zero to precision";
            return rep;
        }
    }
    const auto lines = detail::character_lines(F.p(), layers.size());
    for (const auto& e : lines) {
        std::optional<KElement> combo;
        for (std::size_t i = 0; i < layers.size(); ++i) {
            if (e[i] == 0) continue;
            if (layers[i].kind == LayerKind::kummer) {
                const KElement term = layers[i].datum.pow(e[i]);
                combo = combo ? *combo * term : term;
            } else {
                const KElement term = layers[i].datum.small_mul(e[i]);
                combo = combo ? *combo + term : term;
            }
        }
        CharacterLineReport lr;
        lr.line = e;
        lr.cls = classify_datum(F, layers[0].kind, *combo).cls;
        rep.lines.push_back(lr);
        if (lr.cls != DatumClass::ramified) {
            std::ostringstream os;
            os << "character line " << rep.line_to_string(rep.lines.size() - 1)
               << (lr.cls == DatumClass::trivial
                       ? " collapses (datum combination is trivial)"
                       : " cuts out an unramified subextension");
            rep.failure = os.str();
            return rep;
        }
    }
    rep.ok = true;
    return rep;
}

// --- the extension field ---------------------------------------------------

using GaloisVector = std::vector<i64>;  // exponents of the layer generators, mod p

class NElement;
class ExtensionField;
class IntermediateField;

namespace detail {

struct MulTerm {
    std::size_t idx;
    bool unit_coeff;   // coefficient is 1; coeff unused
    KElement coeff;
};

struct ExtCore {
    GroundField ground;
    std::vector<ExtensionLayerSpec> layers;
    i64 p = 2;
    std::size_t n = 0;
    std::size_t degree = 1;  // p^n
    std::vector<i64> gen_valuation;           // v_N(x_i), exact
    std::vector<std::vector<MulTerm>> table;  // [a*degree+b] -> terms of m_a*m_b
    std::vector<KElement> zeta_pow;           // Kummer only: zeta^0..zeta^{p-1}
    std::vector<std::vector<i64>> binom;      // Pascal mod p, p x p
    // uniformizer and its inverse, set during construction
    std::vector<KElement> pi_coords, pi_inv_coords;

    std::size_t exponent(std::size_t idx, std::size_t layer) const {
        std::size_t q = idx;
        for (std::size_t i = 0; i < layer; ++i) q /= static_cast<std::size_t>(p);
        return q % static_cast<std::size_t>(p);
    }
};

}  // namespace detail

class NElement {
public:
    NElement() = default;
    NElement(std::shared_ptr<const detail::ExtCore> core, std::vector<KElement> coords)
        : core_(std::move(core)), c_(std::move(coords)) {}

    const std::vector<KElement>& coords() const { return c_; }
    const std::shared_ptr<const detail::ExtCore>& core() const { return core_; }

    bool is_zero_to_precision() const {
        for (const auto& x : c_)
            if (!x.is_zero_to_precision()) return false;
        return true;
    }
    i64 precision() const {  // least coordinate precision
        i64 m = INT64_MAX;
        for (const auto& x : c_) m = std::min(m, x.precision());
        return m;
    }

    friend NElement operator+(const NElement& a, const NElement& b) {
        a.check(b);
        std::vector<KElement> out;
        out.reserve(a.c_.size());
        for (std::size_t i = 0; i < a.c_.size(); ++i) out.push_back(a.c_[i] + b.c_[i]);
        return NElement(a.core_, std::move(out));
    }
    friend NElement operator-(const NElement& a, const NElement& b) {
        a.check(b);
        std::vector<KElement> out;
        out.reserve(a.c_.size());
        for (std::size_t i = 0; i < a.c_.size(); ++i) out.push_back(a.c_[i] - b.c_[i]);
        return NElement(a.core_, std::move(out));
    }
    NElement operator-() const {
        std::vector<KElement> out;
        out.reserve(c_.size());
        for (const auto& x : c_) out.push_back(-x);
        return NElement(core_, std::move(out));
    }
    friend NElement operator*(const NElement& a, const NElement& b) {
        a.check(b);
        const auto& core = *a.core_;
        std::vector<KElement> out(core.degree, a.core_->ground.structural_zero());
        for (std::size_t i = 0; i < core.degree; ++i) {
            if (a.c_[i].is_structural_zero()) continue;
            for (std::size_t j = 0; j < core.degree; ++j) {
                if (b.c_[j].is_structural_zero()) continue;
                const KElement prod = a.c_[i] * b.c_[j];
                for (const auto& t : core.table[i * core.degree + j]) {
                    out[t.idx] = out[t.idx] +
                                 (t.unit_coeff ? prod : prod * t.coeff);
                }
            }
        }
        return NElement(a.core_, std::move(out));
    }

    NElement scalar_mul(const KElement& s) const {
        std::vector<KElement> out;
        out.reserve(c_.size());
        for (const auto& x : c_) out.push_back(x * s);
        return NElement(core_, std::move(out));
    }
    NElement small_mul(i64 s) const {
        std::vector<KElement> out;
        out.reserve(c_.size());
        for (const auto& x : c_) out.push_back(x.small_mul(s));
        return NElement(core_, std::move(out));
    }

private:
    friend class ExtensionField;
    void check(const NElement& b) const {
        if (core_.get() != b.core_.get())
            throw InputError("elements belong to different extensions");
    }
    std::shared_ptr<const detail::ExtCore> core_;
    std::vector<KElement> c_;
};

class Subgroup {
public:
    Subgroup() = default;
    Subgroup(i64 p, std::size_t n) : p_(p), n_(n) {}

    static Subgroup from_generators(i64 p, std::size_t n,
                                    const std::vector<GaloisVector>& gens) {
        Subgroup H(p, n);
        std::vector<GaloisVector> rows;
        for (auto g : gens) {
            if (g.size() != n) throw InputError("generator length mismatch");
            for (auto& x : g) x = ((x % p) + p) % p;
            rows.push_back(std::move(g));
        }
        H.basis_ = rref_mod_p(rows, p);
        return H;
    }

    i64 p() const { return p_; }
    std::size_t n() const { return n_; }
    std::size_t rank() const { return basis_.size(); }
    i64 order() const {
        i64 o = 1;
        for (std::size_t i = 0; i < basis_.size(); ++i) o *= p_;
        return o;
    }
    const std::vector<GaloisVector>& basis() const { return basis_; }

    bool contains(GaloisVector v) const {
        for (auto& x : v) x = ((x % p_) + p_) % p_;
        for (const auto& b : basis_) {
            std::size_t piv = pivot_of(b);
            if (v[piv] != 0) {
                const i64 f = v[piv];
                for (std::size_t j = 0; j < n_; ++j)
                    v[j] = ((v[j] - f * b[j]) % p_ + p_) % p_;
            }
        }
        for (auto x : v)
            if (x != 0) return false;
        return true;
    }

    std::vector<GaloisVector> elements() const {
        std::vector<GaloisVector> out;
        const std::size_t r = basis_.size();
        std::vector<i64> c(r, 0);
        while (true) {
            GaloisVector v(n_, 0);
            for (std::size_t i = 0; i < r; ++i)
                for (std::size_t j = 0; j < n_; ++j)
                    v[j] = (v[j] + c[i] * basis_[i][j]) % p_;
            out.push_back(std::move(v));
            std::size_t i = 0;
            while (i < r && c[i] == p_ - 1) {
                c[i] = 0;
                ++i;
            }
            if (i == r) break;
            ++c[i];
        }
        return out;
    }

    // Basis of the annihilator {v : <v, h> = 0 for all h in H}.
    std::vector<GaloisVector> annihilator_basis() const {
        std::vector<GaloisVector> out;
        std::vector<std::size_t> pivots;
        for (const auto& b : basis_) pivots.push_back(pivot_of(b));
        for (std::size_t c = 0; c < n_; ++c) {
            if (std::find(pivots.begin(), pivots.end(), c) != pivots.end()) continue;
            GaloisVector v(n_, 0);
            v[c] = 1;
            for (std::size_t i = 0; i < basis_.size(); ++i)
                v[pivots[i]] = ((-basis_[i][c]) % p_ + p_) % p_;
            out.push_back(std::move(v));
        }
        return out;
    }

    static i64 mod_inv(i64 a, i64 p) {
        i64 t = 0, nt = 1, r = p, nr = ((a % p) + p) % p;
        while (nr) {
            const i64 q = r / nr;
            std::swap(t -= q * nt, nt);
            std::swap(r -= q * nr, nr);
        }
        return ((t % p) + p) % p;
    }

    static std::vector<GaloisVector> rref_mod_p(std::vector<GaloisVector> rows, i64 p) {
        std::vector<GaloisVector> basis;
        const std::size_t n = rows.empty() ? 0 : rows[0].size();
        std::size_t r = 0;
        for (std::size_t c = 0; c < n && r < rows.size(); ++c) {
            std::size_t sel = r;
            while (sel < rows.size() && rows[sel][c] == 0) ++sel;
            if (sel == rows.size()) continue;
            std::swap(rows[r], rows[sel]);
            const i64 inv = mod_inv(rows[r][c], p);
            for (auto& x : rows[r]) x = x * inv % p;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (i == r || rows[i][c] == 0) continue;
                const i64 f = rows[i][c];
                for (std::size_t j = 0; j < n; ++j)
                    rows[i][j] = ((rows[i][j] - f * rows[r][j]) % p + p) % p;
            }
            ++r;
        }
        rows.resize(r);
        return rows;
    }

private:
    static std::size_t pivot_of(const GaloisVector& b) {
        for (std::size_t j = 0; j < b.size(); ++j)
            if (b[j] != 0) return j;
        throw FieldError("zero basis row");
    }
    i64 p_ = 2;
    std::size_t n_ = 0;
    std::vector<GaloisVector> basis_;
};

class ExtensionField {
public:
    ExtensionField() = default;
    explicit ExtensionField(std::shared_ptr<const detail::ExtCore> core)
        : core_(std::move(core)) {}

    const GroundField& ground() const { return core_->ground; }
    i64 p() const { return core_->p; }
    std::size_t layer_count() const { return core_->n; }
    std::size_t degree() const { return core_->degree; }
    const std::vector<ExtensionLayerSpec>& layers() const { return core_->layers; }
    i64 generator_valuation(std::size_t i) const { return core_->gen_valuation[i]; }

    NElement zero() const {
        return NElement(core_,
                        std::vector<KElement>(core_->degree, ground().structural_zero()));
    }
    NElement one() const { return embed_ground(ground().one()); }
    NElement embed_ground(const KElement& a) const {
        std::vector<KElement> c(core_->degree, ground().structural_zero());
        c[0] = a;
        return NElement(core_, std::move(c));
    }
    NElement basis_element(std::size_t idx) const {
        std::vector<KElement> c(core_->degree, ground().structural_zero());
        c[idx] = ground().one();
        return NElement(core_, std::move(c));
    }
    NElement generator(std::size_t layer) const {
        std::size_t idx = 1;
        for (std::size_t i = 0; i < layer; ++i) idx *= static_cast<std::size_t>(core_->p);
        return basis_element(idx);
    }
    NElement from_coords(std::vector<KElement> c) const {
        if (c.size() != core_->degree) throw InputError("coordinate count mismatch");
        return NElement(core_, std::move(c));
    }

    NElement uniformizer() const { return NElement(core_, core_->pi_coords); }
    NElement uniformizer_inverse() const { return NElement(core_, core_->pi_inv_coords); }
    NElement uniformizer_power(i64 k) const {
        if (k >= 0) return pow_of(uniformizer(), k);
        return pow_of(uniformizer_inverse(), -k);
    }

    // v_N, normalized so v_N(pi_N) = 1; equals v_K(det M_y).
    std::optional<i64> n_valuation(const NElement& y) const {
        if (y.is_zero_to_precision()) return std::nullopt;
        const auto rows = mult_matrix(y);
        const auto res = eliminate_rows(ground(), rows);
        if (!res.completed) return std::nullopt;
        return res.det_valuation;
    }

    // Multiplication matrix of y: rows indexed by basis coordinate, columns by
    // multiplied basis element.
    std::vector<std::vector<KElement>> mult_matrix(const NElement& y) const {
        std::vector<std::vector<KElement>> rows(core_->degree);
        for (auto& r : rows) r.assign(core_->degree, ground().zero());
        for (std::size_t j = 0; j < core_->degree; ++j) {
            const NElement col = y * basis_element(j);
            for (std::size_t i = 0; i < core_->degree; ++i) rows[i][j] = col.coords()[i];
        }
        return rows;
    }

    NElement inverse(const NElement& y) const {
        auto rows = mult_matrix(y);
        std::vector<KElement> e0(core_->degree, ground().zero());
        e0[0] = ground().one();
        auto sol = solve_linear(ground(), std::move(rows), std::move(e0));
        if (!sol.solved) throw DivisionByZeroToPrecision(y.precision());
        return NElement(core_, std::move(sol.x));
    }

    NElement pow_of(const NElement& y, i64 e) const {
        if (e < 0) return pow_of(inverse(y), -e);
        NElement acc = one();
        NElement base = y;
        i64 k = e;
        while (k > 0) {
            if (k & 1) acc = acc * base;
            k >>= 1;
            if (k) base = base * base;
        }
        return acc;
    }

    // sigma_g with sigma_i(x_i) = zeta x_i (Kummer) / x_i + 1 (Artin-Schreier).
    NElement apply_galois(const GaloisVector& g, const NElement& y) const {
        if (g.size() != core_->n) throw InputError("automorphism vector length mismatch");
        std::vector<KElement> c = y.coords();
        const std::size_t p = static_cast<std::size_t>(core_->p);
        std::size_t stride = 1;
        for (std::size_t layer = 0; layer < core_->n; ++layer, stride *= p) {
            const i64 cc = ((g[layer] % core_->p) + core_->p) % core_->p;
            if (cc == 0) continue;
            const std::size_t block = stride * p;
            if (core_->layers[layer].kind == LayerKind::kummer) {
                for (std::size_t base = 0; base < core_->degree; base += block)
                    for (std::size_t off = 0; off < stride; ++off)
                        for (std::size_t j = 1; j < p; ++j) {
                            const std::size_t idx = base + off + j * stride;
                            c[idx] = c[idx] * core_->zeta_pow[(cc * j) % p];
                        }
            } else {
                std::vector<i64> cpow(p, 1);
                for (std::size_t t = 1; t < p; ++t) cpow[t] = cpow[t - 1] * cc % core_->p;
                std::vector<KElement> fiber(p, ground().zero());
                for (std::size_t base = 0; base < core_->degree; base += block)
                    for (std::size_t off = 0; off < stride; ++off) {
                        for (std::size_t j = 0; j < p; ++j)
                            fiber[j] = c[base + off + j * stride];
                        for (std::size_t t = 0; t < p; ++t) {
                            KElement acc = fiber[t];  // j = t term: C(t,t) c^0 = 1
                            for (std::size_t j = t + 1; j < p; ++j) {
                                const i64 coeff =
                                    core_->binom[j][t] * cpow[j - t] % core_->p;
                                if (coeff != 0) acc = acc + fiber[j].small_mul(coeff);
                            }
                            c[base + off + t * stride] = std::move(acc);
                        }
                    }
            }
        }
        return NElement(core_, std::move(c));
    }

    std::vector<GaloisVector> group_elements() const {
        Subgroup full = full_group();
        return full.elements();
    }
    Subgroup full_group() const {
        std::vector<GaloisVector> gens;
        for (std::size_t i = 0; i < core_->n; ++i) {
            GaloisVector g(core_->n, 0);
            g[i] = 1;
            gens.push_back(std::move(g));
        }
        return Subgroup::from_generators(core_->p, core_->n, gens);
    }

    NElement trace_to(const Subgroup& H, const NElement& y) const {
        NElement acc = zero();
        for (const auto& g : H.elements()) acc = acc + apply_galois(g, y);
        return acc;
    }
    KElement trace_to_ground(const NElement& y) const {
        const NElement t = trace_to(full_group(), y);
        return t.coords()[0];
    }
    std::optional<KElement> as_ground(const NElement& y) const {
        for (std::size_t i = 1; i < core_->degree; ++i)
            if (!y.coords()[i].is_zero_to_precision()) return std::nullopt;
        return y.coords()[0];
    }

    // Product of all conjugates; lands in K.
    KElement norm_to_ground(const NElement& y) const {
        NElement acc = y;
        for (const auto& g : group_elements()) {
            bool is_id = true;
            for (auto v : g)
                if (v) { is_id = false; break; }
            if (is_id) continue;
            acc = acc * apply_galois(g, y);
        }
        return acc.coords()[0];
    }

    // Residue of y / pi_N^{known_val} in F_p, via the norm: the residue of a
    // unit equals the residue of its norm because the residue field is F_p.
    i64 leading_residue(const NElement& y, i64 known_val) const {
        const NElement z = known_val ? y * uniformizer_power(-known_val) : y;
        const KElement nz = norm_to_ground(z);
        if (nz.is_zero_to_precision() || *nz.valuation() != 0)
            throw InputError("residue of a non-unit requested");
        return nz.leading_digit();
    }

    NElement random_unit(SplitMix64& rng) const {
        NElement acc = one();
        NElement piw = one();
        const i64 digits = std::min<i64>(ground().default_precision(), 16);
        for (i64 j = 1; j <= digits; ++j) {
            piw = piw * uniformizer();
            const i64 d = static_cast<i64>(rng.below(static_cast<u64>(core_->p)));
            if (d) acc = acc + piw.small_mul(d);
        }
        return acc;
    }
    NElement random_with_valuation(i64 v, SplitMix64& rng) const {
        return random_unit(rng) * uniformizer_power(v);
    }

    const std::shared_ptr<const detail::ExtCore>& core() const { return core_; }

private:
    std::shared_ptr<const detail::ExtCore> core_;
};

// --- construction ----------------------------------------------------------

namespace detail {

inline void build_mul_table(ExtCore& core) {
    const std::size_t p = static_cast<std::size_t>(core.p);
    const std::size_t deg = core.degree;
    core.table.assign(deg * deg, {});
    struct Partial {
        std::size_t idx = 0;
        bool unit = true;
        std::optional<KElement> coeff;
    };
    for (std::size_t a = 0; a < deg; ++a) {
        for (std::size_t b = 0; b < deg; ++b) {
            std::vector<Partial> parts{Partial{}};
            std::size_t scale = 1;
            for (std::size_t layer = 0; layer < core.n; ++layer, scale *= p) {
                const std::size_t ea = core.exponent(a, layer);
                const std::size_t eb = core.exponent(b, layer);
                const std::size_t e = ea + eb;
                std::vector<Partial> next;
                for (auto& part : parts) {
                    if (e < p) {
                        Partial q = part;
                        q.idx += e * scale;
                        next.push_back(std::move(q));
                    } else if (core.layers[layer].kind == LayerKind::kummer) {
                        Partial q = part;
                        q.idx += (e - p) * scale;
                        const KElement& u = core.layers[layer].datum;
                        q.coeff = q.coeff ? *q.coeff * u : u;
                        q.unit = false;
                        next.push_back(std::move(q));
                    } else {
                        // x^p = x + f: x^e = x^{e-p} (x + f)
                        Partial q1 = part;
                        q1.idx += (e - p + 1) * scale;
                        next.push_back(q1);
                        Partial q2 = part;
                        q2.idx += (e - p) * scale;
                        const KElement& f = core.layers[layer].datum;
                        q2.coeff = q2.coeff ? *q2.coeff * f : f;
                        q2.unit = false;
                        next.push_back(std::move(q2));
                    }
                }
                parts = std::move(next);
            }
            auto& terms = core.table[a * deg + b];
            for (auto& part : parts) {
                MulTerm t;
                t.idx = part.idx;
                t.unit_coeff = part.unit;
                if (!part.unit) t.coeff = *part.coeff;
                terms.push_back(std::move(t));
            }
        }
    }
}

inline std::pair<i64, std::vector<i64>> ext_gcd_chain(const std::vector<i64>& vals) {
    i64 g = 0;
    std::vector<i64> exps(vals.size(), 0);
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const i64 v = vals[i];
        if (v == 0) continue;
        if (g == 0) {
            g = std::abs(v);
            exps[i] = v > 0 ? 1 : -1;
            continue;
        }
        // extended gcd of (g, v)
        i64 old_r = g, r = v, old_s = 1, s = 0, old_t = 0, t = 1;
        while (r != 0) {
            const i64 q = old_r / r;
            i64 tmp = old_r - q * r; old_r = r; r = tmp;
            tmp = old_s - q * s; old_s = s; s = tmp;
            tmp = old_t - q * t; old_t = t; t = tmp;
        }
        i64 d = old_r, a = old_s, b = old_t;
        if (d < 0) { d = -d; a = -a; b = -b; }
        if (d == g) continue;  // no improvement, keep current combination
        for (auto& e : exps) e *= a;
        exps[i] += b;
        g = d;
    }
    return {g, exps};
}

}  // namespace detail

inline ExtensionField build_extension(const GroundField& F,
                                      const std::vector<ExtensionLayerSpec>& layers) {
    const auto report = validate_extension(F, layers);
    if (!report.ok) throw InputError("extension rejected: " + report.failure);

    auto core = std::make_shared<detail::ExtCore>();
    core->ground = F;
    core->layers = layers;
    core->p = F.p();
    core->n = layers.size();
    core->degree = 1;
    for (std::size_t i = 0; i < core->n; ++i)
        core->degree *= static_cast<std::size_t>(core->p);

    core->binom.assign(static_cast<std::size_t>(core->p),
                       std::vector<i64>(static_cast<std::size_t>(core->p), 0));
    for (std::size_t i = 0; i < static_cast<std::size_t>(core->p); ++i) {
        core->binom[i][0] = 1;
        for (std::size_t j = 1; j <= i; ++j)
            core->binom[i][j] =
                (core->binom[i - 1][j - 1] + core->binom[i - 1][j]) % core->p;
    }
    if (!layers.empty() && layers[0].kind == LayerKind::kummer) {
        core->zeta_pow.push_back(F.one());
        for (i64 k = 1; k < core->p; ++k)
            core->zeta_pow.push_back(core->zeta_pow.back() * F.zeta());
    }

    // v_N(x_i) = p^{n-1} v_K(datum): exact, since x_i^p equals the datum up
    // to the Artin-Schreier linear term of strictly larger valuation.
    i64 pn1 = 1;
    for (std::size_t i = 1; i < core->n; ++i) pn1 *= core->p;
    for (const auto& l : layers) {
        const i64 vk = *l.datum.valuation();
        core->gen_valuation.push_back(pn1 * vk);
    }

    detail::build_mul_table(*core);

    ExtensionField N(core);

    // --- uniformizer search: extend the exponent lattice of known valuations
    // with residue shifts and leading-digit cancellations until gcd 1.
    {
        struct Cand {
            NElement z;
            i64 v;
        };
        std::vector<Cand> cands;
        for (std::size_t i = 0; i < core->n; ++i)
            cands.push_back({N.generator(i), core->gen_valuation[i]});
        cands.push_back({N.embed_ground(F.uniformizer()), static_cast<i64>(core->degree)});

        auto current = [&]() {
            std::vector<i64> vals;
            for (const auto& c : cands) vals.push_back(c.v);
            return detail::ext_gcd_chain(vals);
        };

        auto build_power_combo = [&](const std::vector<i64>& exps) {
            NElement acc = N.one();
            for (std::size_t i = 0; i < cands.size() && i < exps.size(); ++i) {
                if (exps[i] == 0) continue;
                acc = acc * N.pow_of(cands[i].z, exps[i]);
            }
            return acc;
        };

        std::vector<KElement> pi_coords;
        for (int round = 0; round < 10; ++round) {
            auto [g, exps] = current();
            if (g == 1) {
                const NElement pi = build_power_combo(exps);
                const auto v = N.n_valuation(pi);
                if (!v || *v != 1)
                    throw ViolationError("uniformizer candidate fails its valuation check");
                pi_coords = pi.coords();
                break;
            }
            // normalize every candidate to a unit and cancel leading digits
            std::vector<std::pair<NElement, i64>> units;  // (unit, residue)
            for (const auto& c : cands) {
                std::vector<i64> shift_exps = exps;
                for (auto& e : shift_exps) e *= -c.v / g;
                NElement u = c.z * build_power_combo(shift_exps);
                if (u.is_zero_to_precision()) continue;
                const auto uv = N.n_valuation(u);
                if (!uv || *uv != 0) continue;
                const i64 r = N.leading_residue(u, 0);
                units.emplace_back(std::move(u), r);
            }
            std::vector<Cand> fresh;
            auto consider = [&](NElement y) {
                if (y.is_zero_to_precision()) return;
                const auto v = N.n_valuation(y);
                if (!v) return;
                for (const auto& c : cands)
                    if (c.v == *v && (c.z - y).is_zero_to_precision()) return;
                for (const auto& c : fresh)
                    if (c.v == *v && (c.z - y).is_zero_to_precision()) return;
                fresh.push_back({std::move(y), *v});
            };
            for (const auto& [u, r] : units)
                consider(u - N.embed_ground(F.from_int(r)));
            for (std::size_t i = 0; i < units.size(); ++i)
                for (std::size_t j = i + 1; j < units.size(); ++j)
                    consider(units[i].first.small_mul(units[j].second) -
                             units[j].first.small_mul(units[i].second));
            if (fresh.empty())
                throw ViolationError("uniformizer search exhausted its candidates");
            for (auto& c : fresh) {
                if (cands.size() < 48) cands.push_back(std::move(c));
            }
        }
        if (pi_coords.empty())
            throw ViolationError("uniformizer search did not converge");
        core->pi_coords = pi_coords;
        core->pi_inv_coords = N.inverse(NElement(core, pi_coords)).coords();
    }

    return N;
}

// --- intermediate fields ---------------------------------------------------

class IntermediateField {
public:
    IntermediateField() = default;

    const ExtensionField& field() const { return L_; }
    const Subgroup& subgroup() const { return H_; }
    const std::vector<NElement>& basis_in_parent() const { return basis_; }

    // Restriction of an automorphism of the parent to L.  Each layer of L is
    // indexed by an H-annihilating exponent line lam, and the restricted
    // action on that layer is the pairing <g, lam>.
    GaloisVector induced_action(const GaloisVector& g) const {
        const i64 p = L_.p();
        GaloisVector h(lambdas_.size(), 0);
        for (std::size_t s = 0; s < lambdas_.size(); ++s) {
            i64 acc = 0;
            for (std::size_t i = 0; i < g.size(); ++i)
                acc += g[i] * lambdas_[s][i];
            h[s] = ((acc % p) + p) % p;
        }
        return h;
    }

    NElement embed(const NElement& yL) const {
        NElement acc = parent_.zero();
        const auto& c = yL.coords();
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i].is_structural_zero()) continue;
            acc = acc + basis_[i].scalar_mul(c[i]);
        }
        return acc;
    }

    std::optional<NElement> section(const NElement& yN) const {
        const std::size_t m = parent_.degree();
        const std::size_t k = L_.degree();
        std::vector<std::vector<KElement>> A(m);
        for (std::size_t r = 0; r < m; ++r) {
            A[r].reserve(k);
            for (std::size_t c = 0; c < k; ++c) A[r].push_back(basis_[c].coords()[r]);
        }
        auto sol = solve_linear(parent_.ground(), std::move(A), yN.coords());
        if (!sol.solved) return std::nullopt;
        return L_.from_coords(std::move(sol.x));
    }

private:
    friend IntermediateField fixed_field(const ExtensionField&, const Subgroup&);
    ExtensionField parent_;
    ExtensionField L_;
    Subgroup H_;
    std::vector<NElement> basis_;
    std::vector<GaloisVector> lambdas_;
};

// Fixed field N^H.  The annihilator of H indexes the invariant layer data:
// Kummer lines give invariant monomials, Artin-Schreier lines give invariant
// linear combinations of the generators.
inline IntermediateField fixed_field(const ExtensionField& N, const Subgroup& H) {
    IntermediateField out;
    out.parent_ = N;
    out.H_ = H;
    const auto perp = H.annihilator_basis();
    out.lambdas_ = perp;
    const auto& F = N.ground();

    std::vector<ExtensionLayerSpec> lspecs;
    std::vector<NElement> gens;
    const bool kummer = !N.layers().empty() && N.layers()[0].kind == LayerKind::kummer;
    for (const auto& lam : perp) {
        if (kummer) {
            std::optional<KElement> u;
            std::size_t idx = 0, scale = 1;
            for (std::size_t i = 0; i < lam.size(); ++i) {
                if (lam[i]) {
                    const KElement t = N.layers()[i].datum.pow(lam[i]);
                    u = u ? *u * t : t;
                }
                idx += static_cast<std::size_t>(lam[i]) * scale;
                scale *= static_cast<std::size_t>(N.p());
            }
            lspecs.push_back({LayerKind::kummer, *u});
            gens.push_back(N.basis_element(idx));
        } else {
            std::optional<KElement> f;
            NElement g = N.zero();
            for (std::size_t i = 0; i < lam.size(); ++i) {
                if (!lam[i]) continue;
                const KElement t = N.layers()[i].datum.small_mul(lam[i]);
                f = f ? *f + t : t;
                g = g + N.generator(i).small_mul(lam[i]);
            }
            lspecs.push_back({LayerKind::artin_schreier, *f});
            gens.push_back(std::move(g));
        }
    }
    out.L_ = build_extension(F, lspecs);

    // embedded monomial basis of L
    out.basis_.reserve(out.L_.degree());
    for (std::size_t idx = 0; idx < out.L_.degree(); ++idx) {
        NElement acc = N.one();
        std::size_t q = idx;
        for (std::size_t s = 0; s < lspecs.size(); ++s) {
            const std::size_t e = q % static_cast<std::size_t>(N.p());
            q /= static_cast<std::size_t>(N.p());
            if (e) acc = acc * N.pow_of(gens[s], static_cast<i64>(e));
        }
        out.basis_.push_back(std::move(acc));
    }
    return out;
}

inline std::optional<i64> n_valuation(const ExtensionField& N, const NElement& y) {
    return N.n_valuation(y);
}
inline NElement apply_galois(const ExtensionField& N, const GaloisVector& g,
                             const NElement& y) {
    return N.apply_galois(g, y);
}
inline NElement trace_to(const ExtensionField& N, const Subgroup& H, const NElement& y) {
    return N.trace_to(H, y);
}

}  // namespace ramlab
